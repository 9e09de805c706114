#include "spl/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "spl/agents.hpp"
#include "spl/harness.hpp"
#include "spl/streams.hpp"

namespace spl {

namespace {

// ------------------------------------------------------------ check plumbing

struct Check {
  CheckResult r;
  int failures = 0;

  Check(std::string name, std::vector<std::string> ops) {
    r.name = std::move(name);
    r.ops_covered = std::move(ops);
    r.passed = true;
  }

  void fail(const std::string& why) {
    r.passed = false;
    if (failures < 3) {
      if (!r.detail.empty()) r.detail += "; ";
      r.detail += why;
    }
    ++failures;
  }

  CheckResult done(const std::string& pass_note = "") {
    if (r.passed) {
      r.detail = pass_note;
    } else if (failures > 3) {
      r.detail += " (+" + std::to_string(failures - 3) + " more)";
    }
    return r;
  }
};

std::string vec_str(const Vec& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += csv_num(v[i]);
  }
  return s + ")";
}

void expect_clean_audit(Check& c, const Transcript& t, const AuditOptions& ao,
                        const std::string& tag) {
  const AuditReport rep = audit_invariants(t, ao);
  for (const AuditViolation& v : rep.violations) {
    c.fail(tag + " round " + std::to_string(v.round) + " " + v.check + ": " + v.detail);
  }
}

int clamped_seeds(const VerifyOptions& opt) { return std::max(1, opt.seeds); }

double uniform01_from(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// ------------------------------------------------------------- seeded runs

Transcript run_fixture(const std::string& id, std::size_t rounds, LearnerKind kind,
                       double alpha, FaultInjection faults) {
  const Fixture fx = make_fixture(id, rounds);
  LearnerConfig lc;
  lc.kind = kind;
  lc.alpha = alpha;
  lc.zero_policy = fx.learner_start;
  lc.faults = faults;
  AgentConfig ac;
  ac.cost = fx.cost;
  StreamMeta meta;
  meta.source = id;
  meta.d = fx.records.empty() ? 0 : fx.records[0].z.size();
  meta.R = fx.R;
  if (fx.gamma > 0.0) meta.gamma = fx.gamma;
  meta.w_star = fx.w_star;
  meta.separable = fx.separable;
  return run_experiment(lc, ac, fx.records, rounds, meta);
}

struct L2Cell {
  std::size_t d = 2;
  double R = 1.0;
  double gamma = 0.5;
  double alpha_true = 0.5;
  double alpha_pub = 0.5;
  std::size_t rounds = 200;
};

// Configurations drawn from d in {2,5,10}, R in {1,5,10}, gamma in
// {0.1,0.5,1} with R >= 2*gamma so the margin constraint leaves room to
// sample, and alpha <= R.
L2Cell l2_cell(int i) {
  static constexpr std::size_t ds[] = {2, 5, 10};
  static constexpr double rs[] = {1.0, 5.0, 10.0};
  static constexpr double gs[] = {0.1, 0.5, 1.0};
  L2Cell c;
  c.d = ds[i % 3];
  c.R = rs[(i / 3) % 3];
  c.gamma = gs[(i / 9) % 3];
  if (c.R < 2.0 * c.gamma) c.gamma = 0.5;  // drop the degenerate R=1, gamma=1 cell
  c.alpha_true = (i % 2 ? 1.0 : 0.5) * c.R;
  c.alpha_pub = c.alpha_true;
  const double bound = (c.R + c.alpha_true) * (c.R + c.alpha_true) / (c.gamma * c.gamma);
  c.rounds = static_cast<std::size_t>(std::clamp(10.0 * bound, 60.0, 1500.0));
  return c;
}

Transcript run_l2_cell(const L2Cell& c, std::uint64_t seed, FaultInjection faults,
                       GeneratedStream* out_stream = nullptr) {
  StreamSpec ss;
  ss.d = c.d;
  ss.R = c.R;
  ss.gamma = c.gamma;
  ss.length = c.rounds;
  ss.seed = seed;
  GeneratedStream gs = generate_separable_stream(ss);

  LearnerConfig lc;
  lc.kind = LearnerKind::StrategicL2;
  lc.alpha = c.alpha_pub;
  lc.faults = faults;
  AgentConfig ac;
  ac.cost = L2Cost{c.alpha_true};
  StreamMeta meta;
  meta.source = "generated";
  meta.d = c.d;
  meta.R = c.R;
  meta.gamma = c.gamma;
  meta.w_star = gs.w_star;
  meta.separable = true;
  Transcript t = run_experiment(lc, ac, gs.records, c.rounds, meta);
  if (out_stream != nullptr) *out_stream = std::move(gs);
  return t;
}

struct L1Cell {
  std::size_t d = 2;
  double R = 1.0;
  double gamma = 0.25;
  std::vector<double> alphas;
  std::size_t rounds = 200;
};

L1Cell l1_cell(int i) {
  static constexpr std::size_t ds[] = {2, 3, 6};
  static constexpr double rs[] = {1.0, 2.0, 5.0};
  static constexpr double gs[] = {0.25, 0.5, 1.0};
  L1Cell c;
  c.d = ds[i % 3];
  c.R = rs[(i / 3) % 3];
  c.gamma = gs[(i / 9) % 3];
  if (c.R < 2.0 * c.gamma) c.gamma = c.R / 2.0;
  const double a = c.R / 2.0;
  c.alphas.assign(c.d, a);
  for (std::size_t j = 1; j < c.d; j += 2) c.alphas[j] = a / 2.0;
  if (c.d >= 3) c.alphas[c.d - 1] = 0.0;  // keep one unmovable coordinate in play
  const double amax = a;
  const double bound =
      (1.0 + (static_cast<double>(c.d) + 1.0) * (c.R + amax) * (c.R + amax)) /
      (c.gamma * c.gamma);
  c.rounds = static_cast<std::size_t>(std::clamp(10.0 * bound, 60.0, 1200.0));
  return c;
}

Transcript run_l1_cell(const L1Cell& c, std::uint64_t seed, FaultInjection faults) {
  StreamSpec ss;
  ss.d = c.d;
  ss.R = c.R;
  ss.gamma = c.gamma;
  ss.length = c.rounds;
  ss.seed = seed;
  ss.nonneg_w_star = true;
  GeneratedStream gs = generate_separable_stream(ss);

  LearnerConfig lc;
  lc.kind = LearnerKind::StrategicL1;
  lc.alphas = c.alphas;
  lc.R = c.R;
  lc.faults = faults;
  AgentConfig ac;
  ac.cost = WeightedL1Cost{c.alphas};
  StreamMeta meta;
  meta.source = "generated";
  meta.d = c.d;
  meta.R = c.R;
  meta.gamma = c.gamma;
  meta.w_star = gs.w_star;
  meta.separable = true;
  return run_experiment(lc, ac, gs.records, c.rounds, meta);
}

struct UnknownCell {
  std::size_t d = 2;
  double R = 1.0;
  double gamma = 0.5;
  double alpha_true = 0.5;
  std::size_t rounds = 4000;
};

// R = 2*gamma keeps the doubling chain 0 -> gamma/2 -> gamma -> 2*gamma
// within the event budget for every hidden alpha in [gamma/2, R].
UnknownCell unknown_cell(int i, std::uint64_t seed) {
  static constexpr double gs[] = {0.5, 1.0};
  static constexpr std::size_t ds[] = {2, 3};
  UnknownCell c;
  c.gamma = gs[i % 2];
  c.R = 2.0 * c.gamma;
  c.d = ds[(i / 2) % 2];
  const double u = uniform01_from(seed * 0x9e3779b97f4a7c15ULL + 0x12345);
  c.alpha_true = c.gamma / 2.0 + u * (c.R - c.gamma / 2.0);
  return c;
}

Transcript run_unknown_cell(const UnknownCell& c, std::uint64_t seed, FaultInjection faults) {
  StreamSpec ss;
  ss.d = c.d;
  ss.R = c.R;
  ss.gamma = c.gamma;
  ss.length = c.rounds;
  ss.seed = seed;
  GeneratedStream gs = generate_separable_stream(ss);

  LearnerConfig lc;
  lc.kind = LearnerKind::UnknownL2;
  lc.R = c.R;
  lc.gamma = c.gamma;
  lc.faults = faults;
  AgentConfig ac;
  ac.cost = L2Cost{c.alpha_true};
  StreamMeta meta;
  meta.source = "generated";
  meta.d = c.d;
  meta.R = c.R;
  meta.gamma = c.gamma;
  meta.w_star = gs.w_star;
  meta.separable = true;
  return run_experiment(lc, ac, gs.records, c.rounds, meta);
}

// ---------------------------------------------------------- fixtures suite

CheckResult check_classic_cycles(const VerifyOptions& opt) {
  Check c("classic-cycles-under-manipulation", {"classic_step", "best_response_l2"});
  // opener + first no-move round + 100 full two-point cycles
  const std::size_t rounds = 202;
  for (const std::string id : {"example1-footnote", "example1"}) {
    const Transcript t = run_fixture(id, rounds, LearnerKind::Classic, 0.0, opt.faults);
    if (t.total_mistakes != 201) {
      c.fail(id + ": " + std::to_string(t.total_mistakes) + " mistakes, expected 201");
    }
    const auto cyc = detect_cycle(t, 8);
    if (!cyc || *cyc != 2) {
      c.fail(id + ": weight cycle period " + (cyc ? std::to_string(*cyc) : "none") +
             ", expected 2");
    }
    if (t.rounds.size() != rounds) {
      c.fail(id + ": truncated run");
      continue;
    }
    if (t.rounds[1].mistake) c.fail(id + ": round 1 should be classified correctly");
    for (std::size_t i = 2; i < rounds; ++i) {
      if (!t.rounds[i].mistake) {
        c.fail(id + ": round " + std::to_string(i) + " unexpectedly correct");
        break;
      }
    }
  }
  return c.done("both openers converge into the two-classifier loop");
}

CheckResult check_fixture_repair(const VerifyOptions& opt) {
  Check c("shifted-threshold-fixes-cycle",
          {"strategic_l2_step", "surrogate_l2", "best_response_l2"});
  const std::size_t rounds = 10000;
  const Transcript t =
      run_fixture("example1-footnote", rounds, LearnerKind::StrategicL2, 0.5, opt.faults);
  if (t.total_mistakes > 44) {
    c.fail("made " + std::to_string(t.total_mistakes) + " mistakes, bound 44");
  }
  std::size_t last_mistake = 0;
  for (const RoundRecord& r : t.rounds) {
    if (r.mistake) last_mistake = r.t;
  }
  if (last_mistake >= 1000) {
    c.fail("still making mistakes at round " + std::to_string(last_mistake));
  }
  expect_clean_audit(c, t, {}, "audit");
  if (!check_forbidden_region(t).empty()) c.fail("observed points inside the dead band");
  const BoundCheck b = check_mistake_bound(t, "l2-known");
  if (!b.holds) c.fail("mistake bound violated");
  return c.done("converges after " + std::to_string(t.total_mistakes) + " mistakes");
}

CheckResult check_spiral_trajectory(const VerifyOptions& opt) {
  Check c("inseparable-fixture-exact-trajectory",
          {"strategic_l2_step", "surrogate_l2", "best_response_l2"});
  const std::size_t rounds = 401;  // opener + 100 four-point cycles
  const Transcript t =
      run_fixture("example2", rounds, LearnerKind::StrategicL2, 5.0, opt.faults);

  const std::vector<Vec> expect_w = {
      {-4.0, -3.0}, {-7.0, 1.0}, {-4.0, 3.0}, {-7.0, -1.0}, {-4.0, -3.0}};
  for (std::size_t i = 0; i < expect_w.size() && i < t.rounds.size(); ++i) {
    if (t.rounds[i].w_after != expect_w[i]) {
      c.fail("round " + std::to_string(i) + " w = " + vec_str(t.rounds[i].w_after) +
             ", expected " + vec_str(expect_w[i]));
    }
  }
  const Vec expect_x1 = {3.0, -4.0};
  const Vec expect_x3 = {3.0, 4.0};
  if (t.rounds.size() > 3) {
    if (!t.rounds[1].x_tilde || *t.rounds[1].x_tilde != expect_x1) {
      c.fail("round 1 update point is not (3, -4)");
    }
    if (!t.rounds[3].x_tilde || *t.rounds[3].x_tilde != expect_x3) {
      c.fail("round 3 update point is not (3, 4)");
    }
  }
  if (t.total_mistakes != rounds) {
    c.fail(std::to_string(t.total_mistakes) + " mistakes over " + std::to_string(rounds) +
           " rounds, expected a mistake every round");
  }
  const auto cyc = detect_cycle(t, 8);
  if (!cyc || *cyc != 4) {
    c.fail("weight cycle period " + (cyc ? std::to_string(*cyc) : "none") + ", expected 4");
  }
  return c.done("narrated weights and update points reproduced bit-exactly");
}

CheckResult check_fixture_metadata(const VerifyOptions&) {
  Check c("fixture-metadata-certified", {});
  for (const std::string id : {"example1", "example1-footnote"}) {
    const Fixture fx = make_fixture(id, 9);
    if (!fx.w_star || !fx.separable) {
      c.fail(id + ": missing separator certificate");
      continue;
    }
    double max_norm = 0.0;
    for (const StreamRecord& rec : fx.records) {
      const double v = dot(rec.z, *fx.w_star) * label_sign(rec.label);
      if (!(v >= 1.0 - 1e-12)) {
        c.fail(id + ": certified separator misses " + vec_str(rec.z));
      }
      max_norm = std::max(max_norm, norm(rec.z));
    }
    if (!nearly_equal(max_norm, fx.R)) c.fail(id + ": R does not match the stream");
    if (!nearly_equal(fx.gamma, 1.0 / norm(*fx.w_star))) {
      c.fail(id + ": gamma does not match the separator norm");
    }
  }
  const Fixture f2 = make_fixture("example2", 5);
  if (f2.separable) c.fail("example2 is marked separable");
  if (f2.w_star) {
    int misses = 0;
    for (const StreamRecord& rec : f2.records) {
      if (label_sign(rec.label) * dot(rec.z, *f2.w_star) < 1.0 - 1e-12) ++misses;
    }
    if (misses != 1) {
      c.fail("reference separator misses " + std::to_string(misses) + " points, expected 1");
    }
  }
  return c.done();
}

// ------------------------------------------------------------ step-properties suite

CheckResult check_l2_audits(const VerifyOptions& opt) {
  Check c("l2-run-audits-clean", {"strategic_l2_step", "surrogate_l2", "best_response_l2"});
  const int n = clamped_seeds(opt);
  for (int i = 0; i < n; ++i) {
    const L2Cell cell = l2_cell(i);
    const Transcript t = run_l2_cell(cell, 0xA11CE000 + i, opt.faults);
    expect_clean_audit(c, t, {}, "run " + std::to_string(i));
    if (!check_forbidden_region(t).empty()) {
      c.fail("run " + std::to_string(i) + ": dead-band observations");
    }
    if (c.failures > 8) break;
  }
  // byte-level determinism of a full rerun
  const Transcript a = run_l2_cell(l2_cell(0), 0xA11CE000, opt.faults);
  std::string why;
  if (!replay_matches(a, &why)) c.fail("replay diverged: " + why);
  return c.done("audits clean over " + std::to_string(n) + " seeded runs");
}

CheckResult check_l1_audits(const VerifyOptions& opt) {
  Check c("l1-run-audits-clean",
          {"strategic_l1_step", "surrogate_l1", "correction_step", "tie_break",
           "best_response_weighted_l1"});
  const int n = clamped_seeds(opt);
  for (int i = 0; i < n; ++i) {
    const L1Cell cell = l1_cell(i);
    const Transcript t = run_l1_cell(cell, 0xB11D0000 + i, opt.faults);
    expect_clean_audit(c, t, {}, "run " + std::to_string(i));
    if (!check_forbidden_region(t).empty()) {
      c.fail("run " + std::to_string(i) + ": dead-band observations");
    }
    if (c.failures > 8) break;
  }
  return c.done("audits clean over " + std::to_string(n) + " seeded runs");
}

CheckResult check_negative_coordinate_corrected(const VerifyOptions& opt) {
  Check c("negative-coordinate-corrected", {"correction_step", "strategic_l1_step"});
  // single positive point whose update would leave w = (-2, 3)
  std::vector<StreamRecord> stream = {{{-2.0, 3.0}, Label::Positive}};
  LearnerConfig lc;
  lc.kind = LearnerKind::StrategicL1;
  lc.alphas = {1.0, 1.0};
  lc.R = 4.0;
  lc.zero_policy = ZeroWeightPolicy::PredictNegative;
  lc.faults = opt.faults;
  AgentConfig ac;
  ac.cost = WeightedL1Cost{{1.0, 1.0}};
  const Transcript t = run_experiment(lc, ac, stream, 1, {});
  if (t.rounds.size() != 1 || !t.rounds[0].mistake) {
    c.fail("expected one mistake round");
    return c.done();
  }
  const RoundRecord& r = t.rounds[0];
  const std::vector<double> want_mus = {2.0, 0.0};
  if (!r.correction_mus || *r.correction_mus != want_mus) {
    c.fail("correction shifts are " +
           (r.correction_mus ? vec_str(*r.correction_mus) : std::string("absent")) +
           ", expected (2, 0)");
  }
  if (r.w_after.size() == 2) {
    if (r.w_after[0] != 0.0) {
      c.fail("negative coordinate survived: w = " + vec_str(r.w_after));
    }
    if (!(r.w_after[1] > 3.0)) c.fail("direction nudge missing: w = " + vec_str(r.w_after));
  }
  expect_clean_audit(c, t, {}, "audit");
  return c.done();
}

CheckResult check_tie_break_strict(const VerifyOptions& opt) {
  Check c("tie-broken-direction-strict", {"tie_break", "strategic_l1_step"});
  // equal budgets and a symmetric first update force an exact gain tie
  std::vector<StreamRecord> stream = {{{1.0, 1.0}, Label::Positive}};
  LearnerConfig lc;
  lc.kind = LearnerKind::StrategicL1;
  lc.alphas = {1.0, 1.0};
  lc.R = 2.0;
  lc.zero_policy = ZeroWeightPolicy::PredictNegative;
  lc.faults = opt.faults;
  AgentConfig ac;
  ac.cost = WeightedL1Cost{{1.0, 1.0}};
  const Transcript t = run_experiment(lc, ac, stream, 1, {});
  if (t.rounds.size() != 1 || !t.rounds[0].mistake) {
    c.fail("expected one mistake round");
    return c.done();
  }
  const RoundRecord& r = t.rounds[0];
  const double eta_want = 1.0 / (8.0 * (2.0 + 1.0) + 2.0);  // |w_pre| = 0
  if (!r.eta || !nearly_equal(*r.eta, eta_want)) {
    c.fail("eta is " + (r.eta ? csv_num(*r.eta) : std::string("absent")) + ", expected " +
           csv_num(eta_want));
  }
  if (r.w_after.size() == 2 && !(r.w_after[0] > r.w_after[1])) {
    c.fail("tied gains were not broken: w = " + vec_str(r.w_after));
  }
  expect_clean_audit(c, t, {}, "audit");
  return c.done();
}

CheckResult check_paid_moves_recoverable(const VerifyOptions& opt) {
  Check c("paid-moves-recoverable", {"surrogate_l2", "surrogate_l1"});
  std::size_t qualifying = 0;
  const auto scan = [&](const Transcript& t, const std::string& tag, bool require) {
    std::size_t found = 0;
    for (const RoundRecord& r : t.rounds) {
      if (!r.mistake || r.truth != Label::Negative || !r.x_tilde) continue;
      if (!nearly_equal(r.agent_cost, 1.0)) continue;
      // a full-budget mover's pre-move point is exactly what the update uses
      ++found;
      for (std::size_t j = 0; j < r.z.size(); ++j) {
        if (std::abs((*r.x_tilde)[j] - r.z[j]) > 1e-6) {
          c.fail(tag + " round " + std::to_string(r.t) + ": update point " +
                 vec_str(*r.x_tilde) + " does not recover " + vec_str(r.z));
          return found;
        }
      }
    }
    if (require && found == 0) c.fail(tag + ": expected a full-budget mover");
    return found;
  };
  // constructed probes: the opener plants w on the first axis, then a negative
  // sits exactly one budget below the threshold, so it spends everything
  const std::vector<StreamRecord> probe = {{{2.0, 0.0}, Label::Positive},
                                           {{0.0, 3.0}, Label::Negative}};
  {
    LearnerConfig lc;
    lc.kind = LearnerKind::StrategicL2;
    lc.alpha = 1.0;
    lc.zero_policy = ZeroWeightPolicy::PredictNegative;
    lc.faults = opt.faults;
    AgentConfig ac;
    ac.cost = L2Cost{1.0};
    qualifying += scan(run_experiment(lc, ac, probe, probe.size(), {}), "l2 probe", true);
  }
  {
    LearnerConfig lc;
    lc.kind = LearnerKind::StrategicL1;
    lc.alphas = {2.0, 1.0};
    lc.R = 3.0;
    lc.zero_policy = ZeroWeightPolicy::PredictNegative;
    lc.faults = opt.faults;
    AgentConfig ac;
    ac.cost = WeightedL1Cost{{2.0, 1.0}};
    qualifying += scan(run_experiment(lc, ac, probe, probe.size(), {}), "l1 probe", true);
  }
  // seeded runs rarely produce an exact full spender; validate any that appear
  for (int i = 0; i < std::min(6, clamped_seeds(opt)); ++i) {
    qualifying +=
        scan(run_l2_cell(l2_cell(i), 0xCAFE00 + i, opt.faults), "l2 run " + std::to_string(i), false);
    qualifying +=
        scan(run_l1_cell(l1_cell(i), 0xCAFE40 + i, opt.faults), "l1 run " + std::to_string(i), false);
  }
  return c.done(std::to_string(qualifying) + " full-budget movers recovered");
}

CheckResult check_dead_band_flagged(const VerifyOptions& opt) {
  Check c("dead-band-points-flagged", {"surrogate_l2"});
  // replayed (irrational) observation strictly inside (0, alpha)
  std::vector<StreamRecord> observed = {{{-2.0, 0.0}, Label::Negative},
                                        {{0.5, 0.0}, Label::Positive}};
  LearnerConfig lc;
  lc.kind = LearnerKind::StrategicL2;
  lc.alpha = 1.0;
  lc.faults = opt.faults;
  AgentConfig ac;
  ac.kind = AgentKind::Replay;
  ac.cost = L2Cost{1.0};
  const Transcript t = run_experiment(lc, ac, observed, observed.size(), {});
  if (t.rounds.size() != 2) {
    c.fail("expected two rounds");
    return c.done();
  }
  if (!t.rounds[1].rationality_flag) {
    c.fail("in-band observation was not flagged");
  }
  const auto bad = check_forbidden_region(t);
  if (bad != std::vector<std::size_t>{1}) {
    c.fail("forbidden-region scan found " + std::to_string(bad.size()) +
           " rounds, expected exactly round 1");
  }
  return c.done();
}

CheckResult check_window_published_budget(const VerifyOptions& opt) {
  Check c("window-published-budget",
          {"mistake_budget", "strategic_l2_step", "surrogate_l2", "best_response_l2"});
  const int n = clamped_seeds(opt);
  for (int i = 0; i < n; ++i) {
    L2Cell cell = l2_cell(i);
    cell.alpha_pub = cell.alpha_true - cell.gamma / 4.0;  // within gamma/2 under the truth
    if (cell.alpha_pub < 0.0) continue;
    const Transcript t = run_l2_cell(cell, 0xD00D00 + i, opt.faults);
    expect_clean_audit(c, t, {}, "run " + std::to_string(i));
    const long long budget = mistake_budget(cell.R, cell.alpha_pub, cell.gamma);
    if (static_cast<long long>(t.total_mistakes) > budget) {
      c.fail("run " + std::to_string(i) + ": " + std::to_string(t.total_mistakes) +
             " mistakes exceed the per-phase budget " + std::to_string(budget));
    }
    if (c.failures > 8) break;
  }
  return c.done("half-margin guarantees hold under an underestimated budget");
}

CheckResult check_oracle_agreement(const VerifyOptions& opt) {
  Check c("responders-match-grid-oracle",
          {"best_response_l2", "best_response_weighted_l1", "brute_force_best_response",
           "manipulation_cost"});
  std::mt19937_64 rng(0x0ACC0DE5EEDULL);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::uniform_real_distribution<double> zcoord(-3.0, 3.0);
  std::uniform_real_distribution<double> adist(0.3, 2.0);
  std::uniform_real_distribution<double> tdist(0.0, 2.0);
  const double tol = 5e-7;  // grid resolution slack on utility comparisons
  const int per_model = std::max(30, clamped_seeds(opt) * 3 / 2);

  const auto compare = [&](const DecisionRule& rule, const CostModel& model, const Vec& z,
                           const Manipulation& m, double amax, const std::string& tag) {
    if (m.moved) {
      const double paid = manipulation_cost(model, z, m.x);
      if (!nearly_equal(paid, m.cost, 1e-7)) {
        c.fail(tag + ": reported cost " + csv_num(m.cost) + " but the model charges " +
               csv_num(paid));
      }
      if (m.cost > 1.0 + kEpsEq) c.fail(tag + ": moved at cost " + csv_num(m.cost));
    }
    const double step = opt.oracle_step > 0.0 ? opt.oracle_step : amax / 200.0;
    const double radius = opt.oracle_radius > 0.0 ? opt.oracle_radius : 1.05 * amax;
    const double u_fast = agent_utility(rule, model, z, m.x);
    const Vec best = brute_force_best_response(z, rule, model, step, radius);
    const double u_grid = agent_utility(rule, model, z, best);
    if (u_fast + tol < u_grid) {
      c.fail(tag + ": grid found utility " + csv_num(u_grid) + " > " + csv_num(u_fast));
    }
    if (u_fast > u_grid + tol) {
      c.fail(tag + ": claimed utility " + csv_num(u_fast) + " unreachable on the grid (" +
             csv_num(u_grid) + ")");
    }
  };

  for (int i = 0; i < per_model && c.failures <= 8; ++i) {
    Vec w = {coord(rng), coord(rng)};
    while (norm(w) < 0.3) w = {coord(rng), coord(rng)};
    const Vec z = {zcoord(rng), zcoord(rng)};
    const DecisionRule rule = DecisionRule::make(w, tdist(rng) * norm(w));

    const double alpha = adist(rng);
    const CostModel l2 = L2Cost{alpha};
    compare(rule, l2, z, best_response_l2(z, rule, alpha), alpha,
            "l2 instance " + std::to_string(i));

    std::vector<double> alphas = {adist(rng), adist(rng)};
    if (i % 3 == 0) alphas[1] = 0.0;  // keep unmovable coordinates exercised
    const CostModel l1 = WeightedL1Cost{alphas};
    compare(rule, l1, z, best_response_weighted_l1(z, rule, alphas),
            std::max(alphas[0], alphas[1]),
            "weighted instance " + std::to_string(i));
  }
  return c.done(std::to_string(per_model) + " instances per model agree with the oracle");
}

// ------------------------------------------------------------ bounds suite

CheckResult check_l2_bounds(const VerifyOptions& opt) {
  Check c("l2-mistake-bounds-hold",
          {"strategic_l2_step", "surrogate_l2", "best_response_l2"});
  const int n = clamped_seeds(opt);
  for (int i = 0; i < n; ++i) {
    const Transcript t = run_l2_cell(l2_cell(i), 0xB0000 + i, opt.faults);
    const BoundCheck b = check_mistake_bound(t, "l2-known");
    if (!b.holds) {
      c.fail("run " + std::to_string(i) + ": " + std::to_string(b.observed) +
             " mistakes exceed " + csv_num(b.bound));
    }
    if (!check_forbidden_region(t).empty()) {
      c.fail("run " + std::to_string(i) + ": dead-band observations");
    }
  }
  return c.done(std::to_string(n) + " runs within the known-budget bound");
}

CheckResult check_l1_bounds(const VerifyOptions& opt) {
  Check c("l1-mistake-bounds-hold",
          {"strategic_l1_step", "surrogate_l1", "correction_step", "tie_break",
           "best_response_weighted_l1"});
  const int n = clamped_seeds(opt);
  for (int i = 0; i < n; ++i) {
    const Transcript t = run_l1_cell(l1_cell(i), 0xB1000 + i, opt.faults);
    const BoundCheck b = check_mistake_bound(t, "l1-known");
    if (!b.holds) {
      c.fail("run " + std::to_string(i) + ": " + std::to_string(b.observed) +
             " mistakes exceed " + csv_num(b.bound));
    }
  }
  return c.done(std::to_string(n) + " runs within the weighted-budget bound");
}

CheckResult check_unknown_search(const VerifyOptions& opt) {
  Check c("budget-search-settles",
          {"unknown_cost_controller_step", "mistake_budget", "strategic_l2_step",
           "surrogate_l2", "best_response_l2"});
  const int n = clamped_seeds(opt);
  for (int i = 0; i < n; ++i) {
    const UnknownCell cell = unknown_cell(i, 0xE0000 + i);
    const Transcript t = run_unknown_cell(cell, 0xE0000 + i, opt.faults);
    const UnknownRunCheck u = check_unknown_run(t, cell.alpha_true);
    if (!u.ok) {
      c.fail("run " + std::to_string(i) + " (alpha " + csv_num(cell.alpha_true) +
             "): " + (u.problems.empty() ? "unspecified" : u.problems.front()));
    }
    const BoundCheck b = check_mistake_bound(t, "unknown-total");
    if (!b.holds) {
      c.fail("run " + std::to_string(i) + ": total mistakes " + std::to_string(b.observed) +
             " exceed " + csv_num(b.bound));
    }
    expect_clean_audit(c, t, {}, "run " + std::to_string(i));
    if (c.failures > 8) break;
  }
  return c.done(std::to_string(n) + " searches within event and mistake budgets");
}

CheckResult check_single_direction_line(const VerifyOptions& opt) {
  Check c("single-direction-matches-line-search",
          {"unknown_cost_l1_single_direction_step", "unknown_cost_controller_step"});
  const int n = std::min(clamped_seeds(opt), 12);
  for (int i = 0; i < n; ++i) {
    const double gamma = i % 2 ? 1.0 : 0.5;
    const double R = 2.0 * gamma;
    const double u = uniform01_from(0xF0F0 + i);
    const double alpha = gamma / 2.0 + u * (R - gamma / 2.0);

    StreamSpec ss;
    ss.d = 1;
    ss.R = R;
    ss.gamma = gamma;
    ss.length = 2500;
    ss.seed = 0xF1F1F1 + i;
    ss.nonneg_w_star = true;
    const GeneratedStream gs = generate_separable_stream(ss);
    StreamMeta meta;
    meta.source = "generated";
    meta.d = 1;
    meta.R = R;
    meta.gamma = gamma;
    meta.w_star = gs.w_star;
    meta.separable = true;

    LearnerConfig l2cfg;
    l2cfg.kind = LearnerKind::UnknownL2;
    l2cfg.R = R;
    l2cfg.gamma = gamma;
    l2cfg.faults = opt.faults;
    AgentConfig l2agent;
    l2agent.cost = L2Cost{alpha};
    const Transcript a = run_experiment(l2cfg, l2agent, gs.records, ss.length, meta);

    LearnerConfig l1cfg;
    l1cfg.kind = LearnerKind::UnknownL1Single;
    l1cfg.R = R;
    l1cfg.gamma = gamma;
    l1cfg.faults = opt.faults;
    AgentConfig l1agent;
    l1agent.cost = WeightedL1Cost{{alpha}};
    const Transcript b = run_experiment(l1cfg, l1agent, gs.records, ss.length, meta);

    for (std::size_t k = 0; k < a.rounds.size(); ++k) {
      const RoundRecord& ra = a.rounds[k];
      const RoundRecord& rb = b.rounds[k];
      const bool same = ra.prediction == rb.prediction && ra.mistake == rb.mistake &&
                        ra.event == rb.event && ra.phase == rb.phase &&
                        ra.alpha_published == rb.alpha_published &&
                        nearly_equal(ra.w_after[0], rb.w_after[0]);
      if (!same) {
        c.fail("seed " + std::to_string(i) + " diverges at round " + std::to_string(k));
        break;
      }
    }
    const UnknownRunCheck u1 = check_unknown_run(b, alpha);
    if (!u1.ok) c.fail("seed " + std::to_string(i) + ": " + (u1.problems.empty() ? "unspecified" : u1.problems.front()));
    if (c.failures > 8) break;
  }
  return c.done("one-dimensional searches coincide step for step");
}

CheckResult check_single_direction_axis(const VerifyOptions& opt) {
  Check c("single-direction-movers-stay-on-axis",
          {"unknown_cost_l1_single_direction_step", "best_response_weighted_l1",
           "mistake_budget"});
  const int n = clamped_seeds(opt);
  for (int i = 0; i < n; ++i) {
    const double gamma = i % 2 ? 1.0 : 0.5;
    const double R = 2.0 * gamma;
    const double u = uniform01_from(0xAB00 + i);
    const double alpha = gamma / 2.0 + u * (R - gamma / 2.0);

    StreamSpec ss;
    ss.d = 3;
    ss.R = R;
    ss.gamma = gamma;
    ss.length = 3000;
    ss.seed = 0xABCD00 + i;
    ss.nonneg_w_star = true;
    const GeneratedStream gs = generate_separable_stream(ss);
    StreamMeta meta;
    meta.source = "generated";
    meta.d = 3;
    meta.R = R;
    meta.gamma = gamma;
    meta.w_star = gs.w_star;
    meta.separable = true;

    LearnerConfig lc;
    lc.kind = LearnerKind::UnknownL1Single;
    lc.R = R;
    lc.gamma = gamma;
    lc.faults = opt.faults;
    AgentConfig ac;
    ac.cost = WeightedL1Cost{{alpha, 0.0, 0.0}};
    const Transcript t = run_experiment(lc, ac, gs.records, ss.length, meta);

    for (const RoundRecord& r : t.rounds) {
      for (std::size_t j = 1; j < r.x.size(); ++j) {
        if (r.x[j] != r.z[j]) {
          c.fail("run " + std::to_string(i) + " round " + std::to_string(r.t) +
                 ": movement off the paid axis");
          break;
        }
      }
    }
    const UnknownRunCheck uc = check_unknown_run(t, alpha);
    if (!uc.ok) c.fail("run " + std::to_string(i) + ": " + (uc.problems.empty() ? "unspecified" : uc.problems.front()));
    expect_clean_audit(c, t, {}, "run " + std::to_string(i));
    if (c.failures > 8) break;
  }
  return c.done(std::to_string(n) + " single-axis searches within budget");
}

CheckResult check_budget_formula(const VerifyOptions&) {
  Check c("phase-budget-formula", {"mistake_budget"});
  if (mistake_budget(1.0, 0.0, 1.0) != 9) c.fail("budget(1, 0, 1) != 9");
  if (mistake_budget(1.0, 0.0, 2.0) != 4) c.fail("budget(1, 0, 2) != 4");
  for (int i = 0; i + 1 < 8; ++i) {
    const double a = 0.25 * i;
    if (mistake_budget(2.0, a, 0.5) > mistake_budget(2.0, a + 0.25, 0.5)) {
      c.fail("budget not monotone in the estimate");
    }
    if (mistake_budget(1.0 + a, 1.0, 0.5) > mistake_budget(1.25 + a, 1.0, 0.5)) {
      c.fail("budget not monotone in R");
    }
    if (mistake_budget(2.0, 1.0, 0.5 + 0.25 * i) < mistake_budget(2.0, 1.0, 0.75 + 0.25 * i)) {
      c.fail("budget not antitone in gamma");
    }
  }
  return c.done();
}

// --------------------------------------------------------------- manifest

const std::vector<std::string>& required_ops() {
  static const std::vector<std::string> ops = {
      "best_response_l2",
      "best_response_weighted_l1",
      "manipulation_cost",
      "brute_force_best_response",
      "classic_step",
      "surrogate_l2",
      "strategic_l2_step",
      "correction_step",
      "tie_break",
      "surrogate_l1",
      "strategic_l1_step",
      "mistake_budget",
      "unknown_cost_controller_step",
      "unknown_cost_l1_single_direction_step",
  };
  return ops;
}

CheckResult check_coverage(const std::vector<CheckResult>& sofar) {
  Check c("operation-coverage-manifest", {});
  std::set<std::string> seen;
  for (const CheckResult& r : sofar) {
    seen.insert(r.ops_covered.begin(), r.ops_covered.end());
  }
  std::string missing;
  for (const std::string& op : required_ops()) {
    if (!seen.count(op)) missing += (missing.empty() ? "" : ", ") + op;
  }
  if (!missing.empty()) c.fail("uncovered operations: " + missing);
  return c.done("every agent and learner operation exercised");
}

using CheckFn = CheckResult (*)(const VerifyOptions&);

CheckResult guarded(CheckFn fn, const VerifyOptions& opt) {
  try {
    return fn(opt);
  } catch (const std::exception& e) {
    CheckResult r;
    r.name = "unnamed";
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
    return r;
  }
}

}  // namespace

std::vector<std::string> verify_suites() { return {"fixtures", "steps", "bounds", "all"}; }

std::vector<CheckResult> run_verify_suite(const std::string& suite,
                                          const VerifyOptions& opt) {
  const bool fixtures = suite == "fixtures" || suite == "all";
  const bool steps = suite == "steps" || suite == "all";
  const bool bounds = suite == "bounds" || suite == "all";
  if (!fixtures && !steps && !bounds) {
    throw std::invalid_argument("unknown suite \"" + suite +
                                "\" (expected fixtures, steps, bounds, or all)");
  }
  std::vector<CheckResult> out;
  const auto add = [&](CheckFn fn) { out.push_back(guarded(fn, opt)); };
  if (fixtures) {
    add(&check_classic_cycles);
    add(&check_fixture_repair);
    add(&check_spiral_trajectory);
    add(&check_fixture_metadata);
  }
  if (steps) {
    add(&check_l2_audits);
    add(&check_l1_audits);
    add(&check_negative_coordinate_corrected);
    add(&check_tie_break_strict);
    add(&check_paid_moves_recoverable);
    add(&check_dead_band_flagged);
    add(&check_window_published_budget);
    add(&check_oracle_agreement);
  }
  if (bounds) {
    add(&check_l2_bounds);
    add(&check_l1_bounds);
    add(&check_unknown_search);
    add(&check_single_direction_line);
    add(&check_single_direction_axis);
    add(&check_budget_formula);
  }
  if (suite == "all") out.push_back(check_coverage(out));
  return out;
}

}  // namespace spl

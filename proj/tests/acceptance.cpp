// Acceptance gates for the lab. Each criterion prints exactly one PASS/FAIL
// line; the process exits nonzero if any gate fails. Hand-rolled main so the
// output stays a flat checklist.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "spl/harness.hpp"

using namespace spl;

namespace {

int g_failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS " : "FAIL ") << name;
  if (!detail.empty()) std::cout << ": " << detail;
  std::cout << "\n";
  if (!pass) ++g_failures;
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

Transcript run_fixture(const std::string& id, std::size_t rounds, LearnerKind kind,
                       double alpha) {
  const Fixture fx = make_fixture(id, rounds);
  LearnerConfig lc;
  lc.kind = kind;
  lc.alpha = alpha;
  lc.zero_policy = fx.learner_start;
  AgentConfig ac;
  ac.cost = fx.cost;
  StreamMeta meta;
  meta.source = id;
  meta.d = 2;
  meta.R = fx.R;
  if (fx.gamma > 0.0) meta.gamma = fx.gamma;
  meta.w_star = fx.w_star;
  meta.separable = fx.separable;
  return run_experiment(lc, ac, fx.records, rounds, meta);
}

// --------------------------------------------------- criterion 1: cycling --

void criterion_cycle() {
  const auto t0 = std::chrono::steady_clock::now();
  // opener, the on-boundary repeat, then 100 full two-round cycles
  const Transcript t = run_fixture("example1-footnote", 202, LearnerKind::Classic, 0.0);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::ostringstream why;
  bool ok = true;
  if (t.total_mistakes != 201) {
    ok = false;
    why << "mistakes " << t.total_mistakes << " != 201; ";
  }
  // exactly 2 mistakes in each of the 100 cycles
  for (std::size_t c = 0; ok && c < 100; ++c) {
    const int m = (t.rounds[2 + 2 * c].mistake ? 1 : 0) + (t.rounds[3 + 2 * c].mistake ? 1 : 0);
    if (m != 2) {
      ok = false;
      why << "cycle " << c << " has " << m << " mistakes; ";
    }
  }
  const auto cycle = detect_cycle(t);
  if (!cycle || *cycle != 2) {
    ok = false;
    why << "cycle period " << (cycle ? std::to_string(*cycle) : "none") << " != 2; ";
  }
  if (secs >= 1.0) {
    ok = false;
    why << "took " << secs << " s; ";
  }
  std::ostringstream d;
  d << "201 mistakes over 202 rounds, 2 per cycle, period 2, " << secs << " s";
  report("classic-perceptron-cycles-under-manipulation", ok, ok ? d.str() : why.str());
}

// ---------------------------------------------------- criterion 2: repair --

void criterion_repair() {
  const Transcript t = run_fixture("example1-footnote", 10000, LearnerKind::StrategicL2, 0.5);
  std::size_t last_mistake = 0;
  for (const auto& r : t.rounds) {
    if (r.mistake) last_mistake = r.t;
  }
  std::ostringstream why;
  bool ok = true;
  if (t.total_mistakes > 44) {
    ok = false;
    why << "mistakes " << t.total_mistakes << " > 44; ";
  }
  if (t.rounds.size() - 1 - last_mistake < 1000) {
    ok = false;
    why << "no mistake-free tail (last mistake at " << last_mistake << "); ";
  }
  const BoundCheck b = check_mistake_bound(t, "l2-known");
  if (!b.holds) {
    ok = false;
    why << "l2-known bound violated; ";
  }
  std::ostringstream d;
  d << t.total_mistakes << " mistakes (cap 44), last at round " << last_mistake;
  report("shifted-threshold-repairs-the-cycle", ok, ok ? d.str() : why.str());
}

// ---------------------------------------------------- criterion 3: spiral --

void criterion_spiral() {
  const Transcript t = run_fixture("example2", 401, LearnerKind::StrategicL2, 5.0);
  std::ostringstream why;
  bool ok = true;

  const std::vector<Vec> expect_w = {
      {-4.0, -3.0}, {-7.0, 1.0}, {-4.0, 3.0}, {-7.0, -1.0}, {-4.0, -3.0}};
  for (std::size_t i = 0; i < expect_w.size(); ++i) {
    if (t.rounds[i].w_after != expect_w[i]) {
      ok = false;
      why << "w_after[" << i << "] off; ";
    }
  }
  if (!t.rounds[1].x_tilde || *t.rounds[1].x_tilde != Vec{3.0, -4.0}) {
    ok = false;
    why << "x_tilde[1] != (3,-4); ";
  }
  if (!t.rounds[3].x_tilde || *t.rounds[3].x_tilde != Vec{3.0, 4.0}) {
    ok = false;
    why << "x_tilde[3] != (3,4); ";
  }
  if (t.total_mistakes != 401) {
    ok = false;
    why << "mistakes " << t.total_mistakes << " != 401 (4 per cycle); ";
  }
  const auto cycle = detect_cycle(t);
  if (!cycle || *cycle != 4) {
    ok = false;
    why << "cycle period != 4; ";
  }
  report("inseparable-stream-updates-forever", ok,
         ok ? "exact weight spiral, period 4, 401/401 mistakes" : why.str());
}

// ------------------------------------------- criterion 4: l2 bound sweep --

void criterion_l2_bounds() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t ds[] = {2, 5, 10};
  const double rs[] = {1.0, 5.0, 10.0};
  const double gs[] = {0.1, 0.5, 1.0};
  std::ostringstream why;
  bool ok = true;
  int runs = 0;

  for (int i = 0; i < 100 && ok; ++i) {
    StreamSpec spec;
    spec.d = ds[i % 3];
    spec.R = rs[(i / 3) % 3];
    const double g0 = gs[(i / 9) % 3];
    // margins above R/2 leave no sampling mass; tighten to keep the cell live
    spec.gamma = spec.R < 2.0 * g0 ? 0.5 : g0;
    const double alpha = (i % 2 != 0) ? spec.R : spec.R / 2.0;
    const double bound = (spec.R + alpha) * (spec.R + alpha) / (spec.gamma * spec.gamma);
    spec.length = static_cast<std::size_t>(std::min(1500.0, std::max(60.0, 10.0 * bound)));
    spec.seed = 0xACC0 + static_cast<std::uint64_t>(i);
    const GeneratedStream stream = generate_separable_stream(spec);

    LearnerConfig lc;
    lc.kind = LearnerKind::StrategicL2;
    lc.alpha = alpha;
    AgentConfig ac;
    ac.cost = L2Cost{alpha};
    StreamMeta meta;
    meta.source = "generated";
    meta.d = spec.d;
    meta.R = spec.R;
    meta.gamma = spec.gamma;
    meta.w_star = stream.w_star;
    meta.separable = true;
    const Transcript t = run_experiment(lc, ac, stream.records, spec.length, meta);
    ++runs;

    if (!check_mistake_bound(t, "l2-known").holds) {
      ok = false;
      why << "run " << i << ": bound violated; ";
    }
    if (!check_forbidden_region(t).empty()) {
      ok = false;
      why << "run " << i << ": forbidden region hit; ";
    }
    const AuditReport rep = audit_invariants(t, {});
    if (!rep.ok()) {
      ok = false;
      why << "run " << i << ": " << rep.violations.size() << " audit violations ("
          << rep.violations[0].check << "); ";
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= 60.0) {
    ok = false;
    why << "took " << secs << " s; ";
  }
  std::ostringstream d;
  d << runs << " runs clean in " << secs << " s";
  report("l2-mistake-bound-holds-everywhere", ok, ok ? d.str() : why.str());
}

// ------------------------------------------- criterion 5: l1 bound sweep --

void criterion_l1_bounds() {
  const std::size_t ds[] = {2, 3, 6};
  const double rs[] = {1.0, 2.0, 5.0};
  const double gs[] = {0.25, 0.5, 1.0};
  std::ostringstream why;
  bool ok = true;
  int runs = 0;

  for (int i = 0; i < 100 && ok; ++i) {
    StreamSpec spec;
    spec.d = ds[i % 3];
    spec.R = rs[(i / 3) % 3];
    const double g0 = gs[(i / 9) % 3];
    spec.gamma = spec.R < 2.0 * g0 ? spec.R / 2.0 : g0;
    spec.nonneg_w_star = true;
    std::vector<double> alphas(spec.d, spec.R / 2.0);
    if (i % 2 != 0) {
      for (auto& a : alphas) a /= 2.0;
    }
    if (spec.d >= 3) alphas.back() = 0.0;  // keep one unmovable coordinate in play
    const double amax = alphas[0];
    const double bound =
        (1.0 + (static_cast<double>(spec.d) + 1.0) * (spec.R + amax) * (spec.R + amax)) /
        (spec.gamma * spec.gamma);
    spec.length = static_cast<std::size_t>(std::min(1200.0, std::max(60.0, 10.0 * bound)));
    spec.seed = 0xACC1 + static_cast<std::uint64_t>(i);
    const GeneratedStream stream = generate_separable_stream(spec);

    LearnerConfig lc;
    lc.kind = LearnerKind::StrategicL1;
    lc.alphas = alphas;
    lc.R = spec.R;
    AgentConfig ac;
    ac.cost = WeightedL1Cost{alphas};
    StreamMeta meta;
    meta.source = "generated";
    meta.d = spec.d;
    meta.R = spec.R;
    meta.gamma = spec.gamma;
    meta.w_star = stream.w_star;
    meta.separable = true;
    const Transcript t = run_experiment(lc, ac, stream.records, spec.length, meta);
    ++runs;

    if (!check_mistake_bound(t, "l1-known").holds) {
      ok = false;
      why << "run " << i << ": bound violated; ";
    }
    const AuditReport rep = audit_invariants(t, {});
    if (!rep.ok()) {
      ok = false;
      why << "run " << i << ": audit " << rep.violations[0].check << "; ";
    }
    for (const auto& r : t.rounds) {
      if (!ok) break;
      for (double c : r.w_after) {
        if (c < 0.0) {
          ok = false;
          why << "run " << i << " round " << r.t << ": negative weight; ";
          break;
        }
      }
      if (r.correction_mus) {
        for (std::size_t j = 0; j < r.correction_mus->size(); ++j) {
          if ((*r.correction_mus)[j] > spec.R + alphas[j] + kEpsEq) {
            ok = false;
            why << "run " << i << " round " << r.t << ": correction shift over R+alpha; ";
            break;
          }
        }
      }
      if (r.eta) {
        // the tie-broken direction must be a strict argmax of alpha_j * w_j
        double best = -std::numeric_limits<double>::infinity();
        int count = 0;
        for (std::size_t j = 0; j < r.w_after.size(); ++j) {
          const double v = alphas[j] * r.w_after[j];
          if (v > best) {
            best = v;
            count = 1;
          } else if (v == best) {
            ++count;
          }
        }
        if (count != 1) {
          ok = false;
          why << "run " << i << " round " << r.t << ": argmax not unique; ";
        }
      }
    }
  }
  std::ostringstream d;
  d << runs << " runs clean, weights nonnegative, argmax unique";
  report("l1-mistake-bound-holds-everywhere", ok, ok ? d.str() : why.str());
}

// ------------------------------------------ criterion 6: unknown budgets --

void criterion_unknown() {
  std::ostringstream why;
  bool ok = true;
  int runs = 0;

  for (int i = 0; i < 50 && ok; ++i) {
    const double gamma = (i % 2 != 0) ? 1.0 : 0.5;
    const double R = 2.0 * gamma;
    const std::size_t d = 2 + static_cast<std::size_t>((i / 2) % 2);
    const std::uint64_t seed = 0xACCE5500ULL + static_cast<std::uint64_t>(i);
    std::mt19937_64 pick(seed ^ 0x9e3779b97f4a7c15ULL);
    const double alpha_true = gamma / 2.0 + uniform01(pick) * (R - gamma / 2.0);

    StreamSpec spec;
    spec.d = d;
    spec.R = R;
    spec.gamma = gamma;
    spec.length = 4000;
    spec.seed = seed;
    const GeneratedStream stream = generate_separable_stream(spec);

    LearnerConfig lc;
    lc.kind = LearnerKind::UnknownL2;
    lc.R = R;
    lc.gamma = gamma;
    AgentConfig ac;
    ac.cost = L2Cost{alpha_true};
    StreamMeta meta;
    meta.source = "generated";
    meta.d = d;
    meta.R = R;
    meta.gamma = gamma;
    meta.w_star = stream.w_star;
    meta.separable = true;
    const Transcript t = run_experiment(lc, ac, stream.records, spec.length, meta);
    ++runs;

    const UnknownRunCheck chk = check_unknown_run(t, alpha_true);
    if (!chk.ok) {
      ok = false;
      why << "run " << i << ": "
          << (chk.problems.empty() ? "unspecified" : chk.problems.front()) << "; ";
    }
    if (!check_mistake_bound(t, "unknown-total").holds) {
      ok = false;
      why << "run " << i << ": total-mistake cap violated; ";
    }
  }
  std::ostringstream d;
  d << runs << " searches settled within phase and mistake caps";
  report("unknown-budget-search-stays-bounded", ok, ok ? d.str() : why.str());
}

// ------------------------------------------------ criterion 7: vs oracle --

void criterion_oracle() {
  std::mt19937_64 rng(0xACC07ULL);
  std::ostringstream why;
  int l2_bad = 0, l1_bad = 0;
  const int n = 1000;
  const double tol = 5e-7;

  const auto random_rule = [&]() {
    for (;;) {
      Vec w = {uniform(rng, -2.0, 2.0), uniform(rng, -2.0, 2.0)};
      if (norm(w) < 0.3) continue;
      const double raw = uniform(rng, 0.0, 2.0) * norm(w);
      return DecisionRule::make(std::move(w), raw);
    }
  };

  for (int i = 0; i < n; ++i) {
    const DecisionRule rule = random_rule();
    const Vec z = {uniform(rng, -3.0, 3.0), uniform(rng, -3.0, 3.0)};
    const double alpha = uniform(rng, 0.3, 2.0);
    const CostModel model = L2Cost{alpha};
    const Vec fast = best_response_l2(z, rule, alpha).x;
    const Vec grid = brute_force_best_response(z, rule, model, alpha / 200.0, 1.05 * alpha);
    const double du = agent_utility(rule, model, z, fast) - agent_utility(rule, model, z, grid);
    if (std::abs(du) > tol) {
      if (++l2_bad == 1) why << "l2 instance " << i << " utility gap " << du << "; ";
    }
  }

  for (int i = 0; i < n; ++i) {
    const DecisionRule rule = random_rule();
    const Vec z = {uniform(rng, -3.0, 3.0), uniform(rng, -3.0, 3.0)};
    std::vector<double> alphas = {uniform(rng, 0.3, 2.0), uniform(rng, 0.3, 2.0)};
    if (i % 3 == 0) alphas[1] = 0.0;  // unmovable coordinate
    const double amax = std::max(alphas[0], alphas[1]);
    const CostModel model = WeightedL1Cost{alphas};
    const Vec fast = best_response_weighted_l1(z, rule, alphas).x;
    const Vec grid = brute_force_best_response(z, rule, model, amax / 200.0, 1.05 * amax);
    const double du = agent_utility(rule, model, z, fast) - agent_utility(rule, model, z, grid);
    if (std::abs(du) > tol) {
      if (++l1_bad == 1) why << "l1 instance " << i << " utility gap " << du << "; ";
    }
  }

  const bool ok = l2_bad == 0 && l1_bad == 0;
  std::ostringstream d;
  d << n << " + " << n << " instances, zero disagreements";
  if (!ok) why << l2_bad << " l2 and " << l1_bad << " l1 disagreements";
  report("responders-match-the-grid-oracle", ok, ok ? d.str() : why.str());
}

// ------------------------------------------- criterion 8: fault injection --

int run_verify(const std::string& extra) {
  const std::string cmd =
      std::string(SPL_CLI_PATH) + " verify --suite all --seeds 6" + extra + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void criterion_mutations() {
  std::ostringstream why;
  bool ok = true;
  const int clean = run_verify("");
  if (clean != 0) {
    ok = false;
    why << "clean verify exited " << clean << "; ";
  }
  for (const char* f : {"surrogate-sign", "skip-correction", "zero-eta"}) {
    const int code = run_verify(std::string(" --inject-fault ") + f);
    if (code == 0) {
      ok = false;
      why << "fault " << f << " went undetected; ";
    }
  }
  report("planted-faults-fail-the-self-checks", ok,
         ok ? "clean suite passes, all three faults detected" : why.str());
}

}  // namespace

int main() {
  criterion_cycle();
  criterion_repair();
  criterion_spiral();
  criterion_l2_bounds();
  criterion_l1_bounds();
  criterion_unknown();
  criterion_oracle();
  criterion_mutations();
  std::cout << (g_failures == 0 ? "acceptance: all criteria hold"
                                : "acceptance: " + std::to_string(g_failures) + " criteria failed")
            << "\n";
  return g_failures == 0 ? 0 : 1;
}

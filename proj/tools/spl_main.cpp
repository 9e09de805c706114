// spl: perceptron lab with strategic agents.
//
// Subcommands: gen (stream to JSONL), run (one experiment -> transcript +
// summary), replay (bit-exact re-execution of a transcript), sweep (grid of
// known-budget runs -> CSV), verify (self-check suites).
//
// Exit codes: 0 success, 1 check failure (verify/replay), 2 usage, 3 I/O.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spl/harness.hpp"
#include "spl/streams.hpp"
#include "spl/verify.hpp"

using nlohmann::json;

namespace {

constexpr int kExitCheckFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_double_list(const std::string& s, const std::string& flag) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t comma = std::min(s.find(',', pos), s.size());
    const std::string tok = s.substr(pos, comma - pos);
    if (!tok.empty()) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0') {
        throw UsageError(flag + ": not a number: \"" + tok + "\"");
      }
      out.push_back(v);
    }
    pos = comma + 1;
  }
  if (out.empty()) throw UsageError(flag + ": empty list");
  return out;
}

spl::ZeroWeightPolicy parse_zero_start(const std::string& s) {
  if (s == "positive") return spl::ZeroWeightPolicy::PredictPositive;
  if (s == "negative") return spl::ZeroWeightPolicy::PredictNegative;
  throw UsageError("--zero-start: expected positive or negative, got \"" + s + "\"");
}

spl::FaultInjection parse_faults(const std::vector<std::string>& names) {
  spl::FaultInjection f;
  for (const std::string& n : names) {
    if (n == "surrogate-sign") {
      f.flip_surrogate_sign = true;
    } else if (n == "skip-correction") {
      f.skip_correction = true;
    } else if (n == "zero-eta") {
      f.zero_eta = true;
    } else {
      throw UsageError("--inject-fault: unknown fault \"" + n + "\"");
    }
  }
  return f;
}

// ------------------------------------------------------------- config file --
// Flags mirror config keys one-to-one; anything present on the command line
// wins. Implemented by appending "--key=value" tokens for keys not already
// given, before CLI11 parses.

bool has_flag_token(const std::vector<std::string>& args, const std::string& name) {
  const std::string plain = "--" + name;
  const std::string eq = plain + "=";
  for (const std::string& a : args) {
    if (a == plain || a.rfind(eq, 0) == 0) return true;
  }
  return false;
}

std::string config_value_token(const json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) {
    std::string s = v.dump();
    return s;
  }
  if (v.is_array()) {
    std::string s;
    for (const auto& e : v) {
      if (!s.empty()) s += ",";
      if (!e.is_number()) throw UsageError("config key " + key + ": arrays must be numeric");
      s += e.dump();
    }
    return s;
  }
  throw UsageError("config key " + key + ": unsupported value type");
}

std::vector<std::string> merge_config_file(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  json cfg;
  try {
    in >> cfg;
  } catch (const std::exception& e) {
    throw IoError("config file " + path + ": " + e.what());
  }
  if (!cfg.is_object()) throw IoError("config file " + path + ": expected a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    if (key == "config") continue;
    if (!has_flag_token(args, key)) {
      args.push_back("--" + key + "=" + config_value_token(value, key));
    }
  }
  return args;
}

// ------------------------------------------------------------ stream setup --

struct StreamSetup {
  std::vector<spl::StreamRecord> records;
  spl::StreamMeta meta;
  // fixture-inherited defaults, overridable by flags
  std::optional<spl::CostModel> cost;
  std::optional<spl::ZeroWeightPolicy> zero_start;
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  return j;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

spl::StreamMeta sidecar_to_meta(const json& j, const std::string& source) {
  spl::StreamMeta m;
  m.source = source;
  if (j.contains("d")) m.d = j.at("d").get<std::size_t>();
  if (j.contains("R")) m.R = spl::parse_hex_num(j.at("R"));
  if (j.contains("gamma")) m.gamma = spl::parse_hex_num(j.at("gamma"));
  if (j.contains("w_star") && j.at("w_star").is_array()) {
    spl::Vec w;
    for (const auto& e : j.at("w_star")) w.push_back(spl::parse_hex_num(e));
    m.w_star = std::move(w);
  }
  if (j.contains("separable")) m.separable = j.at("separable").get<bool>();
  return m;
}

json meta_to_sidecar(const spl::StreamMeta& m, std::uint64_t seed, double label_mix) {
  json j;
  j["format"] = "spl-stream-meta-v1";
  j["d"] = m.d;
  if (m.R) j["R"] = spl::hex_num(*m.R);
  if (m.gamma) j["gamma"] = spl::hex_num(*m.gamma);
  if (m.w_star) {
    json arr = json::array();
    for (double v : *m.w_star) arr.push_back(spl::hex_num(v));
    j["w_star"] = arr;
  }
  j["separable"] = m.separable;
  j["seed"] = seed;
  j["label_mix"] = label_mix;
  return j;
}

bool file_exists(const std::string& path) { return std::ifstream(path).good(); }

// ------------------------------------------------------------------- run ---

struct RunArgs {
  std::string learner;
  std::string fixture;
  std::string stream_path;
  std::size_t d = 0;
  double R = -1.0;
  double gamma = -1.0;
  double label_mix = 0.5;
  bool nonneg_w_star = false;
  std::size_t rounds = 0;
  bool rounds_given = false;
  double alpha = -1.0;
  bool alpha_given = false;
  std::string alphas_csv;
  std::string agent = "rational";
  double agent_alpha = -1.0;
  bool agent_alpha_given = false;
  std::string agent_alphas_csv;
  std::string zero_start;
  std::uint64_t seed = 42;
  std::vector<std::string> faults;
  std::string out_csv;
  std::string out_jsonl;
  std::string out_summary;
};

StreamSetup resolve_stream(const RunArgs& a) {
  const int sources = (!a.fixture.empty()) + (!a.stream_path.empty()) + (a.d > 0);
  if (sources != 1) {
    throw UsageError("pick exactly one stream source: --fixture, --stream, or --d/--R/--gamma");
  }
  StreamSetup s;
  if (!a.fixture.empty()) {
    if (!a.rounds_given) throw UsageError("fixture streams cycle; --rounds is required");
    const spl::Fixture fx = spl::make_fixture(a.fixture, a.rounds);
    s.records = fx.records;
    s.meta.source = fx.id;
    s.meta.d = s.records.empty() ? 0 : s.records[0].z.size();
    s.meta.R = fx.R;
    if (fx.gamma > 0.0) s.meta.gamma = fx.gamma;
    s.meta.w_star = fx.w_star;
    s.meta.separable = fx.separable;
    s.cost = fx.cost;
    s.zero_start = fx.learner_start;
    return s;
  }
  if (!a.stream_path.empty()) {
    s.records = spl::load_stream(a.stream_path);
    const std::string sidecar = a.stream_path + ".meta.json";
    if (file_exists(sidecar)) {
      s.meta = sidecar_to_meta(read_json_file(sidecar), a.stream_path);
    } else {
      s.meta.source = a.stream_path;
    }
    if (s.meta.d == 0 && !s.records.empty()) s.meta.d = s.records[0].z.size();
    return s;
  }
  if (!(a.R > 0.0) || !(a.gamma > 0.0)) {
    throw UsageError("generated streams need --d, --R, and --gamma");
  }
  if (!a.rounds_given) throw UsageError("generated streams need --rounds");
  spl::StreamSpec spec;
  spec.d = a.d;
  spec.R = a.R;
  spec.gamma = a.gamma;
  spec.length = a.rounds;
  spec.seed = a.seed;
  spec.label_mix = a.label_mix;
  spec.nonneg_w_star = a.nonneg_w_star;
  spl::GeneratedStream gs = spl::generate_separable_stream(spec);
  s.records = std::move(gs.records);
  s.meta.source = "generated";
  s.meta.d = spec.d;
  s.meta.R = spec.R;
  s.meta.gamma = spec.gamma;
  s.meta.w_star = std::move(gs.w_star);
  s.meta.separable = true;
  return s;
}

int cmd_run(const RunArgs& a) {
  StreamSetup s = resolve_stream(a);
  const std::size_t rounds = a.rounds_given ? a.rounds : s.records.size();

  spl::LearnerConfig lc;
  lc.kind = spl::learner_kind_from_string(a.learner);
  lc.faults = parse_faults(a.faults);
  if (!a.zero_start.empty()) {
    lc.zero_policy = parse_zero_start(a.zero_start);
  } else if (s.zero_start) {
    lc.zero_policy = *s.zero_start;
  }

  // published budgets; fixtures supply defaults, flags override
  const auto fixture_alpha = [&]() -> std::optional<double> {
    if (s.cost) {
      if (const auto* l2 = std::get_if<spl::L2Cost>(&*s.cost)) return l2->alpha;
    }
    return std::nullopt;
  }();

  switch (lc.kind) {
    case spl::LearnerKind::Classic:
      break;
    case spl::LearnerKind::StrategicL2: {
      if (a.alpha_given) {
        lc.alpha = a.alpha;
      } else if (fixture_alpha) {
        lc.alpha = *fixture_alpha;
      } else {
        throw UsageError("strategic-l2 requires --alpha");
      }
      break;
    }
    case spl::LearnerKind::StrategicL1: {
      if (a.alphas_csv.empty()) throw UsageError("strategic-l1 requires --alphas");
      lc.alphas = parse_double_list(a.alphas_csv, "--alphas");
      if (a.R > 0.0) {
        lc.R = a.R;
      } else if (s.meta.R) {
        lc.R = *s.meta.R;
      } else {
        throw UsageError("strategic-l1 requires --R");
      }
      break;
    }
    case spl::LearnerKind::UnknownL2:
    case spl::LearnerKind::UnknownL1Single: {
      if (a.R > 0.0) {
        lc.R = a.R;
      } else if (s.meta.R) {
        lc.R = *s.meta.R;
      } else {
        throw UsageError(a.learner + " requires --R");
      }
      if (a.gamma > 0.0) {
        lc.gamma = a.gamma;
      } else if (s.meta.gamma) {
        lc.gamma = *s.meta.gamma;
      } else {
        throw UsageError(a.learner + " requires --gamma");
      }
      break;
    }
  }

  spl::AgentConfig ac;
  if (a.agent == "rational") {
    ac.kind = spl::AgentKind::Rational;
  } else if (a.agent == "replay") {
    ac.kind = spl::AgentKind::Replay;
  } else {
    throw UsageError("--agent: expected rational or replay, got \"" + a.agent + "\"");
  }
  if (ac.kind == spl::AgentKind::Rational) {
    if (a.agent_alpha_given && !a.agent_alphas_csv.empty()) {
      throw UsageError("give --agent-alpha or --agent-alphas, not both");
    }
    if (a.agent_alpha_given) {
      ac.cost = spl::L2Cost{a.agent_alpha};
    } else if (!a.agent_alphas_csv.empty()) {
      ac.cost = spl::WeightedL1Cost{parse_double_list(a.agent_alphas_csv, "--agent-alphas")};
    } else if (s.cost) {
      ac.cost = *s.cost;
    } else {
      switch (lc.kind) {
        case spl::LearnerKind::Classic:
          ac.cost = spl::L2Cost{a.alpha_given ? a.alpha : 0.0};
          break;
        case spl::LearnerKind::StrategicL2:
          ac.cost = spl::L2Cost{lc.alpha};
          break;
        case spl::LearnerKind::StrategicL1:
          ac.cost = spl::WeightedL1Cost{lc.alphas};
          break;
        default:
          throw UsageError(
              "rational agents facing an unknown-budget learner need --agent-alpha "
              "or --agent-alphas (the hidden true budget)");
      }
    }
  }

  spl::Transcript t;
  try {
    t = spl::run_experiment(lc, ac, s.records, rounds, s.meta);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  if (!a.out_csv.empty()) spl::write_transcript_csv(a.out_csv, t);
  if (!a.out_jsonl.empty()) spl::write_transcript_jsonl(a.out_jsonl, t);

  const json summary = spl::summarize(t);
  if (!a.out_summary.empty()) write_json_file(a.out_summary, summary);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

// ------------------------------------------------------------------- gen ---

int cmd_gen(std::size_t d, double R, double gamma, std::size_t rounds, double label_mix,
            bool nonneg, const std::string& w_star_csv, std::uint64_t seed,
            const std::string& out) {
  spl::StreamSpec spec;
  spec.d = d;
  spec.R = R;
  spec.gamma = gamma;
  spec.length = rounds;
  spec.seed = seed;
  spec.label_mix = label_mix;
  spec.nonneg_w_star = nonneg;
  if (!w_star_csv.empty()) spec.w_star = parse_double_list(w_star_csv, "--w-star");
  spl::GeneratedStream gs;
  try {
    gs = spl::generate_separable_stream(spec);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  spl::save_stream(out, gs.records);
  spl::StreamMeta m;
  m.source = "generated";
  m.d = d;
  m.R = R;
  m.gamma = gamma;
  m.w_star = gs.w_star;
  m.separable = true;
  write_json_file(out + ".meta.json", meta_to_sidecar(m, seed, label_mix));
  std::cout << "wrote " << gs.records.size() << " records to " << out << "\n";
  return 0;
}

// ----------------------------------------------------------------- replay ---

int cmd_replay(const std::string& path) {
  spl::Transcript t;
  try {
    t = spl::read_transcript_jsonl(path);
  } catch (const std::exception& e) {
    throw IoError(e.what());
  }
  std::string why;
  if (spl::replay_matches(t, &why)) {
    std::cout << "replay: exact match over " << t.rounds.size() << " rounds\n";
    return 0;
  }
  std::cout << "replay: MISMATCH: " << why << "\n";
  return kExitCheckFailure;
}

// ------------------------------------------------------------------ sweep ---

int cmd_sweep(const std::string& d_csv, const std::string& r_csv, const std::string& g_csv,
              const std::string& a_csv, int seeds, std::size_t rounds_override,
              std::uint64_t base_seed, const std::string& out) {
  const std::vector<double> ds = parse_double_list(d_csv, "--d-grid");
  const std::vector<double> rs = parse_double_list(r_csv, "--R-grid");
  const std::vector<double> gs = parse_double_list(g_csv, "--gamma-grid");
  const std::vector<double> as = parse_double_list(a_csv, "--alpha-grid");
  if (seeds < 1) throw UsageError("--seeds must be >= 1");

  std::ofstream f(out);
  if (!f) throw IoError("cannot write: " + out);
  f << "d,R,gamma,alpha,seed,rounds,mistakes,bound,holds,forbidden\n";

  std::size_t rows = 0;
  std::size_t cell = 0;
  for (double dv : ds) {
    for (double R : rs) {
      for (double gamma : gs) {
        for (double alpha : as) {
          ++cell;
          const auto d = static_cast<std::size_t>(dv);
          if (d == 0 || dv != static_cast<double>(d)) {
            throw UsageError("--d-grid entries must be positive integers");
          }
          const double bound = (R + alpha) * (R + alpha) / (gamma * gamma);
          const std::size_t rounds =
              rounds_override > 0
                  ? rounds_override
                  : static_cast<std::size_t>(std::ceil(10.0 * bound));
          for (int rep = 0; rep < seeds; ++rep) {
            const std::uint64_t seed = base_seed + 1000003ULL * cell + rep;
            spl::StreamSpec spec;
            spec.d = d;
            spec.R = R;
            spec.gamma = gamma;
            spec.length = rounds;
            spec.seed = seed;
            spl::GeneratedStream stream;
            try {
              stream = spl::generate_separable_stream(spec);
            } catch (const std::invalid_argument& e) {
              throw UsageError(e.what());
            }
            spl::LearnerConfig lc;
            lc.kind = spl::LearnerKind::StrategicL2;
            lc.alpha = alpha;
            spl::AgentConfig ac;
            ac.cost = spl::L2Cost{alpha};
            spl::StreamMeta meta;
            meta.source = "generated";
            meta.d = d;
            meta.R = R;
            meta.gamma = gamma;
            meta.w_star = stream.w_star;
            meta.separable = true;
            const spl::Transcript t =
                spl::run_experiment(lc, ac, stream.records, rounds, meta);
            const std::size_t forbidden = spl::check_forbidden_region(t).size();
            f << spl::csv_num(dv) << "," << spl::csv_num(R) << "," << spl::csv_num(gamma)
              << "," << spl::csv_num(alpha) << "," << seed << "," << rounds << ","
              << t.total_mistakes << "," << spl::csv_num(bound) << ","
              << (static_cast<double>(t.total_mistakes) <= bound ? 1 : 0) << ","
              << forbidden << "\n";
            ++rows;
          }
        }
      }
    }
  }
  f.flush();
  if (!f) throw IoError("write failed: " + out);
  std::cout << "wrote " << rows << " rows to " << out << "\n";
  return 0;
}

// ----------------------------------------------------------------- verify ---

int cmd_verify(const std::string& suite, int seeds, double oracle_step, double oracle_radius,
               const std::vector<std::string>& faults) {
  spl::VerifyOptions opt;
  opt.seeds = seeds;
  opt.faults = parse_faults(faults);
  opt.oracle_step = oracle_step;
  opt.oracle_radius = oracle_radius;
  std::vector<spl::CheckResult> results;
  try {
    results = spl::run_verify_suite(suite, opt);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  std::size_t passed = 0;
  for (const spl::CheckResult& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (!r.detail.empty()) std::cout << ": " << r.detail;
    std::cout << "\n";
    if (r.passed) ++passed;
  }
  std::cout << "verify(" << suite << "): " << passed << "/" << results.size()
            << " checks passed\n";
  return passed == results.size() ? 0 : kExitCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"perceptron lab with strategic agents"};
  app.require_subcommand(1);

  // ---- run
  RunArgs ra;
  CLI::App* run = app.add_subcommand("run", "run one experiment and write transcripts");
  run->add_option("--config", "JSON config file; flags override its keys")
      ->type_name("FILE");
  run->add_option("--learner", ra.learner,
                  "classic | strategic-l2 | strategic-l1 | unknown-l2 | unknown-l1-single")
      ->required();
  run->add_option("--fixture", ra.fixture, "fixture stream id");
  run->add_option("--stream", ra.stream_path, "JSONL stream file");
  run->add_option("--d", ra.d, "dimension (generated stream)");
  run->add_option("--R", ra.R, "norm cap R");
  run->add_option("--gamma", ra.gamma, "separation margin gamma");
  run->add_option("--label-mix", ra.label_mix, "positive-label fraction (generated)");
  run->add_flag("--nonneg-w-star", ra.nonneg_w_star, "force a nonnegative separator");
  run->add_option("--rounds", ra.rounds, "rounds to run")->each([&](const std::string&) {
    ra.rounds_given = true;
  });
  run->add_option("--alpha", ra.alpha, "published l2 budget")->each([&](const std::string&) {
    ra.alpha_given = true;
  });
  run->add_option("--alphas", ra.alphas_csv, "published per-coordinate budgets (comma list)");
  run->add_option("--agent", ra.agent, "rational | replay");
  run->add_option("--agent-alpha", ra.agent_alpha, "true l2 budget of the agents")
      ->each([&](const std::string&) { ra.agent_alpha_given = true; });
  run->add_option("--agent-alphas", ra.agent_alphas_csv,
                  "true per-coordinate budgets (comma list)");
  run->add_option("--zero-start", ra.zero_start, "positive | negative while w = 0");
  run->add_option("--seed", ra.seed, "stream seed")->envname("SPL_SEED");
  run->add_option("--inject-fault", ra.faults,
                  "surrogate-sign | skip-correction | zero-eta (testing hook)")
      ->group("");
  run->add_option("--out", ra.out_csv, "transcript CSV path");
  run->add_option("--jsonl", ra.out_jsonl, "transcript JSONL path (exact replay)");
  run->add_option("--summary", ra.out_summary, "summary JSON path");

  // ---- gen
  std::size_t gd = 0, grounds = 0;
  double gR = -1.0, ggamma = -1.0, gmix = 0.5;
  bool gnonneg = false;
  std::string gwstar, gout;
  std::uint64_t gseed = 42;
  CLI::App* gen = app.add_subcommand("gen", "generate a separable stream to JSONL");
  gen->add_option("--config", "JSON config file; flags override its keys")->type_name("FILE");
  gen->add_option("--d", gd, "dimension")->required();
  gen->add_option("--R", gR, "norm cap R")->required();
  gen->add_option("--gamma", ggamma, "separation margin gamma")->required();
  gen->add_option("--rounds", grounds, "records to generate")->required();
  gen->add_option("--label-mix", gmix, "positive-label fraction");
  gen->add_flag("--nonneg-w-star", gnonneg, "force a nonnegative separator");
  gen->add_option("--w-star", gwstar, "separator direction (comma list; scaled to 1/gamma)");
  gen->add_option("--seed", gseed, "stream seed")->envname("SPL_SEED");
  gen->add_option("--out", gout, "output JSONL path")->required();

  // ---- replay
  std::string rpath;
  CLI::App* rep = app.add_subcommand("replay", "re-run a JSONL transcript and compare");
  rep->add_option("--transcript", rpath, "transcript JSONL path")->required();

  // ---- sweep
  std::string sd = "2", sR = "1", sg = "0.5", sa = "0.5", sout = "sweep.csv";
  int sseeds = 5;
  std::size_t srounds = 0;
  std::uint64_t sseed = 42;
  CLI::App* sweep = app.add_subcommand("sweep", "grid of known-budget runs to CSV");
  sweep->add_option("--config", "JSON config file; flags override its keys")->type_name("FILE");
  sweep->add_option("--d-grid", sd, "dimensions (comma list)");
  sweep->add_option("--R-grid", sR, "norm caps (comma list)");
  sweep->add_option("--gamma-grid", sg, "margins (comma list)");
  sweep->add_option("--alpha-grid", sa, "budgets (comma list)");
  sweep->add_option("--seeds", sseeds, "runs per cell");
  sweep->add_option("--rounds", srounds, "override rounds per run (default 10x bound)");
  sweep->add_option("--seed", sseed, "base seed")->envname("SPL_SEED");
  sweep->add_option("--out", sout, "output CSV path");

  // ---- verify
  std::string vsuite = "all";
  int vseeds = 20;
  std::vector<std::string> vfaults;
  double voracle_step = 0.0, voracle_radius = 0.0;
  CLI::App* ver = app.add_subcommand("verify", "run self-check suites");
  ver->add_option("--suite", vsuite, "fixtures | steps | bounds | all");
  ver->add_option("--seeds", vseeds, "seeded runs per randomized check");
  ver->add_option("--oracle-step", voracle_step, "oracle grid step (default budget/200)");
  ver->add_option("--oracle-radius", voracle_radius, "oracle grid radius (default 1.05x budget)");
  ver->add_option("--inject-fault", vfaults,
                  "surrogate-sign | skip-correction | zero-eta (testing hook)")
      ->group("");

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = merge_config_file(args);
    // CLI11 parses reversed token lists
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }

  try {
    if (run->parsed()) return cmd_run(ra);
    if (gen->parsed()) return cmd_gen(gd, gR, ggamma, grounds, gmix, gnonneg, gwstar, gseed, gout);
    if (rep->parsed()) return cmd_replay(rpath);
    if (sweep->parsed()) return cmd_sweep(sd, sR, sg, sa, sseeds, srounds, sseed, sout);
    if (ver->parsed()) return cmd_verify(vsuite, vseeds, voracle_step, voracle_radius, vfaults);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  std::cerr << "error: no subcommand\n";
  return kExitUsage;
}

#include "spl/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace spl {

using nlohmann::json;

// ------------------------------------------------------------- formatting --

std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex_num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_hex_num(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') {
      throw std::runtime_error("not a numeric literal: \"" + s + "\"");
    }
    return v;
  }
  throw std::runtime_error("expected number, got " + std::string(j.type_name()));
}

namespace {

template <class... Ts>
struct overload : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overload(Ts...) -> overload<Ts...>;

json vec_hex(const Vec& v) {
  json a = json::array();
  for (double x : v) a.push_back(hex_num(x));
  return a;
}

Vec vec_unhex(const json& j) {
  if (!j.is_array()) throw std::runtime_error("expected array of numbers");
  Vec v;
  v.reserve(j.size());
  for (const auto& e : j) v.push_back(parse_hex_num(e));
  return v;
}

std::string join_vec_csv(const Vec& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += csv_num(v[i]);
  }
  return out;
}

const char* event_to_string(PhaseEvent e) {
  switch (e) {
    case PhaseEvent::PhaseUp: return "phase_up";
    case PhaseEvent::PhaseDown: return "phase_down";
    default: return "none";
  }
}

PhaseEvent event_from_string(const std::string& s) {
  if (s == "none") return PhaseEvent::None;
  if (s == "phase_up") return PhaseEvent::PhaseUp;
  if (s == "phase_down") return PhaseEvent::PhaseDown;
  throw std::runtime_error("unknown event \"" + s + "\"");
}

const char* zero_policy_to_string(ZeroWeightPolicy p) {
  return p == ZeroWeightPolicy::PredictPositive ? "predict-positive" : "predict-negative";
}

ZeroWeightPolicy zero_policy_from_string(const std::string& s) {
  if (s == "predict-positive") return ZeroWeightPolicy::PredictPositive;
  if (s == "predict-negative") return ZeroWeightPolicy::PredictNegative;
  throw std::runtime_error("unknown zero-weight policy \"" + s + "\"");
}

json cost_to_json(const CostModel& m) {
  return std::visit(overload{[](const L2Cost& c) {
                               json j;
                               j["model"] = "l2";
                               j["alpha"] = hex_num(c.alpha);
                               return j;
                             },
                             [](const WeightedL1Cost& c) {
                               json j;
                               j["model"] = "weighted-l1";
                               j["alphas"] = vec_hex(c.alphas);
                               return j;
                             }},
                    m);
}

CostModel cost_from_json(const json& j) {
  const std::string model = j.at("model").get<std::string>();
  if (model == "l2") return L2Cost{parse_hex_num(j.at("alpha"))};
  if (model == "weighted-l1") return WeightedL1Cost{vec_unhex(j.at("alphas"))};
  throw std::runtime_error("unknown cost model \"" + model + "\"");
}

json learner_cfg_to_json(const LearnerConfig& c) {
  json j;
  j["kind"] = to_string(c.kind);
  j["alpha"] = hex_num(c.alpha);
  j["alphas"] = vec_hex(c.alphas);
  j["R"] = hex_num(c.R);
  j["gamma"] = hex_num(c.gamma);
  j["zero_policy"] = zero_policy_to_string(c.zero_policy);
  j["faults"] = {{"flip_surrogate_sign", c.faults.flip_surrogate_sign},
                 {"skip_correction", c.faults.skip_correction},
                 {"zero_eta", c.faults.zero_eta}};
  return j;
}

LearnerConfig learner_cfg_from_json(const json& j) {
  LearnerConfig c;
  c.kind = learner_kind_from_string(j.at("kind").get<std::string>());
  c.alpha = parse_hex_num(j.at("alpha"));
  c.alphas = vec_unhex(j.at("alphas"));
  c.R = parse_hex_num(j.at("R"));
  c.gamma = parse_hex_num(j.at("gamma"));
  c.zero_policy = zero_policy_from_string(j.at("zero_policy").get<std::string>());
  const auto& f = j.at("faults");
  c.faults.flip_surrogate_sign = f.at("flip_surrogate_sign").get<bool>();
  c.faults.skip_correction = f.at("skip_correction").get<bool>();
  c.faults.zero_eta = f.at("zero_eta").get<bool>();
  return c;
}

json agent_cfg_to_json(const AgentConfig& c) {
  json j;
  j["kind"] = c.kind == AgentKind::Rational ? "rational" : "replay";
  j["cost"] = cost_to_json(c.cost);
  return j;
}

AgentConfig agent_cfg_from_json(const json& j) {
  AgentConfig c;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "rational") {
    c.kind = AgentKind::Rational;
  } else if (kind == "replay") {
    c.kind = AgentKind::Replay;
  } else {
    throw std::runtime_error("unknown agent kind \"" + kind + "\"");
  }
  c.cost = cost_from_json(j.at("cost"));
  return c;
}

json stream_meta_to_json(const StreamMeta& m) {
  json j;
  j["source"] = m.source;
  j["d"] = m.d;
  j["R"] = m.R ? json(hex_num(*m.R)) : json();
  j["gamma"] = m.gamma ? json(hex_num(*m.gamma)) : json();
  j["w_star"] = m.w_star ? vec_hex(*m.w_star) : json();
  j["separable"] = m.separable;
  return j;
}

StreamMeta stream_meta_from_json(const json& j) {
  StreamMeta m;
  m.source = j.at("source").get<std::string>();
  m.d = j.at("d").get<std::size_t>();
  if (!j.at("R").is_null()) m.R = parse_hex_num(j.at("R"));
  if (!j.at("gamma").is_null()) m.gamma = parse_hex_num(j.at("gamma"));
  if (!j.at("w_star").is_null()) m.w_star = vec_unhex(j.at("w_star"));
  m.separable = j.at("separable").get<bool>();
  return m;
}

json round_to_json(const RoundRecord& r) {
  json j;
  j["t"] = r.t;
  j["z"] = vec_hex(r.z);
  j["x"] = vec_hex(r.x);
  j["x_tilde"] = r.x_tilde ? vec_hex(*r.x_tilde) : json();
  j["prediction"] = label_sign(r.prediction);
  j["truth"] = label_sign(r.truth);
  j["mistake"] = r.mistake;
  j["rule_w"] = vec_hex(r.rule_w);
  j["rule_raw_threshold"] = hex_num(r.rule_raw_threshold);
  j["rule_zero_positive"] = r.rule_zero_positive;
  j["w_after"] = vec_hex(r.w_after);
  j["alpha_published"] = hex_num(r.alpha_published);
  j["phase"] = r.phase;
  j["event"] = event_to_string(r.event);
  j["agent_cost"] = hex_num(r.agent_cost);
  j["rationality_flag"] = r.rationality_flag;
  j["correction_mus"] = r.correction_mus ? vec_hex(*r.correction_mus) : json();
  j["eta"] = r.eta ? json(hex_num(*r.eta)) : json();
  return j;
}

RoundRecord round_from_json(const json& j) {
  RoundRecord r;
  r.t = j.at("t").get<std::size_t>();
  r.z = vec_unhex(j.at("z"));
  r.x = vec_unhex(j.at("x"));
  if (!j.at("x_tilde").is_null()) r.x_tilde = vec_unhex(j.at("x_tilde"));
  r.prediction = label_from_sign(j.at("prediction").get<int>());
  r.truth = label_from_sign(j.at("truth").get<int>());
  r.mistake = j.at("mistake").get<bool>();
  r.rule_w = vec_unhex(j.at("rule_w"));
  r.rule_raw_threshold = parse_hex_num(j.at("rule_raw_threshold"));
  r.rule_zero_positive = j.at("rule_zero_positive").get<bool>();
  r.w_after = vec_unhex(j.at("w_after"));
  r.alpha_published = parse_hex_num(j.at("alpha_published"));
  r.phase = j.at("phase").get<int>();
  r.event = event_from_string(j.at("event").get<std::string>());
  r.agent_cost = parse_hex_num(j.at("agent_cost"));
  r.rationality_flag = j.at("rationality_flag").get<bool>();
  if (!j.at("correction_mus").is_null()) r.correction_mus = vec_unhex(j.at("correction_mus"));
  if (!j.at("eta").is_null()) r.eta = parse_hex_num(j.at("eta"));
  return r;
}

DecisionRule rule_of(const RoundRecord& r) {
  return DecisionRule::make(r.rule_w, r.rule_raw_threshold, r.rule_zero_positive);
}

bool geq_with_slack(double a, double b, double eps = kEpsEq) {
  return leq_with_slack(b, a, eps);
}

}  // namespace

// ------------------------------------------------------------ kind strings --

std::string to_string(LearnerKind k) {
  switch (k) {
    case LearnerKind::Classic: return "classic";
    case LearnerKind::StrategicL2: return "strategic-l2";
    case LearnerKind::StrategicL1: return "strategic-l1";
    case LearnerKind::UnknownL2: return "unknown-l2";
    case LearnerKind::UnknownL1Single: return "unknown-l1-single";
  }
  throw std::logic_error("bad LearnerKind");
}

LearnerKind learner_kind_from_string(const std::string& s) {
  if (s == "classic") return LearnerKind::Classic;
  if (s == "strategic-l2") return LearnerKind::StrategicL2;
  if (s == "strategic-l1") return LearnerKind::StrategicL1;
  if (s == "unknown-l2") return LearnerKind::UnknownL2;
  if (s == "unknown-l1-single") return LearnerKind::UnknownL1Single;
  throw std::invalid_argument("unknown learner \"" + s +
                              "\" (expected classic, strategic-l2, strategic-l1, "
                              "unknown-l2, or unknown-l1-single)");
}

// ---------------------------------------------------------- learner wrapper --

Learner Learner::make(const LearnerConfig& cfg, std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("learner dimension must be >= 1");
  Learner L;
  L.cfg_ = cfg;
  switch (cfg.kind) {
    case LearnerKind::Classic:
      L.st_ = ClassicState{Vec(dim, 0.0), cfg.zero_policy};
      break;
    case LearnerKind::StrategicL2:
      if (!std::isfinite(cfg.alpha) || cfg.alpha < 0.0) {
        throw std::invalid_argument("strategic-l2 learner needs finite alpha >= 0");
      }
      L.st_ = L2State{Vec(dim, 0.0), cfg.alpha, cfg.zero_policy, cfg.faults};
      break;
    case LearnerKind::StrategicL1: {
      if (cfg.alphas.size() != dim) {
        throw std::invalid_argument("strategic-l1 learner needs one budget per coordinate");
      }
      for (double a : cfg.alphas) {
        if (!std::isfinite(a) || a < 0.0) {
          throw std::invalid_argument("strategic-l1 budgets must be finite and >= 0");
        }
      }
      if (!std::isfinite(cfg.R) || !(cfg.R > 0.0)) {
        throw std::invalid_argument("strategic-l1 learner needs finite R > 0");
      }
      L.st_ = L1State{Vec(dim, 0.0), cfg.alphas, cfg.R,
                      0,             false,      cfg.zero_policy, cfg.faults};
      break;
    }
    case LearnerKind::UnknownL2:
      if (!std::isfinite(cfg.R) || !std::isfinite(cfg.gamma)) {
        throw std::invalid_argument("unknown-l2 learner needs finite R and gamma");
      }
      L.st_ = make_unknown_cost_state(dim, cfg.R, cfg.gamma, cfg.zero_policy, cfg.faults);
      break;
    case LearnerKind::UnknownL1Single:
      if (!std::isfinite(cfg.R) || !std::isfinite(cfg.gamma)) {
        throw std::invalid_argument("unknown-l1-single learner needs finite R and gamma");
      }
      L.st_ = make_unknown_l1_state(dim, cfg.R, cfg.gamma, cfg.zero_policy, cfg.faults);
      break;
  }
  return L;
}

DecisionRule Learner::rule() const {
  return std::visit(overload{[](const ClassicState& s) { return classic_rule(s); },
                             [](const L2State& s) { return l2_rule(s); },
                             [](const L1State& s) { return l1_rule(s); },
                             [](const UnknownCostState& s) { return l2_rule(s.inner); },
                             [](const UnknownL1State& s) { return unknown_l1_rule(s); }},
                    st_);
}

StepResult Learner::step(const Vec& x, Label truth) {
  return std::visit(
      overload{[&](ClassicState& s) { return classic_step(s, x, truth); },
               [&](L2State& s) { return strategic_l2_step(s, x, truth); },
               [&](L1State& s) { return strategic_l1_step(s, x, truth); },
               [&](UnknownCostState& s) { return unknown_cost_controller_step(s, x, truth); },
               [&](UnknownL1State& s) {
                 return unknown_cost_l1_single_direction_step(s, x, truth);
               }},
      st_);
}

double Learner::alpha_published() const {
  return std::visit(
      overload{[](const ClassicState&) { return 0.0; },
               [](const L2State& s) { return s.alpha; },
               [](const L1State& s) { return l1_rule(s).threshold(); },
               [](const UnknownCostState& s) { return s.alpha_guess; },
               [](const UnknownL1State& s) { return s.alpha_guess; }},
      st_);
}

int Learner::phase() const {
  return std::visit(overload{[](const ClassicState&) { return 0; },
                             [](const L2State&) { return 0; },
                             [](const L1State&) { return 0; },
                             [](const UnknownCostState& s) { return s.phase_index; },
                             [](const UnknownL1State& s) { return s.phase_index; }},
                    st_);
}

nlohmann::json Learner::snapshot() const {
  json j;
  j["kind"] = to_string(cfg_.kind);
  std::visit(overload{[&](const ClassicState& s) {
                        j["w"] = vec_hex(s.w);
                        j["zero_policy"] = zero_policy_to_string(s.zero_policy);
                      },
                      [&](const L2State& s) {
                        j["w"] = vec_hex(s.w);
                        j["alpha"] = hex_num(s.alpha);
                        j["zero_policy"] = zero_policy_to_string(s.zero_policy);
                      },
                      [&](const L1State& s) {
                        j["w"] = vec_hex(s.w);
                        j["alphas"] = vec_hex(s.alphas);
                        j["R"] = hex_num(s.R);
                        j["dir_index"] = s.dir_index;
                        j["dir_valid"] = s.dir_valid;
                        j["zero_policy"] = zero_policy_to_string(s.zero_policy);
                      },
                      [&](const UnknownCostState& s) {
                        j["w"] = vec_hex(s.inner.w);
                        j["alpha_lo"] = hex_num(s.alpha_lo);
                        j["alpha_guess"] = hex_num(s.alpha_guess);
                        j["R"] = hex_num(s.R);
                        j["gamma"] = hex_num(s.gamma);
                        j["phase_mistakes"] = s.phase_mistakes;
                        j["phase_budget"] = s.phase_budget;
                        j["phase_index"] = s.phase_index;
                        j["zero_policy"] = zero_policy_to_string(s.inner.zero_policy);
                      },
                      [&](const UnknownL1State& s) {
                        j["w"] = vec_hex(s.w);
                        j["alpha_lo"] = hex_num(s.alpha_lo);
                        j["alpha_guess"] = hex_num(s.alpha_guess);
                        j["R"] = hex_num(s.R);
                        j["gamma"] = hex_num(s.gamma);
                        j["phase_mistakes"] = s.phase_mistakes;
                        j["phase_budget"] = s.phase_budget;
                        j["phase_index"] = s.phase_index;
                        j["zero_policy"] = zero_policy_to_string(s.zero_policy);
                      }},
             st_);
  return j;
}

Learner Learner::restore(const LearnerConfig& cfg, const nlohmann::json& snapshot) {
  const auto kind = learner_kind_from_string(snapshot.at("kind").get<std::string>());
  if (kind != cfg.kind) {
    throw std::invalid_argument("snapshot kind " + to_string(kind) +
                                " does not match configured " + to_string(cfg.kind));
  }
  const Vec w = vec_unhex(snapshot.at("w"));
  Learner L = Learner::make(cfg, w.size());
  const auto policy = zero_policy_from_string(snapshot.at("zero_policy").get<std::string>());
  std::visit(overload{[&](ClassicState& s) {
                        s.w = w;
                        s.zero_policy = policy;
                      },
                      [&](L2State& s) {
                        s.w = w;
                        s.alpha = parse_hex_num(snapshot.at("alpha"));
                        s.zero_policy = policy;
                      },
                      [&](L1State& s) {
                        s.w = w;
                        s.alphas = vec_unhex(snapshot.at("alphas"));
                        s.R = parse_hex_num(snapshot.at("R"));
                        s.dir_index = snapshot.at("dir_index").get<std::size_t>();
                        s.dir_valid = snapshot.at("dir_valid").get<bool>();
                        s.zero_policy = policy;
                      },
                      [&](UnknownCostState& s) {
                        s.inner.w = w;
                        s.alpha_lo = parse_hex_num(snapshot.at("alpha_lo"));
                        s.alpha_guess = parse_hex_num(snapshot.at("alpha_guess"));
                        s.inner.alpha = s.alpha_guess;
                        s.R = parse_hex_num(snapshot.at("R"));
                        s.gamma = parse_hex_num(snapshot.at("gamma"));
                        s.phase_mistakes = snapshot.at("phase_mistakes").get<long long>();
                        s.phase_budget = snapshot.at("phase_budget").get<long long>();
                        s.phase_index = snapshot.at("phase_index").get<int>();
                        s.inner.zero_policy = policy;
                      },
                      [&](UnknownL1State& s) {
                        s.w = w;
                        s.alpha_lo = parse_hex_num(snapshot.at("alpha_lo"));
                        s.alpha_guess = parse_hex_num(snapshot.at("alpha_guess"));
                        s.R = parse_hex_num(snapshot.at("R"));
                        s.gamma = parse_hex_num(snapshot.at("gamma"));
                        s.phase_mistakes = snapshot.at("phase_mistakes").get<long long>();
                        s.phase_budget = snapshot.at("phase_budget").get<long long>();
                        s.phase_index = snapshot.at("phase_index").get<int>();
                        s.zero_policy = policy;
                      }},
             L.st_);
  return L;
}

// ------------------------------------------------------------------ runner --

Transcript run_experiment(const LearnerConfig& learner, const AgentConfig& agent,
                          const std::vector<StreamRecord>& stream,
                          std::size_t max_rounds, StreamMeta meta) {
  Transcript out;
  out.learner = learner;
  out.agent = agent;
  out.stream = std::move(meta);
  const std::size_t n = std::min(stream.size(), max_rounds);
  if (n == 0) return out;

  const std::size_t d = stream[0].z.size();
  if (d == 0) throw std::invalid_argument("run_experiment: zero-dimensional stream");
  for (std::size_t i = 0; i < n; ++i) {
    if (stream[i].z.size() != d) {
      throw std::invalid_argument("run_experiment: dimension changes at round " +
                                  std::to_string(i));
    }
    require_finite(stream[i].z, "stream point");
  }
  if (out.stream.d == 0) out.stream.d = d;
  if (agent.kind == AgentKind::Rational) validate_cost_model(agent.cost, d);

  Learner L = Learner::make(learner, d);
  out.rounds.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const StreamRecord& rec = stream[i];
    const DecisionRule rule = L.rule();

    RoundRecord r;
    r.t = i;
    r.z = rec.z;
    r.truth = rec.label;
    r.rule_w = rule.w;
    r.rule_raw_threshold = rule.raw_threshold;
    r.rule_zero_positive = rule.zero_positive;
    r.alpha_published = L.alpha_published();
    r.phase = L.phase();

    if (agent.kind == AgentKind::Rational) {
      const Manipulation m = std::visit(
          overload{[&](const L2Cost& c) { return best_response_l2(rec.z, rule, c.alpha); },
                   [&](const WeightedL1Cost& c) {
                     return best_response_weighted_l1(rec.z, rule, c.alphas);
                   }},
          agent.cost);
      r.x = m.x;
      r.agent_cost = m.cost;
    } else {
      r.x = rec.z;  // replay: the stream already holds observed points
      r.agent_cost = 0.0;
    }

    const StepResult s = L.step(r.x, rec.label);
    r.prediction = s.prediction;
    r.mistake = s.mistake;
    r.x_tilde = s.update_point;
    r.event = s.event;
    r.rationality_flag = s.rationality_flag;
    r.correction_mus = s.correction_mus;
    r.eta = s.eta;
    r.w_after = L.rule().w;
    if (r.mistake) ++out.total_mistakes;
    out.rounds.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------- checkers --

std::vector<std::size_t> check_forbidden_region(const Transcript& t) {
  std::vector<std::size_t> bad;
  for (const RoundRecord& r : t.rounds) {
    const DecisionRule rule = rule_of(r);
    if (inside_margin_band(rule, r.x, rule.threshold())) bad.push_back(r.t);
  }
  return bad;
}

BoundCheck check_mistake_bound(const Transcript& t, const std::string& bound_id) {
  BoundCheck out;
  out.id = bound_id;
  out.observed = static_cast<long long>(t.total_mistakes);

  const auto need = [&](const std::optional<double>& v, const char* what) {
    if (!v || !(*v > 0.0)) {
      throw std::runtime_error("bound unverifiable: " + bound_id + " needs " + what);
    }
    return *v;
  };

  if (bound_id == "l2-known") {
    const double R = need(t.stream.R, "the stream norm cap R");
    const double g = need(t.stream.gamma, "a positive stream margin gamma");
    const double a = t.learner.alpha;
    out.bound = (R + a) * (R + a) / (g * g);
  } else if (bound_id == "l1-known") {
    const double R = need(t.stream.R, "the stream norm cap R");
    const double g = need(t.stream.gamma, "a positive stream margin gamma");
    if (t.learner.alphas.empty()) {
      throw std::runtime_error("bound unverifiable: l1-known needs learner budgets");
    }
    const double amax = *std::max_element(t.learner.alphas.begin(), t.learner.alphas.end());
    const double dd = static_cast<double>(t.stream.d);
    out.bound = (1.0 + (dd + 1.0) * (R + amax) * (R + amax)) / (g * g);
  } else if (bound_id == "unknown-total") {
    const double R = t.learner.R;
    const double g = t.learner.gamma;
    if (!(R > 0.0) || !(g > 0.0)) {
      throw std::runtime_error("bound unverifiable: unknown-total needs learner R and gamma");
    }
    const double per_phase = 4.0 * (R + R + g / 2.0) * (R + R + g / 2.0) / (g * g);
    const double phases = std::ceil(std::log2(2.0 * R / g)) + 2.0;
    out.bound = 2.0 * per_phase * phases;  // headroom for the +1 overflow mistakes
  } else {
    throw std::runtime_error("unknown bound id \"" + bound_id + "\"");
  }
  out.holds = leq_with_slack(static_cast<double>(out.observed), out.bound);
  return out;
}

std::optional<std::size_t> detect_cycle(const Transcript& t, std::size_t max_period) {
  const std::size_t n = t.rounds.size();
  for (std::size_t p = 1; p <= max_period; ++p) {
    if (n < 3 * p) break;
    bool match = true;
    for (std::size_t i = n - 3 * p; i + p < n && match; ++i) {
      match = t.rounds[i].w_after == t.rounds[i + p].w_after;
    }
    if (match) return p;
  }
  return std::nullopt;
}

// ------------------------------------------------------------------ audits --

namespace {

enum class RunMode { Exact, Window, Far, Over, Unclassified };

// Relation of the published budget to the agents' true one; decides which
// update guarantees apply to the round.
RunMode classify_mode(double alpha_pub, std::optional<double> alpha_true,
                      std::optional<double> gamma) {
  if (!alpha_true) return RunMode::Unclassified;
  if (nearly_equal(alpha_pub, *alpha_true)) return RunMode::Exact;
  if (alpha_pub > *alpha_true) return RunMode::Over;
  if (gamma && *gamma > 0.0 && leq_with_slack(*alpha_true - alpha_pub, *gamma / 2.0)) {
    return RunMode::Window;
  }
  return RunMode::Far;
}

// Raw-score gain the agent can buy with one unit of cost against this rule.
double reach_raw(const CostModel& cost, const DecisionRule& rule) {
  return std::visit(overload{[&](const L2Cost& c) { return c.alpha * rule.w_norm; },
                             [&](const WeightedL1Cost& c) {
                               double best = 0.0;
                               for (std::size_t j = 0; j < c.alphas.size(); ++j) {
                                 best = std::max(best, c.alphas[j] * std::abs(rule.w[j]));
                               }
                               return best;
                             }},
                    cost);
}

}  // namespace

AuditReport audit_invariants(const Transcript& t, const AuditOptions& opt) {
  AuditReport rep;
  const auto flag = [&](std::size_t round, const char* check, std::string detail) {
    rep.violations.push_back({round, check, std::move(detail)});
  };

  // fall back to what the transcript itself records
  std::optional<double> true_alpha = opt.true_alpha;
  std::optional<std::vector<double>> true_alphas = opt.true_alphas;
  if (t.agent.kind == AgentKind::Rational) {
    if (!true_alpha) {
      if (const auto* c = std::get_if<L2Cost>(&t.agent.cost)) true_alpha = c->alpha;
    }
    if (!true_alphas) {
      if (const auto* c = std::get_if<WeightedL1Cost>(&t.agent.cost)) true_alphas = c->alphas;
    }
  }
  // the stream's separator is only a certificate when separable; explicit
  // caller-provided directions are always honored
  std::optional<Vec> w_star = opt.w_star;
  if (!w_star && t.stream.separable) w_star = t.stream.w_star;
  std::optional<double> gamma = opt.gamma ? opt.gamma : t.stream.gamma;
  std::optional<double> R = opt.R ? opt.R : t.stream.R;
  const bool rational = t.agent.kind == AgentKind::Rational;

  const LearnerKind kind = t.learner.kind;
  const bool is_l1_kind = kind == LearnerKind::StrategicL1;
  const bool is_l1_single = kind == LearnerKind::UnknownL1Single;
  const bool strategic = kind != LearnerKind::Classic;

  // l1 separability needs the coordinatewise-nonnegative separator assumption
  bool w_star_nonneg = w_star.has_value();
  if (w_star) {
    for (double c : *w_star) w_star_nonneg = w_star_nonneg && c >= 0.0;
  }

  // mode classification compares the published scalar budget with the true
  // one; for the single-direction learner the true budget lives on e_1
  std::optional<double> mode_alpha = true_alpha;
  if (is_l1_single && true_alphas && !true_alphas->empty()) {
    mode_alpha = (*true_alphas)[0];
  }

  for (const RoundRecord& r : t.rounds) {
    const DecisionRule rule = rule_of(r);

    if (rational) {
      if (r.agent_cost > 1.0 + kEpsEq) {
        flag(r.t, "cost-cap", "agent paid " + csv_num(r.agent_cost));
      }
      if (r.agent_cost > 0.0 && !nearly_equal(dot(r.x, rule.w), rule.raw_threshold)) {
        flag(r.t, "threshold-landing",
             "paid move ends at raw score " + csv_num(dot(r.x, rule.w)) + " vs threshold " +
                 csv_num(rule.raw_threshold));
      }
      if (!rule.is_zero()) {
        // margins rational agents vacate: close enough to buy, not yet bought
        const double hi = rule.threshold();
        const double lo = hi - reach_raw(t.agent.cost, rule) / rule.w_norm;
        const double m = normalized_margin(rule.w, r.x);
        if (m > lo + kEpsEq && m < hi - kEpsEq) {
          flag(r.t, "vacated-band",
               "observed margin " + csv_num(m) + " inside (" + csv_num(lo) + ", " +
                   csv_num(hi) + ")");
        }
      }
      if (const auto* c = std::get_if<WeightedL1Cost>(&t.agent.cost)) {
        std::size_t moved = 0, moved_j = 0;
        for (std::size_t j = 0; j < r.x.size(); ++j) {
          if (r.x[j] != r.z[j]) {
            ++moved;
            moved_j = j;
          }
        }
        if (moved > 1) {
          flag(r.t, "axis-move", "movement on " + std::to_string(moved) + " coordinates");
        } else if (moved == 1 && !(c->alphas[moved_j] > 0.0)) {
          flag(r.t, "axis-move",
               "movement on zero-budget coordinate " + std::to_string(moved_j));
        }
      }
    }

    if (!strategic || !r.x_tilde) continue;
    ++rep.updates_audited;
    const Vec& xt = *r.x_tilde;
    const int s = label_sign(r.truth);

    RunMode mode = RunMode::Unclassified;
    if (is_l1_kind) {
      // known-budget multi-direction runs only; published == true assumed
      const auto* c = std::get_if<WeightedL1Cost>(&t.agent.cost);
      const bool budgets_match = !rational || (c && c->alphas == t.learner.alphas);
      mode = budgets_match ? RunMode::Exact : RunMode::Unclassified;
    } else {
      mode = classify_mode(r.alpha_published, mode_alpha, gamma);
    }

    // update geometry: mistakes update against the rule's own halfspace.
    // Overshoot and unclassified runs can legitimately update on dead-band
    // points (naturally placed or replayed); the claim excludes those.
    bool geometry_applies = true;
    if ((mode == RunMode::Over || mode == RunMode::Unclassified) && !rule.is_zero()) {
      const double m = normalized_margin(rule.w, r.x);
      const double hi = rule.threshold();
      geometry_applies = !(m > kEpsEq && m < hi - kEpsEq);
    }
    if (geometry_applies) {
      const double raw = dot(xt, rule.w);
      const bool ok = s > 0 ? leq_with_slack(raw, 0.0) : geq_with_slack(raw, 0.0);
      if (!ok) {
        flag(r.t, "update-geometry",
             std::string("surrogate lands on the wrong side: x_tilde.w = ") + csv_num(raw) +
                 " on a " + (s > 0 ? "positive" : "negative"));
      }
    }

    // surrogate separability and the potential argument, where guaranteed
    double sep_level = 0.0;
    if (mode == RunMode::Exact) sep_level = 1.0;
    if (mode == RunMode::Window) sep_level = 0.5;
    const bool sep_ok_to_check =
        w_star && sep_level > 0.0 && (!is_l1_kind || w_star_nonneg) &&
        (!is_l1_single || w_star_nonneg);
    if (sep_ok_to_check) {
      const double v = dot(xt, *w_star);
      const bool ok = s > 0 ? geq_with_slack(v, sep_level) : leq_with_slack(v, -sep_level);
      if (!ok) {
        flag(r.t, "surrogate-separability",
             "x_tilde.w_star = " + csv_num(v) + " misses the " + csv_num(sep_level) +
                 " margin on a " + (s > 0 ? "positive" : "negative"));
      }
      const double gain = dot(r.w_after, *w_star) - dot(rule.w, *w_star);
      if (!geq_with_slack(gain, sep_level)) {
        flag(r.t, "alignment-gain",
             "w.w_star grew by " + csv_num(gain) + ", needs " + csv_num(sep_level));
      }
      if (!geq_with_slack(dot(r.w_after, *w_star), 0.0)) {
        flag(r.t, "alignment-sign", "w.w_star = " + csv_num(dot(r.w_after, *w_star)));
      }
    }

    // norm growth cap per update
    if (R && mode != RunMode::Far && mode != RunMode::Unclassified) {
      double cap = 0.0;
      if (is_l1_kind) {
        const double amax = t.learner.alphas.empty()
                                ? 0.0
                                : *std::max_element(t.learner.alphas.begin(),
                                                    t.learner.alphas.end());
        const double dd = static_cast<double>(r.z.size());
        cap = (dd + 1.0) * (*R + amax) * (*R + amax) + 1.0;
      } else {
        double a_eff = 0.0;
        if (mode == RunMode::Exact) a_eff = mode_alpha.value_or(r.alpha_published);
        if (mode == RunMode::Window) a_eff = r.alpha_published + (gamma ? *gamma / 2.0 : 0.0);
        if (mode == RunMode::Over) a_eff = r.alpha_published;
        cap = (*R + a_eff) * (*R + a_eff);
      }
      const double growth = norm_sq(r.w_after) - norm_sq(rule.w);
      if (!leq_with_slack(growth, cap)) {
        flag(r.t, "norm-growth", "|w|^2 grew by " + csv_num(growth) + ", cap " + csv_num(cap));
      }
    }

    // weighted-l1 structural post-conditions
    if (is_l1_kind || is_l1_single) {
      for (std::size_t j = 0; j < r.w_after.size(); ++j) {
        if (r.w_after[j] < 0.0) {
          flag(r.t, "nonneg-coordinates",
               "w[" + std::to_string(j) + "] = " + csv_num(r.w_after[j]));
          break;
        }
      }
      if (r.correction_mus && R) {
        for (std::size_t j = 0; j < r.correction_mus->size(); ++j) {
          double budget_j = 0.0;
          if (is_l1_kind && j < t.learner.alphas.size()) budget_j = t.learner.alphas[j];
          if (is_l1_single && j == 0) budget_j = r.alpha_published;
          if (!leq_with_slack((*r.correction_mus)[j], *R + budget_j)) {
            flag(r.t, "correction-shift",
                 "mu[" + std::to_string(j) + "] = " + csv_num((*r.correction_mus)[j]) +
                     " exceeds R + budget = " + csv_num(*R + budget_j));
          }
        }
      }
    }
    if (is_l1_kind && r.eta && !is_zero(r.w_after)) {
      // direction must be the strict unique argmax whenever its gain is > 0
      double best = -1.0;
      int count = 0;
      for (std::size_t j = 0; j < r.w_after.size(); ++j) {
        const double v = t.learner.alphas[j] * r.w_after[j];
        if (v > best) {
          best = v;
          count = 1;
        } else if (v == best) {
          ++count;
        }
      }
      if (best > 0.0 && count != 1) {
        flag(r.t, "unique-direction",
             "argmax of alpha_j*w_j attained " + std::to_string(count) + " times");
      }
    }
  }
  return rep;
}

// ------------------------------------------------------------------ phases --

std::vector<PhaseSummary> phase_summaries(const Transcript& t) {
  std::vector<PhaseSummary> out;
  for (const RoundRecord& r : t.rounds) {
    if (out.empty() || out.back().phase != r.phase) {
      PhaseSummary p;
      p.phase = r.phase;
      p.alpha_guess = r.alpha_published;
      p.first_round = r.t;
      out.push_back(p);
    }
    PhaseSummary& p = out.back();
    p.last_round = r.t;
    if (r.mistake) ++p.mistakes;
    p.end_event = r.event;
  }
  return out;
}

UnknownRunCheck check_unknown_run(const Transcript& t, double true_alpha) {
  UnknownRunCheck out;
  const auto problem = [&](std::string s) {
    out.ok = false;
    out.problems.push_back(std::move(s));
  };

  const double R = t.learner.R;
  const double g = t.learner.gamma;
  if (t.learner.kind != LearnerKind::UnknownL2 &&
      t.learner.kind != LearnerKind::UnknownL1Single) {
    problem("not an unknown-budget run");
    return out;
  }
  if (!(R > 0.0) || !(g > 0.0)) {
    problem("learner config lacks R and gamma");
    return out;
  }

  out.event_limit =
      static_cast<long long>(std::ceil(std::log2(2.0 * R / g))) + 2;

  // reconstruct the guess trajectory from the recorded events
  double lo = 0.0, guess = 0.0;
  auto phases = phase_summaries(t);
  for (std::size_t k = 0; k < phases.size(); ++k) {
    PhaseSummary& p = phases[k];
    const bool last = k + 1 == phases.size();

    if (!nearly_equal(p.alpha_guess, guess)) {
      problem("phase " + std::to_string(p.phase) + " publishes " + csv_num(p.alpha_guess) +
              ", expected " + csv_num(guess));
    }
    if (!(lo <= guess + kEpsEq) || !(guess <= R + kEpsEq)) {
      problem("phase " + std::to_string(p.phase) + " breaks alpha_lo <= alpha' <= R");
    }

    // budget-relevant mistakes: the band-halt round never updates
    long long budget_mistakes = p.mistakes;
    if (p.end_event == PhaseEvent::PhaseDown) {
      const RoundRecord& r = t.rounds[p.last_round - t.rounds.front().t];
      if (r.mistake) --budget_mistakes;
    }

    const long long budget = mistake_budget(R, guess, g);
    const bool over = guess > true_alpha && !nearly_equal(guess, true_alpha);
    const bool window = !over && leq_with_slack(true_alpha - guess, g / 2.0);

    if (over) {
      const double prop_cap = (R + guess) * (R + guess) / (g * g) + 1.0;
      if (!leq_with_slack(static_cast<double>(budget_mistakes), prop_cap)) {
        problem("overshoot phase " + std::to_string(p.phase) + " made " +
                std::to_string(budget_mistakes) + " update mistakes, cap " +
                csv_num(prop_cap));
      }
      if (p.end_event == PhaseEvent::PhaseUp) {
        problem("overshoot phase " + std::to_string(p.phase) + " ended by budget overflow");
      }
    } else if (window) {
      if (p.end_event != PhaseEvent::None) {
        problem("settled phase " + std::to_string(p.phase) + " ended with an event");
      }
      if (!last) {
        problem("settled phase " + std::to_string(p.phase) + " is not the final phase");
      }
      if (budget_mistakes > budget) {
        problem("settled phase " + std::to_string(p.phase) + " made " +
                std::to_string(budget_mistakes) + " mistakes, budget " +
                std::to_string(budget));
      }
    } else {  // far undershoot
      if (p.end_event == PhaseEvent::PhaseDown) {
        problem("undershoot phase " + std::to_string(p.phase) + " ended by a band point");
      }
      if (budget_mistakes > budget + 1) {
        problem("undershoot phase " + std::to_string(p.phase) + " made " +
                std::to_string(budget_mistakes) + " mistakes, budget " +
                std::to_string(budget) + "+1");
      }
    }

    if (p.end_event == PhaseEvent::PhaseUp) {
      ++out.up_events;
      if (!(guess < true_alpha - g / 2.0 + kEpsEq)) {
        problem("raise fired at alpha' = " + csv_num(guess) + " though alpha - gamma/2 = " +
                csv_num(true_alpha - g / 2.0));
      }
      lo = guess;
      guess = std::min(std::max(2.0 * guess, g / 2.0), R);
    } else if (p.end_event == PhaseEvent::PhaseDown) {
      ++out.down_events;
      if (!over) {
        problem("bisect fired at alpha' = " + csv_num(guess) + " though alpha = " +
                csv_num(true_alpha));
      }
      guess = 0.5 * (lo + guess);
    } else if (!last) {
      problem("phase " + std::to_string(p.phase) + " ended without an event");
    }
  }

  if (out.up_events + out.down_events > out.event_limit) {
    problem("saw " + std::to_string(out.up_events + out.down_events) + " events, limit " +
            std::to_string(out.event_limit));
  }

  // the learner bisects exactly when it sees a vacated-band point
  for (const RoundRecord& r : t.rounds) {
    const DecisionRule rule = rule_of(r);
    const bool in_band = inside_margin_band(rule, r.x, rule.threshold());
    if (in_band != (r.event == PhaseEvent::PhaseDown)) {
      problem("round " + std::to_string(r.t) + ": band occupancy " +
              (in_band ? "without" : "with") + " a bisect event");
      break;
    }
  }
  return out;
}

// ------------------------------------------------------------------- files --

void write_transcript_csv(const std::string& path, const Transcript& t) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "t,z,x,x_tilde,prediction,truth,mistake,w_after,alpha_published,phase,event,"
         "agent_cost\n";
  for (const RoundRecord& r : t.rounds) {
    out << r.t << ',' << join_vec_csv(r.z) << ',' << join_vec_csv(r.x) << ','
        << (r.x_tilde ? join_vec_csv(*r.x_tilde) : std::string()) << ','
        << label_sign(r.prediction) << ',' << label_sign(r.truth) << ',' << (r.mistake ? 1 : 0)
        << ',' << join_vec_csv(r.w_after) << ',' << csv_num(r.alpha_published) << ','
        << r.phase << ',' << event_to_string(r.event) << ',' << csv_num(r.agent_cost) << '\n';
  }
  if (!out) throw std::runtime_error("write failed on " + path);
}

void write_transcript_jsonl(const std::string& path, const Transcript& t) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  json meta;
  meta["type"] = "meta";
  meta["format"] = "spl-transcript-v1";
  meta["learner"] = learner_cfg_to_json(t.learner);
  meta["agent"] = agent_cfg_to_json(t.agent);
  meta["stream"] = stream_meta_to_json(t.stream);
  meta["total_mistakes"] = t.total_mistakes;
  out << meta.dump() << '\n';
  for (const RoundRecord& r : t.rounds) out << round_to_json(r).dump() << '\n';
  if (!out) throw std::runtime_error("write failed on " + path);
}

Transcript read_transcript_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::size_t lineno = 0;
  Transcript t;
  bool have_meta = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": malformed JSON: " + e.what());
    }
    try {
      if (!have_meta) {
        if (!j.is_object() || j.value("type", "") != "meta") {
          throw std::runtime_error("first line must be the meta object");
        }
        if (j.value("format", "") != "spl-transcript-v1") {
          throw std::runtime_error("unsupported transcript format");
        }
        t.learner = learner_cfg_from_json(j.at("learner"));
        t.agent = agent_cfg_from_json(j.at("agent"));
        t.stream = stream_meta_from_json(j.at("stream"));
        t.total_mistakes = j.at("total_mistakes").get<std::size_t>();
        have_meta = true;
      } else {
        t.rounds.push_back(round_from_json(j));
      }
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!have_meta) throw std::runtime_error(path + ": empty transcript");
  return t;
}

bool replay_matches(const Transcript& t, std::string* first_mismatch) {
  std::vector<StreamRecord> stream;
  stream.reserve(t.rounds.size());
  for (const RoundRecord& r : t.rounds) stream.push_back({r.z, r.truth});

  const Transcript rerun =
      run_experiment(t.learner, t.agent, stream, stream.size(), t.stream);

  const auto mismatch = [&](std::size_t i, const char* what) {
    if (first_mismatch != nullptr) {
      *first_mismatch = "round " + std::to_string(i) + ": " + what + " differs";
    }
    return false;
  };
  if (rerun.rounds.size() != t.rounds.size()) return mismatch(0, "round count");
  for (std::size_t i = 0; i < t.rounds.size(); ++i) {
    const RoundRecord& a = t.rounds[i];
    const RoundRecord& b = rerun.rounds[i];
    if (a.x != b.x) return mismatch(i, "observed point");
    if (a.x_tilde != b.x_tilde) return mismatch(i, "update point");
    if (a.prediction != b.prediction) return mismatch(i, "prediction");
    if (a.mistake != b.mistake) return mismatch(i, "mistake flag");
    if (a.rule_w != b.rule_w) return mismatch(i, "rule weights");
    if (a.rule_raw_threshold != b.rule_raw_threshold) return mismatch(i, "rule threshold");
    if (a.w_after != b.w_after) return mismatch(i, "updated weights");
    if (a.alpha_published != b.alpha_published) return mismatch(i, "published budget");
    if (a.phase != b.phase) return mismatch(i, "phase");
    if (a.event != b.event) return mismatch(i, "event");
    if (a.agent_cost != b.agent_cost) return mismatch(i, "agent cost");
  }
  return true;
}

json summarize(const Transcript& t, std::size_t cycle_max_period) {
  json j;
  j["rounds"] = t.rounds.size();
  j["mistakes"] = t.total_mistakes;
  int up = 0, down = 0, flags = 0;
  for (const RoundRecord& r : t.rounds) {
    up += r.event == PhaseEvent::PhaseUp;
    down += r.event == PhaseEvent::PhaseDown;
    flags += r.rationality_flag;
  }
  j["phase_up_events"] = up;
  j["phase_down_events"] = down;
  j["phases"] = phase_summaries(t).size();
  j["rationality_flags"] = flags;
  j["forbidden_rounds"] = check_forbidden_region(t).size();
  const auto cycle = detect_cycle(t, cycle_max_period);
  j["cycle_period"] = cycle ? json(*cycle) : json();
  if (!t.rounds.empty()) {
    j["final_alpha_published"] = t.rounds.back().alpha_published;
    j["final_w"] = t.rounds.back().w_after;
  }
  j["bounds"] = json::object();
  const auto try_bound = [&](const char* id) {
    try {
      const BoundCheck b = check_mistake_bound(t, id);
      j["bounds"][id] = {{"bound", b.bound}, {"observed", b.observed}, {"holds", b.holds}};
    } catch (const std::runtime_error&) {
      // not evaluable for this run; leave it out
    }
  };
  switch (t.learner.kind) {
    case LearnerKind::StrategicL2: try_bound("l2-known"); break;
    case LearnerKind::StrategicL1: try_bound("l1-known"); break;
    case LearnerKind::UnknownL2:
    case LearnerKind::UnknownL1Single: try_bound("unknown-total"); break;
    default: break;
  }
  return j;
}

}  // namespace spl

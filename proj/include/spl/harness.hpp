#pragma once
// Experiment driver and transcript tooling. The harness owns the true points;
// learners only ever see what the agents hand them. Checks report rather
// than abort: a violated invariant is data.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "spl/agents.hpp"
#include "spl/core.hpp"
#include "spl/learners.hpp"
#include "spl/streams.hpp"

namespace spl {

// --------------------------------------------------------- configurations --

enum class LearnerKind { Classic, StrategicL2, StrategicL1, UnknownL2, UnknownL1Single };

std::string to_string(LearnerKind k);
LearnerKind learner_kind_from_string(const std::string& s);

struct LearnerConfig {
  LearnerKind kind = LearnerKind::Classic;
  double alpha = 0.0;           // StrategicL2: published budget
  std::vector<double> alphas;   // StrategicL1: published budgets
  double R = 0.0;               // StrategicL1 / Unknown*: norm cap
  double gamma = 0.0;           // Unknown*: separation margin
  ZeroWeightPolicy zero_policy = ZeroWeightPolicy::PredictPositive;
  FaultInjection faults;
};

enum class AgentKind { Rational, Replay };

struct AgentConfig {
  AgentKind kind = AgentKind::Rational;
  CostModel cost = L2Cost{0.0};  // true budgets (Rational only)
};

struct StreamMeta {
  std::string source;  // fixture id, "generated", or a file path
  std::size_t d = 0;
  std::optional<double> R;
  std::optional<double> gamma;
  std::optional<Vec> w_star;
  bool separable = false;
};

// ------------------------------------------------------- learner wrapper ---

class Learner {
 public:
  static Learner make(const LearnerConfig& cfg, std::size_t dim);
  static Learner restore(const LearnerConfig& cfg, const nlohmann::json& snapshot);

  DecisionRule rule() const;
  StepResult step(const Vec& x, Label truth);
  double alpha_published() const;  // normalized threshold in force
  int phase() const;
  nlohmann::json snapshot() const;
  const LearnerConfig& config() const { return cfg_; }

 private:
  LearnerConfig cfg_;
  std::variant<ClassicState, L2State, L1State, UnknownCostState, UnknownL1State> st_;
};

// -------------------------------------------------------------- transcript --

struct RoundRecord {
  std::size_t t = 0;
  Vec z;                        // true point (harness-side knowledge)
  Vec x;                        // observed point
  std::optional<Vec> x_tilde;   // update vector, present iff an update happened
  Label prediction = Label::Positive;
  Label truth = Label::Positive;
  bool mistake = false;
  Vec rule_w;                   // rule published for this round
  double rule_raw_threshold = 0.0;
  bool rule_zero_positive = true;
  Vec w_after;
  double alpha_published = 0.0;
  int phase = 0;
  PhaseEvent event = PhaseEvent::None;
  double agent_cost = 0.0;
  bool rationality_flag = false;
  std::optional<std::vector<double>> correction_mus;
  std::optional<double> eta;
};

struct Transcript {
  LearnerConfig learner;
  AgentConfig agent;
  StreamMeta stream;
  std::vector<RoundRecord> rounds;
  std::size_t total_mistakes = 0;
};

Transcript run_experiment(const LearnerConfig& learner, const AgentConfig& agent,
                          const std::vector<StreamRecord>& stream,
                          std::size_t max_rounds, StreamMeta meta = {});

// --------------------------------------------------------------- checkers --

// Rounds whose observed point sits strictly inside (0, published threshold).
std::vector<std::size_t> check_forbidden_region(const Transcript& t);

struct BoundCheck {
  std::string id;
  double bound = 0.0;
  long long observed = 0;
  bool holds = false;
};

// ids: "l2-known" = (R+alpha)^2/gamma^2, "l1-known" =
// (1+(d+1)(R+alpha_max)^2)/gamma^2, "unknown-total" =
// 8(2R+gamma/2)^2/gamma^2 * (ceil(log2(2R/gamma)) + 2).
// Throws when the transcript lacks the metadata to evaluate the formula.
BoundCheck check_mistake_bound(const Transcript& t, const std::string& bound_id);

// Smallest period p <= max_period such that the trailing w_after sequence
// repeats exactly over at least three periods.
std::optional<std::size_t> detect_cycle(const Transcript& t, std::size_t max_period = 16);

struct AuditViolation {
  std::size_t round = 0;
  std::string check;
  std::string detail;
};

struct AuditOptions {
  std::optional<Vec> w_star;
  std::optional<double> true_alpha;                 // l2 agents
  std::optional<std::vector<double>> true_alphas;   // weighted-l1 agents
  std::optional<double> gamma;
  std::optional<double> R;
};

struct AuditReport {
  std::vector<AuditViolation> violations;
  std::size_t updates_audited = 0;
  bool ok() const { return violations.empty(); }
};

// Replays the update-rule guarantees over a finished run: surrogate
// separability, update geometry, per-update potential gains and growth caps,
// correction shift caps, coordinate nonnegativity, direction uniqueness,
// agent cost caps and threshold landings, and emptiness of the margin bands
// rational agents vacate. Checks outside their preconditions are skipped.
AuditReport audit_invariants(const Transcript& t, const AuditOptions& opt);

struct PhaseSummary {
  int phase = 0;
  double alpha_guess = 0.0;
  long long mistakes = 0;
  PhaseEvent end_event = PhaseEvent::None;  // None while still open
  std::size_t first_round = 0;
  std::size_t last_round = 0;
};

std::vector<PhaseSummary> phase_summaries(const Transcript& t);

struct UnknownRunCheck {
  bool ok = true;
  std::vector<std::string> problems;
  int up_events = 0;
  int down_events = 0;
  long long event_limit = 0;
};

// Search-correctness audit for an unknown-budget run against the agents' true
// budget: event direction vs the hidden alpha, event-count cap, per-phase
// mistake budgets, total-mistake cap, and band/event coincidence.
UnknownRunCheck check_unknown_run(const Transcript& t, double true_alpha);

// ----------------------------------------------------------------- output --

void write_transcript_csv(const std::string& path, const Transcript& t);
void write_transcript_jsonl(const std::string& path, const Transcript& t);
Transcript read_transcript_jsonl(const std::string& path);

// Re-run a transcript's configuration over its own recorded observations'
// true points; true iff every round reproduces bit-for-bit.
bool replay_matches(const Transcript& t, std::string* first_mismatch = nullptr);

nlohmann::json summarize(const Transcript& t, std::size_t cycle_max_period = 16);

// Deterministic double formatting shared by the writers.
std::string csv_num(double v);
std::string hex_num(double v);
double parse_hex_num(const nlohmann::json& j);

}  // namespace spl

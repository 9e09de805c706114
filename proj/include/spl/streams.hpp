#pragma once
// Labeled point streams: seeded separable generators, the two worked
// fixtures, and JSONL persistence.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spl/core.hpp"
#include "spl/learners.hpp"

namespace spl {

struct StreamRecord {
  Vec z;  // true (pre-manipulation) point
  Label label = Label::Positive;
};

struct StreamSpec {
  std::size_t d = 2;
  double R = 1.0;      // norm cap for every z
  double gamma = 0.5;  // separation margin; realized |w_star| = 1/gamma
  std::size_t length = 0;
  std::uint64_t seed = 0;
  double label_mix = 0.5;  // per-round probability of a positive label
  bool nonneg_w_star = false;
  std::optional<Vec> w_star;  // optional direction; rescaled to norm 1/gamma
};

struct GeneratedStream {
  std::vector<StreamRecord> records;
  Vec w_star;  // realized separator, |w_star| = 1/gamma
};

// Rejection-samples z uniformly in the R-ball until |z.w_star| >= 1, with the
// target sign of each record drawn from label_mix. Deterministic per seed.
GeneratedStream generate_separable_stream(const StreamSpec& spec);

enum class Example1Variant { Original, Footnote };

// Opener A, then (B positive, C negative) repeating. Original: A = (1,0)
// positive; footnote: A = (-1,0) negative.
std::vector<StreamRecord> example1_stream(Example1Variant variant, std::size_t rounds);

// Inseparable 2-d fixture: one positive opener, then a 4-cycle that keeps
// every shifted-threshold run updating forever.
std::vector<StreamRecord> example2_stream(std::size_t rounds);

// Fixture = stream + the run metadata it is normally driven with.
struct Fixture {
  std::string id;
  std::vector<StreamRecord> records;
  CostModel cost;
  std::optional<Vec> w_star;  // certified separator when one exists
  bool separable = true;
  ZeroWeightPolicy learner_start = ZeroWeightPolicy::PredictPositive;
  double R = 0.0;
  double gamma = 0.0;  // 0 when no separator is certified
};

// Known ids: "example1", "example1-footnote", "example2".
Fixture make_fixture(const std::string& id, std::size_t rounds);
std::vector<std::string> fixture_ids();

// JSONL: one {"z": [...], "label": +/-1} object per line, LF-terminated.
std::vector<StreamRecord> load_stream(const std::string& path);
void save_stream(const std::string& path, const std::vector<StreamRecord>& records);

}  // namespace spl

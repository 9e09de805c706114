#include "spl/streams.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "json.hpp"

namespace spl {

namespace {

// Distribution transforms are hand-rolled: the mt19937_64 engine is fully
// specified, the std:: distributions are not, and streams must reproduce
// byte-for-byte from their seed.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double gaussian(std::mt19937_64& rng) {
  // polar Box-Muller, spare discarded
  for (;;) {
    const double u = 2.0 * uniform01(rng) - 1.0;
    const double v = 2.0 * uniform01(rng) - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

Vec uniform_in_ball(std::mt19937_64& rng, std::size_t d, double radius) {
  for (;;) {
    Vec g(d);
    for (auto& c : g) c = gaussian(rng);
    const double n = norm(g);
    if (n == 0.0) continue;
    const double r = radius * std::pow(uniform01(rng), 1.0 / static_cast<double>(d));
    return scaled(g, r / n);
  }
}

}  // namespace

GeneratedStream generate_separable_stream(const StreamSpec& spec) {
  if (spec.d == 0) throw std::invalid_argument("stream spec: d must be >= 1");
  if (!(spec.R > 0.0)) throw std::invalid_argument("stream spec: R must be > 0");
  if (!(spec.gamma > 0.0)) throw std::invalid_argument("stream spec: gamma must be > 0");
  if (spec.R < spec.gamma) {
    throw std::invalid_argument(
        "stream spec: infeasible, R < gamma leaves no room for the margin");
  }
  if (!(spec.label_mix >= 0.0 && spec.label_mix <= 1.0)) {
    throw std::invalid_argument("stream spec: label_mix must be in [0, 1]");
  }

  std::mt19937_64 rng(spec.seed);
  Vec w_star;
  if (spec.w_star.has_value()) {
    w_star = *spec.w_star;
    if (w_star.size() != spec.d) throw std::invalid_argument("stream spec: w_star dimension mismatch");
    const double n = norm(w_star);
    if (n == 0.0) throw std::invalid_argument("stream spec: w_star must be nonzero");
    if (spec.nonneg_w_star) {
      for (double c : w_star) {
        if (c < 0.0) throw std::invalid_argument("stream spec: w_star has a negative coordinate");
      }
    }
    w_star = scaled(w_star, 1.0 / (spec.gamma * n));
  } else {
    for (;;) {
      w_star.assign(spec.d, 0.0);
      for (auto& c : w_star) {
        c = gaussian(rng);
        if (spec.nonneg_w_star) c = std::abs(c);
      }
      const double n = norm(w_star);
      if (n == 0.0) continue;
      w_star = scaled(w_star, 1.0 / (spec.gamma * n));
      break;
    }
  }

  GeneratedStream out;
  out.w_star = w_star;
  out.records.reserve(spec.length);
  constexpr int kMaxRejects = 10000;
  for (std::size_t t = 0; t < spec.length; ++t) {
    const bool want_positive = uniform01(rng) < spec.label_mix;
    StreamRecord rec;
    int tries = 0;
    for (;;) {
      if (++tries > kMaxRejects) {
        throw std::runtime_error(
            "generate_separable_stream: margin too demanding, rejection sampling "
            "exhausted (R/gamma leaves too little mass at |z.w*| >= 1)");
      }
      Vec z = uniform_in_ball(rng, spec.d, spec.R);
      const double m = dot(z, w_star);
      if (want_positive ? m >= 1.0 : m <= -1.0) {
        rec.z = std::move(z);
        rec.label = want_positive ? Label::Positive : Label::Negative;
        break;
      }
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

std::vector<StreamRecord> example1_stream(Example1Variant variant, std::size_t rounds) {
  const StreamRecord opener =
      variant == Example1Variant::Original
          ? StreamRecord{{1.0, 0.0}, Label::Positive}
          : StreamRecord{{-1.0, 0.0}, Label::Negative};
  const StreamRecord b{{0.0, -1.0}, Label::Positive};
  const StreamRecord c{{-0.5, -1.0}, Label::Negative};
  std::vector<StreamRecord> out;
  out.reserve(rounds);
  for (std::size_t t = 0; t < rounds; ++t) {
    if (t == 0) out.push_back(opener);
    else out.push_back(t % 2 == 1 ? b : c);
  }
  return out;
}

std::vector<StreamRecord> example2_stream(std::size_t rounds) {
  const StreamRecord opener{{-4.0, -3.0}, Label::Positive};
  const StreamRecord cyc[4] = {
      {{-1.0, -7.0}, Label::Negative},
      {{3.0, 2.0}, Label::Positive},
      {{-1.0, 7.0}, Label::Negative},
      {{3.0, -2.0}, Label::Positive},
  };
  std::vector<StreamRecord> out;
  out.reserve(rounds);
  for (std::size_t t = 0; t < rounds; ++t) {
    if (t == 0) out.push_back(opener);
    else out.push_back(cyc[(t - 1) % 4]);
  }
  return out;
}

std::vector<std::string> fixture_ids() {
  return {"example1", "example1-footnote", "example2"};
}

Fixture make_fixture(const std::string& id, std::size_t rounds) {
  Fixture f;
  f.id = id;
  if (id == "example1" || id == "example1-footnote") {
    const auto variant = id == "example1" ? Example1Variant::Original
                                          : Example1Variant::Footnote;
    f.records = example1_stream(variant, rounds);
    f.cost = L2Cost{0.5};
    f.w_star = Vec{4.0, -1.0};
    f.separable = true;
    // the original narration starts all-negative; the footnote variant is the
    // adaptation that works with the all-positive start
    f.learner_start = variant == Example1Variant::Original
                          ? ZeroWeightPolicy::PredictNegative
                          : ZeroWeightPolicy::PredictPositive;
    f.R = std::sqrt(1.25);
    f.gamma = 1.0 / std::sqrt(17.0);
    return f;
  }
  if (id == "example2") {
    f.records = example2_stream(rounds);
    f.cost = L2Cost{5.0};
    f.w_star = Vec{1.0, 0.0};  // reference direction only; the stream is inseparable
    f.separable = false;
    f.learner_start = ZeroWeightPolicy::PredictNegative;
    f.R = std::sqrt(50.0);
    f.gamma = 0.0;
    return f;
  }
  throw std::invalid_argument("unknown fixture id: " + id);
}

std::vector<StreamRecord> load_stream(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open stream file: " + path);
  std::vector<StreamRecord> out;
  std::string line;
  std::size_t line_no = 0;
  std::size_t d = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed JSON (" + e.what() + ")");
    }
    if (!j.is_object() || !j.contains("z") || !j.contains("label") || !j["z"].is_array()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected {\"z\": [...], \"label\": +/-1}");
    }
    StreamRecord rec;
    for (const auto& c : j["z"]) {
      if (!c.is_number()) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": z coordinates must be numbers");
      }
      rec.z.push_back(c.get<double>());
    }
    require_finite(rec.z, "load_stream");
    if (rec.z.empty()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": empty z");
    }
    if (d == 0) d = rec.z.size();
    if (rec.z.size() != d) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": dimension changed from " + std::to_string(d) +
                               " to " + std::to_string(rec.z.size()));
    }
    if (!j["label"].is_number_integer()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": label must be +1 or -1");
    }
    try {
      rec.label = label_from_sign(j["label"].get<int>());
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(std::move(rec));
  }
  return out;
}

void save_stream(const std::string& path, const std::vector<StreamRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write stream file: " + path);
  for (const auto& rec : records) {
    nlohmann::json j;
    j["z"] = rec.z;
    j["label"] = label_sign(rec.label);
    out << j.dump() << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace spl

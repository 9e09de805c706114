#include "doctest.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "spl/streams.hpp"

using namespace spl;

namespace {

// temp file helper; tests run from the build tree, relative paths are fine
struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("tmp_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

// -------------------------------------------------------------- fixtures --

TEST_CASE("example1 stream repeats (B, C) after the opener") {
  const auto orig = example1_stream(Example1Variant::Original, 6);
  REQUIRE(orig.size() == 6);
  CHECK(orig[0].z == Vec{1.0, 0.0});
  CHECK(orig[0].label == Label::Positive);
  const auto foot = example1_stream(Example1Variant::Footnote, 6);
  CHECK(foot[0].z == Vec{-1.0, 0.0});
  CHECK(foot[0].label == Label::Negative);

  for (const auto& s : {orig, foot}) {
    // odd rounds: B = (0,-1) positive; even rounds >= 2: C = (-0.5,-1) negative
    CHECK(s[1].z == Vec{0.0, -1.0});
    CHECK(s[1].label == Label::Positive);
    CHECK(s[2].z == Vec{-0.5, -1.0});
    CHECK(s[2].label == Label::Negative);
    for (std::size_t t = 1; t + 2 < s.size(); ++t) {
      CHECK(s[t].z == s[t + 2].z);
      CHECK(s[t].label == s[t + 2].label);
    }
  }
}

TEST_CASE("example2 stream: opener plus a 4-cycle") {
  const auto s = example2_stream(9);
  REQUIRE(s.size() == 9);
  CHECK(s[0].z == Vec{-4.0, -3.0});
  CHECK(s[0].label == Label::Positive);
  CHECK(s[1].z == Vec{-1.0, -7.0});
  CHECK(s[1].label == Label::Negative);
  CHECK(s[2].z == Vec{3.0, 2.0});
  CHECK(s[2].label == Label::Positive);
  CHECK(s[3].z == Vec{-1.0, 7.0});
  CHECK(s[3].label == Label::Negative);
  CHECK(s[4].z == Vec{3.0, -2.0});
  CHECK(s[4].label == Label::Positive);
  for (std::size_t t = 1; t + 4 < s.size(); ++t) {
    CHECK(s[t].z == s[t + 4].z);
    CHECK(s[t].label == s[t + 4].label);
  }
}

TEST_CASE("fixture metadata matches the streams") {
  const Fixture orig = make_fixture("example1", 10);
  CHECK(orig.separable);
  CHECK(orig.learner_start == ZeroWeightPolicy::PredictNegative);
  CHECK(std::get<L2Cost>(orig.cost).alpha == 0.5);
  REQUIRE(orig.w_star.has_value());
  CHECK(*orig.w_star == Vec{4.0, -1.0});
  CHECK(orig.R == doctest::Approx(std::sqrt(1.25)));
  CHECK(orig.gamma == doctest::Approx(1.0 / std::sqrt(17.0)));
  // the separator certifies every record: label * (z . w*) >= 1
  for (const auto& rec : orig.records) {
    CHECK(label_sign(rec.label) * dot(rec.z, *orig.w_star) >= 1.0);
  }

  const Fixture foot = make_fixture("example1-footnote", 10);
  CHECK(foot.learner_start == ZeroWeightPolicy::PredictPositive);
  CHECK(foot.records[0].label == Label::Negative);

  const Fixture spiral = make_fixture("example2", 10);
  CHECK_FALSE(spiral.separable);
  CHECK(spiral.gamma == 0.0);
  CHECK(std::get<L2Cost>(spiral.cost).alpha == 5.0);
  CHECK(spiral.R == doctest::Approx(std::sqrt(50.0)));
  // the reference direction certifies all records except the opener
  REQUIRE(spiral.w_star.has_value());
  std::size_t violations = 0;
  for (const auto& rec : spiral.records) {
    if (label_sign(rec.label) * dot(rec.z, *spiral.w_star) < 1.0) ++violations;
  }
  CHECK(violations == 1);

  CHECK_THROWS_AS(make_fixture("example3", 5), std::invalid_argument);
  CHECK(fixture_ids().size() == 3);
}

// ------------------------------------------------------------- generator --

TEST_CASE("generated streams respect the cap and the margin") {
  StreamSpec spec;
  spec.d = 3;
  spec.R = 5.0;
  spec.gamma = 0.5;
  spec.length = 400;
  spec.seed = 7;
  const GeneratedStream g = generate_separable_stream(spec);
  REQUIRE(g.records.size() == 400);
  CHECK(norm(g.w_star) == doctest::Approx(1.0 / spec.gamma));
  bool saw_pos = false;
  bool saw_neg = false;
  for (const auto& rec : g.records) {
    CHECK(norm(rec.z) <= spec.R + 1e-12);
    CHECK(label_sign(rec.label) * dot(rec.z, g.w_star) >= 1.0);
    (rec.label == Label::Positive ? saw_pos : saw_neg) = true;
  }
  CHECK(saw_pos);
  CHECK(saw_neg);
}

TEST_CASE("generation is deterministic per seed") {
  StreamSpec spec;
  spec.d = 2;
  spec.R = 4.0;
  spec.gamma = 1.0;
  spec.length = 50;
  spec.seed = 123;
  const GeneratedStream a = generate_separable_stream(spec);
  const GeneratedStream b = generate_separable_stream(spec);
  REQUIRE(a.records.size() == b.records.size());
  CHECK(a.w_star == b.w_star);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].z == b.records[i].z);
    CHECK(a.records[i].label == b.records[i].label);
  }
  spec.seed = 124;
  const GeneratedStream c = generate_separable_stream(spec);
  bool differs = a.w_star != c.w_star;
  for (std::size_t i = 0; !differs && i < a.records.size(); ++i) {
    differs = a.records[i].z != c.records[i].z;
  }
  CHECK(differs);
}

TEST_CASE("label mix pins the sign draw") {
  StreamSpec spec;
  spec.d = 2;
  spec.R = 3.0;
  spec.gamma = 0.5;
  spec.length = 60;
  spec.seed = 9;
  spec.label_mix = 0.0;
  for (const auto& rec : generate_separable_stream(spec).records) {
    CHECK(rec.label == Label::Negative);
  }
  spec.label_mix = 1.0;
  for (const auto& rec : generate_separable_stream(spec).records) {
    CHECK(rec.label == Label::Positive);
  }
}

TEST_CASE("nonnegative separators have nonnegative coordinates") {
  StreamSpec spec;
  spec.d = 4;
  spec.R = 3.0;
  spec.gamma = 0.5;
  spec.length = 20;
  spec.seed = 77;
  spec.nonneg_w_star = true;
  const GeneratedStream g = generate_separable_stream(spec);
  for (double c : g.w_star) CHECK(c >= 0.0);
}

TEST_CASE("an explicit direction is rescaled to norm 1/gamma") {
  StreamSpec spec;
  spec.d = 2;
  spec.R = 4.0;
  spec.gamma = 0.5;
  spec.length = 10;
  spec.seed = 5;
  spec.w_star = Vec{3.0, 4.0};
  const GeneratedStream g = generate_separable_stream(spec);
  CHECK(g.w_star[0] == doctest::Approx(1.2));
  CHECK(g.w_star[1] == doctest::Approx(1.6));
}

TEST_CASE("generator guards") {
  StreamSpec spec;
  spec.d = 2;
  spec.R = 1.0;
  spec.gamma = 0.5;
  spec.length = 1;

  StreamSpec bad = spec;
  bad.d = 0;
  CHECK_THROWS_AS(generate_separable_stream(bad), std::invalid_argument);
  bad = spec;
  bad.R = 0.0;
  CHECK_THROWS_AS(generate_separable_stream(bad), std::invalid_argument);
  bad = spec;
  bad.gamma = -1.0;
  CHECK_THROWS_AS(generate_separable_stream(bad), std::invalid_argument);
  bad = spec;
  bad.R = 0.25;  // R < gamma
  CHECK_THROWS_AS(generate_separable_stream(bad), std::invalid_argument);
  bad = spec;
  bad.label_mix = 1.5;
  CHECK_THROWS_AS(generate_separable_stream(bad), std::invalid_argument);
  bad = spec;
  bad.w_star = Vec{1.0, 0.0, 0.0};  // dimension mismatch
  CHECK_THROWS_AS(generate_separable_stream(bad), std::invalid_argument);
  bad = spec;
  bad.w_star = Vec{0.0, 0.0};
  CHECK_THROWS_AS(generate_separable_stream(bad), std::invalid_argument);
  bad = spec;
  bad.nonneg_w_star = true;
  bad.w_star = Vec{1.0, -1.0};
  CHECK_THROWS_AS(generate_separable_stream(bad), std::invalid_argument);

  // R == gamma is formally allowed but leaves measure zero for the margin:
  // rejection sampling must give up loudly instead of spinning
  bad = spec;
  bad.d = 1;
  bad.R = 1.0;
  bad.gamma = 1.0;
  CHECK_THROWS_AS(generate_separable_stream(bad), std::runtime_error);
}

TEST_CASE("ten thousand rounds generate quickly") {
  StreamSpec spec;
  spec.d = 5;
  spec.R = 10.0;
  spec.gamma = 0.5;
  spec.length = 10000;
  spec.seed = 2024;
  const auto t0 = std::chrono::steady_clock::now();
  const GeneratedStream g = generate_separable_stream(spec);
  const auto t1 = std::chrono::steady_clock::now();
  CHECK(g.records.size() == 10000);
  CHECK(std::chrono::duration<double>(t1 - t0).count() < 1.0);
}

// ------------------------------------------------------------------ jsonl --

TEST_CASE("stream files round-trip exactly") {
  StreamSpec spec;
  spec.d = 3;
  spec.R = 2.0;
  spec.gamma = 0.5;
  spec.length = 25;
  spec.seed = 31337;
  const GeneratedStream g = generate_separable_stream(spec);

  TempFile f("roundtrip.jsonl");
  save_stream(f.path, g.records);
  const auto loaded = load_stream(f.path);
  REQUIRE(loaded.size() == g.records.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded[i].z == g.records[i].z);  // exact doubles through JSON
    CHECK(loaded[i].label == g.records[i].label);
  }
}

TEST_CASE("loader accepts plain records and skips blank lines") {
  TempFile f("plain.jsonl");
  write_text(f.path, "{\"z\":[-1,-7],\"label\":-1}\n\n{\"z\":[3,2],\"label\":1}\n");
  const auto recs = load_stream(f.path);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].z == Vec{-1.0, -7.0});
  CHECK(recs[0].label == Label::Negative);
  CHECK(recs[1].label == Label::Positive);
}

TEST_CASE("loader reports the offending line") {
  TempFile f("bad.jsonl");
  write_text(f.path, "{\"z\":[1,2],\"label\":1}\nnot json\n");
  try {
    load_stream(f.path);
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }

  write_text(f.path, "{\"z\":[1,2],\"label\":0}\n");
  CHECK_THROWS_AS(load_stream(f.path), std::runtime_error);

  write_text(f.path, "{\"z\":[1,2],\"label\":1}\n{\"z\":[1],\"label\":1}\n");
  CHECK_THROWS_AS(load_stream(f.path), std::runtime_error);  // dimension change

  write_text(f.path, "{\"z\":[],\"label\":1}\n");
  CHECK_THROWS_AS(load_stream(f.path), std::runtime_error);

  write_text(f.path, "{\"z\":[\"a\"],\"label\":1}\n");
  CHECK_THROWS_AS(load_stream(f.path), std::runtime_error);

  CHECK_THROWS_AS(load_stream("no_such_file.jsonl"), std::runtime_error);
}

TEST_CASE("empty files load as empty streams") {
  TempFile f("empty.jsonl");
  write_text(f.path, "");
  CHECK(load_stream(f.path).empty());
}

// End-to-end checks of the spl binary: spawns the real executable and
// inspects exit codes, stdout, and written artifacts.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace {

struct CliResult {
  int code = -1;
  std::string out;  // stdout + stderr
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(SPL_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

nlohmann::json parse_summary(const std::string& text) {
  return nlohmann::json::parse(text);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

bool exists(const std::string& path) { return std::ifstream(path).good(); }

struct Cleanup {
  std::vector<std::string> paths;
  ~Cleanup() {
    for (const auto& p : paths) std::remove(p.c_str());
  }
  const char* add(std::string p) {
    paths.push_back(std::move(p));
    return paths.back().c_str();
  }
};

}  // namespace

TEST_CASE("cycling fixture runs report their mistake counts") {
  CliResult r = run_cli("run --learner classic --fixture example1-footnote --rounds 202");
  REQUIRE(r.code == 0);
  auto s = parse_summary(r.out);
  CHECK(s["rounds"] == 202);
  CHECK(s["mistakes"] == 201);
  CHECK(s["cycle_period"] == 2);

  r = run_cli("run --learner classic --fixture example1-footnote --rounds 201");
  REQUIRE(r.code == 0);
  CHECK(parse_summary(r.out)["mistakes"] == 200);
}

TEST_CASE("the spiral fixture cycles with period four") {
  Cleanup c;
  const std::string csv = c.add("cli_spiral.csv");
  const CliResult r = run_cli(
      "run --learner strategic-l2 --fixture example2 --rounds 401 --out " + csv);
  REQUIRE(r.code == 0);
  const auto s = parse_summary(r.out);
  CHECK(s["mistakes"] == 401);
  CHECK(s["cycle_period"] == 4);
  const std::string text = slurp(csv);
  std::size_t lines = 0;
  for (char ch : text) lines += ch == '\n';
  CHECK(lines == 402);  // header + one line per round
}

TEST_CASE("usage problems exit with code 2") {
  CHECK(run_cli("run --learner classic").code == 2);  // no stream source
  CHECK(run_cli("run --learner classic --fixture example1").code == 2);  // no --rounds
  CHECK(run_cli("run --learner classic --fixture example1 --d 2 --R 1 --gamma 0.5 "
                "--rounds 5").code == 2);  // two sources
  CHECK(run_cli("run --learner warp-drive --fixture example1 --rounds 5").code == 2);
  CHECK(run_cli("run --learner classic --fixture example1 --rounds 5 --agent psychic")
            .code == 2);
  CHECK(run_cli("run --learner classic --fixture example1 --rounds 5 --zero-start maybe")
            .code == 2);
  CHECK(run_cli("run --learner strategic-l1 --d 2 --R 2 --gamma 0.5 --rounds 5")
            .code == 2);  // missing --alphas
  // unknown-budget learners facing rational agents need the hidden budget
  CHECK(run_cli("run --learner unknown-l2 --d 2 --R 2 --gamma 0.5 --rounds 5").code == 2);
  CHECK(run_cli("frobnicate").code != 0);
  CHECK(run_cli("verify --suite no-such-suite").code == 2);
  CHECK(run_cli("gen --d 2 --R 0.25 --gamma 0.5 --rounds 5 --out cli_nope.jsonl").code == 2);
}

TEST_CASE("io problems exit with code 3") {
  CHECK(run_cli("run --learner classic --stream cli_no_such_stream.jsonl --rounds 5")
            .code == 3);
  CHECK(run_cli("replay --transcript cli_no_such_transcript.jsonl").code == 3);
  CHECK(run_cli("run --config cli_no_such_config.json --learner classic --fixture "
                "example1 --rounds 5").code == 3);
}

TEST_CASE("unknown-l2 without a margin is a usage error") {
  Cleanup c;
  const std::string path = c.add("cli_bare_stream.jsonl");
  write_text(path, "{\"z\":[1,0],\"label\":1}\n{\"z\":[0,1],\"label\":-1}\n");
  // no sidecar: R and gamma are unknown, the learner cannot be configured
  const CliResult r = run_cli("run --learner unknown-l2 --stream " + path +
                              " --rounds 2 --agent-alpha 0.5 --R 2");
  CHECK(r.code == 2);
  CHECK(r.out.find("gamma") != std::string::npos);
}

TEST_CASE("gen writes a stream plus sidecar that runs inherit") {
  Cleanup c;
  const std::string path = c.add("cli_gen.jsonl");
  c.add("cli_gen.jsonl.meta.json");
  const CliResult g = run_cli("gen --d 2 --R 2 --gamma 0.5 --rounds 40 --seed 9 --out " + path);
  REQUIRE(g.code == 0);
  CHECK(g.out.find("wrote 40 records") != std::string::npos);
  REQUIRE(exists(path));
  REQUIRE(exists(path + ".meta.json"));
  const auto side = nlohmann::json::parse(slurp(path + ".meta.json"));
  CHECK(side["format"] == "spl-stream-meta-v1");
  CHECK(side["d"] == 2);
  CHECK(side["separable"] == true);

  // unknown-l2 pulls R and gamma from the sidecar
  const CliResult r = run_cli("run --learner unknown-l2 --stream " + path +
                              " --rounds 40 --agent-alpha 1");
  REQUIRE(r.code == 0);
  const auto s = parse_summary(r.out);
  CHECK(s["rounds"] == 40);
}

TEST_CASE("seeded runs are byte deterministic, flag or environment") {
  Cleanup c;
  const std::string a = c.add("cli_det_a.csv");
  const std::string b = c.add("cli_det_b.csv");
  const std::string base =
      "run --learner strategic-l2 --d 2 --R 2 --gamma 0.5 --rounds 120 --alpha 1";
  REQUIRE(run_cli(base + " --seed 77 --out " + a).code == 0);
  REQUIRE(run_cli(base + " --seed 77 --out " + b).code == 0);
  const std::string bytes = slurp(a);
  CHECK_FALSE(bytes.empty());
  CHECK(bytes == slurp(b));

  // same seed through SPL_SEED instead of the flag
  const std::string e = c.add("cli_det_env.csv");
  setenv("SPL_SEED", "77", 1);
  const CliResult renv = run_cli(base + " --out " + e);
  unsetenv("SPL_SEED");
  REQUIRE(renv.code == 0);
  CHECK(slurp(e) == bytes);

  const std::string d = c.add("cli_det_d.csv");
  REQUIRE(run_cli(base + " --seed 78 --out " + d).code == 0);
  CHECK(slurp(d) != bytes);
}

TEST_CASE("transcripts replay bit-for-bit and tampering is caught") {
  Cleanup c;
  const std::string path = c.add("cli_replay.jsonl");
  REQUIRE(run_cli("run --learner strategic-l2 --d 2 --R 2 --gamma 0.5 --rounds 80 "
                  "--alpha 1 --seed 5 --jsonl " + path).code == 0);
  CliResult r = run_cli("replay --transcript " + path);
  CHECK(r.code == 0);
  CHECK(r.out.find("exact match") != std::string::npos);

  // flip one recorded mistake flag; the rerun must notice
  std::string text = slurp(path);
  const auto pos = text.find("\"mistake\":false");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 15, "\"mistake\":true ");
  write_text(path, text);
  r = run_cli("replay --transcript " + path);
  CHECK(r.code == 1);
  CHECK(r.out.find("MISMATCH") != std::string::npos);
}

TEST_CASE("sweeps emit one row per cell and seed") {
  Cleanup c;
  const std::string out = c.add("cli_sweep.csv");
  const CliResult r = run_cli(
      "sweep --d-grid 2,3,5 --R-grid 1,2,4 --gamma-grid 0.5 --alpha-grid 0.5 "
      "--seeds 5 --rounds 120 --seed 3 --out " + out);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("wrote 45 rows") != std::string::npos);

  std::ifstream f(out);
  std::string line;
  REQUIRE(std::getline(f, line));
  CHECK(line == "d,R,gamma,alpha,seed,rounds,mistakes,bound,holds,forbidden");
  std::size_t rows = 0;
  while (std::getline(f, line)) {
    ++rows;
    // last two columns: the bound held and the forbidden band stayed empty
    CHECK(line.rfind(",1,0") == line.size() - 4);
  }
  CHECK(rows == 45);
}

TEST_CASE("config files feed flags and the command line wins") {
  Cleanup c;
  const std::string cfg = c.add("cli_cfg.json");
  write_text(cfg,
             "{\"learner\": \"classic\", \"fixture\": \"example1-footnote\", "
             "\"rounds\": 202}\n");
  CliResult r = run_cli("run --config " + cfg);
  REQUIRE(r.code == 0);
  CHECK(parse_summary(r.out)["mistakes"] == 201);

  r = run_cli("run --config " + cfg + " --rounds 10");
  REQUIRE(r.code == 0);
  const auto s = parse_summary(r.out);
  CHECK(s["rounds"] == 10);
  CHECK(s["mistakes"] == 9);
}

TEST_CASE("verify runs its fixture suite clean") {
  const CliResult r = run_cli("verify --suite fixtures --seeds 3");
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(r.out.find("verify(fixtures):") != std::string::npos);
}

TEST_CASE("help exits zero and names the subcommands") {
  const CliResult r = run_cli("--help");
  CHECK(r.code == 0);
  for (const char* sub : {"run", "gen", "replay", "sweep", "verify"}) {
    CHECK(r.out.find(sub) != std::string::npos);
  }
}

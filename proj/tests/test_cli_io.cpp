#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "nlspc/records.hpp"

using namespace nlspc;
namespace fs = std::filesystem;

namespace {
std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
}  // namespace

TEST_CASE("configuration parsing", "[io]") {
  RunConfig cfg = RunConfig::from_text(R"(
# run setup
[problem]
p = 3.0
mu = 0.5        ; inline comment
[sweep]
extents = 6, 8, 10, 12
[output]
dir = out
threads = 2
)");
  REQUIRE(cfg.get_num("problem.p", 0.0) == 3.0);
  REQUIRE(cfg.get_num("problem.mu", 0.0) == 0.5);
  REQUIRE(cfg.get_int("output.threads", 1) == 2);
  REQUIRE(cfg.get_str("output.dir", "") == "out");
  auto extents = cfg.get_list("sweep.extents", {});
  REQUIRE(extents == std::vector<double>{6.0, 8.0, 10.0, 12.0});
  REQUIRE(cfg.get_num("missing.key", 7.5) == 7.5);

  SECTION("hash is stable and order-insensitive") {
    RunConfig cfg2 = RunConfig::from_text(
        "[output]\nthreads = 2\ndir = out\n[sweep]\nextents = 6, 8, 10, 12\n"
        "[problem]\nmu = 0.5\np = 3.0\n");
    REQUIRE(cfg.hash() == cfg2.hash());
  }
  SECTION("overrides change the hash") {
    RunConfig cfg3 = cfg;
    cfg3.set("problem.mu", "0.6");
    REQUIRE(cfg.hash() != cfg3.hash());
  }
  SECTION("malformed input is rejected") {
    REQUIRE_THROWS_AS(RunConfig::from_text("[problem\np = 3\n"),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(RunConfig::from_text("just a token\n"),
                      std::invalid_argument);
    RunConfig bad = RunConfig::from_text("[problem]\np = abc\n");
    REQUIRE_THROWS(bad.get_num("problem.p", 0.0));
  }
}

TEST_CASE("validation precedes any solve", "[io]") {
  REQUIRE_THROWS_AS(ProblemParams(2.0, 1.0), std::invalid_argument);
}

TEST_CASE("solve records serialize deterministically", "[io]") {
  auto run_once = [] {
    ProblemParams prm(3.0, 1.0);
    auto g = build_grid(48, 96, 8.0, 40.0);
    SolverOptions o;
    SolveResult r = solve_ground(prm, g, reduced_ground_guess(prm, g), o);
    return to_json(r).dump();
  };
  std::string a = run_once();
  std::string b = run_once();
  REQUIRE(a == b);
}

TEST_CASE("output sink stages everything behind the manifest", "[io]") {
  fs::path base = fs::temp_directory_path() / "nlspc_io_test";
  fs::remove_all(base);
  RunConfig cfg = RunConfig::from_text("[problem]\np = 3.0\n");

  SECTION("writes records, files and the manifest") {
    OutputSink sink((base / "run1").string(), cfg, "check");
    sink.add_record(json{{"x", 1.5}});
    std::vector<double> xs{1.0, 2.0}, ys{3.0, 4.0};
    sink.add_dat("curve.dat", "x  y", xs, ys);
    REQUIRE(sink.flush());
    REQUIRE(fs::exists(base / "run1" / "records.jsonl"));
    REQUIRE(fs::exists(base / "run1" / "curve.dat"));
    REQUIRE(fs::exists(base / "run1" / "manifest.json"));
    json man = json::parse(slurp(base / "run1" / "manifest.json"));
    REQUIRE(man["config_hash"] == cfg.hash());
    REQUIRE(man["failures"].empty());
  }
  SECTION("identical content twice is byte-identical") {
    for (const char* d : {"a", "b"}) {
      OutputSink sink((base / d).string(), cfg, "check");
      sink.add_record(json{{"value", 0.1 + 0.2}});
      REQUIRE(sink.flush());
    }
    REQUIRE(slurp(base / "a" / "records.jsonl") ==
            slurp(base / "b" / "records.jsonl"));
  }
  SECTION("an unusable directory leaves no partial writes") {
    fs::create_directories(base);
    std::ofstream(base / "blocker") << "x";
    OutputSink sink((base / "blocker" / "sub").string(), cfg, "check");
    sink.add_record(json{{"x", 1}});
    std::string err;
    REQUIRE(!sink.flush(&err));
    REQUIRE(!err.empty());
    REQUIRE(!fs::exists(base / "blocker" / "sub"));
  }
  fs::remove_all(base);
}

TEST_CASE("command line runs end to end", "[io]") {
  if (!fs::exists("./nlspc")) {
    WARN("nlspc binary not found next to the test runner; skipping");
    return;
  }
  fs::path out = fs::temp_directory_path() / "nlspc_cli_test";
  fs::remove_all(out);
  std::string cmd = "./nlspc check --out " + (out / "chk").string() + " > /dev/null";
  REQUIRE(std::system(cmd.c_str()) == 0);
  REQUIRE(fs::exists(out / "chk" / "manifest.json"));
  fs::remove_all(out);
}

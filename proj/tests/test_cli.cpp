#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "geowalk/config.hpp"
#include "geowalk/errors.hpp"

using namespace geowalk;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("geowalk_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run_config(const std::string& text, const fs::path& dir, CliOverrides overrides = {}) {
  overrides.output_dir = dir.string();
  std::ostringstream out, err;
  const int code = run_text(text, overrides, out, err);
  return {code, out.str(), err.str()};
}

const char* kSample = R"(# sampling demo
[run]
mode = sample
manifold = sphere:2
body = cap:north:1.0471975511965976
seed = 11

[walk]
delta = 0.3
override_delta = true
max_steps = 3000
burn_in = 100
thin = 10
chains = 2
)";

}  // namespace

TEST_CASE("config grammar") {
  const auto cfg = ConfigFile::parse("[a]\nx = 1 ; note\ny=two words\n# comment\n[b]\nflag = yes\n");
  CHECK(cfg.get_int("a", "x") == 1);
  CHECK(cfg.get_string("a", "y") == "two words");
  CHECK(cfg.get_bool("b", "flag", false));
  CHECK(cfg.get_real("b", "missing", 2.5) == 2.5);
  CHECK_THROWS_AS(cfg.get_real("a", "missing"), ConfigError);
  CHECK_THROWS_AS(cfg.get_int("a", "y"), ConfigError);
  CHECK_THROWS_AS(ConfigFile::parse("x = 1\n"), ConfigError);
  CHECK_THROWS_AS(ConfigFile::parse("[a]\nx = 1\nx = 2\n"), ConfigError);
  try {
    ConfigFile::parse("[a]\nx = 1\nnot a pair\n");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 3);
  }
  CHECK(cfg.unused_keys().empty());
}

TEST_CASE("built-in targets") {
  const Manifold s2 = Manifold::sphere(2);
  const auto cap = ConvexBody::spherical_cap(s2, {Eigen::Vector3d(0, 0, 1)}, 1.0);
  const auto d = parse_target(cap, "distance_to:north");
  CHECK(d.lipschitz == 1.0);
  CHECK(d.min_value.value() == 0.0);
  CHECK(d.f({Eigen::Vector3d(1, 0, 0)}) == doctest::Approx(M_PI / 2));
  const auto sq = parse_target(cap, "sqdist_to:north");
  CHECK(sq.lipschitz == doctest::Approx(2.0));
  CHECK_THROWS(parse_target(cap, "linear:1,0,0"));
  CHECK_THROWS(parse_target(cap, "bogus:1"));

  const auto box = ConvexBody::euclidean_box(Manifold::euclidean(2), Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 2));
  const auto lin = parse_target(box, "linear:1,-1");
  CHECK(lin.min_value.value() == doctest::Approx(-2.0));
}

TEST_CASE("list of built-ins") {
  const std::string text = list_builtins();
  CHECK(text.find("sphere:<n>") != std::string::npos);
  CHECK(text.find("cap:") != std::string::npos);
  CHECK(text.find("rev_iso") != std::string::npos);
}

TEST_CASE("sample mode writes rows tagged with the config hash") {
  const auto dir = scratch("sample");
  const auto result = run_config(kSample, dir);
  REQUIRE(result.code == 0);
  CHECK(result.out.find("sample:") == 0);
  std::ifstream in(dir / "samples.jsonl");
  std::string line;
  int rows = 0;
  std::string hash;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    if (hash.empty()) hash = j["config_hash"];
    CHECK(j["config_hash"] == hash);
    CHECK(j["coords"].size() == 3);
    ++rows;
  }
  CHECK(rows == 2 * 290);
  CHECK(hash.size() == 16);
  const std::string summary = slurp(dir / "summary.csv");
  CHECK(summary.find(hash) != std::string::npos);
}

TEST_CASE("reruns are byte identical and the seed matters") {
  const auto a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
  REQUIRE(run_config(kSample, a).code == 0);
  CliOverrides jobs;
  jobs.jobs = 2;
  REQUIRE(run_config(kSample, b, jobs).code == 0);
  CHECK(slurp(a / "samples.jsonl") == slurp(b / "samples.jsonl"));
  CHECK(slurp(a / "summary.csv") == slurp(b / "summary.csv"));
  CliOverrides seed;
  seed.seed = 12;
  REQUIRE(run_config(kSample, c, seed).code == 0);
  CHECK(slurp(a / "samples.jsonl") != slurp(c / "samples.jsonl"));
}

TEST_CASE("zero steps give an empty sample file") {
  const auto dir = scratch("empty");
  const auto result = run_config("[run]\nmode = sample\nmanifold = sphere:2\nbody = cap:north:1\n[walk]\nmax_steps = 0\n", dir);
  CHECK(result.code == 0);
  CHECK(fs::exists(dir / "samples.jsonl"));
  CHECK(fs::file_size(dir / "samples.jsonl") == 0);
}

TEST_CASE("configuration errors exit with code 2") {
  const auto dir = scratch("errors");
  const auto bad_manifold = run_config("[run]\nmode = sample\nmanifold = sphere:-1\nbody = cap:north:1\n", dir);
  CHECK(bad_manifold.code == 2);
  CHECK(bad_manifold.err.find("run.manifold") != std::string::npos);
  CHECK(bad_manifold.err.find("line 3") != std::string::npos);
  CHECK(run_config("[run]\nmode = dance\n", dir).code == 2);
  CHECK(run_config("[run]\nmode = sample\nmanifold = sphere:2\n", dir).code == 2);
  CHECK(run_config("[run]\nmode = anneal\nmanifold = sphere:2\nbody = cap:north:1\n[gibbs]\ntarget = nope:1\n", dir)
            .code == 2);
  // step size above the safe bound without the override flag
  CHECK(run_config("[run]\nmode = sample\nmanifold = sphere:2\nbody = cap:north:1\n[walk]\ndelta = 0.5\nmax_steps = 5\n",
                   dir)
            .code == 2);
  CliOverrides allow;
  allow.override_delta = true;
  CHECK(run_config("[run]\nmode = sample\nmanifold = sphere:2\nbody = cap:north:1\n[walk]\ndelta = 0.5\nmax_steps = 5\n",
                   dir, allow)
            .code == 0);
}

TEST_CASE("anneal mode writes a trace and results") {
  const auto dir = scratch("anneal");
  const char* text = R"([run]
mode = anneal
manifold = sphere:2
body = cap:north:1.2
seed = 5
[gibbs]
target = distance_to:north
[anneal]
steps_per_phase = 300
trials = 2
)";
  const auto result = run_config(text, dir);
  REQUIRE(result.code == 0);
  const std::string trace = slurp(dir / "trace.csv");
  CHECK(trace.rfind("config_hash,trial,phase,T,steps,rejections,best_f,final_f\n", 0) == 0);
  std::ifstream in(dir / "result.jsonl");
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["value"].get<double>() >= 0.0);
    ++rows;
  }
  CHECK(rows == 2);
  const auto again = scratch("anneal_again");
  REQUIRE(run_config(text, again).code == 0);
  CHECK(slurp(dir / "trace.csv") == slurp(again / "trace.csv"));
  CHECK(slurp(dir / "result.jsonl") == slurp(again / "result.jsonl"));
}

TEST_CASE("diagnose on the quadrature checks") {
  const auto dir = scratch("diagnose");
  const auto result = run_config("[run]\nmode = diagnose\n[diagnose]\nchecks = numerical, rn_kv\ninstances = 10\n", dir);
  CHECK(result.code == 0);
  std::ifstream in(dir / "reports.jsonl");
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["passed"] == true);
    CHECK(j.contains("config_hash"));
    ++rows;
  }
  CHECK(rows == 20);
  CHECK(run_config("[run]\nmode = diagnose\n[diagnose]\nchecks = nonsense\n", dir).code == 2);
}

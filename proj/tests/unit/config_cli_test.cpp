#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "gkdv/commands.hpp"
#include "gkdv/config.hpp"
#include "gkdv/error.hpp"

using namespace gkdv;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("gkdv_cli_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GKDV_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path write_config(const fs::path& dir, const json& j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump();
  return p;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("defaults") {
    const RunConfig c = parse_config(json::object());
    CHECK(c.p == 6);
    CHECK(c.speeds == std::vector<double>{1.0});
    CHECK(c.grid.n == 4096);
  }

  TEST_CASE("unknown keys are errors at every level") {
    CHECK_THROWS_AS(parse_config({{"bogus", 1}}), ConfigError);
    CHECK_THROWS_AS(parse_config({{"tube", {{"radius", 1}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config({{"grid", {{"L", 64}, {"N", 128}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config({{"ensemble", {{{"c", 1.0}, {"x", 0.0}}}}}), ConfigError);
  }

  TEST_CASE("invalid values") {
    CHECK_THROWS_AS(parse_config({{"grid", {{"L", 64}, {"n", 100}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config({{"speeds", {1.3, 0.7}}}), ConfigError);
    CHECK_THROWS_AS(parse_config({{"p", "six"}}), ConfigError);
    CHECK_THROWS_AS(parse_config({{"window", {{"T0", 10}, {"Sn", 5}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config({{"verify_only", {13}}}), ConfigError);
  }

  TEST_CASE("explicit ensemble sets the speeds") {
    const RunConfig c = parse_config({{"ensemble", {{{"c", 0.7}, {"x0", -10}}, {{"c", 1.3}, {"x0", 10}}}}});
    CHECK(c.speeds == std::vector<double>{0.7, 1.3});
    CHECK(c.ensemble[1].x0 == 10.0);
  }

  TEST_CASE("serialization round trip") {
    RunConfig c = parse_config({{"p", 7}, {"speeds", {0.5, 1.0}}, {"window", {{"Sn_list", {20, 22}}}}});
    const json j = to_json(c);
    CHECK(to_json(parse_config(j)) == j);
  }
}

TEST_SUITE("cli") {
  TEST_CASE("thread count precedence") {
    ::unsetenv("GKDV_THREADS");
    CHECK(resolve_threads(std::nullopt, 3) == 3);
    ::setenv("GKDV_THREADS", "5", 1);
    CHECK(resolve_threads(std::nullopt, 3) == 5);
    CHECK(resolve_threads(std::size_t{2}, 3) == 2);
    ::setenv("GKDV_THREADS", "junk", 1);
    CHECK(resolve_threads(std::nullopt, 3) == 3);
    ::unsetenv("GKDV_THREADS");
  }

  TEST_CASE("profile succeeds and echoes the resolved config") {
    const fs::path d = scratch_dir("profile");
    const fs::path cfg = write_config(d, {{"p", 6}, {"grid", {{"L", 96}, {"n", 1024}}}, {"profile", {{"c", {1.0}}}}});
    CHECK(run_cli("profile --config " + cfg.string() + " --out " + (d / "out").string()) == 0);
    CHECK(fs::exists(d / "out" / "config.resolved.json"));
    CHECK(fs::exists(d / "out" / "profile.json"));
    CHECK(fs::exists(d / "out" / "profile_c1.csv"));
  }

  TEST_CASE("configuration problems exit with 2") {
    const fs::path d = scratch_dir("config");
    const fs::path bad = write_config(d, {{"p", 6}, {"bogus", true}});
    CHECK(run_cli("profile --config " + bad.string() + " --out " + (d / "out").string()) == 2);
    CHECK(run_cli("profile --config " + (d / "missing.json").string()) == 2);
    CHECK(run_cli("profile") == 2);
    CHECK(run_cli("frobnicate --config " + bad.string()) == 2);
    // tails wrap on a short domain
    const fs::path wrap = write_config(d, {{"grid", {{"L", 16}, {"n", 256}}}, {"profile", {{"c", {0.5}}}}});
    CHECK(run_cli("profile --config " + wrap.string() + " --out " + (d / "out").string()) == 2);
  }

  TEST_CASE("subcritical spectrum exits with 3 and writes a diagnostic") {
    const fs::path d = scratch_dir("spectrum");
    const fs::path cfg = write_config(d, {{"p", 4}, {"spectrum_grid", {{"L", 64}, {"n", 1024}}}});
    CHECK(run_cli("spectrum --config " + cfg.string() + " --out " + (d / "out").string()) == 3);
    REQUIRE(fs::exists(d / "out" / "diagnostic.json"));
    std::ifstream f(d / "out" / "diagnostic.json");
    const json j = json::parse(f);
    CHECK(j.at("command") == "spectrum");
    CHECK(j.at("message").get<std::string>().find("no positive real eigenvalue") != std::string::npos);
  }

  TEST_CASE("evolve writes a trajectory") {
    const fs::path d = scratch_dir("evolve");
    const fs::path cfg = write_config(
        d, {{"grid", {{"L", 128}, {"n", 4096}}}, {"speeds", {0.7, 1.3}}, {"evolver", {{"t0", 0.0}, {"t1", 0.2}}}});
    CHECK(run_cli("evolve --config " + cfg.string() + " --out " + (d / "out").string() + " --threads 1") == 0);
    CHECK(fs::exists(d / "out" / "trajectory.csv"));
    CHECK(fs::exists(d / "out" / "final.snap"));
  }
}

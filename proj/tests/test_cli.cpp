#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "ptfoucault/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using ptfoucault::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ptfoucault_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

// Restores the output-directory variable however the test exits.
struct OutDirGuard {
  explicit OutDirGuard(const std::string& value) { setenv(ptfoucault::cli::kOutDirEnv, value.c_str(), 1); }
  ~OutDirGuard() { unsetenv(ptfoucault::cli::kOutDirEnv); }
};

}  // namespace

TEST_CASE("repeated runs are byte-identical") {
  const std::vector<std::vector<std::string>> cmds = {
      {"trajectory", "--n0", "1", "--f0", "0.5", "--omega", "2", "--t-max", "3", "--dt", "0.1"},
      {"wn", "--f0", "1", "--omega", "1/3", "--t-max", "2", "--dt", "0.25", "--numeric"},
      {"oracle", "--n0", "1", "--f0", "0.5", "--omega", "2", "--t-max", "0.5", "--dt", "0.01",
       "--N", "32", "--record-every", "10"},
      {"classify", "--n0", "3", "--f0", "1", "--omega", "2"},
  };
  for (const auto& c : cmds) {
    CAPTURE(c.front());
    const Result a = invoke(c);
    const Result b = invoke(c);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK_FALSE(a.out.empty());
  }
}

TEST_CASE("trajectory CSV header and first row") {
  const Result r = invoke({"trajectory", "--n0", "1", "--f0", "0.5", "--omega", "2", "--t-max", "1", "--dt", "0.5"});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  CHECK(header == "t,x_mean,p_mean,var_x,var_p,radius,theta");
  // t = 0: the initial coherent state sits at x = sqrt2 n0.
  CHECK(first.rfind("0,", 0) == 0);
  const double x0 = std::stod(first.substr(2, first.find(',', 2) - 2));
  CHECK(x0 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("config round-trip") {
  ptfoucault::cli::RunConfig cfg;
  cfg.subcommand = "oracle";
  cfg.n0 = 1.25;
  cfg.F0 = 0.1;
  cfg.omega = 2.0 / 3.0;
  cfg.N = 96;
  cfg.theta0 = -3.0;
  cfg.method = "taylor";
  cfg.precision = "quad";
  cfg.seed = 42;
  const auto back = ptfoucault::cli::config_from_json(ptfoucault::cli::config_to_json(cfg));
  CHECK(back == cfg);

  CHECK_THROWS_AS(ptfoucault::cli::config_from_json("{\"bogus\": 1}"), std::invalid_argument);
  CHECK_THROWS_AS(ptfoucault::cli::config_from_json("{\"N\": \"many\"}"), std::invalid_argument);
  CHECK_THROWS(ptfoucault::cli::config_from_json("{not json"));
}

TEST_CASE("config file drives a run") {
  const fs::path dir = scratch("config");
  std::ofstream(dir / "good.json") << R"({"subcommand": "classify", "n0": 3, "F0": 1, "omega": 2})";
  const Result ok = invoke({"--config", (dir / "good.json").string(), "classify"});
  CHECK(ok.code == 0);
  CHECK(ok.out == invoke({"classify", "--n0", "3", "--f0", "1", "--omega", "2"}).out);

  std::ofstream(dir / "bad.json") << R"({"n0": "three"})";
  const Result bad = invoke({"--config", (dir / "bad.json").string(), "classify"});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("malformed config") != std::string::npos);

  CHECK(invoke({"--config", (dir / "missing.json").string(), "classify"}).code == 1);
}

TEST_CASE("exit codes") {
  CHECK(invoke({"classify", "--n0", "1", "--f0", "1", "--omega", "2"}).code == 0);
  CHECK(invoke({"classify", "--no-such-flag"}).code == 1);
  CHECK(invoke({"no-such-command"}).code == 1);
  CHECK(invoke({"trajectory", "--N", "x"}).code == 1);

  // omega = -1 is the secular case: refused unless the limit is requested.
  const Result sec = invoke({"trajectory", "--n0", "1", "--f0", "1", "--omega", "-1", "--t-max", "1", "--dt", "0.5"});
  CHECK(sec.code == 1);
  CHECK_FALSE(sec.err.empty());
  CHECK(invoke({"trajectory", "--n0", "1", "--f0", "1", "--omega", "-1", "--t-max", "1", "--dt", "0.5",
                "--secular-limit"}).code == 0);

  // An absurd tolerance makes the comparison fail.
  const Result fail = invoke({"compare", "--n0", "1", "--f0", "0.5", "--omega", "2", "--t-max", "0.5",
                              "--dt", "0.01", "--N", "32", "--compare-tol", "1e-300"});
  CHECK(fail.code == 2);
  CHECK(json::parse(fail.out)["pass"] == false);
}

TEST_CASE("compare passes on the reference scenario") {
  const Result r = invoke({"compare", "--n0", "1", "--f0", "0.5", "--omega", "2", "--t-max", "12.566370614359172",
                           "--dt", "0.001", "--N", "64"});
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["pass"] == true);
  CHECK(j["max_abs_dx"].get<double>() <= 1e-5);
  CHECK(j["max_abs_dp"].get<double>() <= 1e-5);
}

TEST_CASE("figures writes JSON and SVG") {
  const fs::path dir = scratch("figures");
  const Result r = invoke({"figures", "--set", "fig1a", "--out", dir.string()});
  CHECK(r.code == 0);
  REQUIRE(fs::exists(dir / "fig1a.json"));
  REQUIRE(fs::exists(dir / "fig1a.svg"));
  const json j = json::parse(slurp(dir / "fig1a.json"));
  CHECK(j["family"] == "CIRCLE");
  CHECK(j["radius"].get<double>() == doctest::Approx(8.0 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(std::abs(j["frequency"].get<double>()) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(j["duality"]["pass"] == true);
  CHECK(slurp(dir / "fig1a.svg").find("<svg") != std::string::npos);

  CHECK(invoke({"figures", "--set", "fig9z", "--out", dir.string()}).code == 1);
}

TEST_CASE("output directory override") {
  const fs::path dir = scratch("override");
  {
    OutDirGuard guard(dir.string());
    const Result r = invoke({"classify", "--n0", "1", "--f0", "1", "--omega", "2", "--out", "/elsewhere/cls.json"});
    CHECK(r.code == 0);
  }
  CHECK(fs::exists(dir / "cls.json"));
  CHECK_FALSE(fs::exists("/elsewhere/cls.json"));
  CHECK(json::parse(slurp(dir / "cls.json")).contains("family"));
}

TEST_CASE("unwritable output path is a validation error") {
  const Result r = invoke({"classify", "--n0", "1", "--f0", "1", "--omega", "2", "--out",
                           "/proc/ptfoucault/nope.json"});
  CHECK(r.code == 1);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("help documents the output columns") {
  const std::vector<std::pair<std::string, std::string>> expect = {
      {"trajectory", "t,x_mean,p_mean,var_x,var_p,radius,theta"},
      {"wn", "t,re_f0,im_f0"},
      {"oracle", "theta_pb,tail_mass"},
      {"compare", "max_abs_dx"},
      {"phase", "theta_closed"},
      {"wigner", "support_captured"},
      {"verify-duality", "scale_matches"},
      {"figures", "closure_period"},
      {"circular", "max_radius_deviation"},
      {"classify", "lobes"},
      {"map", "hypotrochoid"},
      {"inverse-map", "candidate_family"},
  };
  for (const auto& [cmd, needle] : expect) {
    CAPTURE(cmd);
    const Result r = invoke({cmd, "--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find(needle) != std::string::npos);
  }
}

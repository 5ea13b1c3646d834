#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ptfoucault::cli {

/// Environment variable that redirects every output file into one directory.
inline constexpr const char* kOutDirEnv = "PTFOUCAULT_OUT_DIR";

enum ExitCode : int { kOk = 0, kValidationError = 1, kVerificationFail = 2 };

/// Every flag of every subcommand. Mirrors the JSON config file one to one.
struct RunConfig {
  std::string subcommand;
  double n0 = 0.0;
  double F0 = 0.0;
  double omega = 1.0;
  int sign = 1;
  std::string family = "pt";
  int N = 64;
  double dt = 1e-3;
  double t_start = 0.0;
  double t_max = 12.566370614359172;  // 4 pi
  double tol = 1e-9;
  double compare_tol = 1e-5;
  std::string method = "rk4";
  std::string precision = "double";
  int record_every = 1;
  bool secular_limit = false;
  bool numeric = false;
  bool with_oracle = false;
  std::optional<double> theta0;
  double R = 0.0;
  double r = 0.0;
  double d = 0.0;
  double x_max = 6.0;
  int grid_points = 121;
  int samples = 4096;
  std::string set = "all";
  std::string out;
  std::string format = "csv";
  std::uint64_t seed = 0;

  bool operator==(const RunConfig&) const = default;
};

std::string config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const std::string& text);

/// Full command line, argv[0] excluded. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace ptfoucault::cli

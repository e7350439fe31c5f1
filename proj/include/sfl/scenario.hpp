#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

namespace sfl {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumericError = 1;  // unexpected numeric error, code in summary.json
inline constexpr int kExitVerification = 2;
inline constexpr int kExitNoSolution = 3;
inline constexpr int kExitConfig = 64;

inline constexpr std::array<std::string_view, 10> kScenarioKinds = {
    "solve-ivp", "solve-bvp", "sweep-c", "find-cstar", "construct",
    "tail-fix",  "verify",    "alternative", "stability", "instability"};

struct RunRequest {
  std::string kind;                          // must match the config's kind when both are given
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;  // base directory; outputs go to <base>/<name>
  std::optional<int> grid_n;
  bool quiet = false;
};

// Parses the config, runs it, writes summary.json plus curve files. Never throws.
int run_scenario(const RunRequest& req, std::ostream& log, std::ostream& err);

}  // namespace sfl

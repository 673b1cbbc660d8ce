#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace ecot::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailure = 1;  // oracle-check statistical failure
inline constexpr int kExitInputError = 2;

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

// Shared command-line flags; set values override config-file keys.
struct CommonOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
  std::optional<int> threads;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;  // json | csv | both
};

struct TestPathOverrides {
  std::optional<std::string> d0;
  std::optional<std::string> d1;
  std::optional<std::string> du;
};

int cmd_simulate(const std::string& config_path, const CommonOverrides& overrides);

int cmd_test(const std::string& config_path, const CommonOverrides& overrides,
             const TestPathOverrides& paths);

int cmd_oracle_check(const std::string& config_path,  // "" for defaults
                     const CommonOverrides& overrides,
                     bool inject_broken_scorer);

}  // namespace ecot::cli

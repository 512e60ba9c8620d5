#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace nilflow::lab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitGuard = 3;

struct RunOptions {
  std::filesystem::path out_dir = "out";
  std::optional<std::uint64_t> seed;  // overrides the config's seed
  int threads = 0;
  bool quiet = false;
};

const std::vector<std::string>& experiment_kinds();

// Runs one experiment; writes CSV files, summary.json and timing.json into
// out_dir and returns the process exit code. Errors are reported on `err`.
int run_experiment(const std::string& kind, const nlohmann::json& config, const RunOptions& opt,
                   std::ostream& err);

// Same, reading the config from a file ("" means an empty config).
int run_experiment_file(const std::string& kind, const std::string& config_path,
                        const RunOptions& opt, std::ostream& err);

// Machine-readable description of every experiment: config keys with
// defaults and the CSV columns it writes.
nlohmann::json schema();

std::uint64_t config_hash(const nlohmann::json& config);

}  // namespace nilflow::lab

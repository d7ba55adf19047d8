#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace qlat {

// Shared options of every CLI verb.
struct CommandIO {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;  // overrides the config seed
};

nlohmann::json load_config_file(const std::string& path);
std::string config_hash_hex(const nlohmann::json& config);

// Hyperparameter fields that may hold lists; list values are expanded into
// the cartesian product of runs.
struct ExpandedRun {
  nlohmann::json config;
  std::string label;  // "epochs=20,tau_knots=3"; empty for a single run
};
std::vector<ExpandedRun> expand_grid(const nlohmann::json& config);

// Verbs. Each returns the process exit code (0 on success) and writes its
// outputs under io.out_dir.
int cmd_simulate(const CommandIO& io);
int cmd_train(const CommandIO& io);
int cmd_eval(const CommandIO& io);
int cmd_uqe(const CommandIO& io);

}  // namespace qlat

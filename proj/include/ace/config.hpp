#pragma once

// JSON configuration for experiments and suites.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ace/ace_loop.hpp"
#include "ace/chain.hpp"

namespace ace {

enum class DomainKind { maze, chain };

struct MazeGrid {
  std::vector<int> sizes{15};  // square side lengths
  std::vector<double> connectivity{0.0, 0.3, 0.6, 1.0};
  std::vector<std::uint64_t> seeds{101, 102};
};

struct MazeInstance {
  std::size_t id = 0;
  int size = 15;
  double connectivity = 0.0;
  std::uint64_t seed = 0;
};

// Size-major, then connectivity, then seed.
std::vector<MazeInstance> expand_grid(const MazeGrid& grid);

struct ArmSpec {
  ExperimentConfig config;  // name, explorer, guided and overrides applied
  std::optional<std::string> baseline;  // arm this one is compared against
};

struct SuiteSpec {
  std::uint64_t seed = 1;
  std::size_t runs_per_arm = 10;
  std::size_t parallelism = 1;
  std::filesystem::path output_dir = "results";
  DomainKind domain = DomainKind::maze;
  MazeGrid mazes;
  ChainSpec chain;
  bool save_models = true;
  std::vector<ArmSpec> arms;

  // Throws ConfigError.
  void validate() const;
};

// Keys starting with '_' are annotations and ignored; any other unknown
// key is an error.
ExperimentConfig experiment_from_json(const nlohmann::json& j, ExperimentConfig base = {});
nlohmann::json experiment_to_json(const ExperimentConfig& c);

ChainSpec chain_from_json(const nlohmann::json& j);
nlohmann::json chain_to_json(const ChainSpec& spec);

// Arms inherit "defaults" and override per arm. Relative model paths are
// resolved against `base_dir`.
SuiteSpec suite_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
SuiteSpec load_suite(const std::filesystem::path& path);

nlohmann::json record_to_json(const RunRecord& r, bool include_timing);
RunRecord record_from_json(const nlohmann::json& j);

const char* to_string(DomainKind kind);

}  // namespace ace

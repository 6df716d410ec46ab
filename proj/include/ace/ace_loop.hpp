#pragma once

// The generation loop coupling an explorer with the GCA: evaluate, breed
// (guided by the model as it stood at the start of the generation),
// consolidate improvements, periodically abstract and prune, select.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ace/domain.hpp"
#include "ace/ea.hpp"
#include "ace/gca.hpp"
#include "ace/pso.hpp"
#include "ace/trajectory.hpp"

namespace ace {

enum class ExplorerKind { ea, pso };

struct ExperimentConfig {
  std::string name = "ACE-EA";
  ExplorerKind explorer = ExplorerKind::ea;
  bool guided = true;  // false: the standard explorer, GCA disabled
  std::size_t population_size = 50;
  int max_generations = 200;
  std::uint64_t seed = 1;
  GcaParams gca;
  int abstraction_period = 10;
  // Fitness gains are divided by this before they reach the Hebbian rules,
  // so learned weights live on the scale the abstraction gates assume.
  double fitness_scale = 1.0;
  EaParams ea;
  PsoParams pso;
  std::optional<std::string> warm_start_model;  // resolved by the caller

  void validate() const;
};

struct RunRecord {
  std::string arm;
  std::size_t maze_id = 0;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  double connectivity = 0.0;

  bool success = false;
  double best_fitness = 0.0;
  std::optional<int> success_generation;
  std::optional<double> path_efficiency;
  std::size_t macros_created = 0;
  std::size_t macros_surviving = 0;
  double mean_macro_effectiveness = 0.0;
  std::size_t hebbian_updates = 0;
  std::size_t abstraction_scans = 0;
  double wall_clock_seconds = 0.0;
  std::vector<double> best_curve;  // best-ever fitness after generations 1..G

  bool operator==(const RunRecord&) const = default;
};

struct RunResult {
  Trajectory best;
  GcaModel model;
  RunRecord record;
};

// Optional observers, mainly for instrumentation in tests.
struct RunHooks {
  // Population after initialization (generation 0) and after each selection.
  std::function<void(int generation, std::span<const Trajectory>)> on_population;
  // Every evaluated offspring with its fitness gain.
  std::function<void(int generation, const Trajectory&, double delta_f)> on_offspring;
};

// `warm_start` seeds the model's weights and macros; its vocabulary must
// match the domain's atomic operations.
RunResult run_ace(const ExperimentConfig& config, const Domain& domain, const GcaModel* warm_start = nullptr,
                  const RunHooks& hooks = {});

// Same loop with every GCA read replaced by uniform choice and writes off.
RunResult run_standard(const ExperimentConfig& config, const Domain& domain, const RunHooks& hooks = {});

// Dispatches on config.guided.
RunResult run_arm(const ExperimentConfig& config, const Domain& domain, const GcaModel* warm_start = nullptr,
                  const RunHooks& hooks = {});

const char* to_string(ExplorerKind kind);
ExplorerKind explorer_from_string(const std::string& name);

}  // namespace ace

#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "ace/domain.hpp"
#include "ace/gca.hpp"

namespace ace {

inline constexpr double kUnevaluated = std::numeric_limits<double>::quiet_NaN();

struct Trajectory {
  std::vector<OpId> ops;         // vocabulary items, macros allowed
  std::vector<OpId> atomic_ops;  // flattened execution sequence
  std::vector<StateId> path;     // visited states after execution
  double fitness = kUnevaluated;
  bool success = false;
  std::optional<double> path_efficiency;

  bool evaluated() const { return fitness == fitness; }
};

// Recomputes atomic_ops from ops. A null model means every op is atomic.
void flatten_into(Trajectory& t, const GcaModel* model);

// Flattens and evaluates in place.
void evaluate(Trajectory& t, const Domain& domain, const GcaModel* model);

}  // namespace ace

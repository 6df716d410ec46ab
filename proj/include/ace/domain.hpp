#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ace/gca.hpp"

namespace ace {

using StateId = std::uint32_t;

struct Evaluation {
  double fitness = 0.0;
  bool success = false;
  std::optional<double> path_efficiency;
  std::vector<StateId> path;  // visited states, starting state first
};

// A construction domain as seen by the explorers: a start state, atomic
// operations that move between states, and a fitness over executed atomic
// sequences.
class Domain {
 public:
  virtual ~Domain() = default;

  virtual std::vector<std::string> atomic_names() const = 0;
  std::size_t atomic_count() const { return atomic_names().size(); }

  virtual StateId start_state() const = 0;
  // Atomic operations applicable in `state`, in a fixed order.
  virtual std::vector<OpId> valid_atomic(StateId state) const = 0;
  // Result of applying one atomic op, or nullopt when it is not applicable.
  virtual std::optional<StateId> apply(StateId state, OpId op) const = 0;
  // Execution semantics of one op: where a sequence being executed ends up
  // after `op`. Defaults to `apply`, staying put when it is not applicable.
  virtual StateId advance(StateId state, OpId op) const { return apply(state, op).value_or(state); }
  virtual bool is_goal(StateId state) const = 0;
  // Goal-directed bias in [0,1]; 0 for domains without a goal.
  virtual double heuristic(StateId state) const = 0;

  virtual Evaluation evaluate(std::span<const OpId> atomic_ops) const = 0;

  // Whether `to` may directly follow `from` at the operation level.
  virtual bool atomic_transition_allowed(OpId from, OpId to) const = 0;

  // Default construction budget (atomic steps) for path builders.
  virtual std::size_t default_max_steps() const = 0;

  // Length of a known-good solution, when the domain has one.
  virtual std::optional<std::size_t> reference_length() const { return std::nullopt; }
};

}  // namespace ace

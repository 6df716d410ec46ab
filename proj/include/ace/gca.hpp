#pragma once

// Generative Construction Automaton: a sparse, Hebbian-trained transition
// model over operation identifiers, with macro abstraction.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ace/rng.hpp"

namespace ace {

using OpId = std::uint32_t;
using OpPair = std::pair<OpId, OpId>;

struct GcaParams {
  double tau = 1.0;       // softmax temperature
  double epsilon = 0.1;   // exploration floor, in (0,1)
  double lambda = 0.15;   // Hebbian learning rate
  double gamma = 0.2;     // decay per update event
  double theta_w = 0.3;   // association strength gate (strict >)
  std::uint64_t theta_s = 3;  // support gate (>=)
  double theta_l = 1.4;   // lift gate (>=)
  double theta_eff = 0.1; // prune macros whose success rate falls below this
  std::size_t max_new_macros = 3;  // per abstraction scan
  std::uint64_t min_uses = 5;      // grace period before a macro can be pruned

  // Throws ConfigError when any value is out of range.
  void validate() const;
  bool operator==(const GcaParams&) const = default;
};

struct MacroOperation {
  OpId id = 0;
  OpId left = 0;
  OpId right = 0;
  std::uint64_t uses = 0;
  std::uint64_t successful_uses = 0;
  int created_at_generation = 0;
  bool pruned = false;

  bool operator==(const MacroOperation&) const = default;
};

struct ProbabilityEntry {
  OpId op;
  double p;
};
using Distribution = std::vector<ProbabilityEntry>;

// Mixes a distribution with the uniform one: (1-eps)*p + eps/k.
// Throws ConfigError unless 0 < epsilon < 1.
Distribution apply_exploration_floor(const Distribution& probs, double epsilon);

// Which ordered atomic pairs the domain allows as consecutive operations.
using AtomicMask = std::function<bool(OpId from, OpId to)>;

class GcaModel {
 public:
  GcaModel() = default;
  GcaModel(std::vector<std::string> atomic_names, GcaParams params);

  // --- vocabulary ------------------------------------------------------
  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t atomic_count() const { return atomic_names_.size(); }
  const std::vector<std::string>& atomic_names() const { return atomic_names_; }
  bool is_macro(OpId id) const { return id >= atomic_count() && id < vocab_size_; }
  const std::vector<MacroOperation>& macros() const { return macros_; }
  const MacroOperation& macro(OpId id) const;
  // Ids of macros that are still eligible for sampling.
  std::vector<OpId> active_macros() const;
  std::size_t surviving_macro_count() const;

  const GcaParams& params() const { return params_; }
  GcaParams& params() { return params_; }

  // --- transition mask -------------------------------------------------
  // The atomic mask is lifted to macros through their boundary atoms:
  // (i, j) is allowed iff mask(last_atom(i), first_atom(j)).
  void set_atomic_mask(AtomicMask mask);
  bool allowed(OpId from, OpId to) const;
  OpId first_atom(OpId id) const { return first_atom_.at(id); }
  OpId last_atom(OpId id) const { return last_atom_.at(id); }

  // --- sparse storage ---------------------------------------------------
  double weight(OpId from, OpId to) const;
  std::uint64_t support(OpId from, OpId to) const;
  const std::map<OpPair, double>& weights() const { return weights_; }
  const std::map<OpPair, std::uint64_t>& support_counts() const { return support_; }
  // Direct writes; for tests, tools and deserialization. Negative weights
  // and out-of-vocabulary ids throw DomainError.
  void set_weight(OpId from, OpId to, double w);
  void set_support(OpId from, OpId to, std::uint64_t count);

  // --- guidance ---------------------------------------------------------
  // Softmax of W[from, .]/tau restricted to `successors`, in input order.
  Distribution transition_distribution(OpId from, std::span<const OpId> successors) const;
  // transition_distribution followed by the exploration floor.
  Distribution guided_distribution(OpId from, std::span<const OpId> successors) const;
  OpId sample_successor(OpId from, std::span<const OpId> successors, Rng& rng) const;

  // --- learning ---------------------------------------------------------
  // Pairwise Hebbian consolidation from two parents' operation counts.
  // Returns the fitness gain; learning happens only when it is positive.
  double hebbian_pair_update(std::span<const double> counts_a, std::span<const double> counts_b,
                             double fit_a, double fit_b, double fit_child);
  // Single-trajectory variant: reinforces each adjacent pair of `ops`.
  void hebbian_trajectory_update(std::span<const OpId> ops, double delta_f);
  // Multiplies every stored weight by (1 - gamma).
  void decay();

  // --- abstraction ------------------------------------------------------
  double compute_lift(OpId i, OpId j) const;
  // True iff (i, j) passes the weight, support and lift gates.
  bool qualifies(OpId i, OpId j) const;
  std::vector<MacroOperation> scan_and_abstract(int generation);
  // Appends `macro` (whose id must equal vocab_size()) and seeds its row
  // and column from constituent averages.
  void expand_weight_matrix(const MacroOperation& macro);
  // Appends a macro record without touching weights (deserialization).
  void restore_macro(const MacroOperation& macro);
  std::vector<OpId> prune_macros();
  std::vector<OpId> flatten(OpId id) const;
  std::string op_name(OpId id) const;

  // Usage bookkeeping for pruning.
  void record_macro_use(OpId id, bool successful);

  // Data equality; the mask is configuration and is not compared.
  bool operator==(const GcaModel& other) const;

 private:
  void check_id(OpId id) const;
  double row_mean(OpId row) const;
  double col_mean(OpId col) const;
  bool has_live_macro(OpId left, OpId right) const;

  std::vector<std::string> atomic_names_;
  GcaParams params_;
  std::size_t vocab_size_ = 0;
  std::map<OpPair, double> weights_;
  std::map<OpPair, std::uint64_t> support_;
  std::vector<MacroOperation> macros_;  // ordered by id
  std::vector<OpId> first_atom_;
  std::vector<OpId> last_atom_;
  AtomicMask mask_;
};

// Count vector over the model's full vocabulary; macro ids count as themselves.
std::vector<double> operation_counts(std::span<const OpId> ops, std::size_t vocab_size);

}  // namespace ace

#pragma once

// Evolutionary explorer over variable-length operation sequences.

#include <cstddef>
#include <span>
#include <vector>

#include "ace/domain.hpp"
#include "ace/gca.hpp"
#include "ace/rng.hpp"
#include "ace/trajectory.hpp"

namespace ace {

struct EaParams {
  double crossover_rate = 0.3;
  double mutation_rate = 0.4;  // per position, every child
  double elitism_fraction = 0.1;
  std::size_t tournament_size = 3;
  std::size_t min_len = 1;
  std::size_t max_len = 0;  // 0: the domain's default_max_steps()

  void validate(std::size_t population_size) const;
};

// Number of elites kept for a population of `n`.
std::size_t elite_count(double elitism_fraction, std::size_t n);

// One-point crossover with independent cuts: a[0, cut_a) ++ b[cut_b, end).
// The child is truncated to max_len, or padded from the unused parent
// material up to min_len. The child comes back unevaluated.
Trajectory crossover_at(const Trajectory& a, const Trajectory& b, std::size_t cut_a, std::size_t cut_b,
                        std::size_t min_len, std::size_t max_len);
Trajectory crossover(const Trajectory& a, const Trajectory& b, std::size_t min_len, std::size_t max_len,
                     Rng& rng);

// Vocabulary items applicable in `state`: the valid atomic ops, followed by
// live macros whose whole expansion applies. A null model yields atoms only.
std::vector<OpId> candidate_ops(const Domain& domain, const GcaModel* model, StateId state);

// Replaces each position with probability `rate`. The replacement is drawn
// from the guided distribution given the preceding op (uniform at position
// 0, and everywhere when model is null) over the items valid at that point.
Trajectory mutate(const Trajectory& traj, const GcaModel* model, const Domain& domain, double rate,
                  Rng& rng);

// Uniform random sequence of `length` items valid along its own execution.
Trajectory random_trajectory(const Domain& domain, std::size_t length, Rng& rng);

// Elites by fitness, then tournament winners (with replacement) until
// `out_size` individuals are chosen. Ties prefer the lower index.
std::vector<Trajectory> select(std::span<const Trajectory> pool, double elitism_fraction,
                               std::size_t tournament_size, std::size_t out_size, Rng& rng);

// Index of a tournament winner.
std::size_t tournament(std::span<const Trajectory> pool, std::size_t size, Rng& rng);

}  // namespace ace

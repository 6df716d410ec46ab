#pragma once

// Discrete particle swarm: particles build paths node by node from a
// composite neighbor score mixing inertia, personal/global best alignment,
// a goal heuristic and (when guided) the GCA transition probability.

#include <cstddef>
#include <limits>
#include <vector>

#include "ace/domain.hpp"
#include "ace/gca.hpp"
#include "ace/rng.hpp"
#include "ace/trajectory.hpp"

namespace ace {

struct PsoParams {
  double inertia = 0.4;    // w
  double cognitive = 1.0;  // c1
  double social = 1.0;     // c2
  double alpha = 0.5;      // heuristic coefficient
  double lambda_g = 1.0;   // guidance coefficient
  std::size_t max_path_len = 0;  // 0: derived from budget_factor or the domain default
  // With max_path_len = 0 and a domain reference length L, the budget is
  // ceil(budget_factor * L). 0 disables.
  double budget_factor = 0.0;

  std::size_t resolve_budget(const Domain& domain) const;

  void validate() const;
};

struct Particle {
  Trajectory current;  // previous path, pi_prev
  Trajectory pbest;
  double pbest_fitness = -std::numeric_limits<double>::infinity();
};

// One selectable move: an atomic op or a macro, with its expansion and the
// state it lands on.
struct Candidate {
  OpId op = 0;
  std::vector<OpId> atomic;
  StateId landing = 0;
};

// 1 iff `path` visits `state` exactly `offset` steps after step_index.
bool aligned(const Trajectory& path, std::size_t step_index, std::size_t offset, StateId state);

// S(v) = w*d_prev + c1*r1*d_pbest + c2*r2*d_gbest + alpha*h(v) + lambda_g*guidance.
// r1 and r2 are drawn fresh on every call. `guidance` is the guided GCA
// probability of the candidate (0 in standard mode). Throws DomainError if
// the candidate does not lead from `node` to its landing state.
double score_neighbor(const Particle& particle, const Trajectory& gbest, const Domain& domain, StateId node,
                      const Candidate& candidate, std::size_t step_index, const PsoParams& params,
                      double guidance, Rng& rng);

// Builds and evaluates a path from the domain's start. Immediate
// backtracking is only taken when nothing else is available.
Trajectory construct_path(const Particle& particle, const Trajectory& gbest, const PsoParams& params,
                          const GcaModel* model, const Domain& domain, double epsilon, Rng& rng);

struct HebbianEvent {
  std::size_t particle = 0;
  double delta_f = 0.0;  // new fitness minus the previous personal best
  std::vector<OpId> ops;
};

struct PsoGenerationResult {
  std::vector<HebbianEvent> events;
  std::size_t gbest_index = 0;
};

// Every particle builds a new path; improved personal bests emit events and
// gbest becomes the best personal best (lowest index on ties).
PsoGenerationResult pso_generation(std::vector<Particle>& swarm, Trajectory& gbest, const PsoParams& params,
                                   const GcaModel* model, const Domain& domain, double epsilon, Rng& rng);

// Index of the best personal best, lowest index on ties.
std::size_t best_particle(const std::vector<Particle>& swarm);

}  // namespace ace

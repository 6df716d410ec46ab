#include "ace/pso.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "ace/errors.hpp"

namespace ace {

void PsoParams::validate() const {
  if (inertia < 0 || cognitive < 0 || social < 0 || alpha < 0 || lambda_g < 0) {
    throw ConfigError("PSO coefficients must be >= 0");
  }
  if (!(budget_factor >= 0.0)) throw ConfigError("budget_factor must be >= 0");
}

std::size_t PsoParams::resolve_budget(const Domain& domain) const {
  if (max_path_len > 0) return max_path_len;
  if (budget_factor > 0.0) {
    if (auto ref = domain.reference_length()) {
      return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(budget_factor * static_cast<double>(*ref))));
    }
  }
  return domain.default_max_steps();
}

bool aligned(const Trajectory& path, std::size_t step_index, std::size_t offset, StateId state) {
  const std::size_t at = step_index + offset;
  return path.path.size() > at && path.path[at] == state;
}

double score_neighbor(const Particle& particle, const Trajectory& gbest, const Domain& domain, StateId node,
                      const Candidate& candidate, std::size_t step_index, const PsoParams& params,
                      double guidance, Rng& rng) {
  StateId s = node;
  for (OpId atom : candidate.atomic) {
    const auto next = domain.apply(s, atom);
    if (!next) throw DomainError("invalid neighbor");
    s = *next;
  }
  if (candidate.atomic.empty() || s != candidate.landing) throw DomainError("invalid neighbor");

  const double r1 = rng.uniform01();
  const double r2 = rng.uniform01();
  const std::size_t k = candidate.atomic.size();
  const auto delta = [&](const Trajectory& t) { return aligned(t, step_index, k, candidate.landing) ? 1.0 : 0.0; };
  return params.inertia * delta(particle.current) + params.cognitive * r1 * delta(particle.pbest) +
         params.social * r2 * delta(gbest) + params.alpha * domain.heuristic(candidate.landing) +
         params.lambda_g * guidance;
}

namespace {

OpId pick(const std::vector<double>& probs, Rng& rng) {
  const double u = rng.uniform01();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<OpId>(i);
  }
  return static_cast<OpId>(probs.size() - 1);
}

}  // namespace

Trajectory construct_path(const Particle& particle, const Trajectory& gbest, const PsoParams& params,
                          const GcaModel* model, const Domain& domain, double epsilon, Rng& rng) {
  const std::size_t budget = params.resolve_budget(domain);
  const std::vector<OpId> live_macros = model ? model->active_macros() : std::vector<OpId>{};
  std::vector<std::vector<OpId>> expansions;
  for (OpId m : live_macros) expansions.push_back(model->flatten(m));

  Trajectory t;
  StateId state = domain.start_state();
  std::optional<StateId> came_from;
  std::size_t steps = 0;
  std::vector<Candidate> forward, back;
  std::vector<OpId> ids;
  std::vector<double> scores;

  while (!domain.is_goal(state) && steps < budget) {
    forward.clear();
    back.clear();
    for (OpId op : domain.valid_atomic(state)) {
      const StateId to = *domain.apply(state, op);
      (came_from && *came_from == to ? back : forward).push_back({op, {op}, to});
    }
    for (std::size_t m = 0; m < live_macros.size(); ++m) {
      const auto& seq = expansions[m];
      if (steps + seq.size() > budget) continue;
      StateId s = state;
      bool ok = true;
      for (std::size_t i = 0; i < seq.size() && ok; ++i) {
        const auto next = domain.apply(s, seq[i]);
        ok = next.has_value() && !(i == 0 && came_from && *came_from == *next);
        if (ok) s = *next;
      }
      if (ok) forward.push_back({live_macros[m], seq, s});
    }
    std::vector<Candidate>& options = forward.empty() ? back : forward;
    if (options.empty()) break;

    std::vector<double> guidance(options.size(), 0.0);
    if (model != nullptr) {
      ids.clear();
      for (const auto& c : options) ids.push_back(c.op);
      if (t.ops.empty()) {
        std::fill(guidance.begin(), guidance.end(), 1.0 / static_cast<double>(options.size()));
      } else {
        const auto dist = model->guided_distribution(t.ops.back(), ids);
        for (std::size_t i = 0; i < dist.size(); ++i) guidance[i] = dist[i].p;
      }
    }

    scores.assign(options.size(), 0.0);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < options.size(); ++i) {
      scores[i] = score_neighbor(particle, gbest, domain, state, options[i], steps, params, guidance[i], rng);
      top = std::max(top, scores[i]);
    }
    double total = 0.0;
    for (double& s : scores) {
      s = std::exp(s - top);
      total += s;
    }
    const double k = static_cast<double>(scores.size());
    for (double& s : scores) s = (1.0 - epsilon) * (s / total) + epsilon / k;

    const Candidate& chosen = options[pick(scores, rng)];
    StateId before_last = state;
    StateId s = state;
    for (OpId atom : chosen.atomic) {
      before_last = s;
      s = *domain.apply(s, atom);
    }
    t.ops.push_back(chosen.op);
    came_from = before_last;
    state = chosen.landing;
    steps += chosen.atomic.size();
  }
  evaluate(t, domain, model);
  return t;
}

std::size_t best_particle(const std::vector<Particle>& swarm) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < swarm.size(); ++i) {
    if (swarm[i].pbest_fitness > swarm[best].pbest_fitness) best = i;
  }
  return best;
}

PsoGenerationResult pso_generation(std::vector<Particle>& swarm, Trajectory& gbest, const PsoParams& params,
                                   const GcaModel* model, const Domain& domain, double epsilon, Rng& rng) {
  PsoGenerationResult result;
  for (std::size_t i = 0; i < swarm.size(); ++i) {
    Particle& p = swarm[i];
    p.current = construct_path(p, gbest, params, model, domain, epsilon, rng);
    if (p.current.fitness > p.pbest_fitness) {
      result.events.push_back({i, p.current.fitness - p.pbest_fitness, p.current.ops});
      p.pbest = p.current;
      p.pbest_fitness = p.current.fitness;
    }
  }
  result.gbest_index = best_particle(swarm);
  gbest = swarm[result.gbest_index].pbest;
  return result;
}

}  // namespace ace

#include "ace/ea.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ace/errors.hpp"

namespace ace {

void EaParams::validate(std::size_t population_size) const {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(crossover_rate) || !unit(mutation_rate) || !unit(elitism_fraction)) {
    throw ConfigError("EA rates must lie in [0,1]");
  }
  if (tournament_size < 2) throw ConfigError("tournament_size must be >= 2");
  if (min_len < 1) throw ConfigError("min_len must be >= 1");
  if (max_len != 0 && max_len < min_len) throw ConfigError("max_len must be >= min_len");
  if (elitism_fraction > 0.0 && elite_count(elitism_fraction, population_size) < 1) {
    throw ConfigError("elitism keeps no individual at this population size");
  }
}

std::size_t elite_count(double elitism_fraction, std::size_t n) {
  if (elitism_fraction <= 0.0) return 0;
  const auto k = static_cast<std::size_t>(std::ceil(elitism_fraction * static_cast<double>(n) - 1e-9));
  return std::min(k, n);
}

Trajectory crossover_at(const Trajectory& a, const Trajectory& b, std::size_t cut_a, std::size_t cut_b,
                        std::size_t min_len, std::size_t max_len) {
  cut_a = std::min(cut_a, a.ops.size());
  cut_b = std::min(cut_b, b.ops.size());
  Trajectory child;
  child.ops.assign(a.ops.begin(), a.ops.begin() + static_cast<std::ptrdiff_t>(cut_a));
  child.ops.insert(child.ops.end(), b.ops.begin() + static_cast<std::ptrdiff_t>(cut_b), b.ops.end());
  if (child.ops.size() > max_len) child.ops.resize(max_len);
  // Pad from what the cut left unused: a's tail, then b's head.
  for (std::size_t i = cut_a; child.ops.size() < min_len && i < a.ops.size(); ++i) child.ops.push_back(a.ops[i]);
  for (std::size_t i = 0; child.ops.size() < min_len && i < cut_b; ++i) child.ops.push_back(b.ops[i]);
  return child;
}

Trajectory crossover(const Trajectory& a, const Trajectory& b, std::size_t min_len, std::size_t max_len,
                     Rng& rng) {
  const auto cut_a = static_cast<std::size_t>(rng.index(a.ops.size() + 1));
  const auto cut_b = static_cast<std::size_t>(rng.index(b.ops.size() + 1));
  return crossover_at(a, b, cut_a, cut_b, min_len, max_len);
}

std::vector<OpId> candidate_ops(const Domain& domain, const GcaModel* model, StateId state) {
  std::vector<OpId> out = domain.valid_atomic(state);
  if (model == nullptr) return out;
  for (OpId m : model->active_macros()) {
    StateId s = state;
    bool ok = true;
    for (OpId atom : model->flatten(m)) {
      const auto next = domain.apply(s, atom);
      if (!next) {
        ok = false;
        break;
      }
      s = *next;
    }
    if (ok) out.push_back(m);
  }
  return out;
}

namespace {

StateId advance_over(const Domain& domain, const GcaModel* model, StateId state, OpId op) {
  if (model != nullptr && model->is_macro(op)) {
    for (OpId atom : model->flatten(op)) state = domain.advance(state, atom);
    return state;
  }
  return domain.advance(state, op);
}

}  // namespace

Trajectory mutate(const Trajectory& traj, const GcaModel* model, const Domain& domain, double rate,
                  Rng& rng) {
  Trajectory out;
  out.ops = traj.ops;
  StateId state = domain.start_state();
  for (std::size_t p = 0; p < out.ops.size(); ++p) {
    if (rng.bernoulli(rate)) {
      const auto options = candidate_ops(domain, model, state);
      if (!options.empty()) {
        if (model != nullptr && p > 0) {
          out.ops[p] = model->sample_successor(out.ops[p - 1], options, rng);
        } else {
          out.ops[p] = options[rng.index(options.size())];
        }
      }
    }
    state = advance_over(domain, model, state, out.ops[p]);
  }
  return out;
}

Trajectory random_trajectory(const Domain& domain, std::size_t length, Rng& rng) {
  Trajectory t;
  StateId state = domain.start_state();
  for (std::size_t p = 0; p < length; ++p) {
    const auto options = domain.valid_atomic(state);
    if (options.empty()) break;
    const OpId op = options[rng.index(options.size())];
    t.ops.push_back(op);
    state = domain.advance(state, op);
  }
  return t;
}

std::size_t tournament(std::span<const Trajectory> pool, std::size_t size, Rng& rng) {
  std::size_t best = static_cast<std::size_t>(rng.index(pool.size()));
  for (std::size_t k = 1; k < size; ++k) {
    const auto c = static_cast<std::size_t>(rng.index(pool.size()));
    if (pool[c].fitness > pool[best].fitness || (pool[c].fitness == pool[best].fitness && c < best)) best = c;
  }
  return best;
}

std::vector<Trajectory> select(std::span<const Trajectory> pool, double elitism_fraction,
                               std::size_t tournament_size, std::size_t out_size, Rng& rng) {
  if (pool.empty()) throw DomainError("cannot select from an empty population");
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pool[a].fitness > pool[b].fitness; });

  std::vector<Trajectory> out;
  out.reserve(out_size);
  const std::size_t elites = std::min(elite_count(elitism_fraction, out_size), pool.size());
  for (std::size_t i = 0; i < elites; ++i) out.push_back(pool[order[i]]);
  while (out.size() < out_size) out.push_back(pool[tournament(pool, tournament_size, rng)]);
  return out;
}

}  // namespace ace

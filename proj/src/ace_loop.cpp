#include "ace/ace_loop.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include "ace/errors.hpp"

namespace ace {

const char* to_string(ExplorerKind kind) { return kind == ExplorerKind::ea ? "ea" : "pso"; }

ExplorerKind explorer_from_string(const std::string& name) {
  if (name == "ea") return ExplorerKind::ea;
  if (name == "pso") return ExplorerKind::pso;
  throw ConfigError("unknown explorer '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (population_size < 2) throw ConfigError("population_size must be >= 2");
  if (max_generations < 1) throw ConfigError("max_generations must be >= 1");
  if (abstraction_period < 1) throw ConfigError("abstraction_period must be >= 1");
  if (!(fitness_scale > 0.0)) throw ConfigError("fitness_scale must be > 0");
  gca.validate();
  ea.validate(population_size);
  pso.validate();
}

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Shared state of one run.
class RunContext {
 public:
  RunContext(const ExperimentConfig& config, const Domain& domain, GcaModel* model, const RunHooks& hooks)
      : config_(config), domain_(domain), model_(model), hooks_(hooks), rng_(config.seed) {
    record_.seed = config.seed;
    record_.arm = config.name;
  }

  RunResult run() {
    const auto t0 = std::chrono::steady_clock::now();
    if (config_.explorer == ExplorerKind::ea) {
      run_ea();
    } else {
      run_pso();
    }
    record_.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    record_.best_fitness = best_.fitness;
    record_.success = best_.success;
    record_.path_efficiency = best_.success ? best_.path_efficiency : std::nullopt;
    if (model_ != nullptr) {
      record_.macros_surviving = model_->surviving_macro_count();
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& m : model_->macros()) {
        if (m.pruned || m.uses == 0) continue;
        sum += static_cast<double>(m.successful_uses) / static_cast<double>(m.uses);
        ++n;
      }
      record_.mean_macro_effectiveness = n == 0 ? 0.0 : sum / static_cast<double>(n);
    }
    RunResult out;
    out.best = best_;
    out.record = record_;
    if (model_ != nullptr) out.model = *model_;
    return out;
  }

 private:
  bool guided() const { return model_ != nullptr; }
  double scaled(double f) const { return f / config_.fitness_scale; }

  void consider(const Trajectory& t, int generation) {
    if (!best_.evaluated() || t.fitness > best_.fitness) best_ = t;
    if (best_.success && !record_.success_generation) record_.success_generation = generation;
  }

  void end_generation(int generation, std::span<const Trajectory> evaluated) {
    if (guided()) {
      account_macro_usage(evaluated);
      if (generation % config_.abstraction_period == 0) {
        record_.macros_created += model_->scan_and_abstract(generation).size();
        model_->prune_macros();
        ++record_.abstraction_scans;
      }
    }
  }

  void account_macro_usage(std::span<const Trajectory> evaluated) {
    if (model_->macros().empty() || evaluated.empty()) return;
    std::vector<double> f;
    f.reserve(evaluated.size());
    for (const auto& t : evaluated) f.push_back(t.fitness);
    const double median = median_of(std::move(f));
    for (const auto& t : evaluated) {
      std::set<OpId> used;
      for (OpId op : t.ops) {
        if (model_->is_macro(op)) used.insert(op);
      }
      for (OpId m : used) model_->record_macro_use(m, t.fitness > median);
    }
  }

  void publish(int generation, std::span<const Trajectory> population) {
    if (hooks_.on_population) hooks_.on_population(generation, population);
  }

  std::size_t max_len() const {
    return config_.ea.max_len == 0 ? domain_.default_max_steps() : config_.ea.max_len;
  }

  void run_ea() {
    const auto& ea = config_.ea;
    const std::size_t n = config_.population_size;
    const std::size_t hi = max_len();
    const std::size_t lo = std::min(ea.min_len, hi);

    std::vector<Trajectory> population;
    population.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t len = lo + static_cast<std::size_t>(rng_.index(hi - lo + 1));
      Trajectory t = random_trajectory(domain_, len, rng_);
      evaluate(t, domain_, model_);
      population.push_back(std::move(t));
    }
    for (const auto& t : population) consider(t, 0);
    publish(0, population);

    std::vector<Trajectory> offspring;
    for (int gen = 1; gen <= config_.max_generations; ++gen) {
      offspring.clear();
      struct Pending {
        std::size_t a, b;
      };
      std::vector<Pending> parents;
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t a = tournament(population, ea.tournament_size, rng_);
        std::size_t b = a;
        Trajectory child;
        if (rng_.bernoulli(ea.crossover_rate)) {
          b = tournament(population, ea.tournament_size, rng_);
          child = crossover(population[a], population[b], lo, hi, rng_);
        } else {
          child.ops = population[a].ops;
        }
        child = mutate(child, model_, domain_, ea.mutation_rate, rng_);
        evaluate(child, domain_, model_);
        offspring.push_back(std::move(child));
        parents.push_back({a, b});
      }

      // Consolidation happens after the whole brood was generated, so the
      // next generation is the first to see this generation's learning.
      for (std::size_t k = 0; k < n; ++k) {
        const auto& pa = population[parents[k].a];
        const auto& pb = population[parents[k].b];
        const auto& child = offspring[k];
        const double delta = child.fitness - 0.5 * (pa.fitness + pb.fitness);
        if (hooks_.on_offspring) hooks_.on_offspring(gen, child, delta);
        if (guided() && delta > 0.0) {
          const auto ca = operation_counts(pa.ops, model_->vocab_size());
          const auto cb = operation_counts(pb.ops, model_->vocab_size());
          model_->hebbian_pair_update(ca, cb, scaled(pa.fitness), scaled(pb.fitness), scaled(child.fitness));
          ++record_.hebbian_updates;
        }
      }
      end_generation(gen, offspring);

      std::vector<Trajectory> pool;
      pool.reserve(2 * n);
      pool.insert(pool.end(), population.begin(), population.end());
      pool.insert(pool.end(), offspring.begin(), offspring.end());
      population = select(pool, ea.elitism_fraction, ea.tournament_size, n, rng_);
      for (const auto& t : population) consider(t, gen);
      record_.best_curve.push_back(best_.fitness);
      publish(gen, population);
    }
  }

  void run_pso() {
    const double epsilon = config_.gca.epsilon;
    std::vector<Particle> swarm(config_.population_size);
    Trajectory gbest;
    for (auto& p : swarm) {
      p.current = construct_path(p, gbest, config_.pso, model_, domain_, epsilon, rng_);
      p.pbest = p.current;
      p.pbest_fitness = p.current.fitness;
    }
    gbest = swarm[best_particle(swarm)].pbest;
    consider(gbest, 0);
    {
      std::vector<Trajectory> current;
      for (const auto& p : swarm) current.push_back(p.current);
      publish(0, current);
    }

    std::vector<Trajectory> current;
    for (int gen = 1; gen <= config_.max_generations; ++gen) {
      const auto result = pso_generation(swarm, gbest, config_.pso, model_, domain_, epsilon, rng_);
      current.clear();
      for (const auto& p : swarm) current.push_back(p.current);
      if (hooks_.on_offspring) {
        // Improvement over the personal best is the PSO notion of success.
        std::size_t e = 0;
        for (std::size_t i = 0; i < swarm.size(); ++i) {
          const bool improved = e < result.events.size() && result.events[e].particle == i;
          hooks_.on_offspring(gen, swarm[i].current, improved ? result.events[e].delta_f : 0.0);
          if (improved) ++e;
        }
      }
      if (guided()) {
        for (const auto& ev : result.events) {
          model_->hebbian_trajectory_update(ev.ops, scaled(ev.delta_f));
          ++record_.hebbian_updates;
        }
      }
      end_generation(gen, current);
      consider(gbest, gen);
      record_.best_curve.push_back(best_.fitness);
      publish(gen, current);
    }
  }

  const ExperimentConfig& config_;
  const Domain& domain_;
  GcaModel* model_;
  const RunHooks& hooks_;
  Rng rng_;
  RunRecord record_;
  Trajectory best_;
};

}  // namespace

RunResult run_ace(const ExperimentConfig& config, const Domain& domain, const GcaModel* warm_start,
                  const RunHooks& hooks) {
  config.validate();
  GcaModel model(domain.atomic_names(), config.gca);
  if (warm_start != nullptr) {
    if (warm_start->atomic_names() != domain.atomic_names()) {
      throw ConfigError("warm-start model vocabulary does not match the domain");
    }
    model = *warm_start;
    model.params() = config.gca;
  }
  model.set_atomic_mask([&domain](OpId a, OpId b) { return domain.atomic_transition_allowed(a, b); });
  RunContext ctx(config, domain, &model, hooks);
  auto result = ctx.run();
  result.model.set_atomic_mask({});
  return result;
}

RunResult run_standard(const ExperimentConfig& config, const Domain& domain, const RunHooks& hooks) {
  config.validate();
  RunContext ctx(config, domain, nullptr, hooks);
  auto result = ctx.run();
  result.model = GcaModel(domain.atomic_names(), config.gca);
  return result;
}

RunResult run_arm(const ExperimentConfig& config, const Domain& domain, const GcaModel* warm_start,
                  const RunHooks& hooks) {
  return config.guided ? run_ace(config, domain, warm_start, hooks) : run_standard(config, domain, hooks);
}

}  // namespace ace

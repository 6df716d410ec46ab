#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "ace/ace_loop.hpp"
#include "ace/chain.hpp"
#include "ace/errors.hpp"

using namespace ace;

namespace {

// Exhaustive search over every sequence of the given length, first maximum
// in lexicographic order kept.
ChainOptimum enumerate(const ChainSpec& s) {
  ChainOptimum best;
  best.fitness = -INFINITY;
  std::vector<OpId> seq(s.sequence_length, 0);
  while (true) {
    bool valid = true;
    for (std::size_t i = 1; i < seq.size(); ++i) {
      if (!s.transition_allowed(seq[i - 1], seq[i])) valid = false;
    }
    if (valid) {
      const double f = chain_fitness(s, seq);
      if (f > best.fitness + 1e-12) {
        best.fitness = f;
        best.witness = seq;
      }
    }
    std::size_t k = seq.size();
    while (k > 0) {
      --k;
      if (++seq[k] < s.alphabet_size) break;
      seq[k] = 0;
      if (k == 0) return best;
    }
    if (seq.empty()) return best;
  }
}

}  // namespace

TEST_CASE("chain fitness") {
  ChainSpec s;
  s.bigrams = {{0, 1, 5.0}};
  s.noise_penalty = 0.1;
  CHECK(chain_fitness(s, {}) == 0.0);
  std::vector<OpId> pair{0, 1};
  CHECK(chain_fitness(s, pair) == 5.0);
  std::vector<OpId> noise{2, 3, 4, 5, 2};
  CHECK(chain_fitness(s, noise) == doctest::Approx(-4 * 0.1));
  std::vector<OpId> bad{0, 9};
  CHECK_THROWS_AS(chain_fitness(s, bad), DomainError);
}

TEST_CASE("optimum by dynamic programming") {
  SUBCASE("single bigram") {
    ChainSpec s;
    s.alphabet_size = 3;
    s.bigrams = {{0, 1, 5.0}};
    s.sequence_length = 2;
    s.noise_penalty = 0.0;
    auto o = brute_force_optimum(s);
    CHECK(o.fitness == 5.0);
    CHECK(o.witness == std::vector<OpId>{0, 1});
  }
  SUBCASE("alternating pair") {
    ChainSpec s;
    s.alphabet_size = 3;
    s.bigrams = {{0, 1, 5.0}, {1, 0, 5.0}};
    s.sequence_length = 3;
    s.noise_penalty = 0.0;
    auto o = brute_force_optimum(s);
    CHECK(o.fitness == 10.0);
    CHECK(o.witness == std::vector<OpId>{0, 1, 0});
  }
  SUBCASE("default spec") {
    ChainSpec s;
    auto o = brute_force_optimum(s);
    // 012 repeated: four (0,1), four (1,2), three noisy (2,0) pairs
    CHECK(o.fitness == doctest::Approx(4 * 5 + 4 * 3 - 3 * 0.2).epsilon(1e-12));
    CHECK(o.witness == std::vector<OpId>{0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2});
    CHECK(chain_fitness(s, o.witness) == doctest::Approx(o.fitness));
  }
  SUBCASE("heavy penalty still fills the length") {
    ChainSpec s;
    s.alphabet_size = 3;
    s.bigrams = {{0, 1, 1.0}};
    s.sequence_length = 5;
    s.noise_penalty = 10.0;
    auto o = brute_force_optimum(s);
    CHECK(o.witness.size() == 5);
    CHECK(o.fitness == doctest::Approx(enumerate(s).fitness));
  }
  SUBCASE("too large") {
    ChainSpec s;
    s.alphabet_size = 20000;
    s.bigrams = {{0, 1, 1.0}};
    s.sequence_length = 1000;
    CHECK_THROWS_AS(brute_force_optimum(s), ConfigError);
  }
}

TEST_CASE("dynamic programming agrees with enumeration") {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 60; ++trial) {
    ChainSpec s;
    s.alphabet_size = 2 + gen() % 3;
    s.sequence_length = 1 + gen() % 6;
    s.noise_penalty = (gen() % 5) / 10.0;
    s.allow_repeats = gen() % 2;
    s.bigrams.clear();
    const std::size_t nb = 1 + gen() % 3;
    for (std::size_t b = 0; b < nb; ++b) {
      const Bigram cand{static_cast<OpId>(gen() % s.alphabet_size), static_cast<OpId>(gen() % s.alphabet_size),
                        1.0 + gen() % 5};
      const bool dup = std::any_of(s.bigrams.begin(), s.bigrams.end(), [&](const Bigram& x) {
        return x.first == cand.first && x.second == cand.second;
      });
      if (!dup) s.bigrams.push_back(cand);
    }
    if (!s.allow_repeats) {
      std::erase_if(s.bigrams, [](const Bigram& b) { return b.first == b.second; });
      if (s.bigrams.empty()) s.bigrams.push_back({0, 1, 2.0});
    }
    const auto dp = brute_force_optimum(s);
    const auto ex = enumerate(s);
    CHECK(dp.fitness == doctest::Approx(ex.fitness).epsilon(1e-12));
    REQUIRE(dp.witness.size() == s.sequence_length);
    for (std::size_t i = 1; i < dp.witness.size(); ++i) CHECK(s.transition_allowed(dp.witness[i - 1], dp.witness[i]));
    CHECK(chain_fitness(s, dp.witness) == doctest::Approx(ex.fitness).epsilon(1e-12));
  }
}

TEST_CASE("spec validation") {
  ChainSpec s;
  s.alphabet_size = 1;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = {};
  s.bigrams = {{0, 1, 0.0}};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = {};
  s.bigrams = {{0, 9, 1.0}};
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("chain domain") {
  ChainDomain d(ChainSpec{});
  CHECK(d.atomic_names().size() == 6);
  CHECK(d.optimum() == doctest::Approx(31.4));
  auto first = d.valid_atomic(d.start_state());
  CHECK(first.size() == 6);
  auto s1 = d.advance(d.start_state(), 2);
  auto next = d.valid_atomic(s1);
  CHECK(next.size() == 5);
  for (OpId t : next) CHECK(t != 2);
  CHECK_FALSE(d.atomic_transition_allowed(3, 3));
  CHECK(d.atomic_transition_allowed(3, 4));
  std::vector<OpId> best{0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2};
  auto e = d.evaluate(best);
  CHECK(e.success);
  CHECK(e.fitness == doctest::Approx(31.4));
  std::vector<OpId> longer = best;
  longer.push_back(0);
  longer.push_back(1);
  CHECK(d.evaluate(longer).fitness == doctest::Approx(31.4));
  std::vector<OpId> worse{0, 1, 0, 1};
  CHECK_FALSE(d.evaluate(worse).success);
}

TEST_CASE("a single dominant bigram is learned and abstracted") {
  ChainSpec spec;
  spec.bigrams = {{0, 1, 5.0}};
  ChainDomain d(spec);
  const std::vector<OpId> after_zero{1, 2, 3, 4, 5};
  double p_sum = 0.0;
  int macros = 0, near_optimal = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ExperimentConfig c;
    c.population_size = 50;
    c.max_generations = 100;
    c.seed = seed;
    c.fitness_scale = 15.0;
    const auto r = run_ace(c, d);
    const auto dist = r.model.guided_distribution(0, after_zero);
    REQUIRE(dist[0].op == 1);
    p_sum += dist[0].p;
    near_optimal += r.record.best_fitness >= 0.95 * d.optimum();
    macros += std::any_of(r.model.macros().begin(), r.model.macros().end(), [&](const MacroOperation& m) {
      return r.model.flatten(m.id) == std::vector<OpId>{0, 1};
    });
  }
  CHECK(p_sum / 10.0 >= 0.8);
  CHECK(macros >= 8);
  CHECK(near_optimal >= 9);
}

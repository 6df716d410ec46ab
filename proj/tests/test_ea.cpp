#include <algorithm>
#include <cmath>
#include <map>

#include "doctest.h"

#include "ace/chain.hpp"
#include "ace/ea.hpp"
#include "ace/errors.hpp"
#include "ace/maze.hpp"

using namespace ace;

namespace {

Trajectory ops(std::vector<OpId> v) {
  Trajectory t;
  t.ops = std::move(v);
  return t;
}

Trajectory with_fitness(double f, OpId tag) {
  Trajectory t = ops({tag});
  t.fitness = f;
  return t;
}

// Two cells joined by one open edge: every state has exactly one move.
Maze two_cell_maze() {
  Maze m(2, 1);
  m.set_open({0, 0}, Direction::East, true);
  m.start = {0, 0};
  m.goal = {1, 0};
  return m;
}

}  // namespace

TEST_CASE("crossover") {
  const auto a = ops({0, 1, 2});
  const auto b = ops({3, 4, 5});

  SUBCASE("hand example with cuts (1,1)") {
    auto c = crossover_at(a, b, 1, 1, 1, 10);
    CHECK(c.ops == std::vector<OpId>{0, 4, 5});
    CHECK_FALSE(c.evaluated());
  }
  SUBCASE("boundary cuts give parent b") {
    CHECK(crossover_at(a, b, 0, 0, 1, 10).ops == b.ops);
  }
  SUBCASE("cut at the end of a and end of b gives parent a") {
    CHECK(crossover_at(a, b, 3, 3, 1, 10).ops == a.ops);
  }
  SUBCASE("truncation to max_len") {
    CHECK(crossover_at(a, b, 3, 0, 1, 4).ops == std::vector<OpId>{0, 1, 2, 3});
  }
  SUBCASE("padding to min_len from unused material") {
    // a[0,1) ++ b[3,3) is too short; a's tail fills the gap
    CHECK(crossover_at(a, b, 1, 3, 3, 10).ops == std::vector<OpId>{0, 1, 2});
  }
  SUBCASE("identical parents only recombine their own ops") {
    Rng rng(3);
    const auto p = ops({1, 1, 2, 3, 3});
    for (int i = 0; i < 500; ++i) {
      auto c = crossover(p, p, 1, 20, rng);
      for (OpId op : c.ops) CHECK(std::find(p.ops.begin(), p.ops.end(), op) != p.ops.end());
    }
  }
  SUBCASE("genome bounds hold for random parents") {
    Rng rng(11);
    for (int i = 0; i < 2000; ++i) {
      const std::size_t min_len = 1 + rng.index(4);
      const std::size_t max_len = min_len + rng.index(6);
      Trajectory p, q;
      const std::size_t lp = min_len + rng.index(8), lq = 1 + rng.index(8);
      for (std::size_t k = 0; k < lp; ++k) p.ops.push_back(static_cast<OpId>(rng.index(4)));
      for (std::size_t k = 0; k < lq; ++k) q.ops.push_back(static_cast<OpId>(rng.index(4)));
      auto c = crossover(p, q, min_len, max_len, rng);
      CHECK(c.ops.size() >= min_len);
      CHECK(c.ops.size() <= max_len);
    }
  }
}

TEST_CASE("mutation") {
  SUBCASE("rate zero keeps the trajectory") {
    MazeDomain d(generate_maze(7, 7, 0.3, 4));
    Rng rng(1);
    for (int i = 0; i < 50; ++i) {
      auto t = random_trajectory(d, 20, rng);
      CHECK(mutate(t, nullptr, d, 0.0, rng).ops == t.ops);
    }
  }
  SUBCASE("rate one with a single valid move is deterministic") {
    MazeDomain d(two_cell_maze());
    GcaModel model(d.atomic_names(), GcaParams{});
    const auto east = op_of(Direction::East), west = op_of(Direction::West);
    const std::vector<OpId> expected{east, west, east, west, east};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(seed);
      const auto start = ops({0, 0, 0, 0, 0});
      CHECK(mutate(start, nullptr, d, 1.0, rng).ops == expected);
      CHECK(mutate(start, &model, d, 1.0, rng).ops == expected);
    }
  }
  SUBCASE("guided replacement follows the floored softmax") {
    ChainSpec spec;
    spec.alphabet_size = 3;
    spec.bigrams = {{0, 1, 5.0}};
    spec.sequence_length = 2;
    spec.allow_repeats = true;
    ChainDomain d(spec);
    GcaModel model(d.atomic_names(), GcaParams{});
    model.set_weight(0, 1, 3.0);
    const std::vector<OpId> succ{0, 1, 2};
    const auto dist = model.guided_distribution(0, succ);

    Rng rng(99);
    std::map<OpId, double> count;
    double n = 0;
    for (int i = 0; i < 30000; ++i) {
      auto t = mutate(ops({2, 2}), &model, d, 1.0, rng);
      if (t.ops[0] != 0) continue;
      count[t.ops[1]] += 1;
      n += 1;
    }
    REQUIRE(n > 5000);
    for (const auto& e : dist) CHECK(std::abs(count[e.op] / n - e.p) < 0.02);
  }
  SUBCASE("position zero is uniform") {
    ChainSpec spec;
    spec.alphabet_size = 3;
    spec.allow_repeats = true;
    ChainDomain d(spec);
    GcaModel model(d.atomic_names(), GcaParams{});
    model.set_weight(1, 2, 50.0);
    Rng rng(5);
    std::map<OpId, double> count;
    for (int i = 0; i < 30000; ++i) count[mutate(ops({1}), &model, d, 1.0, rng).ops[0]] += 1;
    for (OpId op = 0; op < 3; ++op) CHECK(std::abs(count[op] / 30000.0 - 1.0 / 3.0) < 0.02);
  }
  SUBCASE("replacements are valid moves at their point of execution") {
    MazeDomain d(generate_maze(9, 9, 0.0, 8));
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
      auto t = mutate(random_trajectory(d, 30, rng), nullptr, d, 1.0, rng);
      StateId s = d.start_state();
      for (OpId op : t.ops) {
        auto valid = d.valid_atomic(s);
        CHECK(std::find(valid.begin(), valid.end(), op) != valid.end());
        s = d.advance(s, op);
      }
    }
  }
}

TEST_CASE("selection") {
  SUBCASE("hand-traced elitism keeps 3 and 2") {
    const std::vector<Trajectory> pool{with_fitness(3, 0), with_fitness(1, 1), with_fitness(2, 2)};
    CHECK(elite_count(0.34, 3) == 2);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      Rng rng(seed);
      auto out = select(pool, 0.34, 2, 3, rng);
      REQUIRE(out.size() == 3);
      CHECK(out[0].fitness == 3);
      CHECK(out[1].fitness == 2);
    }
  }
  SUBCASE("N=2 with elitism 0.5 keeps the best") {
    const std::vector<Trajectory> pool{with_fitness(-5, 0), with_fitness(7, 1)};
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Rng rng(seed);
      auto out = select(pool, 0.5, 2, 2, rng);
      CHECK(std::any_of(out.begin(), out.end(), [](const Trajectory& t) { return t.fitness == 7; }));
    }
  }
  SUBCASE("equal fitness draws from the input") {
    std::vector<Trajectory> pool;
    for (OpId i = 0; i < 6; ++i) pool.push_back(with_fitness(1.0, i));
    Rng rng(4);
    auto out = select(pool, 0.2, 3, 6, rng);
    CHECK(out.size() == 6);
    for (const auto& t : out) CHECK(t.ops[0] < 6);
  }
  SUBCASE("the maximum always survives") {
    Rng rng(21);
    for (int trial = 0; trial < 300; ++trial) {
      std::vector<Trajectory> pool;
      const std::size_t n = 2 + rng.index(30);
      for (std::size_t i = 0; i < n; ++i) pool.push_back(with_fitness(rng.uniform01() * 100, static_cast<OpId>(i)));
      const double top = std::max_element(pool.begin(), pool.end(), [](auto& a, auto& b) {
                           return a.fitness < b.fitness;
                         })->fitness;
      auto out = select(pool, 0.1, 3, n, rng);
      CHECK(out.size() == n);
      CHECK(std::max_element(out.begin(), out.end(), [](auto& a, auto& b) { return a.fitness < b.fitness; })
                ->fitness == top);
    }
  }
  SUBCASE("tournament ties prefer the lower index") {
    const std::vector<Trajectory> pool{with_fitness(1, 0), with_fitness(1, 1)};
    Rng rng(0);
    for (int i = 0; i < 200; ++i) {
      const auto w = tournament(pool, 2, rng);
      CHECK(w <= 1);
    }
    const std::vector<Trajectory> big{with_fitness(1, 0), with_fitness(1, 1), with_fitness(1, 2)};
    int ones = 0;
    for (int i = 0; i < 3000; ++i) ones += tournament(big, 3, rng) == 2;
    // index 2 wins only when drawn three times: (1/3)^3
    CHECK(std::abs(ones / 3000.0 - 1.0 / 27.0) < 0.015);
  }
  SUBCASE("empty pool throws") {
    Rng rng(1);
    CHECK_THROWS_AS(select(std::vector<Trajectory>{}, 0.1, 3, 3, rng), DomainError);
  }
}

TEST_CASE("EA parameter validation") {
  EaParams p;
  CHECK_NOTHROW(p.validate(50));
  p.crossover_rate = 1.5;
  CHECK_THROWS_AS(p.validate(50), ConfigError);
  p = {};
  p.tournament_size = 1;
  CHECK_THROWS_AS(p.validate(50), ConfigError);
  p = {};
  p.elitism_fraction = 1e-12;
  CHECK_THROWS_AS(p.validate(50), ConfigError);
  p = {};
  p.min_len = 5;
  p.max_len = 4;
  CHECK_THROWS_AS(p.validate(50), ConfigError);
}

TEST_CASE("candidate ops include applicable macros") {
  MazeDomain d(generate_maze(5, 5, 1.0, 1));
  GcaModel model(d.atomic_names(), GcaParams{});
  MacroOperation east_east;
  east_east.id = 4;
  east_east.left = op_of(Direction::East);
  east_east.right = op_of(Direction::East);
  model.expand_weight_matrix(east_east);
  MacroOperation north_north;
  north_north.id = 5;
  north_north.left = op_of(Direction::North);
  north_north.right = op_of(Direction::North);
  model.expand_weight_matrix(north_north);
  const auto c = candidate_ops(d, &model, d.start_state());
  CHECK(std::find(c.begin(), c.end(), OpId{4}) != c.end());
  CHECK(std::find(c.begin(), c.end(), OpId{5}) == c.end());
  CHECK(candidate_ops(d, nullptr, d.start_state()) == d.valid_atomic(d.start_state()));
}

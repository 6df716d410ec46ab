#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "ace/errors.hpp"
#include "ace/stats.hpp"

using namespace ace;

namespace {

// Two-sided p by brute-force enumeration of every sign pattern.
double brute_force_p(const std::vector<double>& diffs) {
  std::vector<double> d;
  for (double x : diffs) {
    if (x != 0) d.push_back(x);
  }
  const std::size_t n = d.size();
  // average ranks of |d|
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    double less = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::fabs(d[j]) < std::fabs(d[i])) ++less;
      if (std::fabs(d[j]) == std::fabs(d[i])) ++equal;
    }
    rank[i] = less + (equal + 1) / 2;
  }
  double total = 0, wplus = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total += rank[i];
    if (d[i] > 0) wplus += rank[i];
  }
  const double observed = std::min(wplus, total - wplus);
  std::size_t extreme = 0;
  for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
    double w = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) w += rank[i];
    }
    if (w <= observed + 1e-9) ++extreme;
  }
  return std::min(1.0, 2.0 * static_cast<double>(extreme) / std::ldexp(1.0, static_cast<int>(n)));
}

PairedSample from_diffs(const std::vector<double>& d) {
  PairedSample p;
  for (double x : d) {
    p.baseline.push_back(10.0);
    p.treatment.push_back(10.0 + x);
  }
  return p;
}

}  // namespace

TEST_CASE("signed-rank test") {
  SUBCASE("all zero differences") {
    PairedSample p{{1, 2, 3, 4, 5, 6}, {1, 2, 3, 4, 5, 6}, {}};
    CHECK_THROWS_AS(wilcoxon_signed_rank(p), InsufficientData);
  }
  SUBCASE("six positive differences") {
    auto r = wilcoxon_signed_rank(from_diffs({1, 2, 3, 4, 5, 6}));
    CHECK(r.w_minus == 0.0);
    CHECK(r.w_plus == 21.0);
    CHECK(r.p_value == doctest::Approx(2.0 / 64.0).epsilon(1e-14));
    CHECK(r.exact);
  }
  SUBCASE("textbook sample of ten") {
    // paired before/after measurements with one tie in magnitude
    PairedSample p{{125, 115, 130, 140, 140, 115, 140, 125, 140, 135},
                   {110, 122, 125, 120, 140, 124, 123, 137, 135, 145},
                   {}};
    auto r = wilcoxon_signed_rank(p);
    std::vector<double> d;
    for (std::size_t i = 0; i < 10; ++i) d.push_back(p.treatment[i] - p.baseline[i]);
    CHECK(r.n == 9);
    CHECK(std::fabs(r.p_value - brute_force_p(d)) < 1e-10);
  }
  SUBCASE("fewer than five non-zero differences") {
    CHECK_THROWS_AS(wilcoxon_signed_rank(from_diffs({1, 2, 0, 0, 3, 4})), InsufficientData);
  }
  SUBCASE("mismatched lengths and duplicate keys") {
    PairedSample p{{1, 2}, {1}, {}};
    CHECK_THROWS_AS(wilcoxon_signed_rank(p), DomainError);
    PairedSample q{{1, 2, 3, 4, 5}, {2, 3, 4, 5, 6}, {"a", "b", "c", "d", "a"}};
    CHECK_THROWS_AS(wilcoxon_signed_rank(q), DomainError);
  }
  SUBCASE("large samples use the normal approximation") {
    std::vector<double> d;
    for (int i = 1; i <= 40; ++i) d.push_back(i % 3 == 0 ? -i : i);
    auto r = wilcoxon_signed_rank(from_diffs(d));
    CHECK_FALSE(r.exact);
    CHECK(r.p_value > 0.0);
    CHECK(r.p_value < 1.0);
  }
}

TEST_CASE("exact test matches enumeration on random samples") {
  std::mt19937_64 gen(23);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 5 + gen() % 8;
    std::vector<double> d;
    for (std::size_t i = 0; i < n; ++i) {
      double x = static_cast<double>(static_cast<int>(gen() % 11) - 5);
      if (x == 0 && gen() % 2) x = 1;
      d.push_back(x);
    }
    std::size_t nz = 0;
    for (double x : d) nz += x != 0;
    if (nz < 5) continue;
    auto r = wilcoxon_signed_rank(from_diffs(d));
    CHECK(std::fabs(r.p_value - brute_force_p(d)) < 1e-10);
    std::vector<double> neg;
    for (double x : d) neg.push_back(-x);
    auto rn = wilcoxon_signed_rank(from_diffs(neg));
    CHECK(std::fabs(rn.p_value - r.p_value) < 1e-12);
    CHECK(rn.w_plus == r.w_minus);
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("effect size") {
  SUBCASE("identical samples") {
    PairedSample p{{1, 2, 3, 4}, {1, 2, 3, 4}, {}};
    CHECK(cohens_d(p) == 0.0);
  }
  SUBCASE("shift of one standard deviation") {
    // sample SD of {-1, 0, 1} is 1
    PairedSample p{{-1, 0, 1}, {0, 1, 2}, {}};
    CHECK(cohens_d(p) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("means 9 and 10 with SD 2") {
    PairedSample p{{7, 9, 11}, {8, 10, 12}, {}};
    CHECK(sample_sd(p.baseline) == doctest::Approx(2.0));
    CHECK(cohens_d(p) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("zero pooled deviation") {
    PairedSample p{{3, 3, 3}, {4, 4, 4}, {}};
    CHECK_THROWS_AS(cohens_d(p), DomainError);
  }
  SUBCASE("scale invariance") {
    PairedSample p{{1, 4, 2, 8}, {3, 5, 5, 9}, {}};
    PairedSample q = p;
    for (auto& x : q.baseline) x *= 7.5;
    for (auto& x : q.treatment) x *= 7.5;
    CHECK(cohens_d(q) == doctest::Approx(cohens_d(p)).epsilon(1e-12));
  }
}

TEST_CASE("sign test") {
  CHECK(sign_test_one_sided(0, 0) == 1.0);
  CHECK(sign_test_one_sided(5, 0) == doctest::Approx(1.0 / 32));
  CHECK(sign_test_one_sided(0, 5) == doctest::Approx(1.0));
  // P(X >= 8), X ~ Bin(10, 1/2) = (45 + 10 + 1) / 1024
  CHECK(sign_test_one_sided(8, 2) == doctest::Approx(56.0 / 1024).epsilon(1e-12));
}

TEST_CASE("summaries") {
  auto rec = [](std::string arm, bool ok, std::optional<int> gen, double fit) {
    RunRecord r;
    r.arm = std::move(arm);
    r.success = ok;
    r.success_generation = gen;
    r.best_fitness = fit;
    if (ok) r.path_efficiency = 0.5;
    return r;
  };
  auto by_arm = [](const RunRecord& r) { return r.arm; };
  SUBCASE("single successful record") {
    std::vector<RunRecord> v{rec("a", true, 7, 100)};
    auto rows = summarize(v, by_arm);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].success_rate == 1.0);
    CHECK(*rows[0].mean_fitness == 100);
    CHECK(*rows[0].mean_success_generation == 7);
    CHECK(*rows[0].mean_path_efficiency == 0.5);
  }
  SUBCASE("empty group") {
    std::vector<RunRecord> v{rec("a", true, 7, 100)};
    auto rows = summarize(v, by_arm, {"a", "b"});
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].runs == 0);
    CHECK(rows[1].success_rate == 0.0);
    CHECK_FALSE(rows[1].mean_fitness.has_value());
    CHECK_FALSE(rows[1].mean_success_generation.has_value());
  }
  SUBCASE("mixed outcomes") {
    std::vector<RunRecord> v{rec("a", true, 10, 9), rec("a", true, 20, 9), rec("a", false, std::nullopt, 3)};
    auto rows = summarize(v, by_arm);
    CHECK(rows[0].success_rate == doctest::Approx(2.0 / 3));
    CHECK(*rows[0].mean_success_generation == 15.0);
    CHECK(*rows[0].mean_fitness == 7.0);
  }
}

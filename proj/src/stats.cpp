#include "ace/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include "ace/errors.hpp"

namespace ace {

void PairedSample::validate() const {
  if (baseline.size() != treatment.size()) throw DomainError("paired samples differ in length");
  if (!keys.empty()) {
    if (keys.size() != baseline.size()) throw DomainError("pairing keys do not match sample length");
    if (std::set<std::string>(keys.begin(), keys.end()).size() != keys.size()) {
      throw DomainError("pairing keys must be unique");
    }
  }
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

WilcoxonResult wilcoxon_signed_rank(const PairedSample& paired) {
  paired.validate();
  std::vector<double> diffs;
  for (std::size_t i = 0; i < paired.baseline.size(); ++i) {
    const double d = paired.treatment[i] - paired.baseline[i];
    if (d != 0.0) diffs.push_back(d);
  }
  const std::size_t n = diffs.size();
  if (n < 5) throw InsufficientData("signed-rank test needs at least 5 non-zero differences");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::fabs(diffs[a]) < std::fabs(diffs[b]); });
  // Ranks are kept doubled so tied (half-integer) ranks stay integral.
  std::vector<std::uint64_t> rank2(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::fabs(diffs[order[j + 1]]) == std::fabs(diffs[order[i]])) ++j;
    const std::uint64_t r2 = static_cast<std::uint64_t>(i + 1 + j + 1);  // 2 * average rank
    for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = r2;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }

  WilcoxonResult res;
  res.n = n;
  std::uint64_t plus2 = 0, total2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total2 += rank2[i];
    if (diffs[i] > 0) plus2 += rank2[i];
  }
  res.w_plus = static_cast<double>(plus2) / 2.0;
  res.w_minus = static_cast<double>(total2 - plus2) / 2.0;
  res.statistic = std::min(res.w_plus, res.w_minus);

  if (n <= kExactWilcoxonMax) {
    // Count sign assignments by the doubled W+ they produce.
    std::vector<double> ways(total2 + 1, 0.0);
    ways[0] = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t s = total2 + 1; s-- > rank2[i];) ways[s] += ways[s - rank2[i]];
    }
    const std::uint64_t m2 = std::min(plus2, total2 - plus2);
    double tail = 0.0;
    for (std::uint64_t s = 0; s <= m2; ++s) tail += ways[s];
    res.p_value = std::min(1.0, 2.0 * tail / std::ldexp(1.0, static_cast<int>(n)));
    res.exact = true;
  } else {
    const double nn = static_cast<double>(n);
    const double mu = nn * (nn + 1.0) / 4.0;
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
    const double z = std::max(0.0, std::fabs(res.w_plus - mu) - 0.5) / std::sqrt(var);
    res.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    res.exact = false;
  }
  return res;
}

double cohens_d(const PairedSample& paired) {
  paired.validate();
  const double st = sample_sd(paired.treatment);
  const double sb = sample_sd(paired.baseline);
  const double pooled = std::sqrt((st * st + sb * sb) / 2.0);
  if (!(pooled > 0.0)) throw DomainError("effect size undefined: pooled standard deviation is zero");
  return (mean(paired.treatment) - mean(paired.baseline)) / pooled;
}

double sign_test_one_sided(std::size_t wins, std::size_t losses) {
  const std::size_t n = wins + losses;
  if (n == 0) return 1.0;
  // Sum of binomial pmf in log space.
  double p = 0.0;
  for (std::size_t k = wins; k <= n; ++k) {
    const double log_pmf = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) -
                           static_cast<double>(n) * std::log(2.0);
    p += std::exp(log_pmf);
  }
  return std::min(1.0, p);
}

namespace {

std::optional<double> mean_opt(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return mean(v);
}

}  // namespace

std::vector<SummaryRow> summarize(std::span<const RunRecord> records, const GroupKey& key,
                                  std::vector<std::string> groups) {
  if (groups.empty()) {
    for (const auto& r : records) {
      const std::string k = key(r);
      if (std::find(groups.begin(), groups.end(), k) == groups.end()) groups.push_back(k);
    }
  }
  std::vector<SummaryRow> rows;
  for (const auto& g : groups) {
    SummaryRow row;
    row.key = g;
    std::vector<double> fit, gen, eff, wall, created, surviving, effect;
    std::size_t successes = 0;
    for (const auto& r : records) {
      if (key(r) != g) continue;
      ++row.runs;
      fit.push_back(r.best_fitness);
      wall.push_back(r.wall_clock_seconds);
      created.push_back(static_cast<double>(r.macros_created));
      surviving.push_back(static_cast<double>(r.macros_surviving));
      effect.push_back(r.mean_macro_effectiveness);
      if (r.success) {
        ++successes;
        if (r.success_generation) gen.push_back(*r.success_generation);
        if (r.path_efficiency) eff.push_back(*r.path_efficiency);
      }
    }
    row.success_rate = row.runs == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(row.runs);
    row.mean_fitness = mean_opt(fit);
    row.mean_success_generation = mean_opt(gen);
    row.mean_path_efficiency = mean_opt(eff);
    row.mean_wall_seconds = mean_opt(wall);
    row.mean_macros_created = mean_opt(created);
    row.mean_macros_surviving = mean_opt(surviving);
    row.mean_macro_effectiveness = mean_opt(effect);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_summary(std::span<const SummaryRow> rows) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-22s %5s %8s %10s %9s %9s %9s %9s %7s\n", "group", "runs", "succ%",
                "mean_fit", "mean_gen", "path_eff", "macros", "surviving", "effect");
  out << line;
  auto cell = [](const std::optional<double>& v, const char* fmt) {
    char buf[32];
    if (!v) return std::string("-");
    std::snprintf(buf, sizeof buf, fmt, *v);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-22s %5zu %8.1f %10s %9s %9s %9s %9s %7s\n", r.key.c_str(), r.runs,
                  100.0 * r.success_rate, cell(r.mean_fitness, "%.1f").c_str(),
                  cell(r.mean_success_generation, "%.1f").c_str(), cell(r.mean_path_efficiency, "%.3f").c_str(),
                  cell(r.mean_macros_created, "%.1f").c_str(), cell(r.mean_macros_surviving, "%.1f").c_str(),
                  cell(r.mean_macro_effectiveness, "%.3f").c_str());
    out << line;
  }
  return out.str();
}

}  // namespace ace

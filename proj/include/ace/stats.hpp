#pragma once

// Paired-sample statistics and run summaries.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ace/ace_loop.hpp"

namespace ace {

struct PairedSample {
  std::vector<double> baseline;
  std::vector<double> treatment;
  std::vector<std::string> keys;  // optional pairing keys, unique when present

  void validate() const;
};

struct WilcoxonResult {
  double w_plus = 0.0;
  double w_minus = 0.0;
  double statistic = 0.0;  // min(W+, W-)
  double p_value = 1.0;    // two-sided
  std::size_t n = 0;       // non-zero differences
  bool exact = true;
};

inline constexpr std::size_t kExactWilcoxonMax = 25;

// Two-sided signed-rank test on treatment - baseline. Zero differences are
// dropped, tied magnitudes share their average rank. The null distribution
// is exact (over the observed ranks) for n <= 25, otherwise a normal
// approximation with tie and continuity corrections.
// Throws InsufficientData when fewer than 5 non-zero differences remain.
WilcoxonResult wilcoxon_signed_rank(const PairedSample& paired);

// (mean(treatment) - mean(baseline)) / sqrt((s_t^2 + s_b^2) / 2).
// Throws DomainError when the pooled standard deviation is zero.
double cohens_d(const PairedSample& paired);

// One-sided binomial sign test: P(X >= wins) with X ~ Bin(wins + losses, 1/2).
double sign_test_one_sided(std::size_t wins, std::size_t losses);

struct SummaryRow {
  std::string key;
  std::size_t runs = 0;
  double success_rate = 0.0;
  std::optional<double> mean_fitness;
  std::optional<double> mean_success_generation;
  std::optional<double> mean_path_efficiency;
  std::optional<double> mean_wall_seconds;
  std::optional<double> mean_macros_created;
  std::optional<double> mean_macros_surviving;
  std::optional<double> mean_macro_effectiveness;
};

using GroupKey = std::function<std::string(const RunRecord&)>;

// One row per key in `groups` (in that order); when `groups` is empty the
// keys are taken from the records in first-seen order.
std::vector<SummaryRow> summarize(std::span<const RunRecord> records, const GroupKey& key,
                                  std::vector<std::string> groups = {});

std::string format_summary(std::span<const SummaryRow> rows);

double mean(std::span<const double> v);
// Sample (n - 1) standard deviation.
double sample_sd(std::span<const double> v);

}  // namespace ace

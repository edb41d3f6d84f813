#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ossvm {

inline constexpr std::size_t kWilcoxonExactLimit = 25;
inline constexpr std::size_t kMinPairsForValidity = 5;

struct WilcoxonResult {
  double w_plus = 0.0;     // rank sum of positive differences (a - b > 0)
  double w_minus = 0.0;
  double statistic = 0.0;  // min(w_plus, w_minus)
  double p_value = 1.0;    // two-sided
  std::size_t n_used = 0;  // nonzero differences
  bool exact = true;
};

// Paired signed-rank test on a[i] - b[i]. Zero differences are dropped, tied
// magnitudes share average ranks. Exact null distribution (conditional on
// the tie pattern) up to kWilcoxonExactLimit nonzero differences, normal
// approximation with continuity and tie correction beyond. Throws
// AllZeroDifferences if nothing is left.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

// Holm step-down adjustment, returned in input order.
std::vector<double> holm_adjust(std::span<const double> p_values);

// Two-sided exact binomial test of `wins` successes in `trials` at p = 0.5.
double binomial_sign_test(std::int64_t wins, std::int64_t trials);

// One row of a method comparison.
struct ComparisonRow {
  std::string method_a, method_b, measure;
  std::size_t pairs = 0;
  double p_raw = 1.0;
  double p_holm = 1.0;
  double p_binomial = 1.0;
  std::int64_t wins_a = 0, wins_b = 0, ties = 0;
  std::string direction;  // "a>b", "a<b" or "="
  bool sufficient = false;  // pairs >= kMinPairsForValidity
};

// Paired comparison of two methods on one measure; p_holm is left equal to
// p_raw until adjust_comparisons runs over the whole report.
ComparisonRow compare_paired(const std::string& method_a, const std::string& method_b,
                             const std::string& measure, std::span<const double> a,
                             std::span<const double> b);

// Holm-adjusts p_raw across all rows sharing a measure.
void adjust_comparisons(std::vector<ComparisonRow>& rows);

// method_a,method_b,measure,pairs,p_raw,p_holm,p_binomial,wins_a,wins_b,ties,direction,sufficient
void write_comparison_csv(std::ostream& os, const std::vector<ComparisonRow>& rows);

}  // namespace ossvm

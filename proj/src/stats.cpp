#include "ossvm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>

#include "ossvm/error.hpp"
#include "ossvm/text.hpp"

namespace ossvm {
namespace {

// Average ranks (1-based) of |d|, ties sharing the mean rank.
std::vector<double> average_ranks(const std::vector<double>& magnitudes) {
  const std::size_t n = magnitudes.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](auto x, auto y) { return magnitudes[x] < magnitudes[y]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && magnitudes[order[j + 1]] == magnitudes[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

// P(W <= w) under the null, where W is the sum of a random subset of
// `ranks`. Ranks are multiples of 1/2, so the subset-sum DP runs on 2*rank.
double exact_lower_tail(const std::vector<double>& ranks, double w) {
  std::vector<int> doubled;
  int total = 0;
  for (double r : ranks) {
    doubled.push_back(static_cast<int>(std::lround(2.0 * r)));
    total += doubled.back();
  }
  std::vector<double> ways(static_cast<std::size_t>(total) + 1, 0.0);
  ways[0] = 1.0;
  int reach = 0;
  for (int r : doubled) {
    for (int s = reach; s >= 0; --s) {
      if (ways[static_cast<std::size_t>(s)] != 0.0) ways[static_cast<std::size_t>(s + r)] += ways[static_cast<std::size_t>(s)];
    }
    reach += r;
  }
  const int limit = static_cast<int>(std::lround(2.0 * w));
  double below = 0.0;
  for (int s = 0; s <= std::min(limit, total); ++s) below += ways[static_cast<std::size_t>(s)];
  return below / std::ldexp(1.0, static_cast<int>(ranks.size()));
}

double normal_upper(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

// log C(n, k)
double log_choose(std::int64_t n, std::int64_t k) {
  return std::lgamma(static_cast<double>(n + 1)) - std::lgamma(static_cast<double>(k + 1)) -
         std::lgamma(static_cast<double>(n - k + 1));
}

// P(X <= k) for X ~ Bin(n, 1/2).
double binomial_cdf_half(std::int64_t k, std::int64_t n) {
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  if (n <= 60) {
    // Exact integer coefficients; C(60, 30) < 2^63.
    std::uint64_t c = 1;
    std::uint64_t sum = 0;
    for (std::int64_t i = 0; i <= k; ++i) {
      sum += c;
      c = c * static_cast<std::uint64_t>(n - i) / static_cast<std::uint64_t>(i + 1);
    }
    return static_cast<double>(sum) / std::ldexp(1.0, static_cast<int>(n));
  }
  double sum = 0.0;
  const double log_half_n = static_cast<double>(n) * std::log(0.5);
  for (std::int64_t i = 0; i <= k; ++i) sum += std::exp(log_choose(n, i) + log_half_n);
  return std::min(1.0, sum);
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::InvalidArgument, "paired samples differ in length");
  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) diffs.push_back(d);
  }
  if (diffs.empty()) throw Error(ErrorKind::AllZeroDifferences, "all paired differences are zero");

  std::vector<double> mags;
  for (double d : diffs) mags.push_back(std::abs(d));
  const auto ranks = average_ranks(mags);

  WilcoxonResult r;
  r.n_used = diffs.size();
  for (std::size_t i = 0; i < diffs.size(); ++i) (diffs[i] > 0 ? r.w_plus : r.w_minus) += ranks[i];
  r.statistic = std::min(r.w_plus, r.w_minus);

  const double n = static_cast<double>(r.n_used);
  if (r.n_used <= kWilcoxonExactLimit) {
    r.exact = true;
    r.p_value = std::min(1.0, 2.0 * exact_lower_tail(ranks, r.statistic));
  } else {
    r.exact = false;
    std::map<double, int> ties;
    for (double m : mags) ++ties[m];
    double tie_term = 0.0;
    for (const auto& [m, t] : ties) tie_term += static_cast<double>(t) * t * t - t;
    const double mean = n * (n + 1.0) / 4.0;
    const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    const double z = std::max(0.0, std::abs(r.statistic - mean) - 0.5) / std::sqrt(var);
    r.p_value = std::min(1.0, 2.0 * normal_upper(z));
  }
  return r;
}

std::vector<double> holm_adjust(std::span<const double> p_values) {
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidArgument, "p-values must lie in [0, 1]");
  }
  const std::size_t k = p_values.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](auto x, auto y) { return p_values[x] < p_values[y]; });
  std::vector<double> adjusted(k);
  double running = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double scaled = std::min(1.0, static_cast<double>(k - i) * p_values[order[i]]);
    running = std::max(running, scaled);
    adjusted[order[i]] = running;
  }
  return adjusted;
}

double binomial_sign_test(std::int64_t wins, std::int64_t trials) {
  if (trials < 0 || wins < 0 || wins > trials) {
    throw Error(ErrorKind::InvalidArgument, "need 0 <= wins <= trials");
  }
  if (trials == 0) return 1.0;
  const double lower = binomial_cdf_half(wins, trials);
  const double upper = binomial_cdf_half(trials - wins, trials);  // P(X >= wins) by symmetry
  return std::min(1.0, 2.0 * std::min(lower, upper));
}

ComparisonRow compare_paired(const std::string& method_a, const std::string& method_b,
                             const std::string& measure, std::span<const double> a,
                             std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::InvalidArgument, "paired samples differ in length");
  ComparisonRow row;
  row.method_a = method_a;
  row.method_b = method_b;
  row.measure = measure;
  row.pairs = a.size();
  row.sufficient = a.size() >= kMinPairsForValidity;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) ++row.wins_a;
    else if (a[i] < b[i]) ++row.wins_b;
    else ++row.ties;
  }
  try {
    const auto w = wilcoxon_signed_rank(a, b);
    row.p_raw = w.p_value;
    row.direction = w.w_plus > w.w_minus ? "a>b" : (w.w_plus < w.w_minus ? "a<b" : "=");
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::AllZeroDifferences) throw;
    row.p_raw = 1.0;
    row.direction = "=";
  }
  row.p_holm = row.p_raw;
  row.p_binomial = binomial_sign_test(row.wins_a, row.wins_a + row.wins_b);
  return row;
}

void adjust_comparisons(std::vector<ComparisonRow>& rows) {
  std::map<std::string, std::vector<std::size_t>> by_measure;
  for (std::size_t i = 0; i < rows.size(); ++i) by_measure[rows[i].measure].push_back(i);
  for (const auto& [measure, idx] : by_measure) {
    std::vector<double> raw;
    for (auto i : idx) raw.push_back(rows[i].p_raw);
    const auto adj = holm_adjust(raw);
    for (std::size_t k = 0; k < idx.size(); ++k) rows[idx[k]].p_holm = adj[k];
  }
}

void write_comparison_csv(std::ostream& os, const std::vector<ComparisonRow>& rows) {
  os << "method_a,method_b,measure,pairs,p_raw,p_holm,p_binomial,wins_a,wins_b,ties,direction,"
        "sufficient\n";
  for (const auto& r : rows) {
    os << r.method_a << ',' << r.method_b << ',' << r.measure << ',' << r.pairs << ','
       << format_real(r.p_raw) << ',' << format_real(r.p_holm) << ','
       << format_real(r.p_binomial) << ',' << r.wins_a << ',' << r.wins_b << ',' << r.ties << ','
       << r.direction << ',' << (r.sufficient ? 1 : 0) << '\n';
  }
}

}  // namespace ossvm

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ossvm/kernel.hpp"
#include "ossvm/sample.hpp"

namespace ossvm {

inline constexpr double kDefaultStopEps = 1e-3;
inline constexpr std::int64_t kDefaultMaxIter = 10'000'000;
inline constexpr std::int64_t kGradientRefreshPeriod = 1'000'000;
inline constexpr std::size_t kDefaultCacheBytes = std::size_t{64} << 20;

// min_alpha  1/2 a'Qa - e'a   s.t.  0 <= a_i <= C,  sum_i a_i y_i = lambda,
// with Q_ij = y_i y_j K(x_i, x_j). lambda = 0 is the classical SVM dual.
struct DualProblem {
  std::vector<SparseSample> samples;
  std::vector<int> labels;  // +1 / -1, same length as samples
  double C = 1.0;
  double lambda = 0.0;
  KernelParams kernel{};
  double stop_eps = kDefaultStopEps;
  std::int64_t max_iter = kDefaultMaxIter;
  std::size_t cache_bytes = kDefaultCacheBytes;

  std::size_t positive_count() const noexcept;
};

struct DualSolution {
  std::vector<double> alpha;
  double bias = 0.0;  // b in f(x) = sum_i a_i y_i K(x_i, x) + b
  double dual_objective = 0.0;
  std::int64_t iterations = 0;
  double kkt_violation = 0.0;
  bool converged = false;  // false => max_iter hit, alpha is best-so-far
};

// Snapshot handed to an optional per-iteration observer.
struct IterationInfo {
  std::int64_t iteration;
  std::size_t i, j;
  std::span<const double> alpha;
  double objective;  // from the maintained gradient
};

using IterationObserver = std::function<void(const IterationInfo&)>;

// Throws InvalidArgument for malformed problems and InfeasibleLambda when
// lambda lies outside [0, C * m_p).
void validate_problem(const DualProblem& problem);

// a_i = lambda / m_p on positives, 0 on negatives.
std::vector<double> initialize_alpha(const DualProblem& problem);

DualSolution solve(const DualProblem& problem, const IterationObserver& observer = {});

// b from the KKT conditions: mean of y_i - sum_j a_j y_j K_ij over free
// indices, else the midpoint of the feasible interval. Throws DegenerateBias
// when that interval is empty by more than stop_eps.
double recover_bias(const DualProblem& problem, std::span<const double> alpha);

// 1/2 sum_ij a_i a_j y_i y_j K_ij - sum_i a_i, by direct double summation.
double dual_objective(const DualProblem& problem, std::span<const double> alpha);

}  // namespace ossvm

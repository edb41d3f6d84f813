#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ossvm/kernel.hpp"
#include "ossvm/sample.hpp"
#include "ossvm/smo_solver.hpp"

namespace ossvm {

// lambda is given as a fraction of its supremum C * m_p, so every grid point
// is feasible regardless of class sizes.
struct BinaryTrainConfig {
  double C = 1.0;
  double gamma = 1.0;
  double lambda_frac = 0.0;  // in [0, 1)
  double stop_eps = kDefaultStopEps;
  std::int64_t max_iter = kDefaultMaxIter;
  std::size_t cache_bytes = kDefaultCacheBytes;

  friend bool operator==(const BinaryTrainConfig&, const BinaryTrainConfig&) = default;
};

// Absolute lambda for a config and positive count; InfeasibleLambda if
// lambda_frac is outside [0, 1).
double absolute_lambda(const BinaryTrainConfig& config, std::size_t positive_count);

class TrainedBinaryModel {
 public:
  TrainedBinaryModel() = default;
  TrainedBinaryModel(std::vector<SparseSample> support_vectors, std::vector<double> sv_coeff,
                     double bias, KernelParams kernel, double C, double lambda,
                     std::size_t positive_count);

  // Labels are the binary view: +1 for the positive class, -1 otherwise.
  const std::vector<SparseSample>& support_vectors() const noexcept { return svs_; }
  const std::vector<double>& sv_coeff() const noexcept { return coeff_; }
  double bias() const noexcept { return bias_; }
  KernelParams kernel() const noexcept { return kernel_; }
  double C() const noexcept { return C_; }
  double lambda() const noexcept { return lambda_; }
  std::size_t positive_count() const noexcept { return positive_count_; }

  // Solver diagnostics, not serialized.
  bool converged = true;
  std::int64_t iterations = 0;

  // sum_i coeff_i K(sv_i, x) + b
  double raw_score(const SparseSample& x) const noexcept;

  // sum_i |coeff_i|, the bound on how far the score can move from b.
  double coefficient_mass() const noexcept;

 private:
  std::vector<SparseSample> svs_;
  std::vector<double> sv_norms_;
  std::vector<double> coeff_;  // alpha_i * y_i
  double bias_ = 0.0;
  KernelParams kernel_{};
  double C_ = 1.0;
  double lambda_ = 0.0;
  std::size_t positive_count_ = 0;
};

TrainedBinaryModel train_binary(std::span<const SparseSample> positives,
                                std::span<const SparseSample> negatives,
                                const BinaryTrainConfig& config);

inline double raw_score(const TrainedBinaryModel& model, const SparseSample& x) {
  return model.raw_score(x);
}

// Under an RBF kernel the positively labeled region is bounded exactly when
// b < 0; b == 0 counts as unbounded.
inline bool has_bounded_plos(const TrainedBinaryModel& model) noexcept {
  return model.bias() < 0.0;
}

struct EscalationResult {
  TrainedBinaryModel model;
  double lambda_frac = 0.0;          // the value that produced `model`
  int retrains = 0;                  // 0 when the initial config already gave b < 0
  std::vector<double> tried_fracs;   // every lambda_frac trained, in order
  std::vector<double> tried_biases;
};

// Trains at config.lambda_frac; while b >= 0 retrains with
// lambda_frac <- lambda_frac + step * (1 - lambda_frac). Throws
// EscalationFailed once lambda_frac would exceed 1 - 1e-6.
EscalationResult escalate_lambda(std::span<const SparseSample> positives,
                                 std::span<const SparseSample> negatives,
                                 const BinaryTrainConfig& config, double step);

// Line-oriented text format:
//   ossvm-binary-model 1
//   gamma <g>
//   bias <b>
//   lambda <l>
//   C <c>
//   positive_count <m_p>
//   sv_count <n>
//   <coeff> <idx>:<val> ...     (n lines)
// Reals use shortest round-trip decimal form.
void write_binary_model(std::ostream& os, const TrainedBinaryModel& model);
TrainedBinaryModel read_binary_model(std::istream& is);
void save_binary_model(const std::string& path, const TrainedBinaryModel& model);
TrainedBinaryModel load_binary_model(const std::string& path);

}  // namespace ossvm

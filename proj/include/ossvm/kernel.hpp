#pragma once

#include <cstddef>
#include <list>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "ossvm/sample.hpp"

namespace ossvm {

struct KernelParams {
  double gamma = 1.0;  // must be > 0
};

// Values below this are flushed to zero.
inline constexpr double kKernelFlushThreshold = 1e-300;

// A kernel that depends only on the squared distance between its arguments
// and vanishes as that distance grows without bound. RBF is the only one
// shipped.
class RadialKernel {
 public:
  virtual ~RadialKernel() = default;
  virtual double from_squared_distance(double sq_dist) const noexcept = 0;
};

class RbfKernel final : public RadialKernel {
 public:
  explicit RbfKernel(KernelParams params);
  double gamma() const noexcept { return params_.gamma; }
  double from_squared_distance(double sq_dist) const noexcept override;

 private:
  KernelParams params_;
};

// exp(-gamma * |x - x'|^2) using the norm expansion |x|^2 + |x'|^2 - 2<x,x'>.
double rbf(const SparseSample& x, const SparseSample& x_prime, KernelParams params);

// Same, with precomputed squared norms.
double rbf(const SparseSample& x, double x_sq_norm, const SparseSample& x_prime,
           double x_prime_sq_norm, KernelParams params) noexcept;

// Rows K(x_i, .) over a fixed training set, kept in a least-recently-used
// cache bounded by a byte budget. Rows are handed out as shared pointers so
// an eviction never invalidates a row the caller still holds. Single-writer.
class KernelCache {
 public:
  using Row = std::shared_ptr<const std::vector<double>>;

  KernelCache(std::span<const SparseSample> samples, KernelParams params,
              std::size_t capacity_bytes);

  Row row(std::size_t i);

  std::size_t size() const noexcept { return samples_.size(); }
  std::size_t capacity_bytes() const noexcept { return capacity_bytes_; }
  std::size_t used_bytes() const noexcept { return used_bytes_; }
  std::size_t cached_rows() const noexcept { return index_.size(); }
  bool contains(std::size_t i) const noexcept { return index_.contains(i); }
  std::size_t hits() const noexcept { return hits_; }
  std::size_t misses() const noexcept { return misses_; }

  // K(x_i, x_i); always 1 for RBF but kept general.
  double diagonal(std::size_t i) const noexcept { return diag_[i]; }

 private:
  std::vector<double> compute_row(std::size_t i) const;

  std::span<const SparseSample> samples_;
  RbfKernel kernel_;
  std::vector<double> sq_norms_;
  std::vector<double> diag_;
  std::size_t capacity_bytes_;
  std::size_t used_bytes_ = 0;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;

  struct Entry {
    std::size_t index;
    Row values;
  };
  std::list<Entry> lru_;  // front = most recent
  std::unordered_map<std::size_t, std::list<Entry>::iterator> index_;
};

// Row i of the kernel matrix of training_set, served through cache.
std::vector<double> kernel_row(std::size_t i, KernelCache& cache);

}  // namespace ossvm

#include "ossvm/kernel.hpp"

#include <cmath>
#include <string>

#include "ossvm/error.hpp"

namespace ossvm {

RbfKernel::RbfKernel(KernelParams params) : params_(params) {
  if (!(params.gamma > 0.0) || !std::isfinite(params.gamma)) {
    throw Error(ErrorKind::InvalidArgument,
                "gamma must be positive and finite, got " + std::to_string(params.gamma));
  }
}

double RbfKernel::from_squared_distance(double sq_dist) const noexcept {
  const double v = std::exp(-params_.gamma * sq_dist);
  return v < kKernelFlushThreshold ? 0.0 : v;
}

double rbf(const SparseSample& x, double x_sq_norm, const SparseSample& x_prime,
           double x_prime_sq_norm, KernelParams params) noexcept {
  double sq_dist = x_sq_norm + x_prime_sq_norm - 2.0 * dot(x, x_prime);
  if (sq_dist < 0.0) sq_dist = 0.0;
  const double v = std::exp(-params.gamma * sq_dist);
  return v < kKernelFlushThreshold ? 0.0 : v;
}

double rbf(const SparseSample& x, const SparseSample& x_prime, KernelParams params) {
  return RbfKernel(params).from_squared_distance([&] {
    const double d = squared_norm(x) + squared_norm(x_prime) - 2.0 * dot(x, x_prime);
    return d < 0.0 ? 0.0 : d;
  }());
}

KernelCache::KernelCache(std::span<const SparseSample> samples, KernelParams params,
                         std::size_t capacity_bytes)
    : samples_(samples), kernel_(params), capacity_bytes_(capacity_bytes) {
  sq_norms_.reserve(samples.size());
  diag_.reserve(samples.size());
  for (const auto& s : samples) sq_norms_.push_back(squared_norm(s));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    diag_.push_back(rbf(samples[i], sq_norms_[i], samples[i], sq_norms_[i], params));
  }
}

std::vector<double> KernelCache::compute_row(std::size_t i) const {
  std::vector<double> out(samples_.size());
  const KernelParams params{kernel_.gamma()};
  for (std::size_t j = 0; j < samples_.size(); ++j) {
    out[j] = rbf(samples_[i], sq_norms_[i], samples_[j], sq_norms_[j], params);
  }
  return out;
}

KernelCache::Row KernelCache::row(std::size_t i) {
  if (auto it = index_.find(i); it != index_.end()) {
    ++hits_;
    lru_.splice(lru_.begin(), lru_, it->second);
    return it->second->values;
  }
  ++misses_;
  auto values = std::make_shared<const std::vector<double>>(compute_row(i));
  const std::size_t row_bytes = values->size() * sizeof(double);
  if (row_bytes > capacity_bytes_) return values;

  while (used_bytes_ + row_bytes > capacity_bytes_ && !lru_.empty()) {
    used_bytes_ -= lru_.back().values->size() * sizeof(double);
    index_.erase(lru_.back().index);
    lru_.pop_back();
  }
  lru_.push_front({i, values});
  index_[i] = lru_.begin();
  used_bytes_ += row_bytes;
  return values;
}

std::vector<double> kernel_row(std::size_t i, KernelCache& cache) {
  if (i >= cache.size()) {
    throw Error(ErrorKind::InvalidArgument, "kernel row index out of range");
  }
  return *cache.row(i);
}

}  // namespace ossvm

#pragma once

#include <span>
#include <vector>

namespace ossvm {

struct Feature {
  int index = 0;  // 1-based, strictly increasing within a sample
  double value = 0.0;

  friend bool operator==(const Feature&, const Feature&) = default;
};

// libsvm-style sparse vector with an integer class label.
struct SparseSample {
  int label = 0;
  std::vector<Feature> features;

  friend bool operator==(const SparseSample&, const SparseSample&) = default;
};

using Dataset = std::vector<SparseSample>;

// Builds a sample from dense coordinates, dropping exact zeros.
SparseSample make_dense_sample(int label, std::span<const double> coords);

// Throws a ParseError if indices are not strictly increasing and positive, or
// if a value is non-finite.
void validate_sample(const SparseSample& sample);

double dot(const SparseSample& a, const SparseSample& b) noexcept;
double squared_norm(const SparseSample& a) noexcept;

// Largest feature index present in the dataset (0 for an all-empty set).
int feature_dimension(std::span<const SparseSample> samples) noexcept;

// Sorted distinct labels.
std::vector<int> class_labels(std::span<const SparseSample> samples);

}  // namespace ossvm

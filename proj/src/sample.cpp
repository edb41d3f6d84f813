#include "ossvm/sample.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "ossvm/error.hpp"

namespace ossvm {

SparseSample make_dense_sample(int label, std::span<const double> coords) {
  SparseSample s;
  s.label = label;
  for (std::size_t k = 0; k < coords.size(); ++k) {
    if (coords[k] != 0.0) s.features.push_back({static_cast<int>(k) + 1, coords[k]});
  }
  return s;
}

void validate_sample(const SparseSample& sample) {
  int prev = 0;
  for (const auto& f : sample.features) {
    if (f.index <= prev) {
      throw Error(ErrorKind::ParseError,
                  "feature index " + std::to_string(f.index) + " is not strictly increasing");
    }
    if (!std::isfinite(f.value)) {
      throw Error(ErrorKind::ParseError,
                  "non-finite value at index " + std::to_string(f.index));
    }
    prev = f.index;
  }
}

double dot(const SparseSample& a, const SparseSample& b) noexcept {
  double sum = 0.0;
  auto ia = a.features.begin();
  auto ib = b.features.begin();
  while (ia != a.features.end() && ib != b.features.end()) {
    if (ia->index == ib->index) {
      sum += ia->value * ib->value;
      ++ia;
      ++ib;
    } else if (ia->index < ib->index) {
      ++ia;
    } else {
      ++ib;
    }
  }
  return sum;
}

double squared_norm(const SparseSample& a) noexcept { return dot(a, a); }

int feature_dimension(std::span<const SparseSample> samples) noexcept {
  int dim = 0;
  for (const auto& s : samples) {
    if (!s.features.empty()) dim = std::max(dim, s.features.back().index);
  }
  return dim;
}

std::vector<int> class_labels(std::span<const SparseSample> samples) {
  std::set<int> labels;
  for (const auto& s : samples) labels.insert(s.label);
  return {labels.begin(), labels.end()};
}

}  // namespace ossvm

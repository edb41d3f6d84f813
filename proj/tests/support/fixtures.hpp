#pragma once
// Shared generators for the unit and acceptance tests.

#include <cstdint>
#include <random>
#include <vector>

#include "../oracles/qp_oracle.hpp"
#include "ossvm/sample.hpp"
#include "ossvm/smo_solver.hpp"

namespace fixtures {

inline ossvm::SparseSample point(int label, double x, double y) {
  const double c[2] = {x, y};
  return ossvm::make_dense_sample(label, c);
}

// Random 2D problem with both classes present. lambda is given as a
// fraction of C * m_p.
inline oracle::DenseProblem random_dense(std::mt19937_64& gen, int m, double C, double lambda_frac) {
  std::uniform_real_distribution<double> coord(0.0, 1.0);
  std::uniform_int_distribution<int> gamma_pick(0, 3);
  const double gammas[4] = {0.5, 1.0, 2.0, 8.0};
  oracle::DenseProblem p;
  p.C = C;
  p.gamma = gammas[gamma_pick(gen)];
  int pos = 0;
  do {
    p.x.clear();
    p.y.clear();
    pos = 0;
    for (int i = 0; i < m; ++i) {
      p.x.push_back({coord(gen), coord(gen)});
      const int lab = coord(gen) < 0.5 ? 1 : -1;
      p.y.push_back(lab);
      pos += lab > 0;
    }
  } while (pos == 0 || pos == m);
  p.lambda = lambda_frac * C * pos;
  return p;
}

inline ossvm::DualProblem to_library(const oracle::DenseProblem& d, double stop_eps) {
  ossvm::DualProblem p;
  for (std::size_t i = 0; i < d.x.size(); ++i) {
    p.samples.push_back(ossvm::make_dense_sample(d.y[i] > 0 ? 1 : -1, d.x[i]));
    p.labels.push_back(d.y[i]);
  }
  p.C = d.C;
  p.lambda = d.lambda;
  p.kernel.gamma = d.gamma;
  p.stop_eps = stop_eps;
  return p;
}

inline double signed_sum(const ossvm::DualProblem& p, const std::vector<double>& alpha) {
  double s = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) s += alpha[i] * p.labels[i];
  return s;
}

}  // namespace fixtures

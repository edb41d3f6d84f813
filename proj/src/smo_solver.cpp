#include "ossvm/smo_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ossvm/error.hpp"

namespace ossvm {
namespace {

constexpr double kTau = 1e-12;  // surrogate curvature for non-positive quad terms
constexpr double kInf = std::numeric_limits<double>::infinity();

// Free-index margin for bias recovery, relative to C.
constexpr double kFreeMargin = 1e-12;

double bias_from_gradient(std::span<const int> y, std::span<const double> alpha,
                          std::span<const double> grad, double C, double tolerance) {
  const double margin = kFreeMargin * C;
  double ub = kInf;
  double lb = -kInf;
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const double yg = y[i] * grad[i];
    if (alpha[i] >= C - margin) {
      if (y[i] == -1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha[i] <= margin) {
      if (y[i] == +1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  double rho;
  if (n_free > 0) {
    rho = sum_free / static_cast<double>(n_free);
  } else {
    if (lb > ub + tolerance) {
      throw Error(ErrorKind::DegenerateBias,
                  "no free support vector and empty bias interval [" + std::to_string(lb) +
                      ", " + std::to_string(ub) + "]");
    }
    // One side may be unbounded when every sample sits on the same bound type.
    if (!std::isfinite(lb)) rho = ub;
    else if (!std::isfinite(ub)) rho = lb;
    else rho = 0.5 * (ub + lb);
  }
  return -rho;
}

std::vector<double> full_gradient(const DualProblem& problem, std::span<const double> alpha,
                                  KernelCache& cache) {
  const std::size_t m = alpha.size();
  std::vector<double> grad(m, -1.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (alpha[i] == 0.0) continue;
    const auto row = cache.row(i);
    const double ai_yi = alpha[i] * problem.labels[i];
    for (std::size_t k = 0; k < m; ++k) grad[k] += problem.labels[k] * ai_yi * (*row)[k];
  }
  return grad;
}

double bias_tolerance(const DualProblem& problem) {
  return std::max(problem.stop_eps, 1e-12) * (1.0 + 1e-6) + 1e-12;
}

}  // namespace

std::size_t DualProblem::positive_count() const noexcept {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), +1));
}

void validate_problem(const DualProblem& problem) {
  if (problem.samples.size() != problem.labels.size()) {
    throw Error(ErrorKind::InvalidArgument, "samples and labels differ in length");
  }
  std::size_t pos = 0;
  std::size_t neg = 0;
  for (int y : problem.labels) {
    if (y == +1) ++pos;
    else if (y == -1) ++neg;
    else throw Error(ErrorKind::InvalidArgument, "labels must be +1 or -1");
  }
  if (pos == 0 || neg == 0) {
    throw Error(ErrorKind::InvalidArgument, "need at least one positive and one negative sample");
  }
  if (!(problem.C > 0.0) || !std::isfinite(problem.C)) {
    throw Error(ErrorKind::InvalidArgument, "C must be positive and finite");
  }
  if (!(problem.kernel.gamma > 0.0) || !std::isfinite(problem.kernel.gamma)) {
    throw Error(ErrorKind::InvalidArgument, "gamma must be positive and finite");
  }
  if (!(problem.stop_eps > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "stop_eps must be positive");
  }
  if (problem.max_iter <= 0) {
    throw Error(ErrorKind::InvalidArgument, "max_iter must be positive");
  }
  const double lambda_max = problem.C * static_cast<double>(pos);
  if (!(problem.lambda >= 0.0) || !(problem.lambda < lambda_max)) {
    throw Error(ErrorKind::InfeasibleLambda,
                "lambda = " + std::to_string(problem.lambda) + " outside [0, C*m_p) = [0, " +
                    std::to_string(lambda_max) + ")");
  }
}

std::vector<double> initialize_alpha(const DualProblem& problem) {
  validate_problem(problem);
  const double start = problem.lambda / static_cast<double>(problem.positive_count());
  std::vector<double> alpha(problem.labels.size(), 0.0);
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (problem.labels[i] == +1) alpha[i] = std::min(start, problem.C);
  }
  return alpha;
}

DualSolution solve(const DualProblem& problem, const IterationObserver& observer) {
  std::vector<double> alpha = initialize_alpha(problem);
  const std::size_t m = alpha.size();
  const std::span<const int> y = problem.labels;
  const double C = problem.C;

  KernelCache cache(problem.samples, problem.kernel, problem.cache_bytes);
  std::vector<double> grad = full_gradient(problem, alpha, cache);

  auto in_up = [&](std::size_t t) {
    return y[t] == +1 ? alpha[t] < C : alpha[t] > 0.0;
  };
  auto in_low = [&](std::size_t t) {
    return y[t] == +1 ? alpha[t] > 0.0 : alpha[t] < C;
  };
  auto objective_from_gradient = [&] {
    double f = 0.0;
    for (std::size_t t = 0; t < m; ++t) f += alpha[t] * (grad[t] - 1.0);
    return 0.5 * f;
  };

  DualSolution out;
  std::int64_t iter = 0;
  double violation = 0.0;
  bool converged = false;

  while (true) {
    if (iter > 0 && iter % kGradientRefreshPeriod == 0) {
      grad = full_gradient(problem, alpha, cache);
    }

    // i: maximal violator in the "up" set.
    double g_max = -kInf;
    std::size_t i = m;
    for (std::size_t t = 0; t < m; ++t) {
      if (in_up(t) && -y[t] * grad[t] >= g_max) {
        g_max = -y[t] * grad[t];
        i = t;
      }
    }
    // j: largest second-order decrease among "low" indices violating with i.
    double g_max2 = -kInf;
    std::size_t j = m;
    KernelCache::Row row_i;
    if (i < m) row_i = cache.row(i);
    double best = kInf;
    for (std::size_t t = 0; t < m; ++t) {
      if (!in_low(t)) continue;
      const double yg = y[t] * grad[t];
      g_max2 = std::max(g_max2, yg);
      const double grad_diff = g_max + yg;
      if (i < m && grad_diff > 0.0) {
        double quad = cache.diagonal(i) + cache.diagonal(t) - 2.0 * (*row_i)[t];
        if (quad <= 0.0) quad = kTau;
        const double obj_diff = -(grad_diff * grad_diff) / quad;
        if (obj_diff <= best) {
          best = obj_diff;
          j = t;
        }
      }
    }
    violation = (i < m && std::isfinite(g_max2)) ? g_max + g_max2 : 0.0;
    if (violation < problem.stop_eps || j == m) {
      converged = true;
      break;
    }
    if (iter >= problem.max_iter) break;
    ++iter;

    const auto row_j = cache.row(j);
    const double k_ij = (*row_i)[j];
    const double old_ai = alpha[i];
    const double old_aj = alpha[j];

    if (y[i] != y[j]) {
      double quad = cache.diagonal(i) + cache.diagonal(j) - 2.0 * k_ij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      double quad = cache.diagonal(i) + cache.diagonal(j) - 2.0 * k_ij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }

    const double dyi = (alpha[i] - old_ai) * y[i];
    const double dyj = (alpha[j] - old_aj) * y[j];
    for (std::size_t k = 0; k < m; ++k) {
      grad[k] += y[k] * (dyi * (*row_i)[k] + dyj * (*row_j)[k]);
    }

    if (observer) observer({iter, i, j, alpha, objective_from_gradient()});
  }

  out.iterations = iter;
  out.kkt_violation = violation;
  out.converged = converged;
  out.dual_objective = objective_from_gradient();
  out.bias = bias_from_gradient(y, alpha, grad, C, converged ? bias_tolerance(problem) : kInf);
  out.alpha = std::move(alpha);
  return out;
}

double recover_bias(const DualProblem& problem, std::span<const double> alpha) {
  validate_problem(problem);
  if (alpha.size() != problem.labels.size()) {
    throw Error(ErrorKind::InvalidArgument, "alpha length mismatch");
  }
  KernelCache cache(problem.samples, problem.kernel, 0);
  const auto grad = full_gradient(problem, alpha, cache);
  return bias_from_gradient(problem.labels, alpha, grad, problem.C, bias_tolerance(problem));
}

double dual_objective(const DualProblem& problem, std::span<const double> alpha) {
  const std::size_t m = alpha.size();
  std::vector<double> norms(m);
  for (std::size_t i = 0; i < m; ++i) norms[i] = squared_norm(problem.samples[i]);
  double quad = 0.0;
  double linear = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    linear += alpha[i];
    if (alpha[i] == 0.0) continue;
    for (std::size_t j = 0; j < m; ++j) {
      if (alpha[j] == 0.0) continue;
      quad += alpha[i] * alpha[j] * problem.labels[i] * problem.labels[j] *
              rbf(problem.samples[i], norms[i], problem.samples[j], norms[j], problem.kernel);
    }
  }
  return 0.5 * quad - linear;
}

}  // namespace ossvm

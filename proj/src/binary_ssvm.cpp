#include "ossvm/binary_ssvm.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ossvm/error.hpp"
#include "ossvm/text.hpp"

namespace ossvm {
namespace {

// Support vectors with alpha at or below this fraction of C are dropped.
constexpr double kSupportThreshold = 1e-12;
constexpr double kEscalationCeiling = 1.0 - 1e-6;

}  // namespace

double absolute_lambda(const BinaryTrainConfig& config, std::size_t positive_count) {
  if (!(config.lambda_frac >= 0.0) || !(config.lambda_frac < 1.0)) {
    throw Error(ErrorKind::InfeasibleLambda,
                "lambda_frac must lie in [0, 1), got " + format_real(config.lambda_frac));
  }
  return config.lambda_frac * config.C * static_cast<double>(positive_count);
}

TrainedBinaryModel::TrainedBinaryModel(std::vector<SparseSample> support_vectors,
                                       std::vector<double> sv_coeff, double bias,
                                       KernelParams kernel, double C, double lambda,
                                       std::size_t positive_count)
    : svs_(std::move(support_vectors)),
      coeff_(std::move(sv_coeff)),
      bias_(bias),
      kernel_(kernel),
      C_(C),
      lambda_(lambda),
      positive_count_(positive_count) {
  if (svs_.size() != coeff_.size()) {
    throw Error(ErrorKind::InvalidArgument, "support vector / coefficient count mismatch");
  }
  RbfKernel check(kernel_);  // validates gamma
  sv_norms_.reserve(svs_.size());
  for (const auto& sv : svs_) sv_norms_.push_back(squared_norm(sv));
}

double TrainedBinaryModel::raw_score(const SparseSample& x) const noexcept {
  const double x_norm = squared_norm(x);
  double sum = 0.0;
  for (std::size_t i = 0; i < svs_.size(); ++i) {
    sum += coeff_[i] * rbf(svs_[i], sv_norms_[i], x, x_norm, kernel_);
  }
  return sum + bias_;
}

double TrainedBinaryModel::coefficient_mass() const noexcept {
  double mass = 0.0;
  for (double c : coeff_) mass += std::abs(c);
  return mass;
}

TrainedBinaryModel train_binary(std::span<const SparseSample> positives,
                                std::span<const SparseSample> negatives,
                                const BinaryTrainConfig& config) {
  if (positives.empty() || negatives.empty()) {
    throw Error(ErrorKind::InvalidArgument, "both classes must be non-empty");
  }
  DualProblem problem;
  problem.samples.reserve(positives.size() + negatives.size());
  problem.labels.reserve(positives.size() + negatives.size());
  for (const auto& s : positives) {
    problem.samples.push_back(s);
    problem.labels.push_back(+1);
  }
  for (const auto& s : negatives) {
    problem.samples.push_back(s);
    problem.labels.push_back(-1);
  }
  problem.C = config.C;
  problem.kernel = {config.gamma};
  problem.lambda = absolute_lambda(config, positives.size());
  problem.stop_eps = config.stop_eps;
  problem.max_iter = config.max_iter;
  problem.cache_bytes = config.cache_bytes;

  const DualSolution sol = solve(problem);

  std::vector<SparseSample> svs;
  std::vector<double> coeff;
  const double cutoff = kSupportThreshold * config.C;
  for (std::size_t i = 0; i < sol.alpha.size(); ++i) {
    if (sol.alpha[i] > cutoff) {
      svs.push_back(std::move(problem.samples[i]));
      svs.back().label = problem.labels[i];
      coeff.push_back(sol.alpha[i] * problem.labels[i]);
    }
  }
  TrainedBinaryModel model(std::move(svs), std::move(coeff), sol.bias, problem.kernel,
                           config.C, problem.lambda, positives.size());
  model.converged = sol.converged;
  model.iterations = sol.iterations;
  return model;
}

EscalationResult escalate_lambda(std::span<const SparseSample> positives,
                                 std::span<const SparseSample> negatives,
                                 const BinaryTrainConfig& config, double step) {
  if (!(step > 0.0) || !(step <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "escalation step must lie in (0, 1]");
  }
  EscalationResult result;
  BinaryTrainConfig current = config;
  while (true) {
    TrainedBinaryModel model = train_binary(positives, negatives, current);
    result.tried_fracs.push_back(current.lambda_frac);
    result.tried_biases.push_back(model.bias());
    if (has_bounded_plos(model)) {
      result.model = std::move(model);
      result.lambda_frac = current.lambda_frac;
      return result;
    }
    const double next = current.lambda_frac + step * (1.0 - current.lambda_frac);
    if (next > kEscalationCeiling || next <= current.lambda_frac) {
      throw Error(ErrorKind::EscalationFailed,
                  "no lambda_frac up to " + format_real(current.lambda_frac) +
                      " produced a negative bias (last b = " + format_real(model.bias()) + ")");
    }
    current.lambda_frac = next;
    ++result.retrains;
  }
}

void write_binary_model(std::ostream& os, const TrainedBinaryModel& model) {
  os << "ossvm-binary-model 1\n";
  os << "gamma " << format_real(model.kernel().gamma) << '\n';
  os << "bias " << format_real(model.bias()) << '\n';
  os << "lambda " << format_real(model.lambda()) << '\n';
  os << "C " << format_real(model.C()) << '\n';
  os << "positive_count " << model.positive_count() << '\n';
  os << "sv_count " << model.support_vectors().size() << '\n';
  for (std::size_t i = 0; i < model.support_vectors().size(); ++i) {
    os << format_real(model.sv_coeff()[i]);
    write_features(os, model.support_vectors()[i]);
    os << '\n';
  }
}

TrainedBinaryModel read_binary_model(std::istream& is) {
  std::string line;
  std::size_t line_no = 0;
  auto next_tokens = [&]() {
    while (std::getline(is, line)) {
      ++line_no;
      auto toks = split_whitespace(line);
      if (!toks.empty()) return toks;
    }
    throw Error(ErrorKind::ParseError, "unexpected end of model file");
  };
  auto context = [&] { return "model line " + std::to_string(line_no); };
  auto header = [&](std::string_view key) {
    auto toks = next_tokens();
    if (toks.size() != 2 || toks[0] != key) {
      throw Error(ErrorKind::ParseError, context() + ": expected '" + std::string(key) + " <value>'");
    }
    return toks[1];
  };

  {
    auto toks = next_tokens();
    if (toks.size() != 2 || toks[0] != "ossvm-binary-model" || toks[1] != "1") {
      throw Error(ErrorKind::ParseError, "not an ossvm binary model (version 1)");
    }
  }
  const double gamma = parse_real(header("gamma"), context());
  const double bias = parse_real(header("bias"), context());
  const double lambda = parse_real(header("lambda"), context());
  const double C = parse_real(header("C"), context());
  const long long mp = parse_int(header("positive_count"), context());
  const long long n = parse_int(header("sv_count"), context());
  if (mp < 0 || n < 0) throw Error(ErrorKind::ParseError, context() + ": negative count");

  std::vector<SparseSample> svs;
  std::vector<double> coeff;
  svs.reserve(static_cast<std::size_t>(n));
  coeff.reserve(static_cast<std::size_t>(n));
  for (long long k = 0; k < n; ++k) {
    auto toks = next_tokens();
    coeff.push_back(parse_real(toks[0], context()));
    SparseSample sv;
    sv.label = coeff.back() > 0 ? 1 : -1;
    sv.features = parse_features(toks, 1, context());
    svs.push_back(std::move(sv));
  }
  return TrainedBinaryModel(std::move(svs), std::move(coeff), bias, KernelParams{gamma}, C,
                            lambda, static_cast<std::size_t>(mp));
}

void save_binary_model(const std::string& path, const TrainedBinaryModel& model) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
  write_binary_model(os, model);
  if (!os) throw Error(ErrorKind::Io, "failed writing " + path);
}

TrainedBinaryModel load_binary_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot open " + path);
  return read_binary_model(is);
}

}  // namespace ossvm

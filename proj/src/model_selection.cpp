#include "ossvm/model_selection.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>

#include <json.hpp>

#include "ossvm/error.hpp"
#include "ossvm/metrics.hpp"
#include "ossvm/parallel.hpp"
#include "ossvm/rng.hpp"
#include "ossvm/text.hpp"

namespace ossvm {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

using ClassIndex = std::map<int, std::vector<std::size_t>>;

ClassIndex index_by_class(std::span<const SparseSample> X) {
  ClassIndex out;
  for (std::size_t i = 0; i < X.size(); ++i) out[X[i].label].push_back(i);
  return out;
}

// Shuffles one class's indices and sends round(20%) (at least one, at most
// n-1) to validation.
void split_class(std::vector<std::size_t> idx, Rng& rng, SplitSpec& out) {
  rng.shuffle(std::span<std::size_t>(idx));
  auto n_val = static_cast<std::size_t>(
      std::llround(kValidationFraction * static_cast<double>(idx.size())));
  n_val = std::clamp<std::size_t>(n_val, 1, idx.size() - 1);
  out.val_samples.insert(out.val_samples.end(), idx.begin(),
                         idx.begin() + static_cast<std::ptrdiff_t>(n_val));
  out.fit_samples.insert(out.fit_samples.end(),
                         idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
}

void require_splittable(int label, const std::vector<std::size_t>& idx) {
  if (idx.size() < 2) {
    throw Error(ErrorKind::ClassTooSmall,
                "class " + std::to_string(label) + " has " + std::to_string(idx.size()) +
                    " sample(s); at least 2 are needed for a fit/validation split");
  }
}

void finish(SplitSpec& s, std::span<const SparseSample> X) {
  std::sort(s.fit_samples.begin(), s.fit_samples.end());
  std::sort(s.val_samples.begin(), s.val_samples.end());
  std::vector<int> classes;
  for (auto i : s.fit_samples) classes.push_back(X[i].label);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  s.fit_classes = std::move(classes);
}

std::vector<int> labels_of(const ClassIndex& by_class) {
  std::vector<int> out;
  for (const auto& [label, idx] : by_class) out.push_back(label);
  return out;
}

// Picks `count` classes from `candidates` uniformly at random.
std::vector<int> pick_classes(std::vector<int> candidates, std::size_t count, Rng& rng) {
  rng.shuffle(std::span<int>(candidates));
  candidates.resize(count);
  std::sort(candidates.begin(), candidates.end());
  return candidates;
}

// Internal splits: the positive class and each negative class of >= 2
// samples are split per class; singleton negatives go to F, except that V
// must receive at least one negative.
SplitSpec internal_split(std::span<const SparseSample> X, int positive_label,
                         const std::vector<int>& withheld, Rng& rng) {
  const auto by_class = index_by_class(X);
  const auto pos_it = by_class.find(positive_label);
  if (pos_it == by_class.end()) {
    throw Error(ErrorKind::InvalidArgument,
                "positive class " + std::to_string(positive_label) + " not present");
  }
  if (by_class.size() < 2) {
    throw Error(ErrorKind::NotEnoughClasses, "internal split needs a negative class");
  }
  require_splittable(positive_label, pos_it->second);

  SplitSpec s;
  split_class(pos_it->second, rng, s);
  std::vector<std::size_t> singletons;
  bool val_has_negative = false;
  for (const auto& [label, idx] : by_class) {
    if (label == positive_label) continue;
    if (std::binary_search(withheld.begin(), withheld.end(), label)) {
      s.val_samples.insert(s.val_samples.end(), idx.begin(), idx.end());
      val_has_negative = true;
    } else if (idx.size() >= 2) {
      split_class(idx, rng, s);
      val_has_negative = true;
    } else {
      singletons.push_back(idx.front());
    }
  }
  const bool fit_has_negative =
      std::any_of(s.fit_samples.begin(), s.fit_samples.end(),
                  [&](std::size_t i) { return X[i].label != positive_label; }) ||
      !singletons.empty();
  if (!val_has_negative && singletons.size() >= 2) {
    s.val_samples.push_back(singletons.back());
    singletons.pop_back();
    val_has_negative = true;
  }
  s.fit_samples.insert(s.fit_samples.end(), singletons.begin(), singletons.end());
  if (!val_has_negative || !fit_has_negative) {
    throw Error(ErrorKind::ClassTooSmall,
                "not enough negative samples to put negatives in both fit and validation sets");
  }
  finish(s, X);
  return s;
}

struct Candidate {
  std::optional<int> positive_label;
  GridPoint params;
};

std::vector<GridPoint> grid_points(const GridSearchPlan& plan) {
  std::vector<GridPoint> out;
  for (double c : plan.C_grid) {
    for (double g : plan.gamma_grid) {
      for (double l : plan.lambda_frac_grid) out.push_back({c, g, l});
    }
  }
  return out;
}

BinaryTrainConfig to_config(const GridPoint& p, const GridSearchPlan& plan) {
  BinaryTrainConfig cfg;
  cfg.C = p.C;
  cfg.gamma = p.gamma;
  cfg.lambda_frac = p.lambda_frac;
  cfg.stop_eps = plan.stop_eps;
  cfg.max_iter = plan.max_iter;
  return cfg;
}

Dataset gather(std::span<const SparseSample> X, const std::vector<std::size_t>& idx) {
  Dataset out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(X[i]);
  return out;
}

double multiclass_measure(const OvaModel& model, const Dataset& val, ValidationMeasure measure) {
  ConfusionMatrix cm(model.class_labels());
  for (const auto& s : val) cm.add(s.label, predict(model, s).label);
  const bool has_unknown = cm.row_sum(cm.unknown_index()) > 0;
  switch (measure) {
    case ValidationMeasure::Accuracy: return overall_accuracy(cm);
    case ValidationMeasure::NA: return has_unknown ? na(cm) : aks(cm);
    case ValidationMeasure::HNA: return has_unknown ? hna(cm) : aks(cm);
  }
  return 0.0;
}

// Binary view: "known" samples are those whose class was in F; withheld
// classes are negatives that stand in for unknowns.
double binary_measure(const TrainedBinaryModel& model, const Dataset& val, int positive_label,
                      const std::vector<int>& fit_classes, ValidationMeasure measure) {
  std::int64_t seen_ok = 0, seen_n = 0, withheld_ok = 0, withheld_n = 0;
  for (const auto& s : val) {
    const bool predicted_positive = model.raw_score(s) >= 0.0;
    const bool ok = predicted_positive == (s.label == positive_label);
    if (std::binary_search(fit_classes.begin(), fit_classes.end(), s.label)) {
      ++seen_n;
      seen_ok += ok;
    } else {
      ++withheld_n;
      withheld_ok += ok;
    }
  }
  const double total = static_cast<double>(seen_n + withheld_n);
  const double accuracy = static_cast<double>(seen_ok + withheld_ok) / total;
  if (measure == ValidationMeasure::Accuracy || withheld_n == 0 || seen_n == 0) return accuracy;
  const double a_seen = static_cast<double>(seen_ok) / static_cast<double>(seen_n);
  const double a_withheld = static_cast<double>(withheld_ok) / static_cast<double>(withheld_n);
  if (measure == ValidationMeasure::NA) return 0.5 * (a_seen + a_withheld);
  return hna_from(a_seen, a_withheld);
}

SplitSpec make_split(std::span<const SparseSample> X, const GridSearchPlan& plan,
                     std::optional<int> positive, std::uint64_t seed) {
  if (plan.approach == GsApproach::External) {
    return plan.regime == GsRegime::Closed ? split_external_closed(X, seed)
                                           : split_external_open(X, seed);
  }
  return plan.regime == GsRegime::Closed ? split_internal_closed(X, *positive, seed)
                                         : split_internal_open(X, *positive, seed);
}

GridEvaluation evaluate_candidate(std::span<const SparseSample> X, const GridSearchPlan& plan,
                                  const Candidate& cand) {
  const auto t0 = std::chrono::steady_clock::now();
  GridEvaluation ev;
  ev.positive_label = cand.positive_label;
  ev.params = cand.params;
  const auto cfg = to_config(cand.params, plan);
  const ValidationMeasure measure = plan.effective_measure();

  double sum = 0.0;
  std::vector<double> bias_sum;
  for (int rep = 0; rep < plan.repeats; ++rep) {
    const std::uint64_t label_tag =
        cand.positive_label ? static_cast<std::uint64_t>(static_cast<std::int64_t>(*cand.positive_label))
                            : 0xA11ull;
    const std::uint64_t seed =
        derive_seed(plan.rng_seed, {label_tag, static_cast<std::uint64_t>(rep)});
    const SplitSpec split = make_split(X, plan, cand.positive_label, seed);
    const Dataset fit = gather(X, split.fit_samples);
    const Dataset val = gather(X, split.val_samples);

    std::vector<double> biases;
    double value;
    if (plan.approach == GsApproach::External) {
      const OvaModel model = train_ova(fit, cfg);
      for (const auto& b : model.binaries()) biases.push_back(b.bias());
      if (plan.reject_nonnegative_bias && !model.all_bounded()) {
        value = kNegInf;
      } else {
        value = multiclass_measure(model, val, measure);
      }
    } else {
      Dataset pos, neg;
      for (const auto& s : fit) (s.label == *cand.positive_label ? pos : neg).push_back(s);
      const TrainedBinaryModel model = train_binary(pos, neg, cfg);
      biases.push_back(model.bias());
      if (plan.reject_nonnegative_bias && !has_bounded_plos(model)) {
        value = kNegInf;
      } else {
        value = binary_measure(model, val, *cand.positive_label, split.fit_classes, measure);
      }
    }
    if (bias_sum.empty()) bias_sum.assign(biases.size(), 0.0);
    for (std::size_t k = 0; k < biases.size() && k < bias_sum.size(); ++k) bias_sum[k] += biases[k];
    if (value == kNegInf) {
      sum = kNegInf;
      ev.rejected = true;
    } else if (!ev.rejected) {
      sum += value;
    }
  }
  ev.measure = ev.rejected ? kNegInf : sum / plan.repeats;
  for (auto& b : bias_sum) b /= plan.repeats;
  ev.biases = std::move(bias_sum);
  ev.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return ev;
}

std::string bias_signs(const std::vector<double>& biases) {
  std::string out;
  for (std::size_t k = 0; k < biases.size(); ++k) {
    if (k) out += ';';
    out += biases[k] < 0.0 ? '-' : '+';
  }
  return out;
}

}  // namespace

std::string_view to_string(GsApproach a) noexcept {
  return a == GsApproach::Internal ? "internal" : "external";
}

std::string_view to_string(GsRegime r) noexcept { return r == GsRegime::Closed ? "closed" : "open"; }

std::string_view to_string(ValidationMeasure m) noexcept {
  switch (m) {
    case ValidationMeasure::Accuracy: return "accuracy";
    case ValidationMeasure::NA: return "na";
    case ValidationMeasure::HNA: return "hna";
  }
  return "?";
}

ValidationMeasure parse_validation_measure(std::string_view name) {
  if (name == "accuracy") return ValidationMeasure::Accuracy;
  if (name == "na") return ValidationMeasure::NA;
  if (name == "hna") return ValidationMeasure::HNA;
  throw Error(ErrorKind::InvalidArgument, "unknown validation measure '" + std::string(name) + "'");
}

ValidationMeasure GridSearchPlan::effective_measure() const noexcept {
  if (measure) return *measure;
  return regime == GsRegime::Open ? ValidationMeasure::NA : ValidationMeasure::Accuracy;
}

GridSearchPlan default_plan(GsApproach approach, GsRegime regime) {
  GridSearchPlan plan;
  plan.approach = approach;
  plan.regime = regime;
  for (int e = -5; e <= 15; e += 2) plan.C_grid.push_back(std::ldexp(1.0, e));
  for (int e = -15; e <= 3; e += 2) plan.gamma_grid.push_back(std::ldexp(1.0, e));
  for (int k = 0; k <= 9; ++k) plan.lambda_frac_grid.push_back(k / 10.0);
  return plan;
}

void validate_plan(const GridSearchPlan& plan) {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::InvalidArgument, m); };
  if (plan.C_grid.empty() || plan.gamma_grid.empty() || plan.lambda_frac_grid.empty()) {
    fail("grids must be non-empty");
  }
  for (double c : plan.C_grid) {
    if (!(c > 0.0) || !std::isfinite(c)) fail("C values must be positive");
  }
  for (double g : plan.gamma_grid) {
    if (!(g > 0.0) || !std::isfinite(g)) fail("gamma values must be positive");
  }
  for (double l : plan.lambda_frac_grid) {
    if (!(l >= 0.0 && l < 1.0)) fail("lambda_frac values must lie in [0, 1)");
  }
  if (std::find(plan.lambda_frac_grid.begin(), plan.lambda_frac_grid.end(), 0.0) ==
      plan.lambda_frac_grid.end()) {
    fail("lambda_frac grid must contain 0");
  }
  if (plan.repeats < 1) fail("repeats must be >= 1");
}

void load_grids(const std::string& path, GridSearchPlan& plan) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot open grid file " + path);
  try {
    const auto j = nlohmann::json::parse(is);
    if (j.contains("C")) plan.C_grid = j.at("C").get<std::vector<double>>();
    if (j.contains("gamma")) plan.gamma_grid = j.at("gamma").get<std::vector<double>>();
    if (j.contains("lambda_frac")) {
      plan.lambda_frac_grid = j.at("lambda_frac").get<std::vector<double>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, path + ": " + e.what());
  }
}

SplitSpec split_external_closed(std::span<const SparseSample> X, std::uint64_t seed) {
  const auto by_class = index_by_class(X);
  if (by_class.size() < 2) throw Error(ErrorKind::NotEnoughClasses, "need at least 2 classes");
  for (const auto& [label, idx] : by_class) require_splittable(label, idx);
  Rng rng(derive_seed(seed, {1}));
  SplitSpec s;
  for (const auto& [label, idx] : by_class) split_class(idx, rng, s);
  finish(s, X);
  return s;
}

SplitSpec split_external_open(std::span<const SparseSample> X, std::uint64_t seed) {
  const auto by_class = index_by_class(X);
  const std::size_t n = by_class.size();
  if (n < 3) {
    throw Error(ErrorKind::NotEnoughClasses,
                "external open-set split needs at least 3 classes (got " + std::to_string(n) +
                    "); with 2 the fitting set would hold a single class");
  }
  Rng rng(derive_seed(seed, {2}));
  const auto withheld = pick_classes(labels_of(by_class), n / 2, rng);
  for (const auto& [label, idx] : by_class) {
    if (!std::binary_search(withheld.begin(), withheld.end(), label)) require_splittable(label, idx);
  }
  SplitSpec s;
  for (const auto& [label, idx] : by_class) {
    if (std::binary_search(withheld.begin(), withheld.end(), label)) {
      s.val_samples.insert(s.val_samples.end(), idx.begin(), idx.end());
    } else {
      split_class(idx, rng, s);
    }
  }
  finish(s, X);
  return s;
}

SplitSpec split_internal_closed(std::span<const SparseSample> X, int positive_label,
                                std::uint64_t seed) {
  Rng rng(derive_seed(seed, {3}));
  return internal_split(X, positive_label, {}, rng);
}

SplitSpec split_internal_open(std::span<const SparseSample> X, int positive_label,
                              std::uint64_t seed) {
  const auto by_class = index_by_class(X);
  std::vector<int> negatives;
  for (const auto& [label, idx] : by_class) {
    if (label != positive_label) negatives.push_back(label);
  }
  Rng rng(derive_seed(seed, {4}));
  const auto withheld = pick_classes(negatives, negatives.size() / 2, rng);
  return internal_split(X, positive_label, withheld, rng);
}

bool better_candidate(double measure_a, const GridPoint& a, double measure_b,
                      const GridPoint& b) noexcept {
  if (measure_a != measure_b) return measure_a > measure_b;
  if (a.gamma != b.gamma) return a.gamma > b.gamma;
  if (a.C != b.C) return a.C < b.C;
  return a.lambda_frac < b.lambda_frac;
}

GridSearchResult grid_search(std::span<const SparseSample> X, const GridSearchPlan& plan) {
  validate_plan(plan);
  GridSearchResult result;
  result.class_labels = class_labels(X);
  if (result.class_labels.size() < 2) {
    throw Error(ErrorKind::NotEnoughClasses, "grid search needs at least 2 classes");
  }
  const auto points = grid_points(plan);

  std::vector<Candidate> candidates;
  if (plan.approach == GsApproach::External) {
    for (const auto& p : points) candidates.push_back({std::nullopt, p});
  } else {
    for (int label : result.class_labels) {
      for (const auto& p : points) candidates.push_back({label, p});
    }
  }

  result.evaluations.resize(candidates.size());
  parallel_for(candidates.size(), [&](std::size_t k) {
    result.evaluations[k] = evaluate_candidate(X, plan, candidates[k]);
  });

  auto pick = [&](std::size_t first, std::size_t last, const std::string& what) {
    std::size_t best = first;
    for (std::size_t k = first + 1; k < last; ++k) {
      const auto& e = result.evaluations[k];
      const auto& b = result.evaluations[best];
      if (better_candidate(e.measure, e.params, b.measure, b.params)) best = k;
    }
    if (result.evaluations[best].rejected) {
      throw Error(ErrorKind::AllRejected,
                  what + ": every grid point produced a non-negative bias");
    }
    return best;
  };

  const std::size_t per_search = points.size();
  if (plan.approach == GsApproach::External) {
    const std::size_t best = pick(0, per_search, "external search");
    result.chosen.assign(result.class_labels.size(), result.evaluations[best].params);
    result.chosen_measure.assign(result.class_labels.size(), result.evaluations[best].measure);
  } else {
    for (std::size_t c = 0; c < result.class_labels.size(); ++c) {
      const std::size_t best = pick(c * per_search, (c + 1) * per_search,
                                    "class " + std::to_string(result.class_labels[c]));
      result.chosen.push_back(result.evaluations[best].params);
      result.chosen_measure.push_back(result.evaluations[best].measure);
    }
  }
  return result;
}

FinalTraining train_selected(std::span<const SparseSample> X, const GridSearchPlan& plan,
                             const GridSearchResult& result) {
  std::vector<BinaryTrainConfig> configs;
  for (const auto& p : result.chosen) configs.push_back(to_config(p, plan));
  FinalTraining out;
  if (plan.reject_nonnegative_bias) {
    OvaEscalationReport report;
    out.model = train_ova_bounded(X, configs, plan.escalation_step, &report);
    out.escalation_retrains = std::move(report.retrains);
    out.lambda_fracs = std::move(report.lambda_fracs);
  } else {
    out.model = train_ova(X, configs);
    out.escalation_retrains.assign(configs.size(), 0);
    for (const auto& c : configs) out.lambda_fracs.push_back(c.lambda_frac);
  }
  return out;
}

void write_grid_report_csv(std::ostream& os, const GridSearchResult& result) {
  os << "class,C,gamma,lambda_frac,measure,bias_signs,wall_ms\n";
  for (const auto& e : result.evaluations) {
    os << (e.positive_label ? std::to_string(*e.positive_label) : std::string("all")) << ','
       << format_real(e.params.C) << ',' << format_real(e.params.gamma) << ','
       << format_real(e.params.lambda_frac) << ','
       << (e.rejected ? std::string("-inf") : format_real(e.measure)) << ','
       << bias_signs(e.biases) << ',' << format_real(std::round(e.wall_ms * 1000.0) / 1000.0)
       << '\n';
  }
}

}  // namespace ossvm

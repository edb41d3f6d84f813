#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ossvm/binary_ssvm.hpp"
#include "ossvm/multiclass_ova.hpp"
#include "ossvm/sample.hpp"

namespace ossvm {

// External: one parameter set shared by every binary, chosen at the
// multiclass level. Internal: each binary runs its own search.
enum class GsApproach { Internal, External };
// Open: some classes of the training set are withheld from fitting and
// appear only in validation, standing in for unknowns.
enum class GsRegime { Closed, Open };
enum class ValidationMeasure { Accuracy, NA, HNA };

std::string_view to_string(GsApproach a) noexcept;
std::string_view to_string(GsRegime r) noexcept;
std::string_view to_string(ValidationMeasure m) noexcept;
ValidationMeasure parse_validation_measure(std::string_view name);

struct GridPoint {
  double C = 1.0;
  double gamma = 1.0;
  double lambda_frac = 0.0;

  friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

struct GridSearchPlan {
  GsApproach approach = GsApproach::External;
  GsRegime regime = GsRegime::Open;
  std::vector<double> C_grid;
  std::vector<double> gamma_grid;
  std::vector<double> lambda_frac_grid;
  std::optional<ValidationMeasure> measure;  // unset: NA for open, accuracy for closed
  std::uint64_t rng_seed = 0;
  int repeats = 1;                           // independent F/V splits averaged per point
  bool reject_nonnegative_bias = true;       // SSVM rule: b >= 0 scores -inf
  double stop_eps = kDefaultStopEps;
  std::int64_t max_iter = kDefaultMaxIter;
  double escalation_step = 0.5;

  ValidationMeasure effective_measure() const noexcept;
};

// C in {2^-5, 2^-3, ..., 2^15}, gamma in {2^-15, ..., 2^3}, lambda_frac in
// {0, 0.1, ..., 0.9}.
GridSearchPlan default_plan(GsApproach approach, GsRegime regime);

// InvalidArgument on empty grids, non-positive C/gamma, lambda_frac outside
// [0,1), a lambda grid without 0, or repeats < 1.
void validate_plan(const GridSearchPlan& plan);

// Replaces the plan's grids from a JSON object {"C": [...], "gamma": [...],
// "lambda_frac": [...]}; missing keys keep the current grid.
void load_grids(const std::string& path, GridSearchPlan& plan);

// Fit/validation partition of a training set X (indices into X).
struct SplitSpec {
  std::vector<int> fit_classes;               // sorted
  std::vector<std::size_t> fit_samples;       // ascending
  std::vector<std::size_t> val_samples;       // ascending
};

inline constexpr double kValidationFraction = 0.2;

// Stratified 80/20 per class. ClassTooSmall if a class has < 2 samples.
SplitSpec split_external_closed(std::span<const SparseSample> X, std::uint64_t seed);
// floor(n/2) random classes wholly to validation; the rest split 80/20.
// NotEnoughClasses for n < 3 (n = 2 leaves a single fitting class).
SplitSpec split_external_open(std::span<const SparseSample> X, std::uint64_t seed);
// Binary view of X for one positive class; stratified 80/20 per class so
// both sides hold positives and negatives.
SplitSpec split_internal_closed(std::span<const SparseSample> X, int positive_label,
                                std::uint64_t seed);
// floor((n-1)/2) random negative classes wholly to validation; the other
// classes, positive included, split 80/20.
SplitSpec split_internal_open(std::span<const SparseSample> X, int positive_label,
                              std::uint64_t seed);

struct GridEvaluation {
  std::optional<int> positive_label;  // set for internal searches
  GridPoint params;
  double measure = 0.0;               // -inf when rejected
  bool rejected = false;
  std::vector<double> biases;         // per binary trained on F (mean over repeats)
  double wall_ms = 0.0;
};

struct GridSearchResult {
  std::vector<int> class_labels;        // sorted labels of X
  std::vector<GridPoint> chosen;        // one per class; identical for external
  std::vector<double> chosen_measure;   // per class
  std::vector<GridEvaluation> evaluations;
};

// True when a should win over b: larger measure, then larger gamma, then
// smaller C, then smaller lambda_frac.
bool better_candidate(double measure_a, const GridPoint& a, double measure_b,
                      const GridPoint& b) noexcept;

// Exhaustive search. AllRejected if every point of a search scores -inf.
GridSearchResult grid_search(std::span<const SparseSample> X, const GridSearchPlan& plan);

struct FinalTraining {
  OvaModel model;
  std::vector<int> escalation_retrains;   // per class; all zero without escalation
  std::vector<double> lambda_fracs;       // per class, as finally trained
};

// Retrains on all of X with the chosen parameters. With the -inf rule active,
// binaries that still come out with b >= 0 go through escalate_lambda.
FinalTraining train_selected(std::span<const SparseSample> X, const GridSearchPlan& plan,
                             const GridSearchResult& result);

// class,C,gamma,lambda_frac,measure,bias_signs,wall_ms
void write_grid_report_csv(std::ostream& os, const GridSearchResult& result);

}  // namespace ossvm

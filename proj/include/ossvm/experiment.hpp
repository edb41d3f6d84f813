#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ossvm/metrics.hpp"
#include "ossvm/model_selection.hpp"
#include "ossvm/multiclass_ova.hpp"
#include "ossvm/sample.hpp"
#include "ossvm/stats.hpp"

namespace ossvm {

// ssvm: lambda searched, non-negative-bias models rejected, final binaries
// escalated if needed. svm: lambda fixed at 0, plain libsvm-style baseline.
enum class Method { Ssvm, Svm };

std::string_view to_string(Method m) noexcept;
Method parse_method(std::string_view name);

struct ExperimentConfig {
  std::string dataset_name;
  Dataset dataset;
  std::vector<Method> methods{Method::Ssvm};
  GridSearchPlan plan;  // approach/regime/grids/measure/eps; seed is overridden per trial
  std::vector<std::size_t> acs_list{3, 6, 9, 12};
  int trials = 10;
  std::uint64_t seed = 0;
  double train_fraction = 0.6;
};

// InvalidArgument for trials < 1, empty acs/method lists, or an acs value not
// below the dataset's class count.
void validate_experiment(const ExperimentConfig& config);

struct ExperimentRow {
  std::string dataset;
  Method method = Method::Ssvm;
  GsApproach approach = GsApproach::External;
  GsRegime regime = GsRegime::Open;
  std::size_t n_acs = 0;
  int trial = 0;
  std::uint64_t trial_seed = 0;
  std::vector<int> known_labels;
  std::size_t train_size = 0, test_size = 0;
  std::vector<GridPoint> params;       // per class, as finally trained
  std::vector<double> biases;          // per class
  bool all_bounded = false;
  int escalations = 0;
  MetricReport metrics;
};

struct ExperimentResults {
  std::vector<ExperimentRow> rows;  // sorted by (n_acs, trial, method)
};

// Per (n_acs, trial): one open split shared by every method, grid search,
// retrain on the full training part, evaluate on the test part.
ExperimentResults run_experiment(const ExperimentConfig& config);

// Identical split seed for a given (run seed, n_acs, trial), whatever the method.
std::uint64_t trial_seed(std::uint64_t run_seed, std::size_t n_acs, int trial) noexcept;

void write_results_csv(std::ostream& os, const ExperimentResults& results);
// Mean of every metric per (dataset, method, gs, n_acs).
void write_means_csv(std::ostream& os, const ExperimentResults& results);

// Parsed row of a results CSV, enough for statistical comparison.
struct ResultRecord {
  std::string dataset, method, gs;
  std::size_t n_acs = 0;
  int trial = 0;
  std::map<std::string, double> metrics;
};
std::vector<ResultRecord> read_results_csv(std::istream& is);

inline const std::array<const char*, 8> kMetricNames{
    "aks", "aus", "na", "hna", "osfm_macro", "osfm_micro", "fm_macro", "fm_micro"};

enum class PairingUnit { Cell, Trial };

// Every pair of method variants (method/gs) on every metric. Cell pairing
// averages trials per (dataset, n_acs) first; trial pairing uses raw trials.
std::vector<ComparisonRow> compare_results(const std::vector<ResultRecord>& records,
                                           PairingUnit unit);

struct Rgb {
  std::uint8_t r = 255, g = 255, b = 255;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline constexpr Rgb kUnknownColor{255, 255, 255};

struct RasterSpec {
  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  int resolution = 256;  // pixels per axis, >= 2
};

// Square window centered on the data's bounding box whose side is `factor`
// times the data diameter (largest pairwise distance).
RasterSpec window_around(std::span<const SparseSample> data, double factor, int resolution);

struct RasterImage {
  int width = 0, height = 0;
  std::vector<int> labels;  // row-major from the top row (y_max) down
  std::vector<Rgb> pixels;

  int label_at(int row, int col) const { return labels[static_cast<std::size_t>(row * width + col)]; }
  // Pixel-center coordinates, shared by rendering and by callers checking it.
  static std::array<double, 2> pixel_center(const RasterSpec& spec, int row, int col) noexcept;
};

Rgb class_color(std::size_t class_index) noexcept;

// Predicts every pixel center; white exactly where the prediction is UNKNOWN.
// DimensionMismatch if any support vector uses a feature index above 2.
RasterImage raster_regions(const OvaModel& model, const RasterSpec& spec);

// Binary P6 portable pixmap.
void write_ppm(std::ostream& os, const RasterImage& image);

struct BiasSignReport {
  std::vector<int> class_labels;
  std::vector<double> ova_biases;
  std::size_t ova_negative = 0;
  double ova_fraction = 0.0;
  std::vector<std::pair<int, int>> ovo_pairs;  // (positive, negative) labels
  std::vector<double> ovo_biases;
  std::size_t ovo_negative = 0;
  double ovo_fraction = 0.0;
  bool has_ovo = false;
};

// Trains at lambda = 0 and counts binaries with b < 0.
BiasSignReport bias_sign_report(std::span<const SparseSample> dataset, BinaryTrainConfig config,
                                bool include_ovo);

void write_bias_report_csv(std::ostream& os, const BiasSignReport& report);

}  // namespace ossvm

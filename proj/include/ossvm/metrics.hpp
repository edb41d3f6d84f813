#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ossvm {

enum class Averaging { Macro, Micro };

// (n+1) x (n+1) counts over n known classes plus UNKNOWN (last row/column).
// Rows are true classes, columns predictions.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::vector<int> known_labels);
  ConfusionMatrix(std::vector<int> known_labels, std::vector<std::vector<std::int64_t>> counts);

  // Any true label outside known_labels lands in the UNKNOWN row; a predicted
  // label of kUnknownLabel (or any label not known) lands in the UNKNOWN column.
  void add(int true_label, int predicted_label, std::int64_t count = 1);

  const std::vector<int>& known_labels() const noexcept { return labels_; }
  std::size_t known_count() const noexcept { return labels_.size(); }
  std::size_t unknown_index() const noexcept { return labels_.size(); }
  std::int64_t at(std::size_t row, std::size_t col) const { return counts_.at(row).at(col); }
  std::int64_t row_sum(std::size_t row) const;
  std::int64_t col_sum(std::size_t col) const;
  std::int64_t total() const;

 private:
  std::size_t index_of(int label) const noexcept;

  std::vector<int> labels_;
  std::vector<std::vector<std::int64_t>> counts_;
};

double aks(const ConfusionMatrix& cm);
double aus(const ConfusionMatrix& cm);
double na(const ConfusionMatrix& cm);
double hna(const ConfusionMatrix& cm);
double hna_from(double aks_value, double aus_value) noexcept;

// F-measure over known classes only, computed on the full matrix: unknowns
// accepted as class k are false positives of k, rejected known samples are
// false negatives. UNKNOWN contributes no term of its own.
double osfm(const ConfusionMatrix& cm, Averaging averaging);

// Conventional multiclass F-measure with UNKNOWN as an ordinary (n+1)-th class.
double fm(const ConfusionMatrix& cm, Averaging averaging);

// Accuracy over every row, UNKNOWN included.
double overall_accuracy(const ConfusionMatrix& cm);

struct MetricReport {
  double aks = 0, aus = 0, na = 0, hna = 0;
  double osfm_macro = 0, osfm_micro = 0, fm_macro = 0, fm_micro = 0;
};

MetricReport evaluate(const ConfusionMatrix& cm);

// Header row "true\pred,<labels...>,UNKNOWN", one row per true class.
void write_confusion_csv(std::ostream& os, const ConfusionMatrix& cm);
ConfusionMatrix read_confusion_csv(std::istream& is);

}  // namespace ossvm

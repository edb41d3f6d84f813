#include "ossvm/metrics.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <string>

#include "ossvm/error.hpp"
#include "ossvm/multiclass_ova.hpp"
#include "ossvm/text.hpp"

namespace ossvm {
namespace {

struct Tally {
  std::int64_t tp = 0, fp = 0, fn = 0;
};

double f1(const Tally& t) noexcept {
  const std::int64_t denom = 2 * t.tp + t.fp + t.fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(t.tp) / static_cast<double>(denom);
}

Tally tally(const ConfusionMatrix& cm, std::size_t k) {
  const std::int64_t tp = cm.at(k, k);
  return {tp, cm.col_sum(k) - tp, cm.row_sum(k) - tp};
}

double f_measure(const ConfusionMatrix& cm, Averaging averaging, std::size_t n_classes) {
  Tally pooled;
  double macro = 0.0;
  for (std::size_t k = 0; k < n_classes; ++k) {
    const Tally t = tally(cm, k);
    macro += f1(t);
    pooled.tp += t.tp;
    pooled.fp += t.fp;
    pooled.fn += t.fn;
  }
  if (averaging == Averaging::Micro) return f1(pooled);
  return n_classes == 0 ? 0.0 : macro / static_cast<double>(n_classes);
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::vector<int> known_labels)
    : labels_(std::move(known_labels)),
      counts_(labels_.size() + 1, std::vector<std::int64_t>(labels_.size() + 1, 0)) {}

ConfusionMatrix::ConfusionMatrix(std::vector<int> known_labels,
                                 std::vector<std::vector<std::int64_t>> counts)
    : labels_(std::move(known_labels)), counts_(std::move(counts)) {
  const std::size_t n = labels_.size() + 1;
  if (counts_.size() != n ||
      std::any_of(counts_.begin(), counts_.end(), [n](const auto& r) { return r.size() != n; })) {
    throw Error(ErrorKind::InvalidArgument, "confusion matrix must be (n+1) x (n+1)");
  }
  for (const auto& r : counts_) {
    if (std::any_of(r.begin(), r.end(), [](auto c) { return c < 0; })) {
      throw Error(ErrorKind::InvalidArgument, "negative confusion count");
    }
  }
}

std::size_t ConfusionMatrix::index_of(int label) const noexcept {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  return it == labels_.end() ? labels_.size() : static_cast<std::size_t>(it - labels_.begin());
}

void ConfusionMatrix::add(int true_label, int predicted_label, std::int64_t count) {
  const std::size_t col =
      predicted_label == kUnknownLabel ? unknown_index() : index_of(predicted_label);
  counts_[index_of(true_label)][col] += count;
}

std::int64_t ConfusionMatrix::row_sum(std::size_t row) const {
  std::int64_t s = 0;
  for (auto c : counts_.at(row)) s += c;
  return s;
}

std::int64_t ConfusionMatrix::col_sum(std::size_t col) const {
  std::int64_t s = 0;
  for (const auto& r : counts_) s += r.at(col);
  return s;
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t s = 0;
  for (std::size_t r = 0; r < counts_.size(); ++r) s += row_sum(r);
  return s;
}

double aks(const ConfusionMatrix& cm) {
  std::int64_t correct = 0;
  std::int64_t total = 0;
  for (std::size_t k = 0; k < cm.known_count(); ++k) {
    correct += cm.at(k, k);
    total += cm.row_sum(k);
  }
  if (total == 0) throw Error(ErrorKind::NoKnownSamples, "no known-class test samples");
  return static_cast<double>(correct) / static_cast<double>(total);
}

double aus(const ConfusionMatrix& cm) {
  const std::size_t u = cm.unknown_index();
  const std::int64_t total = cm.row_sum(u);
  if (total == 0) throw Error(ErrorKind::NoUnknownSamples, "no unknown-class test samples");
  return static_cast<double>(cm.at(u, u)) / static_cast<double>(total);
}

double na(const ConfusionMatrix& cm) { return 0.5 * (aks(cm) + aus(cm)); }

double hna_from(double aks_value, double aus_value) noexcept {
  if (aks_value == 0.0 || aus_value == 0.0) return 0.0;
  // Harmonic mean written as the arithmetic mean minus (a-b)^2 / (2(a+b)),
  // so rounding can never push it above na().
  const double diff = aks_value - aus_value;
  return 0.5 * (aks_value + aus_value) - diff * diff / (2.0 * (aks_value + aus_value));
}

double hna(const ConfusionMatrix& cm) { return hna_from(aks(cm), aus(cm)); }

double osfm(const ConfusionMatrix& cm, Averaging averaging) {
  return f_measure(cm, averaging, cm.known_count());
}

double fm(const ConfusionMatrix& cm, Averaging averaging) {
  return f_measure(cm, averaging, cm.known_count() + 1);
}

double overall_accuracy(const ConfusionMatrix& cm) {
  const std::int64_t total = cm.total();
  if (total == 0) throw Error(ErrorKind::NoKnownSamples, "empty confusion matrix");
  std::int64_t correct = 0;
  for (std::size_t k = 0; k <= cm.known_count(); ++k) correct += cm.at(k, k);
  return static_cast<double>(correct) / static_cast<double>(total);
}

MetricReport evaluate(const ConfusionMatrix& cm) {
  MetricReport r;
  r.aks = aks(cm);
  r.aus = aus(cm);
  r.na = 0.5 * (r.aks + r.aus);
  r.hna = hna_from(r.aks, r.aus);
  r.osfm_macro = osfm(cm, Averaging::Macro);
  r.osfm_micro = osfm(cm, Averaging::Micro);
  r.fm_macro = fm(cm, Averaging::Macro);
  r.fm_micro = fm(cm, Averaging::Micro);
  return r;
}

void write_confusion_csv(std::ostream& os, const ConfusionMatrix& cm) {
  os << "true\\pred";
  for (int l : cm.known_labels()) os << ',' << l;
  os << ",UNKNOWN\n";
  for (std::size_t r = 0; r <= cm.known_count(); ++r) {
    if (r < cm.known_count()) os << cm.known_labels()[r];
    else os << "UNKNOWN";
    for (std::size_t c = 0; c <= cm.known_count(); ++c) os << ',' << cm.at(r, c);
    os << '\n';
  }
}

ConfusionMatrix read_confusion_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::ParseError, "empty confusion CSV");
  const auto header = split_char(line, ',');
  if (header.size() < 2 || header.back() != "UNKNOWN") {
    throw Error(ErrorKind::ParseError, "confusion CSV header must end with UNKNOWN");
  }
  std::vector<int> labels;
  for (std::size_t k = 1; k + 1 < header.size(); ++k) {
    labels.push_back(static_cast<int>(parse_int(header[k], "confusion header")));
  }
  const std::size_t n = labels.size() + 1;
  std::vector<std::vector<std::int64_t>> counts;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split_char(line, ',');
    if (cells.size() != n + 1) throw Error(ErrorKind::ParseError, "confusion CSV row width");
    const std::string expected =
        counts.size() < labels.size() ? std::to_string(labels[counts.size()]) : "UNKNOWN";
    if (cells[0] != expected) {
      throw Error(ErrorKind::ParseError, "confusion CSV row label '" + cells[0] + "'");
    }
    std::vector<std::int64_t> row;
    for (std::size_t c = 1; c < cells.size(); ++c) row.push_back(parse_int(cells[c], "confusion"));
    counts.push_back(std::move(row));
  }
  return ConfusionMatrix(std::move(labels), std::move(counts));
}

}  // namespace ossvm

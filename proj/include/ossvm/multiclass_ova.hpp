#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ossvm/binary_ssvm.hpp"
#include "ossvm/sample.hpp"

namespace ossvm {

inline constexpr int kUnknownLabel = std::numeric_limits<int>::min();

struct Prediction {
  int label = kUnknownLabel;
  std::vector<double> scores;  // one raw score per class, in model order

  bool is_unknown() const noexcept { return label == kUnknownLabel; }
};

class OvaModel {
 public:
  OvaModel() = default;
  // binaries[k] has class_labels[k] as its positive class.
  OvaModel(std::vector<int> class_labels, std::vector<TrainedBinaryModel> binaries);

  const std::vector<int>& class_labels() const noexcept { return labels_; }
  const std::vector<TrainedBinaryModel>& binaries() const noexcept { return binaries_; }
  std::size_t size() const noexcept { return labels_.size(); }
  bool all_bounded() const noexcept { return all_bounded_; }

 private:
  std::vector<int> labels_;
  std::vector<TrainedBinaryModel> binaries_;
  bool all_bounded_ = false;
};

// The open-set decision rule on a score vector: UNKNOWN if every score is
// negative, else the label with the largest score (score 0 counts as a
// positive tag; ties go to the smallest label).
int decide(std::span<const int> class_labels, std::span<const double> scores);

// One binary per class (that class positive, all others negative). Either a
// single shared config or one per sorted class label.
OvaModel train_ova(std::span<const SparseSample> dataset, const BinaryTrainConfig& shared);
OvaModel train_ova(std::span<const SparseSample> dataset,
                   std::span<const BinaryTrainConfig> per_class);

struct OvaEscalationReport {
  std::vector<int> retrains;            // per class
  std::vector<double> lambda_fracs;     // final value per class
};

// Like train_ova, but every binary whose bias is non-negative is retrained
// through escalate_lambda.
OvaModel train_ova_bounded(std::span<const SparseSample> dataset,
                           std::span<const BinaryTrainConfig> per_class, double escalation_step,
                           OvaEscalationReport* report = nullptr);

Prediction predict(const OvaModel& model, const SparseSample& x);

// Every binary has b < 0, which under OVA is sufficient for a bounded
// known-labeled region.
inline bool klos_is_bounded(const OvaModel& model) noexcept { return model.all_bounded(); }

// Bundle directory: manifest.json plus class_<label>.model per class.
void save_ova_bundle(const std::string& dir, const OvaModel& model);
OvaModel load_ova_bundle(const std::string& dir);

}  // namespace ossvm

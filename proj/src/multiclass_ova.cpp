#include "ossvm/multiclass_ova.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "ossvm/error.hpp"
#include "ossvm/parallel.hpp"

namespace ossvm {
namespace {

std::vector<SparseSample> samples_where(std::span<const SparseSample> dataset, int label,
                                        bool equal) {
  std::vector<SparseSample> out;
  for (const auto& s : dataset) {
    if ((s.label == label) == equal) out.push_back(s);
  }
  return out;
}

[[noreturn]] void rethrow_for_class(const Error& e, int label) {
  throw Error(e.kind(), "class " + std::to_string(label) + ": " + e.what());
}

template <typename TrainOne>
std::vector<TrainedBinaryModel> train_each(std::span<const SparseSample> dataset,
                                           const std::vector<int>& labels, TrainOne&& train_one) {
  std::vector<TrainedBinaryModel> binaries(labels.size());
  parallel_for(labels.size(), [&](std::size_t k) {
    const auto pos = samples_where(dataset, labels[k], true);
    const auto neg = samples_where(dataset, labels[k], false);
    try {
      binaries[k] = train_one(k, pos, neg);
    } catch (const Error& e) {
      rethrow_for_class(e, labels[k]);
    }
  });
  return binaries;
}

std::vector<int> checked_labels(std::span<const SparseSample> dataset) {
  auto labels = class_labels(dataset);
  if (labels.size() < 2) {
    throw Error(ErrorKind::NotEnoughClasses, "one-vs-all needs at least two classes");
  }
  return labels;
}

}  // namespace

OvaModel::OvaModel(std::vector<int> class_labels, std::vector<TrainedBinaryModel> binaries)
    : labels_(std::move(class_labels)), binaries_(std::move(binaries)) {
  if (labels_.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "an OVA model needs at least two classes");
  }
  if (labels_.size() != binaries_.size()) {
    throw Error(ErrorKind::InvalidArgument, "one binary model per class required");
  }
  if (std::set<int>(labels_.begin(), labels_.end()).size() != labels_.size()) {
    throw Error(ErrorKind::InvalidArgument, "duplicate class label");
  }
  if (std::find(labels_.begin(), labels_.end(), kUnknownLabel) != labels_.end()) {
    throw Error(ErrorKind::InvalidArgument, "class label collides with the UNKNOWN sentinel");
  }
  all_bounded_ = std::all_of(binaries_.begin(), binaries_.end(),
                             [](const auto& b) { return has_bounded_plos(b); });
}

int decide(std::span<const int> class_labels, std::span<const double> scores) {
  int best_label = kUnknownLabel;
  double best = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    if (scores[k] < 0.0) continue;
    if (best_label == kUnknownLabel || scores[k] > best ||
        (scores[k] == best && class_labels[k] < best_label)) {
      best = scores[k];
      best_label = class_labels[k];
    }
  }
  return best_label;
}

OvaModel train_ova(std::span<const SparseSample> dataset, const BinaryTrainConfig& shared) {
  const auto labels = checked_labels(dataset);
  std::vector<BinaryTrainConfig> configs(labels.size(), shared);
  return train_ova(dataset, configs);
}

OvaModel train_ova(std::span<const SparseSample> dataset,
                   std::span<const BinaryTrainConfig> per_class) {
  auto labels = checked_labels(dataset);
  if (per_class.size() != labels.size()) {
    throw Error(ErrorKind::InvalidArgument, "need one config per class");
  }
  auto binaries = train_each(dataset, labels, [&](std::size_t k, const auto& pos, const auto& neg) {
    return train_binary(pos, neg, per_class[k]);
  });
  return OvaModel(std::move(labels), std::move(binaries));
}

OvaModel train_ova_bounded(std::span<const SparseSample> dataset,
                           std::span<const BinaryTrainConfig> per_class, double escalation_step,
                           OvaEscalationReport* report) {
  auto labels = checked_labels(dataset);
  if (per_class.size() != labels.size()) {
    throw Error(ErrorKind::InvalidArgument, "need one config per class");
  }
  std::vector<int> retrains(labels.size(), 0);
  std::vector<double> fracs(labels.size(), 0.0);
  auto binaries = train_each(dataset, labels, [&](std::size_t k, const auto& pos, const auto& neg) {
    auto res = escalate_lambda(pos, neg, per_class[k], escalation_step);
    retrains[k] = res.retrains;
    fracs[k] = res.lambda_frac;
    return std::move(res.model);
  });
  if (report) {
    report->retrains = std::move(retrains);
    report->lambda_fracs = std::move(fracs);
  }
  return OvaModel(std::move(labels), std::move(binaries));
}

Prediction predict(const OvaModel& model, const SparseSample& x) {
  Prediction p;
  p.scores.reserve(model.size());
  for (const auto& b : model.binaries()) p.scores.push_back(b.raw_score(x));
  p.label = decide(model.class_labels(), p.scores);
  return p;
}

void save_ova_bundle(const std::string& dir, const OvaModel& model) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir + ": " + ec.message());

  nlohmann::json manifest;
  manifest["format"] = "ossvm-ova-bundle";
  manifest["version"] = 1;
  manifest["class_labels"] = model.class_labels();
  manifest["all_bounded"] = model.all_bounded();
  nlohmann::json files = nlohmann::json::array();
  for (std::size_t k = 0; k < model.size(); ++k) {
    const std::string name = "class_" + std::to_string(model.class_labels()[k]) + ".model";
    save_binary_model((fs::path(dir) / name).string(), model.binaries()[k]);
    files.push_back(name);
  }
  manifest["models"] = files;
  std::ofstream os(fs::path(dir) / "manifest.json");
  if (!os) throw Error(ErrorKind::Io, "cannot write manifest in " + dir);
  os << manifest.dump(2) << '\n';
}

OvaModel load_ova_bundle(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream is(fs::path(dir) / "manifest.json");
  if (!is) throw Error(ErrorKind::Io, "cannot open manifest in " + dir);
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("manifest: ") + e.what());
  }
  if (manifest.value("format", "") != "ossvm-ova-bundle" || manifest.value("version", 0) != 1) {
    throw Error(ErrorKind::ParseError, "manifest is not an ossvm OVA bundle (version 1)");
  }
  auto labels = manifest.at("class_labels").get<std::vector<int>>();
  auto files = manifest.at("models").get<std::vector<std::string>>();
  if (labels.size() != files.size()) {
    throw Error(ErrorKind::ParseError, "manifest label/model count mismatch");
  }
  std::vector<TrainedBinaryModel> binaries;
  for (const auto& f : files) binaries.push_back(load_binary_model((fs::path(dir) / f).string()));
  return OvaModel(std::move(labels), std::move(binaries));
}

}  // namespace ossvm

#include "ossvm/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

#include "ossvm/data_io.hpp"
#include "ossvm/error.hpp"
#include "ossvm/parallel.hpp"
#include "ossvm/rng.hpp"
#include "ossvm/text.hpp"

namespace ossvm {
namespace {

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(v[i]);
  }
  return out;
}

std::string join_reals(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += format_real(v[i]);
  }
  return out;
}

std::string gs_tag(GsApproach a, GsRegime r) {
  return std::string(to_string(a)) + "-" + std::string(to_string(r));
}

std::array<double, 8> metric_values(const MetricReport& m) {
  return {m.aks, m.aus, m.na, m.hna, m.osfm_macro, m.osfm_micro, m.fm_macro, m.fm_micro};
}

GridSearchPlan plan_for(const ExperimentConfig& config, Method method, std::uint64_t seed) {
  GridSearchPlan plan = config.plan;
  plan.rng_seed = seed;
  if (method == Method::Svm) {
    plan.lambda_frac_grid = {0.0};
    plan.reject_nonnegative_bias = false;
  } else {
    plan.reject_nonnegative_bias = true;
  }
  return plan;
}

ExperimentRow run_trial(const ExperimentConfig& config, Method method, std::size_t n_acs,
                        int trial) {
  ExperimentRow row;
  row.dataset = config.dataset_name;
  row.method = method;
  row.approach = config.plan.approach;
  row.regime = config.plan.regime;
  row.n_acs = n_acs;
  row.trial = trial;
  row.trial_seed = trial_seed(config.seed, n_acs, trial);

  const auto split = make_open_split(config.dataset, n_acs, row.trial_seed, config.train_fraction);
  row.known_labels = split.known_labels;
  row.train_size = split.train.size();
  row.test_size = split.test.size();

  const GridSearchPlan plan = plan_for(config, method, derive_seed(row.trial_seed, {0x6753ull}));
  const auto gs = grid_search(split.train, plan);
  const auto final_training = train_selected(split.train, plan, gs);
  const OvaModel& model = final_training.model;

  for (std::size_t k = 0; k < gs.chosen.size(); ++k) {
    GridPoint p = gs.chosen[k];
    p.lambda_frac = final_training.lambda_fracs[k];
    row.params.push_back(p);
    row.biases.push_back(model.binaries()[k].bias());
    row.escalations += final_training.escalation_retrains[k];
  }
  row.all_bounded = model.all_bounded();
  if (method == Method::Ssvm && !row.all_bounded) {
    throw Error(ErrorKind::EscalationFailed, "SSVM model is not bounded");
  }

  ConfusionMatrix cm(model.class_labels());
  for (const auto& s : split.test) cm.add(s.label, predict(model, s).label);
  row.metrics = evaluate(cm);
  return row;
}

}  // namespace

std::string_view to_string(Method m) noexcept { return m == Method::Ssvm ? "ssvm" : "svm"; }

Method parse_method(std::string_view name) {
  if (name == "ssvm") return Method::Ssvm;
  if (name == "svm") return Method::Svm;
  throw Error(ErrorKind::InvalidArgument, "unknown method '" + std::string(name) + "'");
}

std::uint64_t trial_seed(std::uint64_t run_seed, std::size_t n_acs, int trial) noexcept {
  return derive_seed(run_seed, {static_cast<std::uint64_t>(n_acs), static_cast<std::uint64_t>(trial)});
}

void validate_experiment(const ExperimentConfig& config) {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::InvalidArgument, m); };
  if (config.trials < 1) fail("trials must be >= 1");
  if (config.acs_list.empty()) fail("acs list must be non-empty");
  if (config.methods.empty()) fail("at least one method required");
  const std::size_t n_classes = class_labels(config.dataset).size();
  for (auto acs : config.acs_list) {
    if (acs < 2 || acs >= n_classes) {
      fail("each ACS count must lie in [2, " + std::to_string(n_classes) + "), got " +
           std::to_string(acs));
    }
  }
  validate_plan(config.plan);
}

ExperimentResults run_experiment(const ExperimentConfig& config) {
  validate_experiment(config);
  struct Job {
    std::size_t n_acs;
    int trial;
    Method method;
  };
  std::vector<Job> jobs;
  auto acs_sorted = config.acs_list;
  std::sort(acs_sorted.begin(), acs_sorted.end());
  acs_sorted.erase(std::unique(acs_sorted.begin(), acs_sorted.end()), acs_sorted.end());
  for (auto acs : acs_sorted) {
    for (int t = 0; t < config.trials; ++t) {
      for (auto m : config.methods) jobs.push_back({acs, t, m});
    }
  }

  ExperimentResults results;
  results.rows.resize(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t k) {
    const auto& job = jobs[k];
    try {
      results.rows[k] = run_trial(config, job.method, job.n_acs, job.trial);
    } catch (const Error& e) {
      throw Error(e.kind(), "n_acs=" + std::to_string(job.n_acs) + " trial=" +
                                std::to_string(job.trial) + " method=" +
                                std::string(to_string(job.method)) + ": " + e.what());
    }
  });
  return results;
}

void write_results_csv(std::ostream& os, const ExperimentResults& results) {
  os << "dataset,method,gs,n_acs,trial,trial_seed,known_classes,train_size,test_size,C,gamma,"
        "lambda_frac,biases,all_bounded,escalations";
  for (const char* name : kMetricNames) os << ',' << name;
  os << '\n';
  for (const auto& r : results.rows) {
    std::vector<double> cs, gs, ls;
    for (const auto& p : r.params) {
      cs.push_back(p.C);
      gs.push_back(p.gamma);
      ls.push_back(p.lambda_frac);
    }
    os << r.dataset << ',' << to_string(r.method) << ',' << gs_tag(r.approach, r.regime) << ','
       << r.n_acs << ',' << r.trial << ',' << r.trial_seed << ',' << join_ints(r.known_labels)
       << ',' << r.train_size << ',' << r.test_size << ',' << join_reals(cs) << ','
       << join_reals(gs) << ',' << join_reals(ls) << ',' << join_reals(r.biases) << ','
       << (r.all_bounded ? 1 : 0) << ',' << r.escalations;
    for (double v : metric_values(r.metrics)) os << ',' << format_real(v);
    os << '\n';
  }
}

void write_means_csv(std::ostream& os, const ExperimentResults& results) {
  using Key = std::tuple<std::string, std::string, std::string, std::size_t>;
  std::map<Key, std::pair<std::array<double, 8>, int>> cells;
  for (const auto& r : results.rows) {
    auto& [sum, n] = cells[{r.dataset, std::string(to_string(r.method)),
                            gs_tag(r.approach, r.regime), r.n_acs}];
    const auto v = metric_values(r.metrics);
    for (std::size_t k = 0; k < v.size(); ++k) sum[k] += v[k];
    ++n;
  }
  os << "dataset,method,gs,n_acs,trials";
  for (const char* name : kMetricNames) os << ',' << name;
  os << '\n';
  for (const auto& [key, cell] : cells) {
    const auto& [dataset, method, gs, acs] = key;
    os << dataset << ',' << method << ',' << gs << ',' << acs << ',' << cell.second;
    for (double s : cell.first) os << ',' << format_real(s / cell.second);
    os << '\n';
  }
}

std::vector<ResultRecord> read_results_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::ParseError, "empty results CSV");
  const auto header = split_char(line, ',');
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* required : {"dataset", "method", "gs", "n_acs", "trial"}) {
    if (!col.contains(required)) {
      throw Error(ErrorKind::ParseError, std::string("results CSV lacks column ") + required);
    }
  }
  std::vector<ResultRecord> out;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_char(line, ',');
    if (cells.size() != header.size()) {
      throw Error(ErrorKind::ParseError, "results CSV line " + std::to_string(line_no) + " width");
    }
    const std::string ctx = "results line " + std::to_string(line_no);
    ResultRecord r;
    r.dataset = cells[col["dataset"]];
    r.method = cells[col["method"]];
    r.gs = cells[col["gs"]];
    r.n_acs = static_cast<std::size_t>(parse_int(cells[col["n_acs"]], ctx));
    r.trial = static_cast<int>(parse_int(cells[col["trial"]], ctx));
    for (const char* name : kMetricNames) {
      if (col.contains(name)) r.metrics[name] = parse_real(cells[col[name]], ctx);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ComparisonRow> compare_results(const std::vector<ResultRecord>& records,
                                           PairingUnit unit) {
  // variant -> pairing key -> metric sums and counts
  using PairKey = std::tuple<std::string, std::size_t, int>;
  std::map<std::string, std::map<PairKey, std::pair<std::map<std::string, double>, int>>> table;
  for (const auto& r : records) {
    const std::string variant = r.method + "/" + r.gs;
    const PairKey key{r.dataset, r.n_acs, unit == PairingUnit::Trial ? r.trial : -1};
    auto& [sums, n] = table[variant][key];
    for (const auto& [name, v] : r.metrics) sums[name] += v;
    ++n;
  }
  std::vector<std::string> variants;
  for (const auto& [v, cells] : table) variants.push_back(v);

  std::vector<ComparisonRow> rows;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    for (std::size_t j = i + 1; j < variants.size(); ++j) {
      const auto& ta = table[variants[i]];
      const auto& tb = table[variants[j]];
      for (const char* metric : kMetricNames) {
        std::vector<double> a, b;
        for (const auto& [key, cell] : ta) {
          const auto it = tb.find(key);
          if (it == tb.end()) continue;
          const auto ma = cell.first.find(metric);
          const auto mb = it->second.first.find(metric);
          if (ma == cell.first.end() || mb == it->second.first.end()) continue;
          a.push_back(ma->second / cell.second);
          b.push_back(mb->second / it->second.second);
        }
        if (a.empty()) continue;
        rows.push_back(compare_paired(variants[i], variants[j], metric, a, b));
      }
    }
  }
  adjust_comparisons(rows);
  return rows;
}

RasterSpec window_around(std::span<const SparseSample> data, double factor, int resolution) {
  if (data.empty()) throw Error(ErrorKind::InvalidArgument, "no data to frame");
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  std::vector<std::array<double, 2>> pts;
  for (const auto& s : data) {
    std::array<double, 2> p{0.0, 0.0};
    for (const auto& f : s.features) {
      if (f.index > 2) throw Error(ErrorKind::DimensionMismatch, "data is not two-dimensional");
      p[static_cast<std::size_t>(f.index - 1)] = f.value;
    }
    x_lo = std::min(x_lo, p[0]);
    x_hi = std::max(x_hi, p[0]);
    y_lo = std::min(y_lo, p[1]);
    y_hi = std::max(y_hi, p[1]);
    pts.push_back(p);
  }
  double diameter = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      diameter = std::max(diameter, std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]));
    }
  }
  if (diameter == 0.0) diameter = 1.0;
  const double half = 0.5 * factor * diameter;
  const double cx = 0.5 * (x_lo + x_hi);
  const double cy = 0.5 * (y_lo + y_hi);
  return {cx - half, cx + half, cy - half, cy + half, resolution};
}

std::array<double, 2> RasterImage::pixel_center(const RasterSpec& spec, int row, int col) noexcept {
  const double dx = (spec.x_max - spec.x_min) / spec.resolution;
  const double dy = (spec.y_max - spec.y_min) / spec.resolution;
  return {spec.x_min + (col + 0.5) * dx, spec.y_max - (row + 0.5) * dy};
}

Rgb class_color(std::size_t class_index) noexcept {
  static constexpr std::array<Rgb, 16> palette{{
      {228, 26, 28},  {55, 126, 184}, {77, 175, 74},  {152, 78, 163},
      {255, 127, 0},  {166, 86, 40},  {247, 129, 191}, {102, 102, 102},
      {27, 158, 119}, {217, 95, 2},   {117, 112, 179}, {231, 41, 138},
      {102, 166, 30}, {230, 171, 2},  {31, 120, 180},  {0, 0, 0},
  }};
  return palette[class_index % palette.size()];
}

RasterImage raster_regions(const OvaModel& model, const RasterSpec& spec) {
  if (spec.resolution < 2) throw Error(ErrorKind::InvalidArgument, "raster resolution must be >= 2");
  if (!(spec.x_max > spec.x_min) || !(spec.y_max > spec.y_min)) {
    throw Error(ErrorKind::InvalidArgument, "raster bounds are degenerate");
  }
  for (const auto& b : model.binaries()) {
    if (feature_dimension(b.support_vectors()) > 2) {
      throw Error(ErrorKind::DimensionMismatch, "raster needs a two-dimensional model");
    }
  }
  RasterImage img;
  img.width = img.height = spec.resolution;
  const auto n = static_cast<std::size_t>(spec.resolution) * static_cast<std::size_t>(spec.resolution);
  img.labels.resize(n);
  img.pixels.resize(n);
  parallel_for(static_cast<std::size_t>(spec.resolution), [&](std::size_t row) {
    for (int col = 0; col < spec.resolution; ++col) {
      const auto c = RasterImage::pixel_center(spec, static_cast<int>(row), col);
      const int label = predict(model, make_dense_sample(0, c)).label;
      const std::size_t k = row * static_cast<std::size_t>(spec.resolution) + static_cast<std::size_t>(col);
      img.labels[k] = label;
      if (label == kUnknownLabel) {
        img.pixels[k] = kUnknownColor;
      } else {
        const auto& labels = model.class_labels();
        img.pixels[k] = class_color(static_cast<std::size_t>(
            std::find(labels.begin(), labels.end(), label) - labels.begin()));
      }
    }
  });
  return img;
}

void write_ppm(std::ostream& os, const RasterImage& image) {
  os << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  for (const auto& p : image.pixels) {
    os.put(static_cast<char>(p.r));
    os.put(static_cast<char>(p.g));
    os.put(static_cast<char>(p.b));
  }
}

BiasSignReport bias_sign_report(std::span<const SparseSample> dataset, BinaryTrainConfig config,
                                bool include_ovo) {
  config.lambda_frac = 0.0;
  BiasSignReport rep;
  const OvaModel ova = train_ova(dataset, config);
  rep.class_labels = ova.class_labels();
  for (const auto& b : ova.binaries()) {
    rep.ova_biases.push_back(b.bias());
    rep.ova_negative += b.bias() < 0.0;
  }
  rep.ova_fraction = static_cast<double>(rep.ova_negative) / static_cast<double>(ova.size());

  if (include_ovo) {
    rep.has_ovo = true;
    std::map<int, Dataset> by_class;
    for (const auto& s : dataset) by_class[s.label].push_back(s);
    for (std::size_t i = 0; i < rep.class_labels.size(); ++i) {
      for (std::size_t j = i + 1; j < rep.class_labels.size(); ++j) {
        rep.ovo_pairs.emplace_back(rep.class_labels[i], rep.class_labels[j]);
      }
    }
    rep.ovo_biases.resize(rep.ovo_pairs.size());
    parallel_for(rep.ovo_pairs.size(), [&](std::size_t k) {
      const auto [p, q] = rep.ovo_pairs[k];
      rep.ovo_biases[k] = train_binary(by_class[p], by_class[q], config).bias();
    });
    for (double b : rep.ovo_biases) rep.ovo_negative += b < 0.0;
    rep.ovo_fraction = rep.ovo_pairs.empty()
                           ? 0.0
                           : static_cast<double>(rep.ovo_negative) / static_cast<double>(rep.ovo_pairs.size());
  }
  return rep;
}

void write_bias_report_csv(std::ostream& os, const BiasSignReport& report) {
  os << "scheme,positive,negative,bias,negative_bias\n";
  for (std::size_t k = 0; k < report.class_labels.size(); ++k) {
    os << "ova," << report.class_labels[k] << ",rest," << format_real(report.ova_biases[k]) << ','
       << (report.ova_biases[k] < 0.0 ? 1 : 0) << '\n';
  }
  for (std::size_t k = 0; k < report.ovo_pairs.size(); ++k) {
    os << "ovo," << report.ovo_pairs[k].first << ',' << report.ovo_pairs[k].second << ','
       << format_real(report.ovo_biases[k]) << ',' << (report.ovo_biases[k] < 0.0 ? 1 : 0) << '\n';
  }
  os << "# ova_fraction," << format_real(report.ova_fraction) << '\n';
  if (report.has_ovo) os << "# ovo_fraction," << format_real(report.ovo_fraction) << '\n';
}

}  // namespace ossvm

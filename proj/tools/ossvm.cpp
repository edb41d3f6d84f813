// Command-line front end: train, predict, eval, gridsearch, experiment,
// raster, bias-report and compare.
//
// Exit codes: 0 success, 2 configuration error, 3 training failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ossvm/data_io.hpp"
#include "ossvm/error.hpp"
#include "ossvm/experiment.hpp"
#include "ossvm/metrics.hpp"
#include "ossvm/model_selection.hpp"
#include "ossvm/multiclass_ova.hpp"
#include "ossvm/text.hpp"

namespace {

using namespace ossvm;

constexpr int kExitConfig = 2;
constexpr int kExitTraining = 3;

struct DataOptions {
  std::string path;
  std::string synthetic;
  std::size_t n_per_class = 50;
  int blob_classes = 15;

  void attach(CLI::App* app) {
    auto* d = app->add_option("--data", path, "Sparse dataset file (label idx:val ...)");
    auto* s = app->add_option("--synthetic", synthetic,
                              "Synthetic 2D dataset: cone_torus|boat|four_gauss|regular|"
                              "nested_rings|blobs");
    d->excludes(s);
    app->add_option("--n-per-class", n_per_class, "Samples per class for --synthetic");
    app->add_option("--blob-classes", blob_classes, "Class count for --synthetic blobs");
  }

  std::string name() const {
    if (!synthetic.empty()) return synthetic;
    return std::filesystem::path(path).stem().string();
  }

  Dataset load(std::uint64_t seed) const {
    if (!synthetic.empty()) {
      return gen_synthetic(parse_synthetic_kind(synthetic), n_per_class, seed, blob_classes);
    }
    if (path.empty()) throw Error(ErrorKind::InvalidArgument, "one of --data or --synthetic is required");
    return read_sparse(path);
  }
};

struct SolverOptions {
  double C = 1.0;
  double gamma = 1.0;
  double lambda_frac = 0.0;
  double eps = kDefaultStopEps;

  void attach(CLI::App* app, bool with_lambda) {
    app->add_option("--C", C, "Box constraint C");
    app->add_option("--gamma", gamma, "RBF gamma");
    if (with_lambda) app->add_option("--lambda-frac", lambda_frac, "lambda as a fraction of C*m_p, in [0,1)");
    app->add_option("--eps", eps, "KKT stopping tolerance");
  }

  BinaryTrainConfig config() const {
    BinaryTrainConfig c;
    c.C = C;
    c.gamma = gamma;
    c.lambda_frac = lambda_frac;
    c.stop_eps = eps;
    return c;
  }
};

std::pair<GsApproach, GsRegime> parse_gs(const std::string& s) {
  if (s == "external-open") return {GsApproach::External, GsRegime::Open};
  if (s == "external-closed") return {GsApproach::External, GsRegime::Closed};
  if (s == "internal-open") return {GsApproach::Internal, GsRegime::Open};
  if (s == "internal-closed") return {GsApproach::Internal, GsRegime::Closed};
  throw Error(ErrorKind::InvalidArgument,
              "--gs must be one of external-open, external-closed, internal-open, internal-closed");
}

GridSearchPlan make_plan(const std::string& gs, const std::string& grids, double eps,
                         const std::string& measure, int repeats) {
  const auto [approach, regime] = parse_gs(gs);
  GridSearchPlan plan = default_plan(approach, regime);
  if (!grids.empty()) load_grids(grids, plan);
  plan.stop_eps = eps;
  plan.repeats = repeats;
  if (!measure.empty()) plan.measure = parse_validation_measure(measure);
  return plan;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path);
  return os;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateBias:
    case ErrorKind::EscalationFailed:
    case ErrorKind::AllRejected:
      return kExitTraining;
    default:
      return kExitConfig;
  }
}

void print_metrics(const MetricReport& m) {
  std::cout << "AKS " << format_real(m.aks) << "\nAUS " << format_real(m.aus) << "\nNA "
            << format_real(m.na) << "\nHNA " << format_real(m.hna) << "\nOSFM_M "
            << format_real(m.osfm_macro) << "\nOSFM_m " << format_real(m.osfm_micro) << "\nFM_M "
            << format_real(m.fm_macro) << "\nFM_m " << format_real(m.fm_micro) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Open-set kernel SVM toolkit with a negative-bias-constrained solver"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "Run seed; every random choice derives from it")->capture_default_str();

  // train
  auto* train = app.add_subcommand("train", "Train a one-vs-all model bundle");
  DataOptions train_data;
  SolverOptions train_solver;
  std::string train_method = "ssvm";
  std::string train_out;
  double escalation_step = 0.5;
  train_data.attach(train);
  train_solver.attach(train, true);
  train->add_option("--method", train_method, "ssvm (escalate lambda until b<0) or svm (lambda=0)");
  train->add_option("--escalation-step", escalation_step, "lambda_frac escalation step in (0,1]");
  train->add_option("--out", train_out, "Output bundle directory")->required();

  // predict
  auto* pred = app.add_subcommand("predict", "Predict labels (or UNKNOWN) for a dataset");
  std::string pred_model, pred_out;
  DataOptions pred_data;
  pred->add_option("--model", pred_model, "Model bundle directory")->required();
  pred_data.attach(pred);
  pred->add_option("--out", pred_out, "Output CSV (default stdout)");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a model on labeled test data");
  std::string eval_model, eval_out;
  DataOptions eval_data;
  eval->add_option("--model", eval_model, "Model bundle directory")->required();
  eval_data.attach(eval);
  eval->add_option("--out", eval_out, "Confusion matrix CSV");

  // gridsearch
  auto* gsc = app.add_subcommand("gridsearch", "Grid search (C, gamma, lambda) and retrain");
  DataOptions gs_data;
  std::string gs_method = "ssvm", gs_regime = "external-open", gs_grids, gs_out, gs_model_out,
              gs_measure;
  double gs_eps = kDefaultStopEps;
  int gs_repeats = 1;
  gs_data.attach(gsc);
  gsc->add_option("--method", gs_method, "ssvm or svm");
  gsc->add_option("--gs", gs_regime, "{external,internal}-{open,closed}");
  gsc->add_option("--grids", gs_grids, "JSON grid file {\"C\":[..],\"gamma\":[..],\"lambda_frac\":[..]}");
  gsc->add_option("--measure", gs_measure, "accuracy|na|hna (default by regime)");
  gsc->add_option("--repeats", gs_repeats, "Fit/validation splits per grid point");
  gsc->add_option("--eps", gs_eps, "KKT stopping tolerance");
  gsc->add_option("--out", gs_out, "Grid report CSV")->required();
  gsc->add_option("--model-out", gs_model_out, "Retrain with the chosen parameters into this bundle");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Paired open-set experiment protocol");
  DataOptions exp_data;
  std::vector<std::string> exp_methods{"ssvm"};
  std::string exp_regime = "external-open", exp_grids, exp_out, exp_measure;
  std::vector<std::size_t> exp_acs{3, 6, 9, 12};
  int exp_trials = 10;
  int exp_repeats = 1;
  double exp_eps = kDefaultStopEps;
  double exp_train_fraction = kDefaultTrainFraction;
  exp_data.attach(exp);
  exp->add_option("--method", exp_methods, "Methods (ssvm, svm); comma separated")->delimiter(',');
  exp->add_option("--gs", exp_regime, "{external,internal}-{open,closed}");
  exp->add_option("--acs", exp_acs, "Known-class counts; comma separated")->delimiter(',');
  exp->add_option("--trials", exp_trials, "Trials per ACS count");
  exp->add_option("--grids", exp_grids, "JSON grid file");
  exp->add_option("--measure", exp_measure, "Validation measure");
  exp->add_option("--repeats", exp_repeats, "Fit/validation splits per grid point");
  exp->add_option("--eps", exp_eps, "KKT stopping tolerance");
  exp->add_option("--train-fraction", exp_train_fraction, "Per-class train share of known classes");
  exp->add_option("--out", exp_out, "Output directory (results.csv, means.csv)")->required();

  // raster
  auto* ras = app.add_subcommand("raster", "Render 2D decision regions as a P6 pixmap");
  std::string ras_model, ras_out;
  DataOptions ras_data;
  std::vector<double> ras_bounds;
  double ras_factor = 1.2;
  int ras_resolution = 256;
  ras->add_option("--model", ras_model, "Model bundle directory")->required();
  ras_data.attach(ras);
  ras->add_option("--bounds", ras_bounds, "x_min,x_max,y_min,y_max")->delimiter(',')->expected(4);
  ras->add_option("--factor", ras_factor, "Window side as a multiple of the data diameter");
  ras->add_option("--resolution", ras_resolution, "Pixels per axis");
  ras->add_option("--out", ras_out, "Output .ppm")->required();

  // bias-report
  auto* bias = app.add_subcommand("bias-report", "Fraction of binaries with negative bias at lambda=0");
  DataOptions bias_data;
  SolverOptions bias_solver;
  bool bias_ovo = false;
  std::string bias_out;
  bias_data.attach(bias);
  bias_solver.attach(bias, false);
  bias->add_flag("--ovo", bias_ovo, "Also train every one-vs-one pair");
  bias->add_option("--out", bias_out, "Per-binary CSV");

  // compare
  auto* cmp = app.add_subcommand("compare", "Wilcoxon/Holm/binomial comparison of experiment results");
  std::vector<std::string> cmp_inputs;
  std::string cmp_unit = "cell", cmp_out;
  cmp->add_option("--results", cmp_inputs, "results.csv files")->required();
  cmp->add_option("--unit", cmp_unit, "Pairing unit: cell (dataset x ACS means) or trial");
  cmp->add_option("--out", cmp_out, "Comparison CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*train) {
      const Dataset data = train_data.load(seed);
      const Method method = parse_method(train_method);
      auto cfg = train_solver.config();
      if (method == Method::Svm) cfg.lambda_frac = 0.0;
      const auto labels = class_labels(data);
      std::vector<BinaryTrainConfig> configs(labels.size(), cfg);
      OvaModel model;
      if (method == Method::Ssvm) {
        OvaEscalationReport rep;
        model = train_ova_bounded(data, configs, escalation_step, &rep);
        for (std::size_t k = 0; k < labels.size(); ++k) {
          if (rep.retrains[k] > 0) {
            std::cerr << "class " << labels[k] << ": escalated lambda_frac to "
                      << format_real(rep.lambda_fracs[k]) << '\n';
          }
        }
      } else {
        model = train_ova(data, configs);
      }
      save_ova_bundle(train_out, model);
      std::cout << "classes " << model.size() << " all_bounded " << model.all_bounded() << '\n';
    } else if (*pred) {
      const OvaModel model = load_ova_bundle(pred_model);
      const Dataset data = pred_data.load(seed);
      std::ofstream file;
      std::ostream* os = &std::cout;
      if (!pred_out.empty()) {
        file = open_out(pred_out);
        os = &file;
      }
      *os << "index,predicted";
      for (int l : model.class_labels()) *os << ",score_" << l;
      *os << '\n';
      for (std::size_t i = 0; i < data.size(); ++i) {
        const auto p = predict(model, data[i]);
        *os << i << ',' << (p.is_unknown() ? std::string("UNKNOWN") : std::to_string(p.label));
        for (double s : p.scores) *os << ',' << format_real(s);
        *os << '\n';
      }
    } else if (*eval) {
      const OvaModel model = load_ova_bundle(eval_model);
      const Dataset data = eval_data.load(seed);
      ConfusionMatrix cm(model.class_labels());
      for (const auto& s : data) cm.add(s.label, predict(model, s).label);
      if (!eval_out.empty()) {
        auto os = open_out(eval_out);
        write_confusion_csv(os, cm);
      }
      if (cm.row_sum(cm.unknown_index()) == 0) {
        // Closed-set test data: only the known-class measures exist.
        std::cout << "AKS " << format_real(aks(cm)) << '\n';
      } else {
        print_metrics(evaluate(cm));
      }
    } else if (*gsc) {
      const Dataset data = gs_data.load(seed);
      GridSearchPlan plan = make_plan(gs_regime, gs_grids, gs_eps, gs_measure, gs_repeats);
      plan.rng_seed = seed;
      if (parse_method(gs_method) == Method::Svm) {
        plan.lambda_frac_grid = {0.0};
        plan.reject_nonnegative_bias = false;
      }
      const auto result = grid_search(data, plan);
      {
        auto os = open_out(gs_out);
        write_grid_report_csv(os, result);
      }
      for (std::size_t k = 0; k < result.class_labels.size(); ++k) {
        const auto& p = result.chosen[k];
        std::cout << "class " << result.class_labels[k] << " C " << format_real(p.C) << " gamma "
                  << format_real(p.gamma) << " lambda_frac " << format_real(p.lambda_frac)
                  << " measure " << format_real(result.chosen_measure[k]) << '\n';
      }
      if (!gs_model_out.empty()) {
        const auto final_training = train_selected(data, plan, result);
        save_ova_bundle(gs_model_out, final_training.model);
      }
    } else if (*exp) {
      ExperimentConfig cfg;
      cfg.dataset = exp_data.load(seed);
      cfg.dataset_name = exp_data.name();
      cfg.methods.clear();
      for (const auto& m : exp_methods) cfg.methods.push_back(parse_method(m));
      cfg.plan = make_plan(exp_regime, exp_grids, exp_eps, exp_measure, exp_repeats);
      cfg.acs_list = exp_acs;
      cfg.trials = exp_trials;
      cfg.seed = seed;
      cfg.train_fraction = exp_train_fraction;
      const auto results = run_experiment(cfg);
      std::filesystem::create_directories(exp_out);
      {
        auto os = open_out((std::filesystem::path(exp_out) / "results.csv").string());
        write_results_csv(os, results);
      }
      {
        auto os = open_out((std::filesystem::path(exp_out) / "means.csv").string());
        write_means_csv(os, results);
      }
      std::cout << "rows " << results.rows.size() << '\n';
    } else if (*ras) {
      const OvaModel model = load_ova_bundle(ras_model);
      RasterSpec spec;
      if (ras_bounds.size() == 4) {
        spec = {ras_bounds[0], ras_bounds[1], ras_bounds[2], ras_bounds[3], ras_resolution};
      } else {
        spec = window_around(ras_data.load(seed), ras_factor, ras_resolution);
      }
      const auto image = raster_regions(model, spec);
      auto os = open_out(ras_out);
      write_ppm(os, image);
    } else if (*bias) {
      const Dataset data = bias_data.load(seed);
      const auto rep = bias_sign_report(data, bias_solver.config(), bias_ovo);
      if (!bias_out.empty()) {
        auto os = open_out(bias_out);
        write_bias_report_csv(os, rep);
      }
      std::cout << "ova_negative " << rep.ova_negative << '/' << rep.class_labels.size()
                << " fraction " << format_real(rep.ova_fraction) << '\n';
      if (rep.has_ovo) {
        std::cout << "ovo_negative " << rep.ovo_negative << '/' << rep.ovo_pairs.size()
                  << " fraction " << format_real(rep.ovo_fraction) << '\n';
      }
    } else if (*cmp) {
      std::vector<ResultRecord> records;
      for (const auto& path : cmp_inputs) {
        std::ifstream is(path);
        if (!is) throw Error(ErrorKind::Io, "cannot open " + path);
        auto part = read_results_csv(is);
        records.insert(records.end(), part.begin(), part.end());
      }
      PairingUnit unit;
      if (cmp_unit == "cell") unit = PairingUnit::Cell;
      else if (cmp_unit == "trial") unit = PairingUnit::Trial;
      else throw Error(ErrorKind::InvalidArgument, "--unit must be cell or trial");
      const auto rows = compare_results(records, unit);
      if (cmp_out.empty()) {
        write_comparison_csv(std::cout, rows);
      } else {
        auto os = open_out(cmp_out);
        write_comparison_csv(os, rows);
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "ossvm/data_io.hpp"
#include "ossvm/error.hpp"
#include "ossvm/model_selection.hpp"
#include "support/fixtures.hpp"

using namespace ossvm;

namespace {

Dataset classes(std::size_t n, std::size_t per_class) {
  Dataset d;
  for (std::size_t i = 0; i < per_class; ++i)
    for (std::size_t c = 1; c <= n; ++c)
      d.push_back(fixtures::point(static_cast<int>(c), 0.1 * c, 0.01 * i));
  return d;
}

std::size_t val_share(std::size_t s) {
  const auto v = static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(s)));
  return std::clamp<std::size_t>(v, 1, s - 1);
}

void check_partition(const SplitSpec& s, std::size_t total) {
  std::vector<std::size_t> all = s.fit_samples;
  all.insert(all.end(), s.val_samples.begin(), s.val_samples.end());
  std::sort(all.begin(), all.end());
  REQUIRE(all.size() == total);
  for (std::size_t i = 0; i < total; ++i) CHECK(all[i] == i);
  CHECK(std::is_sorted(s.fit_samples.begin(), s.fit_samples.end()));
  CHECK(std::is_sorted(s.val_samples.begin(), s.val_samples.end()));
}

std::set<int> labels_at(const Dataset& d, const std::vector<std::size_t>& idx) {
  std::set<int> out;
  for (auto i : idx) out.insert(d[i].label);
  return out;
}

GridSearchPlan small_plan(GsApproach a, GsRegime r) {
  GridSearchPlan p = default_plan(a, r);
  p.C_grid = {1, 10, 100};
  p.gamma_grid = {1, 4, 16};
  p.lambda_frac_grid = {0, 0.3, 0.6, 0.9};
  p.rng_seed = 7;
  return p;
}

}  // namespace

TEST_CASE("split arithmetic on parameterized fixtures") {
  for (std::size_t n = 3; n <= 15; ++n) {
    for (std::size_t s : {2u, 5u, 7u, 10u, 13u}) {
      CAPTURE(n);
      CAPTURE(s);
      const auto d = classes(n, s);
      const std::size_t v = val_share(s);

      const auto ec = split_external_closed(d, 11);
      check_partition(ec, d.size());
      CHECK(ec.fit_samples.size() == n * (s - v));
      CHECK(ec.val_samples.size() == n * v);
      CHECK(ec.fit_classes.size() == n);
      CHECK(labels_at(d, ec.val_samples).size() == n);

      const auto eo = split_external_open(d, 11);
      check_partition(eo, d.size());
      const std::size_t withheld = n / 2, kept = n - withheld;
      CHECK(eo.fit_classes.size() == kept);
      CHECK(eo.fit_samples.size() == kept * (s - v));
      CHECK(eo.val_samples.size() == withheld * s + kept * v);
      CHECK(labels_at(d, eo.val_samples).size() == n);

      const int positive = static_cast<int>(1 + n / 3);
      const auto ic = split_internal_closed(d, positive, 11);
      check_partition(ic, d.size());
      CHECK(ic.fit_samples.size() == n * (s - v));
      CHECK(ic.val_samples.size() == n * v);
      CHECK(ic.fit_classes.size() == n);

      const auto io = split_internal_open(d, positive, 11);
      check_partition(io, d.size());
      const std::size_t w = (n - 1) / 2;
      CHECK(io.fit_classes.size() == n - w);
      CHECK(io.fit_samples.size() == (n - w) * (s - v));
      CHECK(io.val_samples.size() == w * s + (n - w) * v);
      CHECK(std::binary_search(io.fit_classes.begin(), io.fit_classes.end(), positive));
      // Validation always sees both the positive class and negatives.
      const auto vl = labels_at(d, io.val_samples);
      CHECK(vl.contains(positive));
      CHECK(vl.size() >= 2);
    }
  }
}

TEST_CASE("split worked examples") {
  const auto d3 = classes(3, 10);
  const auto ec = split_external_closed(d3, 1);
  CHECK(ec.fit_samples.size() == 24);
  CHECK(ec.val_samples.size() == 6);

  const auto d9 = classes(9, 10);
  const auto eo = split_external_open(d9, 1);
  CHECK(eo.fit_classes.size() == 5);
  CHECK(eo.fit_samples.size() == 40);
  CHECK(eo.val_samples.size() == 50);

  const auto io = split_internal_open(d9, 4, 1);
  CHECK(io.fit_samples.size() == 40);
  CHECK(io.val_samples.size() == 50);

  // pos = 10, neg = 30 in one class.
  Dataset pn;
  for (int i = 0; i < 10; ++i) pn.push_back(fixtures::point(1, 0.1, 0.01 * i));
  for (int i = 0; i < 30; ++i) pn.push_back(fixtures::point(2, 0.9, 0.01 * i));
  const auto ic = split_internal_closed(pn, 1, 3);
  std::size_t fit_pos = 0, val_pos = 0;
  for (auto i : ic.fit_samples) fit_pos += pn[i].label == 1;
  for (auto i : ic.val_samples) val_pos += pn[i].label == 1;
  CHECK(fit_pos == 8);
  CHECK(ic.fit_samples.size() - fit_pos == 24);
  CHECK(val_pos == 2);
  CHECK(ic.val_samples.size() - val_pos == 6);

  // Two classes: internal open withholds nothing and matches the closed counts.
  const auto d2 = classes(2, 10);
  const auto io2 = split_internal_open(d2, 1, 5);
  CHECK(io2.fit_classes.size() == 2);
  CHECK(io2.val_samples.size() == 4);
}

TEST_CASE("split failure modes") {
  CHECK_THROWS_WITH_AS(split_external_open(classes(2, 10), 1), doctest::Contains("NotEnoughClasses"), Error);
  auto d = classes(3, 10);
  d.push_back(fixtures::point(4, 0.5, 0.5));
  CHECK_THROWS_WITH_AS(split_external_closed(d, 1), doctest::Contains("ClassTooSmall"), Error);
  CHECK_THROWS_AS(split_internal_closed(classes(3, 10), 99, 1), Error);
  CHECK_THROWS_AS(split_external_closed(classes(1, 10), 1), Error);
}

TEST_CASE("open splits withhold whole classes") {
  const auto d = classes(8, 6);
  const auto eo = split_external_open(d, 21);
  for (auto i : eo.val_samples) {
    const int l = d[i].label;
    if (!std::binary_search(eo.fit_classes.begin(), eo.fit_classes.end(), l)) {
      CHECK_FALSE(labels_at(d, eo.fit_samples).contains(l));
    }
  }
  CHECK(eo.fit_classes.size() < 8);
}

TEST_CASE("splits are reproducible and seed dependent") {
  const auto d = classes(7, 10);
  CHECK(split_external_open(d, 3).val_samples == split_external_open(d, 3).val_samples);
  CHECK(split_external_closed(d, 3).val_samples == split_external_closed(d, 3).val_samples);
  CHECK(split_internal_closed(d, 2, 3).val_samples == split_internal_closed(d, 2, 3).val_samples);
  CHECK(split_internal_open(d, 2, 3).val_samples == split_internal_open(d, 2, 3).val_samples);
  CHECK_FALSE(split_external_closed(d, 3).val_samples == split_external_closed(d, 4).val_samples);
}

TEST_CASE("tie-breaking prefers larger gamma, then smaller C, then smaller lambda") {
  CHECK(better_candidate(0.8, {1, 2.0, 0}, 0.8, {1, 0.125, 0}));
  CHECK_FALSE(better_candidate(0.8, {1, 0.125, 0}, 0.8, {1, 2.0, 0}));
  CHECK(better_candidate(0.8, {1, 1, 0}, 0.8, {4, 1, 0}));
  CHECK(better_candidate(0.8, {1, 1, 0.1}, 0.8, {1, 1, 0.5}));
  CHECK(better_candidate(0.9, {100, 0.001, 0.9}, 0.8, {1, 8, 0}));
  const double ninf = -std::numeric_limits<double>::infinity();
  CHECK(better_candidate(0.0, {1, 1, 0}, ninf, {1, 8, 0}));
}

TEST_CASE("plan defaults and validation") {
  const auto p = default_plan(GsApproach::External, GsRegime::Open);
  CHECK(p.C_grid.front() == std::ldexp(1.0, -5));
  CHECK(p.C_grid.back() == std::ldexp(1.0, 15));
  CHECK(p.gamma_grid.front() == std::ldexp(1.0, -15));
  CHECK(p.gamma_grid.back() == 8.0);
  CHECK(p.lambda_frac_grid.front() == 0.0);
  CHECK(p.effective_measure() == ValidationMeasure::NA);
  CHECK(default_plan(GsApproach::Internal, GsRegime::Closed).effective_measure() == ValidationMeasure::Accuracy);
  CHECK_NOTHROW(validate_plan(p));
  auto bad = p;
  bad.lambda_frac_grid = {0.3};
  CHECK_THROWS_AS(validate_plan(bad), Error);
  bad = p;
  bad.lambda_frac_grid = {0, 1.0};
  CHECK_THROWS_AS(validate_plan(bad), Error);
  bad = p;
  bad.C_grid = {};
  CHECK_THROWS_AS(validate_plan(bad), Error);
  bad = p;
  bad.gamma_grid = {-1};
  CHECK_THROWS_AS(validate_plan(bad), Error);
  CHECK(parse_validation_measure("hna") == ValidationMeasure::HNA);
  CHECK(parse_validation_measure(to_string(ValidationMeasure::Accuracy)) == ValidationMeasure::Accuracy);
  CHECK_THROWS_AS(parse_validation_measure("f1"), Error);
}

TEST_CASE("grid files override the default grids") {
  const auto path = (std::filesystem::temp_directory_path() / "ossvm_grids.json").string();
  {
    std::ofstream os(path);
    os << R"({"C": [0.5, 2], "lambda_frac": [0, 0.5]})";
  }
  auto p = default_plan(GsApproach::External, GsRegime::Open);
  const auto gammas = p.gamma_grid;
  load_grids(path, p);
  CHECK(p.C_grid == std::vector<double>{0.5, 2});
  CHECK(p.lambda_frac_grid == std::vector<double>{0, 0.5});
  CHECK(p.gamma_grid == gammas);
  {
    std::ofstream os(path);
    os << R"({"C": "many"})";
  }
  CHECK_THROWS_WITH_AS(load_grids(path, p), doctest::Contains("ParseError"), Error);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_grids(path, p), Error);
}

TEST_CASE("single-point grid returns that point") {
  const auto d = gen_synthetic(SyntheticKind::FourGauss, 15, 2);
  auto p = default_plan(GsApproach::External, GsRegime::Closed);
  p.C_grid = {4};
  p.gamma_grid = {2};
  p.lambda_frac_grid = {0};
  p.reject_nonnegative_bias = false;
  const auto r = grid_search(d, p);
  REQUIRE(r.chosen.size() == 4);
  for (const auto& c : r.chosen) CHECK(c == GridPoint{4, 2, 0});
  CHECK(r.evaluations.size() == 1);
}

TEST_CASE("internal search rejects the enclosing class at lambda zero") {
  const auto d = gen_synthetic(SyntheticKind::NestedRings, 40, 1);
  for (auto regime : {GsRegime::Closed, GsRegime::Open}) {
    const auto plan = small_plan(GsApproach::Internal, regime);
    const auto r = grid_search(d, plan);
    REQUIRE(r.class_labels == std::vector<int>{1, 2, 3});
    std::size_t ring_zero = 0, ring_zero_rejected = 0;
    for (const auto& e : r.evaluations) {
      REQUIRE(e.positive_label.has_value());
      if (*e.positive_label == 3 && e.params.lambda_frac == 0.0) {
        ++ring_zero;
        ring_zero_rejected += e.rejected;
        if (e.rejected) CHECK(std::isinf(e.measure));
      }
    }
    CHECK(ring_zero == 9);
    CHECK(ring_zero_rejected == ring_zero);
    CHECK(r.chosen[2].lambda_frac > 0.0);
    const auto final_training = train_selected(d, plan, r);
    CHECK(final_training.model.all_bounded());
  }
}

TEST_CASE("external search rejects any non-negative binary") {
  const auto d = gen_synthetic(SyntheticKind::NestedRings, 40, 1);
  auto plan = small_plan(GsApproach::External, GsRegime::Closed);
  const auto r = grid_search(d, plan);
  for (const auto& e : r.evaluations) {
    const bool any_nonneg = std::any_of(e.biases.begin(), e.biases.end(), [](double b) { return b >= 0; });
    CHECK(e.rejected == any_nonneg);
  }
  CHECK(r.chosen[0].lambda_frac > 0.0);
  plan.lambda_frac_grid = {0.0};
  CHECK_THROWS_WITH_AS(grid_search(d, plan), doctest::Contains("AllRejected"), Error);
  plan.reject_nonnegative_bias = false;
  CHECK_NOTHROW(grid_search(d, plan));
}

TEST_CASE("grid search is deterministic and thread independent") {
  const auto d = gen_synthetic(SyntheticKind::NestedRings, 25, 4);
  const auto plan = small_plan(GsApproach::External, GsRegime::Open);
  setenv("OPENSET_SVM_THREADS", "1", 1);
  const auto a = grid_search(d, plan);
  setenv("OPENSET_SVM_THREADS", "6", 1);
  const auto b = grid_search(d, plan);
  unsetenv("OPENSET_SVM_THREADS");
  REQUIRE(a.evaluations.size() == b.evaluations.size());
  for (std::size_t k = 0; k < a.evaluations.size(); ++k) {
    CHECK(a.evaluations[k].measure == b.evaluations[k].measure);
    CHECK(a.evaluations[k].biases == b.evaluations[k].biases);
  }
  CHECK(a.chosen == b.chosen);
}

TEST_CASE("grid report CSV") {
  const auto d = gen_synthetic(SyntheticKind::FourGauss, 10, 2);
  auto p = small_plan(GsApproach::Internal, GsRegime::Closed);
  p.C_grid = {1};
  p.gamma_grid = {4};
  p.lambda_frac_grid = {0};
  p.reject_nonnegative_bias = false;
  const auto r = grid_search(d, p);
  std::ostringstream os;
  write_grid_report_csv(os, r);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "class,C,gamma,lambda_frac,measure,bias_signs,wall_ms");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    CHECK(line.rfind(std::to_string(rows) + ",1,4,0,", 0) == 0);
  }
  CHECK(rows == 4);
}

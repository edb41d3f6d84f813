#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "ossvm/data_io.hpp"
#include "ossvm/error.hpp"
#include "ossvm/multiclass_ova.hpp"
#include "support/fixtures.hpp"

using namespace ossvm;
using fixtures::point;

namespace {

BinaryTrainConfig cfg(double C, double gamma, double frac = 0.0) {
  BinaryTrainConfig c;
  c.C = C;
  c.gamma = gamma;
  c.lambda_frac = frac;
  c.stop_eps = 1e-6;
  return c;
}

Dataset two_blobs() {
  Dataset d;
  std::mt19937_64 gen(1);
  std::normal_distribution<double> n(0.0, 0.05);
  for (int i = 0; i < 20; ++i) d.push_back(point(4, 0.25 + n(gen), 0.25 + n(gen)));
  for (int i = 0; i < 20; ++i) d.push_back(point(9, 0.75 + n(gen), 0.75 + n(gen)));
  return d;
}

TrainedBinaryModel constant_model(double bias) {
  return TrainedBinaryModel({point(1, 0.5, 0.5)}, {0.5}, bias, {1.0}, 1.0, 0.0, 1);
}

std::filesystem::path temp_dir(const char* name) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("decide follows the open-set rule") {
  const std::vector<int> labels{1, 2, 3};
  CHECK(decide(labels, std::vector<double>{-0.5, -0.2, -0.9}) == kUnknownLabel);
  CHECK(decide(labels, std::vector<double>{-0.5, 0.3, 0.1}) == 2);
  CHECK(decide(labels, std::vector<double>{0.0, -1.0, -1.0}) == 1);  // zero is not rejected
  CHECK(decide(std::vector<int>{7, 3, 5}, std::vector<double>{0.4, 0.4, 0.1}) == 3);  // tie by label
}

TEST_CASE("UNKNOWN exactly when every score is negative") {
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> u(-1, 0.3);
  const std::vector<int> labels{2, 5, 8, 11};
  for (int t = 0; t < 2000; ++t) {
    std::vector<double> s{u(gen), u(gen), u(gen), u(gen)};
    const int got = decide(labels, s);
    const bool all_negative = std::all_of(s.begin(), s.end(), [](double v) { return v < 0; });
    CHECK((got == kUnknownLabel) == all_negative);
    if (!all_negative) {
      const auto it = std::max_element(s.begin(), s.end());
      CHECK(got == labels[static_cast<std::size_t>(it - s.begin())]);
    }
  }
}

TEST_CASE("two separable blobs") {
  const auto d = two_blobs();
  const auto m = train_ova(d, cfg(10.0, 4.0));
  CHECK(m.size() == 2);
  CHECK(m.binaries().size() == 2);
  CHECK(m.class_labels() == std::vector<int>{4, 9});
  CHECK(predict(m, point(0, 0.25, 0.25)).label == 4);
  CHECK(predict(m, point(0, 0.75, 0.75)).label == 9);
  const auto p = predict(m, point(0, 0.25, 0.25));
  CHECK(p.scores.size() == 2);
  CHECK(p.scores[0] == m.binaries()[0].raw_score(point(0, 0.25, 0.25)));
}

TEST_CASE("nested classes: inner biases negative, enclosing class not") {
  const auto d = gen_synthetic(SyntheticKind::NestedRings, 40, 1);
  const auto m = train_ova(d, cfg(10.0, 4.0));
  REQUIRE(m.class_labels() == std::vector<int>{1, 2, 3});
  CHECK(m.binaries()[0].bias() < 0);
  CHECK(m.binaries()[1].bias() < 0);
  CHECK(m.binaries()[2].bias() >= 0);
  CHECK_FALSE(m.all_bounded());
  CHECK_FALSE(klos_is_bounded(m));
  // The enclosing binary dominates far away, so a distant point is labeled known.
  CHECK(predict(m, point(0, 10.0, 10.0)).label == 3);
}

TEST_CASE("bounded training escalates only the enclosing class") {
  const auto d = gen_synthetic(SyntheticKind::NestedRings, 40, 1);
  const std::vector<BinaryTrainConfig> per(3, cfg(10.0, 4.0));
  OvaEscalationReport rep;
  const auto m = train_ova_bounded(d, per, 0.25, &rep);
  CHECK(m.all_bounded());
  CHECK(rep.retrains[0] == 0);
  CHECK(rep.retrains[1] == 0);
  CHECK(rep.retrains[2] >= 1);
  CHECK(rep.lambda_fracs[2] > 0.0);
  for (const auto& b : m.binaries()) CHECK(b.bias() < 0);
  for (double ang = 0; ang < 6.28; ang += 0.5) {
    CHECK(predict(m, point(0, 0.5 + 20 * std::cos(ang), 0.5 + 20 * std::sin(ang))).is_unknown());
  }
}

TEST_CASE("relabeling classes permutes scores and keeps predictions") {
  const auto d = gen_synthetic(SyntheticKind::FourGauss, 15, 3);
  auto relabeled = d;
  const int map[5] = {0, 30, 10, 40, 20};
  for (auto& s : relabeled) s.label = map[s.label];
  const auto m1 = train_ova(d, cfg(4.0, 2.0));
  const auto m2 = train_ova(relabeled, cfg(4.0, 2.0));
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 100; ++t) {
    const auto x = point(0, u(gen), u(gen));
    const auto p1 = predict(m1, x);
    const auto p2 = predict(m2, x);
    for (std::size_t k = 0; k < 4; ++k) {
      const int mapped = map[m1.class_labels()[k]];
      const auto pos = std::find(m2.class_labels().begin(), m2.class_labels().end(), mapped) -
                       m2.class_labels().begin();
      CHECK(p1.scores[k] == doctest::Approx(p2.scores[static_cast<std::size_t>(pos)]).epsilon(1e-12));
    }
    CHECK((p1.is_unknown() ? kUnknownLabel : map[p1.label]) == p2.label);
  }
}

TEST_CASE("klos_is_bounded is the conjunction of negative biases") {
  const OvaModel all_neg({1, 2, 3}, {constant_model(-0.1), constant_model(-1), constant_model(-0.01)});
  CHECK(klos_is_bounded(all_neg));
  const OvaModel one_pos({1, 2, 3}, {constant_model(-0.1), constant_model(0.2), constant_model(-0.3)});
  CHECK_FALSE(klos_is_bounded(one_pos));
  CHECK(predict(one_pos, point(0, 100, -100)).label == 2);
  CHECK(predict(all_neg, point(0, 100, -100)).is_unknown());
}

TEST_CASE("OvaModel construction is validated") {
  CHECK_THROWS_AS(OvaModel({1}, {constant_model(-1)}), Error);
  CHECK_THROWS_AS(OvaModel({1, 2}, {constant_model(-1)}), Error);
  CHECK_THROWS_AS(OvaModel({1, 1}, {constant_model(-1), constant_model(-1)}), Error);
  CHECK_THROWS_AS(OvaModel({kUnknownLabel, 1}, {constant_model(-1), constant_model(-1)}), Error);
  Dataset single{point(1, 0, 0), point(1, 1, 1)};
  CHECK_THROWS_AS(train_ova(single, cfg(1, 1)), Error);
}

TEST_CASE("errors from a binary name the class") {
  const auto d = gen_synthetic(SyntheticKind::FourGauss, 5, 1);
  std::vector<BinaryTrainConfig> per(4, cfg(1, 1));
  per[2].lambda_frac = 1.0;
  CHECK_THROWS_WITH_AS(train_ova(d, per), doctest::Contains("class 3"), Error);
}

TEST_CASE("bundle round trip") {
  const auto d = gen_synthetic(SyntheticKind::NestedRings, 20, 2);
  const auto m = train_ova_bounded(d, std::vector<BinaryTrainConfig>(3, cfg(10.0, 4.0)), 0.5);
  const auto dir = temp_dir("ossvm_bundle_test");
  save_ova_bundle(dir.string(), m);
  const auto back = load_ova_bundle(dir.string());
  CHECK(back.class_labels() == m.class_labels());
  CHECK(back.all_bounded() == m.all_bounded());
  for (double x = 0; x <= 1.0; x += 0.1) {
    CHECK(predict(back, point(0, x, 1 - x)).scores == predict(m, point(0, x, 1 - x)).scores);
  }
  {
    std::ofstream os(dir / "manifest.json");
    os << "{\"format\": \"something-else\"}";
  }
  CHECK_THROWS_AS(load_ova_bundle(dir.string()), Error);
  {
    std::ofstream os(dir / "manifest.json");
    os << "not json";
  }
  CHECK_THROWS_AS(load_ova_bundle(dir.string()), Error);
  CHECK_THROWS_AS(load_ova_bundle((dir / "missing").string()), Error);
  std::filesystem::remove_all(dir);
}

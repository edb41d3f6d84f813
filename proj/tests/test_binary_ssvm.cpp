#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "ossvm/binary_ssvm.hpp"
#include "ossvm/error.hpp"
#include "ossvm/kernel.hpp"
#include "oracles/classic_smo.hpp"
#include "support/fixtures.hpp"

using namespace ossvm;
using fixtures::point;

namespace {

std::vector<SparseSample> cluster(int label, double cx, double cy, double r, int n) {
  std::vector<SparseSample> out;
  for (int k = 0; k < n; ++k) {
    const double t = 2 * std::numbers::pi * k / n;
    out.push_back(point(label, cx + r * std::cos(t), cy + r * std::sin(t)));
  }
  return out;
}

// Positives in a small disc, negatives on a ring around them.
std::pair<std::vector<SparseSample>, std::vector<SparseSample>> surrounded() {
  auto pos = cluster(1, 0.5, 0.5, 0.05, 8);
  pos.push_back(point(1, 0.5, 0.5));
  return {pos, cluster(-1, 0.5, 0.5, 0.4, 24)};
}

double naive_score(const TrainedBinaryModel& m, const SparseSample& x) {
  double s = m.bias();
  for (std::size_t i = 0; i < m.support_vectors().size(); ++i) {
    double d = 0.0;
    const auto& sv = m.support_vectors()[i];
    std::vector<double> a(2, 0.0), b(2, 0.0);
    for (const auto& f : sv.features) a[f.index - 1] = f.value;
    for (const auto& f : x.features) b[f.index - 1] = f.value;
    d = oracle::dense_rbf(a, b, m.kernel().gamma);
    s += m.sv_coeff()[i] * d;
  }
  return s;
}

BinaryTrainConfig tight(double C, double gamma, double frac) {
  BinaryTrainConfig c;
  c.C = C;
  c.gamma = gamma;
  c.lambda_frac = frac;
  c.stop_eps = 1e-10;
  return c;
}

}  // namespace

TEST_CASE("absolute_lambda enforces the supremum") {
  CHECK(absolute_lambda(tight(2.0, 1.0, 0.25), 4) == 2.0);
  CHECK(absolute_lambda(tight(2.0, 1.0, 0.0), 4) == 0.0);
  CHECK_THROWS_WITH_AS(absolute_lambda(tight(2.0, 1.0, 1.0), 4), doctest::Contains("InfeasibleLambda"),
                       Error);
  CHECK_THROWS_AS(absolute_lambda(tight(2.0, 1.0, 1.5), 4), Error);
  CHECK_THROWS_AS(absolute_lambda(tight(2.0, 1.0, -0.1), 4), Error);
}

TEST_CASE("lambda zero matches a standard SVM on probe points") {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(-0.2, 1.2);
  for (int t = 0; t < 10; ++t) {
    const auto d = fixtures::random_dense(gen, 8, 5.0, 0.0);
    std::vector<SparseSample> pos, neg;
    for (std::size_t i = 0; i < d.x.size(); ++i) (d.y[i] > 0 ? pos : neg).push_back(make_dense_sample(d.y[i], d.x[i]));
    const auto model = train_binary(pos, neg, tight(5.0, d.gamma, 0.0));
    // The oracle needs positives first, in the same order as training.
    oracle::DenseProblem ordered = d;
    ordered.x.clear();
    ordered.y.clear();
    for (int s : {1, -1})
      for (std::size_t i = 0; i < d.x.size(); ++i)
        if (d.y[i] == s) {
          ordered.x.push_back(d.x[i]);
          ordered.y.push_back(s);
        }
    const auto ref = oracle::classic_smo(ordered, 1e-12);
    for (int k = 0; k < 50; ++k) {
      const std::vector<double> x{u(gen), u(gen)};
      CHECK(std::abs(model.raw_score(make_dense_sample(0, x)) - oracle::reference_score(ordered, ref, x)) <=
            1e-6);
    }
  }
}

TEST_CASE("two-point symmetric model has zero bias and one SV per class") {
  const std::vector<SparseSample> pos{point(1, 0, 0)}, neg{point(-1, 1, 0)};
  const auto m = train_binary(pos, neg, tight(10.0, 1.0, 0.0));
  CHECK(std::abs(m.bias()) < 1e-9);
  REQUIRE(m.support_vectors().size() == 2);
  CHECK(m.sv_coeff()[0] > 0);
  CHECK(m.sv_coeff()[1] < 0);
  CHECK_FALSE(has_bounded_plos(m));
}

TEST_CASE("surrounded positives get a negative bias at lambda zero") {
  const auto [pos, neg] = surrounded();
  const auto m = train_binary(pos, neg, tight(10.0, 8.0, 0.0));
  CHECK(m.bias() < 0);
  CHECK(has_bounded_plos(m));
}

TEST_CASE("raw_score far-field, margin and naive summation") {
  const auto [pos, neg] = surrounded();
  const auto m = train_binary(pos, neg, tight(10.0, 8.0, 0.0));
  // e^{-8 d^2} is far below 1e-12 / mass at d = 4 from [0,1]^2.
  for (double ang = 0; ang < 6.28; ang += 0.3) {
    const auto far = point(0, 0.5 + 4 * std::cos(ang), 0.5 + 4 * std::sin(ang));
    CHECK(std::abs(m.raw_score(far) - m.bias()) <= 1e-12);
  }
  for (std::size_t i = 0; i < m.support_vectors().size(); ++i) {
    const double a = std::abs(m.sv_coeff()[i]);
    if (a > 1e-6 * m.C() && a < m.C() * (1 - 1e-6)) {
      const double target = m.sv_coeff()[i] > 0 ? 1.0 : -1.0;
      CHECK(std::abs(m.raw_score(m.support_vectors()[i]) - target) < 1e-6);
    }
  }
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 100; ++k) {
    const auto x = point(0, u(gen), u(gen));
    CHECK(m.raw_score(x) == doctest::Approx(naive_score(m, x)).epsilon(1e-12));
  }
}

TEST_CASE("has_bounded_plos follows the sign of the bias") {
  const std::vector<SparseSample> sv{point(1, 0.5, 0.5)};
  const auto make = [&](double b) { return TrainedBinaryModel(sv, {1.0}, b, {1.0}, 1.0, 0.0, 1); };
  CHECK(has_bounded_plos(make(-0.3)));
  CHECK_FALSE(has_bounded_plos(make(0.0)));
  const auto positive = make(0.1);
  CHECK_FALSE(has_bounded_plos(positive));
  // Far along any direction the score is the bias, so the point is labeled positive.
  CHECK(positive.raw_score(point(0, 50.0, -30.0)) > 0);
}

TEST_CASE("escalation returns immediately when the bias is already negative") {
  const auto [pos, neg] = surrounded();
  const auto r = escalate_lambda(pos, neg, tight(10.0, 8.0, 0.0), 0.5);
  CHECK(r.retrains == 0);
  CHECK(r.lambda_frac == 0.0);
  CHECK(r.model.bias() < 0);
}

TEST_CASE("escalation pushes the enclosing class to a negative bias") {
  const auto [inner, ring] = surrounded();
  std::vector<SparseSample> pos = ring, neg = inner;
  const auto base = train_binary(pos, neg, tight(10.0, 8.0, 0.0));
  REQUIRE(base.bias() >= 0);
  const auto r = escalate_lambda(pos, neg, tight(10.0, 8.0, 0.0), 0.25);
  CHECK(r.retrains >= 1);
  CHECK(r.model.bias() < 0);
  REQUIRE(r.tried_fracs.size() == static_cast<std::size_t>(r.retrains + 1));
  for (std::size_t k = 1; k < r.tried_fracs.size(); ++k) {
    CHECK(r.tried_fracs[k] > r.tried_fracs[k - 1]);
    CHECK(r.tried_fracs[k] < 1.0);
    CHECK(r.tried_fracs[k] == doctest::Approx(r.tried_fracs[k - 1] + 0.25 * (1 - r.tried_fracs[k - 1])));
  }
  CHECK(r.lambda_frac == r.tried_fracs.back());
  // A full step jumps straight to 1, which is not admissible.
  CHECK_THROWS_WITH_AS(escalate_lambda(pos, neg, tight(10.0, 8.0, 0.0), 1.0),
                       doctest::Contains("EscalationFailed"), Error);
  CHECK_THROWS_AS(escalate_lambda(pos, neg, tight(10.0, 8.0, 0.0), 0.0), Error);
}

TEST_CASE("lambda just below the supremum trains within the constraints") {
  const auto [pos, neg] = surrounded();
  const auto cfg = tight(1.0, 8.0, 1.0 - 1e-9);
  const auto m = train_binary(pos, neg, cfg);
  double signed_sum = 0.0;
  for (double c : m.sv_coeff()) {
    CHECK(std::abs(c) <= cfg.C);
    signed_sum += c;
  }
  CHECK(std::abs(signed_sum - m.lambda()) <= 1e-9 * std::max(1.0, m.lambda()));
}

TEST_CASE("bias does not increase from lambda_frac 0 to 0.9 on random problems") {
  std::mt19937_64 gen(8);
  int checked = 0;
  for (int t = 0; t < 60; ++t) {
    const auto d = fixtures::random_dense(gen, 8, t % 2 ? 1.0 : 10.0, 0.0);
    std::vector<SparseSample> pos, neg;
    for (std::size_t i = 0; i < d.x.size(); ++i) (d.y[i] > 0 ? pos : neg).push_back(make_dense_sample(d.y[i], d.x[i]));
    const auto m0 = train_binary(pos, neg, tight(d.C, d.gamma, 0.0));
    const auto m9 = train_binary(pos, neg, tight(d.C, d.gamma, 0.9));
    CHECK(m9.bias() <= m0.bias() + 1e-7);
    ++checked;
  }
  CHECK(checked == 60);
}

TEST_CASE("raw_score respects the Lipschitz bound") {
  const auto [pos, neg] = surrounded();
  const auto m = train_binary(pos, neg, tight(10.0, 8.0, 0.3));
  const double g = m.kernel().gamma;
  // sup_d 2 d e^{-g d^2} = sqrt(2/g) e^{-1/2}
  const double lip = m.coefficient_mass() * g * std::sqrt(2.0 / g) * std::exp(-0.5);
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0, 1), du(-0.01, 0.01);
  for (int k = 0; k < 200; ++k) {
    const double x = u(gen), y = u(gen), dx = du(gen), dy = du(gen);
    const double diff = std::abs(m.raw_score(point(0, x + dx, y + dy)) - m.raw_score(point(0, x, y)));
    CHECK(diff <= lip * std::hypot(dx, dy) + 1e-12);
  }
}

TEST_CASE("model text round trip") {
  const auto [pos, neg] = surrounded();
  const auto m = train_binary(pos, neg, tight(10.0, 8.0, 0.3));
  std::stringstream ss;
  write_binary_model(ss, m);
  const auto back = read_binary_model(ss);
  CHECK(back.bias() == m.bias());
  CHECK(back.lambda() == m.lambda());
  CHECK(back.C() == m.C());
  CHECK(back.positive_count() == m.positive_count());
  CHECK(back.support_vectors() == m.support_vectors());
  CHECK(back.sv_coeff() == m.sv_coeff());
  for (double x = 0; x <= 1; x += 0.25) CHECK(back.raw_score(point(0, x, 1 - x)) == m.raw_score(point(0, x, 1 - x)));
}

TEST_CASE("malformed model files are rejected") {
  for (const char* text : {"", "ossvm-binary-model 2\n", "ossvm-binary-model 1\ngamma x\n",
                           "ossvm-binary-model 1\ngamma 1\nbias 0\nlambda 0\nC 1\npositive_count 1\nsv_count 2\n"
                           "1 1:0.5\n"}) {
    std::istringstream is(text);
    CHECK_THROWS_AS(read_binary_model(is), Error);
  }
  CHECK_THROWS_AS(load_binary_model("/nonexistent/model.txt"), Error);
}

TEST_CASE("training rejects empty classes") {
  const std::vector<SparseSample> pos{point(1, 0, 0)}, none;
  CHECK_THROWS_AS(train_binary(pos, none, tight(1, 1, 0)), Error);
  CHECK_THROWS_AS(train_binary(none, pos, tight(1, 1, 0)), Error);
}

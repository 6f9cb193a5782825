#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "rfm/field/quadrature.hpp"
#include "rfm/grf/grf.hpp"
#include "rfm/kernel/kernel_lab.hpp"

using namespace rfm;
using namespace rfm::kernel;
using std::numbers::pi;

namespace {

Grid interval(std::size_t k) { return Grid::interval(k, Boundary::dirichlet); }

Field random_interval_field(std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  Eigen::VectorXd v(static_cast<Eigen::Index>(k));
  for (auto& x : v) x = n01(rng);
  return Field(interval(k), v);
}

// Straight from the definition: (1/m) sum_j <phi(a'), y> phi(a).
Field kernel_by_definition(const FeatureFamily& fam, const Field& a, const Field& ap, const Field& y) {
  Field out = Field::zeros(a.grid());
  for (std::size_t j = 0; j < fam.size(); ++j) {
    const Field pa = fam.evaluate(a, j), pap = fam.evaluate(ap, j);
    out = out + (inner_product_l2(pap, y) / static_cast<double>(fam.size())) * pa;
  }
  return out;
}

std::vector<double> interior_points(int count) {
  std::vector<double> xs;
  for (int i = 1; i <= count; ++i) xs.push_back(static_cast<double>(i) / (count + 1));
  return xs;
}

}  // namespace

TEST(BridgeFeature, FirstModeIsScaledSine) {
  BrownianBridgeFeature f{Eigen::VectorXd::Unit(6, 0)};
  for (double x : {0.1, 0.37, 0.5, 0.9}) EXPECT_NEAR(f(x), std::sqrt(2.0) / pi * std::sin(pi * x), 1e-15);
}

TEST(BridgeFeature, VanishesAtEndpoints) {
  std::mt19937_64 rng(4);
  for (int s = 0; s < 20; ++s) {
    const auto f = BrownianBridgeFeature::sample(63, rng);
    const Field v = bb_feature_eval(f, interval(65));
    EXPECT_EQ(v[0], 0.0);
    EXPECT_EQ(v[64], 0.0);
  }
}

TEST(BridgeFeature, VarianceAtMidpointIsOneQuarter) {
  std::mt19937_64 rng(5);
  double sum = 0.0, sum2 = 0.0;
  const int draws = 5000;
  for (int s = 0; s < draws; ++s) {
    const double v = BrownianBridgeFeature::sample(255, rng)(0.5);
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / draws;
  EXPECT_NEAR(sum2 / draws - mean * mean, 0.25, 0.25 * 0.05);
}

TEST(BridgeKernel, Examples) {
  EXPECT_DOUBLE_EQ(bb_kernel_exact(0.5, 0.5), 0.25);
  EXPECT_DOUBLE_EQ(bb_kernel_exact(0.25, 0.75), 0.0625);
  EXPECT_DOUBLE_EQ(bb_kernel_exact(0.75, 0.25), 0.0625);
  for (double x : {0.0, 0.3, 1.0}) {
    EXPECT_EQ(bb_kernel_exact(0.0, x), 0.0);
    EXPECT_EQ(bb_kernel_exact(x, 1.0), 0.0);
  }
  EXPECT_THROW(bb_kernel_exact(-0.1, 0.5), std::out_of_range);
  EXPECT_THROW(bb_kernel_exact(0.5, 1.5), std::out_of_range);
}

TEST(BridgeKernel, EmpiricalMidpointNearExact) {
  const std::vector<double> xs{0.5};
  const Eigen::MatrixXd k = bb_empirical_kernel(bb_draw_thetas(255, 10000, 9), xs);
  EXPECT_NEAR(k(0, 0), 0.25, 0.02);
}

TEST(BridgeKernel, ConvergesAtMonteCarloRate) {
  const auto kc = bb_kernel_convergence({100, 1000, 10000}, 1024, 3);
  EXPECT_NEAR(kc.slope, -0.5, 0.15);
}

TEST(LogLogSlope, ExactPowerLaw) {
  const std::vector<double> x{1, 10, 100}, y{3, 0.3, 0.03};
  EXPECT_NEAR(loglog_slope(x, y), -1.0, 1e-12);
}

TEST(EmpiricalKernel, SingleFeatureIsRankOne) {
  const auto fam = BrownianBridgeFamily::sample(31, 1, 2);
  const EmpiricalKernelEval ek(fam);
  const Field a = random_interval_field(33, 1), ap = random_interval_field(33, 2), y = random_interval_field(33, 3);
  const Field pa = fam->evaluate(a, 0), pap = fam->evaluate(ap, 0);
  const Field expect = inner_product_l2(pap, y) * pa;
  const Field got = empirical_kernel_apply(ek, a, ap, y);
  EXPECT_LT((got.values() - expect.values()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(EmpiricalKernel, MatchesDefinition) {
  const auto fam = BrownianBridgeFamily::sample(31, 12, 3);
  const EmpiricalKernelEval ek(fam);
  const Field a = random_interval_field(33, 4), ap = random_interval_field(33, 5), y = random_interval_field(33, 6);
  const Field got = empirical_kernel_apply(ek, a, ap, y), want = kernel_by_definition(*fam, a, ap, y);
  EXPECT_LT((got.values() - want.values()).cwiseAbs().maxCoeff(), 1e-12 * want.values().cwiseAbs().maxCoeff());
}

TEST(EmpiricalKernel, PositiveSemidefiniteOnThreeInputs) {
  const EmpiricalKernelEval ek(BrownianBridgeFamily::sample(31, 4, 8));
  const std::vector<Field> as{random_interval_field(33, 10), random_interval_field(33, 11), random_interval_field(33, 12)};
  for (std::uint64_t s = 0; s < 30; ++s) {
    std::vector<Field> ys;
    for (std::uint64_t i = 0; i < 3; ++i) ys.push_back(random_interval_field(33, 100 + 3 * s + i));
    double q = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t l = 0; l < 3; ++l) q += inner_product_l2(ys[i], empirical_kernel_apply(ek, as[i], as[l], ys[l]));
    EXPECT_GE(q, -1e-10) << s;
  }
}

TEST(KernelRidge, HugeRidgeGivesZero) {
  const Dataset d = bb_operator_dataset(4, 33, 1);
  const EmpiricalKernelEval ek(BrownianBridgeFamily::sample(31, 6, 2));
  const auto pred = kernel_ridge_oracle(ek, d, 1e14);
  const Field a = bb_operator_dataset(1, 33, 7).inputs[0];
  EXPECT_LT(pred(a).values().cwiseAbs().maxCoeff(), 1e-10);
}

TEST(KernelRidge, SinglePairSolvesRegularizedSystem) {
  const Dataset d = bb_operator_dataset(1, 33, 2);
  const EmpiricalKernelEval ek(BrownianBridgeFamily::sample(31, 6, 3));
  const double lambda = 1e-3;
  const auto pred = kernel_ridge_oracle(ek, d, lambda);
  const Field& beta = pred.betas().at(0);
  const Field lhs = empirical_kernel_apply(ek, d.inputs[0], d.inputs[0], beta) + lambda * beta;
  EXPECT_LT((lhs.values() - d.outputs[0].values()).cwiseAbs().maxCoeff(),
            1e-9 * d.outputs[0].values().cwiseAbs().maxCoeff());
  const Field at_train = pred(d.inputs[0]);
  EXPECT_LT((at_train - (d.outputs[0] - lambda * beta)).values().cwiseAbs().maxCoeff(), 1e-9);
}

TEST(KernelRidge, MatchesRandomFeatureModel) {
  for (double lambda : {0.0, 1e-3}) {
    EXPECT_LE(ridge_equivalence_gap(8, 16, 65, lambda, 3), 1e-8) << lambda;
  }
}

TEST(KernelRidge, RefusesOversizedProblems) {
  const Dataset d = bb_operator_dataset(3200, 65, 1);
  const EmpiricalKernelEval ek(BrownianBridgeFamily::sample(63, 4, 2));
  EXPECT_THROW(kernel_ridge_oracle(ek, d, 0.0), std::invalid_argument);
}

TEST(MonteCarloProjection, ZeroCoefficientsGiveZero) {
  const auto fam = BrownianBridgeFamily::sample(31, 5, 4);
  const auto proj = monte_carlo_project(Eigen::VectorXd::Zero(5), fam);
  EXPECT_TRUE(proj(random_interval_field(33, 1)).values().isZero(0.0));
}

TEST(MonteCarloProjection, SingleFeatureIsScaledFeature) {
  const auto fam = BrownianBridgeFamily::sample(31, 1, 4);
  const Field a = random_interval_field(33, 2);
  const Field got = monte_carlo_project(Eigen::VectorXd::Constant(1, 2.5), fam)(a);
  EXPECT_LT((got - 2.5 * fam->evaluate(a, 0)).values().cwiseAbs().maxCoeff(), 1e-14);
}

TEST(MonteCarloProjection, VarianceFallsAsOneOverM) {
  // With c = 1 the projection at x = 1/2 averages m draws of variance 1/4
  // (0.2466 with 15 modes).
  const std::vector<double> xs{0.5};
  const int trials = 300;
  std::vector<double> ms, vars;
  for (std::size_t m : {100, 1000, 10000}) {
    double sum = 0.0, sum2 = 0.0;
    for (int t = 0; t < trials; ++t) {
      const Eigen::MatrixXd th = bb_draw_thetas(15, m, 1000 * m + static_cast<std::uint64_t>(t));
      const double v = monte_carlo_project_scalar(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(m)), th, xs)[0];
      sum += v;
      sum2 += v * v;
    }
    const double mean = sum / trials, var = sum2 / trials - mean * mean;
    EXPECT_NEAR(var * static_cast<double>(m), 0.25, 0.25 * 0.3) << m;
    ms.push_back(static_cast<double>(m));
    vars.push_back(var);
  }
  EXPECT_NEAR(loglog_slope(ms, vars), -1.0, 0.3);
}

TEST(ScalarRfm, PrimalAndDualAgree) {
  const auto x = interior_points(12);
  Eigen::VectorXd y(12);
  for (int i = 0; i < 12; ++i) y[i] = std::sin(3 * x[static_cast<std::size_t>(i)]);
  const Eigen::MatrixXd th = bb_draw_thetas(63, 40, 2);
  const auto xs = interior_points(50);
  for (double lambda : {0.0, 1e-4}) {
    const Eigen::VectorXd p = train_scalar_bb(th, x, y, lambda, ScalarSolve::primal).predict(xs);
    const Eigen::VectorXd q = train_scalar_bb(th, x, y, lambda, ScalarSolve::dual).predict(xs);
    EXPECT_LT((p - q).cwiseAbs().maxCoeff(), 1e-8) << lambda;
  }
}

TEST(ScalarRfm, ApproachesKernelInterpolantAsMGrows) {
  const auto x = interior_points(32);
  Eigen::VectorXd y(32);
  for (int i = 0; i < 32; ++i) {
    const double t = x[static_cast<std::size_t>(i)];
    y[i] = std::sin(2 * pi * t) + 0.5 * t * (1 - t);
  }
  const auto xs = interior_points(199);
  const Eigen::VectorXd target = bb_kernel_interpolant(x, y, xs);
  double prev = 1e300;
  for (std::size_t m : {50, 500, 5000}) {
    const auto model = train_scalar_bb(bb_draw_thetas(1024, m, 11), x, y, 0.0, ScalarSolve::dual);
    const double err = (model.predict(xs) - target).norm() / target.norm();
    EXPECT_LT(err, prev) << m;
    prev = err;
  }
}

TEST(IntegralOperators, ComposeToKernelOperator) {
  const Dataset d = bb_operator_dataset(6, 33, 4);
  const EmpiricalKernelEval ek(BrownianBridgeFamily::sample(31, 5, 5));
  const auto ops = assemble_integral_operators(ek, d.inputs);
  EXPECT_LT((ops.a * ops.a_star - ops.t).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(BridgeFamily, EvaluatesPointwiseProduct) {
  const auto fam = BrownianBridgeFamily::sample(31, 3, 6);
  const Field a = random_interval_field(33, 7);
  const Grid g = interval(33);
  for (std::size_t j = 0; j < 3; ++j) {
    const BrownianBridgeFeature b{fam->thetas().col(static_cast<Eigen::Index>(j))};
    const Field want = Field(g, bb_feature_eval(b, g).values().cwiseProduct(a.values()));
    EXPECT_LT((fam->evaluate(a, j) - want).values().cwiseAbs().maxCoeff(), 1e-14);
  }
  EXPECT_THROW(fam->evaluate_all(Field::zeros(Grid::periodic(33))), std::invalid_argument);
}

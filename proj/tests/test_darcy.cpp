#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "rfm/darcy/darcy.hpp"
#include "rfm/field/quadrature.hpp"
#include "rfm/field/resample.hpp"
#include "rfm/grf/grf.hpp"

using namespace rfm;
using namespace rfm::darcy;
using std::numbers::pi;

namespace {

Grid square(std::size_t r) { return Grid::square(r, Boundary::dirichlet); }

Field levelset_draw(std::size_t r, std::uint64_t index) {
  auto rng = grf::sample_rng(31, index);
  return grf::sample_levelset({}, square(r), rng);
}

Field random_interior_field(std::size_t r, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  const Grid g = square(r);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.size()));
  for (std::size_t j = 1; j + 1 < r; ++j)
    for (std::size_t i = 1; i + 1 < r; ++i) v[static_cast<Eigen::Index>(j * r + i)] = n01(rng);
  return Field(g, v);
}

Field sine_bump(const Grid& g) {
  return Field::from_function(g, [](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); });
}

double boundary_max_abs(const Field& u) {
  const std::size_t r = u.grid().points_per_axis();
  double m = 0.0;
  for (std::size_t k = 0; k < r; ++k)
    m = std::max({m, std::abs(u.at(k, 0)), std::abs(u.at(k, r - 1)), std::abs(u.at(0, k)), std::abs(u.at(r - 1, k))});
  return m;
}

// Anisotropic total variation over both axes.
double total_variation(const Field& u) {
  const std::size_t r = u.grid().points_per_axis();
  double tv = 0.0;
  for (std::size_t j = 0; j < r; ++j)
    for (std::size_t i = 0; i + 1 < r; ++i) tv += std::abs(u.at(i + 1, j) - u.at(i, j)) + std::abs(u.at(j, i + 1) - u.at(j, i));
  return tv;
}

// Dense 5-point Laplacian on the interior, solved by LU.
Field dense_poisson(const Field& rhs) {
  const std::size_t r = rhs.grid().points_per_axis();
  const int n = static_cast<int>(r) - 2;
  const double h2 = rhs.grid().spacing() * rhs.grid().spacing();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n * n, n * n);
  Eigen::VectorXd b(n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int row = j * n + i;
      a(row, row) = 4.0 / h2;
      if (i > 0) a(row, row - 1) = -1.0 / h2;
      if (i + 1 < n) a(row, row + 1) = -1.0 / h2;
      if (j > 0) a(row, row - n) = -1.0 / h2;
      if (j + 1 < n) a(row, row + n) = -1.0 / h2;
      b[row] = rhs.at(static_cast<std::size_t>(i + 1), static_cast<std::size_t>(j + 1));
    }
  const Eigen::VectorXd x = a.partialPivLu().solve(b);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(r * r));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) out[static_cast<Eigen::Index>((j + 1) * static_cast<int>(r) + i + 1)] = x[j * n + i];
  return Field(rhs.grid(), out);
}

double manufactured_error(std::size_t r) {
  const Grid g = square(r);
  const Field f = 2 * pi * pi * sine_bump(g);
  return norm_l2(darcy_solve_fd(Field::constant(g, 1.0), f) - sine_bump(g));
}

}  // namespace

TEST(DarcySolve, ManufacturedSolutionSecondOrder) {
  const double e17 = manufactured_error(17), e33 = manufactured_error(33), e65 = manufactured_error(65);
  EXPECT_NEAR(e17 / e33, 4.0, 0.6);
  EXPECT_NEAR(e33 / e65, 4.0, 0.6);
  EXPECT_NEAR(std::log2(e17 / e65) / 2.0, 2.0, 0.3);
}

TEST(DarcySolve, ScalesInverselyWithConstantCoefficient) {
  const Grid g = square(33);
  const Field u1 = darcy_solve_fd({}, Field::constant(g, 1.0));
  const Field u5 = darcy_solve_fd({}, Field::constant(g, 5.0));
  EXPECT_LT((5.0 * u5 - u1).values().cwiseAbs().maxCoeff(), 1e-14 * u1.values().cwiseAbs().maxCoeff());
}

TEST(DarcySolve, MaximumPrincipleOnLevelSetDraws) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Field u = darcy_solve_fd({}, levelset_draw(33, s));
    EXPECT_GE(u.values().minCoeff(), 0.0) << s;
    EXPECT_EQ(boundary_max_abs(u), 0.0);
  }
}

TEST(DarcySolve, ResidualIsSmall) {
  const Field a = levelset_draw(33, 7);
  const Field u = darcy_solve_fd({}, a);
  const Field lu = darcy_apply(a, u);
  double worst = 0.0;
  for (std::size_t j = 1; j < 32; ++j)
    for (std::size_t i = 1; i < 32; ++i) worst = std::max(worst, std::abs(lu.at(i, j) - 1.0));
  EXPECT_LT(worst, 1e-10);
}

TEST(DarcySolve, OperatorIsSymmetric) {
  const Field a = levelset_draw(33, 3);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Field v = random_interior_field(33, 2 * s), w = random_interior_field(33, 2 * s + 1);
    const double vlw = inner_product_l2(v, darcy_apply(a, w)), lvw = inner_product_l2(darcy_apply(a, v), w);
    EXPECT_NEAR(vlw, lvw, 1e-10 * std::abs(vlw));
  }
}

TEST(DarcySolve, RejectsNonPositiveCoefficientAndBadGrid) {
  Field a = Field::constant(square(9), 1.0);
  EXPECT_THROW(darcy_solve_fd({}, a.map([](double) { return 0.0; })), std::invalid_argument);
  EXPECT_THROW(darcy_solve_fd({}, Field::constant(Grid::square(9, Boundary::neumann), 1.0)), std::invalid_argument);
  EXPECT_THROW(darcy_solve_fd({}, Field::constant(Grid::periodic(9), 1.0)), std::invalid_argument);
}

TEST(FastPoisson, ManufacturedSolution) {
  double prev = 0.0;
  for (std::size_t r : {17, 33, 65}) {
    const Grid g = square(r);
    const double e = norm_l2(fast_poisson_dirichlet(2 * pi * pi * sine_bump(g)) - sine_bump(g));
    if (prev > 0.0) {
      EXPECT_NEAR(prev / e, 4.0, 0.6) << r;
    }
    prev = e;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(FastPoisson, ZeroRhs) {
  EXPECT_TRUE(fast_poisson_dirichlet(Field::zeros(square(17))).values().isZero(0.0));
}

TEST(FastPoisson, MatchesDenseSolveAtSeventeen) {
  for (std::uint64_t s = 0; s < 3; ++s) {
    const Field rhs = random_interior_field(17, 40 + s);
    const Field p = fast_poisson_dirichlet(rhs), q = dense_poisson(rhs);
    EXPECT_LT((p.values() - q.values()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(FastPoisson, MatchesFiniteDifferenceSolverForUnitCoefficient) {
  const Grid g = square(33);
  const Field rhs = random_interior_field(33, 5);
  const Field p = fast_poisson_dirichlet(rhs), u = darcy_solve_fd(Field::constant(g, 1.0), rhs);
  EXPECT_LT((p.values() - u.values()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Heat, ConstantUnchanged) {
  const Field c = Field::constant(square(33), 7.5);
  EXPECT_EQ(smooth_coefficient_heat(c, {}).values(), c.values());
}

TEST(Heat, PreservesMean) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Field a = levelset_draw(65, s);
    EXPECT_NEAR(integral(smooth_coefficient_heat(a, {})), integral(a), 1e-10);
    EXPECT_NEAR(integral(smooth_coefficient_heat(a, {1e-3, 0.05, 40})), integral(a), 1e-10);
  }
}

TEST(Heat, TotalVariationNonIncreasing) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    Field u = levelset_draw(33, 100 + s);
    double tv = total_variation(u);
    for (int step = 0; step < 34; ++step) {
      u = smooth_coefficient_heat(u, {1e-4, 0.03, 1});
      const double next = total_variation(u);
      ASSERT_LE(next, tv + 1e-12) << "draw " << s << " step " << step;
      tv = next;
    }
  }
}

TEST(Heat, StabilityViolationNamesBound) {
  // h = 1/32: eta dt / h^2 = 1e-2 * 0.03 * 1024 > 1/4.
  try {
    smooth_coefficient_heat(Field::constant(square(33), 1.0), {1e-2, 0.03, 1});
    FAIL() << "expected a stability error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("1/4"), std::string::npos) << e.what();
  }
}

TEST(Sigmoid, Examples) {
  const SigmoidParams gm;
  EXPECT_NEAR(sigma_gamma(0.0, gm), -1.0 / 8.0, 1e-15);
  EXPECT_NEAR(sigma_gamma(100 * gm.delta, gm), gm.s_plus, 1e-10);
  EXPECT_NEAR(sigma_gamma(-100 * gm.delta, gm), gm.s_minus, 1e-10);
}

TEST(Sigmoid, MonotoneWithinRange) {
  const SigmoidParams gm;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> r(100000);
  for (auto& x : r) x = n(rng);
  std::sort(r.begin(), r.end());
  double prev = sigma_gamma(r[0], gm);
  for (std::size_t i = 1; i < r.size(); ++i) {
    const double v = sigma_gamma(r[i], gm);
    ASSERT_GE(v, prev);
    ASSERT_GE(v, gm.s_minus);
    ASSERT_LE(v, gm.s_plus);
    prev = v;
  }
  EXPECT_LT(sigma_gamma(-0.1, gm), sigma_gamma(0.1, gm));
}

TEST(PredictorCorrector, DegenerateCaseIsSinglePoissonSolve) {
  const Grid g = square(33);
  const PredictorCorrectorSpec spec;
  const Field a = Field::constant(g, 4.0), zero = Field::zeros(g);
  const Field expected = fast_poisson_dirichlet(Field::constant(g, 1.0 / 4.0 + sigma_gamma(0.0, spec.gamma)));
  const Field p0 = predictor_field(a, zero, spec), p1 = predictor_corrector_feature(a, zero, zero, spec);
  EXPECT_LT((p0.values() - expected.values()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((p1.values() - expected.values()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PredictorCorrector, CorrectorImprovesPredictor) {
  PredictorCorrectorSpec spec;
  spec.use_theta = false;
  const Field zero = Field::zeros(square(33));
  int improved = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Field a = levelset_draw(33, 200 + s);
    const Field u = darcy_solve_fd({}, a);
    const double e0 = relative_l2_error(u, predictor_field(a, zero, spec));
    const double e1 = relative_l2_error(u, predictor_corrector_feature(a, zero, zero, spec));
    if (e1 < e0) ++improved;
  }
  EXPECT_GE(improved, 16);
}

TEST(PredictorCorrector, VanishesOnBoundary) {
  const auto fam = PredictorCorrectorFamily::sample({}, 3, 1);
  const Field a = levelset_draw(33, 1);
  const Eigen::MatrixXd f = fam->evaluate_all(a);
  for (Eigen::Index j = 0; j < 3; ++j) EXPECT_EQ(boundary_max_abs(Field(a.grid(), f.col(j))), 0.0);
}

TEST(PredictorCorrectorFamily, MatchesDirectFeature) {
  const auto fam = PredictorCorrectorFamily::sample({}, 4, 2);
  const Field a = levelset_draw(33, 2);
  const Eigen::MatrixXd f = fam->evaluate_all(a);
  for (std::size_t j = 0; j < 4; ++j) {
    const Field t1 = grf::synthesize(fam->theta(j, 1), a.grid()), t2 = grf::synthesize(fam->theta(j, 2), a.grid());
    const Field direct = predictor_corrector_feature(a, t1, t2, fam->spec());
    EXPECT_LT((f.col(static_cast<Eigen::Index>(j)) - direct.values()).cwiseAbs().maxCoeff(),
              1e-10 * direct.values().cwiseAbs().maxCoeff());
  }
}

namespace {

// Largest relative gap between features computed at r_fine and subsampled,
// and the same features computed directly at the nested r_coarse.
double resolution_gap(const PredictorCorrectorFamily& fam, const Field& fine_a, std::size_t r_coarse) {
  const Field coarse_a = subsample(fine_a, square(r_coarse));
  const Eigen::MatrixXd ff = fam.evaluate_all(fine_a), fc = fam.evaluate_all(coarse_a);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < ff.cols(); ++j) {
    const Field sub = subsample(Field(fine_a.grid(), ff.col(j)), coarse_a.grid());
    worst = std::max(worst, relative_l2_error(sub, Field(coarse_a.grid(), fc.col(j))));
  }
  return worst;
}

}  // namespace

TEST(PredictorCorrectorFamily, ResolutionConsistentForSmoothCoefficient) {
  const auto fam = PredictorCorrectorFamily::sample({}, 4, 3);
  const Field a = Field::from_function(square(65), [](double x, double y) {
    return 6.0 + 3.0 * std::sin(2 * pi * x) * std::cos(pi * y);
  });
  EXPECT_LT(resolution_gap(*fam, a, 33), 5e-3);
}

// With the reference smoothing (eta = 1e-4) the smoothed interfaces are
// narrower than one cell at r = 33, and the gap is about 2.5%.
TEST(PredictorCorrectorFamily, ResolutionConsistentOnSmoothedLevelSet) {
  const auto fam = PredictorCorrectorFamily::sample({}, 4, 3);
  const Field a = smooth_coefficient_heat(levelset_draw(65, 5), {});
  EXPECT_LT(resolution_gap(*fam, a, 33), 5e-3);
}

TEST(PredictorCorrectorFamily, ResolutionGapShrinksAtSecondOrder) {
  const auto fam = PredictorCorrectorFamily::sample({}, 4, 3);
  const Field fine = smooth_coefficient_heat(levelset_draw(129, 5), {});
  const Field mid = subsample(fine, square(65));
  // The same coefficient seen at two refinement levels.
  const double coarse_gap = resolution_gap(*fam, mid, 33), fine_gap = resolution_gap(*fam, fine, 65);
  EXPECT_GT(coarse_gap / fine_gap, 3.0) << coarse_gap << " " << fine_gap;
}

TEST(PredictorCorrectorFamily, GridSwitchesGiveSameValues) {
  const auto fam = PredictorCorrectorFamily::sample({}, 3, 4);
  const Field a33 = levelset_draw(33, 9), a17 = levelset_draw(17, 9);
  const Eigen::MatrixXd first = fam->evaluate_all(a33);
  fam->evaluate_all(a17);
  EXPECT_EQ(fam->evaluate_all(a33), first);
}

TEST(PredictorCorrectorFamily, RecordRoundTripAndPermutation) {
  PredictorCorrectorSpec spec;
  spec.theta_modes = 12;
  const auto fam = PredictorCorrectorFamily::sample(spec, 4, 5);
  const auto back = PredictorCorrectorFamily::from_record(fam->record());
  const Field a = levelset_draw(17, 3);
  EXPECT_EQ(back->evaluate_all(a), fam->evaluate_all(a));
  const std::vector<std::size_t> perm{2, 0, 3, 1};
  const Eigen::MatrixXd p = fam->permuted(perm)->evaluate_all(a), q = fam->evaluate_all(a);
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_EQ(p.col(i), q.col(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)])));
}

TEST(PredictorCorrectorFamily, RejectsTinyGrid) {
  const auto fam = PredictorCorrectorFamily::sample({}, 1, 1);
  EXPECT_THROW(fam->check_grid(square(3)), std::invalid_argument);
  EXPECT_THROW(fam->check_grid(Grid::periodic(33)), std::invalid_argument);
}

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "rfm/field/field.hpp"
#include "rfm/field/field_io.hpp"
#include "rfm/field/grid.hpp"
#include "rfm/field/quadrature.hpp"
#include "rfm/field/resample.hpp"
#include "rfm/field/spectral.hpp"
#include "scratch_dir.hpp"

using namespace rfm;
using std::numbers::pi;

namespace {

Field random_field(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  Eigen::VectorXd v(static_cast<Eigen::Index>(g.size()));
  for (auto& x : v) x = n01(rng);
  return Field(g, v);
}

}  // namespace

TEST(Grid, RejectsTooFewPoints) {
  EXPECT_THROW(Grid::periodic(2), std::invalid_argument);
  EXPECT_THROW(Grid::interval(2, Boundary::dirichlet), std::invalid_argument);
  EXPECT_THROW(Grid::square(2, Boundary::dirichlet), std::invalid_argument);
  EXPECT_NO_THROW(Grid::periodic(3));
}

TEST(Grid, PeriodicDropsDuplicateEndpoint) {
  const Grid g = Grid::periodic(129);
  EXPECT_EQ(g.size(), 128u);
  EXPECT_DOUBLE_EQ(g.spacing(), 1.0 / 128.0);
  const Grid s = Grid::square(33, Boundary::dirichlet);
  EXPECT_EQ(s.size(), 33u * 33u);
}

TEST(Field, RejectsNonFinite) {
  const Grid g = Grid::periodic(9);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(8);
  v[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(Field(g, v), std::invalid_argument);
  v[3] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(Field(g, v), std::invalid_argument);
  EXPECT_THROW(Field(g, Eigen::VectorXd::Zero(9)), std::invalid_argument);
}

TEST(InnerProduct, ConstantOneIsOne) {
  for (const Grid& g : {Grid::periodic(17), Grid::interval(10, Boundary::dirichlet),
                        Grid::square(7, Boundary::neumann)}) {
    const Field one = Field::constant(g, 1.0);
    EXPECT_NEAR(inner_product_l2(one, one), 1.0, 1e-14) << g.describe();
  }
}

TEST(InnerProduct, SinCosOrthogonalOnPeriodicGrid) {
  const Grid g = Grid::periodic(64);
  const Field s = Field::from_function(g, [](double x) { return std::sin(2 * pi * x); });
  const Field c = Field::from_function(g, [](double x) { return std::cos(2 * pi * x); });
  EXPECT_NEAR(inner_product_l2(s, c), 0.0, 1e-12);
}

TEST(InnerProduct, LinearSquaredNearOneThird) {
  const Grid g = Grid::interval(101, Boundary::dirichlet);
  const Field x = Field::from_function(g, [](double t) { return t; });
  EXPECT_NEAR(inner_product_l2(x, x), 1.0 / 3.0, 2e-4);
}

TEST(InnerProduct, SymmetricAndGridChecked) {
  const Grid g = Grid::periodic(33);
  const Field u = random_field(g, 1), v = random_field(g, 2);
  EXPECT_EQ(inner_product_l2(u, v), inner_product_l2(v, u));
  EXPECT_THROW(inner_product_l2(u, random_field(Grid::periodic(65), 3)), std::invalid_argument);
}

TEST(InnerProduct, TrapezoidIsSecondOrder) {
  // Error for x^2 on (0,1) is h^2/6 exactly.
  auto err = [](std::size_t k) {
    const Grid g = Grid::interval(k, Boundary::dirichlet);
    const Field u = Field::from_function(g, [](double x) { return x * x; });
    return std::abs(integral(u) - 1.0 / 3.0);
  };
  for (std::size_t k : {11, 21, 41, 81}) {
    const double ratio = err(k) / err(2 * k - 1);
    EXPECT_NEAR(ratio, 4.0, 0.4) << "K=" << k;
  }
}

TEST(RelativeError, Examples) {
  const Grid g = Grid::periodic(256);
  const Field t = Field::from_function(g, [](double x) { return std::sin(2 * pi * x); });
  EXPECT_EQ(relative_l2_error(t, t), 0.0);
  EXPECT_NEAR(relative_l2_error(t, 2.0 * t), 1.0, 1e-15);
  const Field a = Field::from_function(g, [](double x) { return std::sin(2 * pi * x) + 0.1 * std::cos(2 * pi * x); });
  EXPECT_NEAR(relative_l2_error(t, a), 0.1, 1e-3);
  EXPECT_THROW(relative_l2_error(Field::zeros(g), t), std::domain_error);
}

TEST(Spectral, ConstantHasOnlyMean) {
  const Grid g = Grid::periodic(33);
  const auto s = spectral_transform(Field::constant(g, 2.5));
  EXPECT_NEAR(s(0).real(), 2.5, 1e-15);
  for (int k = 1; k <= s.max_wavenumber(); ++k) EXPECT_LT(std::abs(s(k)), 1e-15);
}

TEST(Spectral, SineHasTwoCoefficients) {
  const Grid g = Grid::periodic(65);
  const auto s = spectral_transform(Field::from_function(g, [](double x) { return std::sin(2 * pi * x); }));
  // sin = (e^{i2pix} - e^{-i2pix}) / 2i
  EXPECT_NEAR(s(1).real(), 0.0, 1e-15);
  EXPECT_NEAR(s(1).imag(), -0.5, 1e-15);
  EXPECT_NEAR(s(-1).imag(), 0.5, 1e-15);
  for (int k = -s.max_wavenumber(); k <= s.max_wavenumber(); ++k)
    if (std::abs(k) != 1) {
      EXPECT_LT(std::abs(s(k)), 1e-14) << k;
    }
}

TEST(Spectral, RoundTrip) {
  for (std::size_t k : {17, 64, 129, 1025}) {
    const Field u = random_field(Grid::periodic(k), k);
    const Field back = inverse_transform(spectral_transform(u));
    EXPECT_LT((back.values() - u.values()).cwiseAbs().maxCoeff(), 1e-12) << k;
    const auto s = spectral_transform(u);
    const auto s2 = spectral_transform(back);
    for (int w = 0; w <= s.max_wavenumber(); ++w) EXPECT_LT(std::abs(s(w) - s2(w)), 1e-12);
  }
}

TEST(Spectral, RejectsNonPeriodic) {
  EXPECT_THROW(spectral_transform(Field::zeros(Grid::interval(9, Boundary::dirichlet))), std::invalid_argument);
}

TEST(Spectral, ParsevalMatchesQuadrature) {
  const Grid g = Grid::periodic(129);
  const Field u = Field::from_function(g, [](double x) {
    return 0.3 + std::sin(2 * pi * x) - 0.7 * std::cos(6 * pi * x) + 0.2 * std::sin(40 * pi * x);
  });
  EXPECT_NEAR(spectral_energy(spectral_transform(u)), inner_product_l2(u, u), 1e-10);
}

TEST(Subsample, StrideEightKeepsNodes) {
  const Grid fine = Grid::periodic(1025), coarse = Grid::periodic(129);
  const Field u = random_field(fine, 11);
  const Field c = subsample(u, coarse);
  ASSERT_EQ(c.size(), 128u);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(c[i], u[8 * i]);
}

TEST(Subsample, SameGridIsIdentity) {
  const Field u = random_field(Grid::square(17, Boundary::dirichlet), 4);
  EXPECT_EQ(subsample(u, u.grid()).values(), u.values());
}

TEST(Subsample, TwoStepsEqualOne) {
  const Field u = random_field(Grid::periodic(257), 5);
  const Field a = subsample(subsample(u, Grid::periodic(65)), Grid::periodic(17));
  const Field b = subsample(u, Grid::periodic(17));
  EXPECT_EQ(a.values(), b.values());

  const Field v = random_field(Grid::square(65, Boundary::dirichlet), 6);
  const Grid g9 = Grid::square(9, Boundary::dirichlet);
  EXPECT_EQ(subsample(subsample(v, Grid::square(33, Boundary::dirichlet)), g9).values(), subsample(v, g9).values());
}

TEST(Subsample, TwoDimensionalPicksCoincidentNodes) {
  const Grid fine = Grid::square(33, Boundary::neumann), coarse = Grid::square(9, Boundary::neumann);
  const Field u = Field::from_function(fine, [](double x, double y) { return x + 10 * y; });
  const Field c = subsample(u, coarse);
  for (std::size_t j = 0; j < 9; ++j)
    for (std::size_t i = 0; i < 9; ++i) EXPECT_DOUBLE_EQ(c.at(i, j), u.at(4 * i, 4 * j));
}

TEST(Subsample, RejectsNonNested) {
  const Field u = random_field(Grid::periodic(129), 7);
  EXPECT_THROW(subsample(u, Grid::periodic(100)), std::invalid_argument);
  EXPECT_THROW(subsample(u, Grid::periodic(257)), std::invalid_argument);
  EXPECT_THROW(subsample(u, Grid::interval(65, Boundary::dirichlet)), std::invalid_argument);
}

TEST(Subsample, CommutesWithPointwiseMaps) {
  const Field u = random_field(Grid::periodic(513), 8);
  const Grid coarse = Grid::periodic(33);
  auto sigma = [](double r) { return std::tanh(r) + r * r; };
  EXPECT_EQ(subsample(u.map(sigma), coarse).values(), subsample(u, coarse).map(sigma).values());
}

TEST(FieldIo, RoundTripIsExact) {
  const auto dir = scratch_dir();
  for (const Grid& g : {Grid::periodic(33), Grid::square(9, Boundary::dirichlet)}) {
    FieldCollection c{g, {random_field(g, 1), random_field(g, 2), random_field(g, 3)}, {{"seed", "42"}}};
    const auto path = dir / ("f" + std::to_string(g.dim()) + ".fields");
    write_fields(path, c);
    const FieldCollection back = read_fields(path);
    EXPECT_EQ(back.grid, g);
    ASSERT_EQ(back.fields.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(back.fields[i].values(), c.fields[i].values());
    EXPECT_EQ(back.provenance.at("seed"), "42");
    std::size_t count = 0;
    EXPECT_EQ(read_field_header(path, &count).grid, g);
    EXPECT_EQ(count, 3u);
  }
}

TEST(FieldIo, PeriodicFileCarriesDuplicateEndpoint) {
  const auto dir = scratch_dir();
  const Grid g = Grid::periodic(9);
  const Field u = random_field(g, 3);
  write_fields(dir / "p.fields", {g, {u}, {}});
  std::ifstream is(dir / "p.fields", std::ios::binary);
  std::string line;
  while (std::getline(is, line) && line != "end_header") {
  }
  double vals[9];
  read_f64_le(is, vals, 9);
  EXPECT_EQ(vals[0], u[0]);
  EXPECT_EQ(vals[8], u[0]);
  EXPECT_EQ(vals[7], u[7]);
}

TEST(FieldIo, TruncatedFileIsRejected) {
  const auto dir = scratch_dir();
  const Grid g = Grid::periodic(17);
  write_fields(dir / "t.fields", {g, {random_field(g, 1), random_field(g, 2)}, {}});
  const auto size = std::filesystem::file_size(dir / "t.fields");
  std::filesystem::resize_file(dir / "t.fields", size - 8);
  EXPECT_THROW(read_fields(dir / "t.fields"), std::runtime_error);
}

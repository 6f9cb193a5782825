#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rfm/core/feature_family.hpp"
#include "rfm/core/rfm.hpp"
#include "rfm/field/field.hpp"

namespace rfm::kernel {

// Brownian bridge, scalar setting.

/// phi(x; theta) = sum_j theta_j (j pi)^-1 sqrt(2) sin(j pi x), j = 1..J.
struct BrownianBridgeFeature {
  Eigen::VectorXd theta;

  int modes() const { return static_cast<int>(theta.size()); }
  static BrownianBridgeFeature sample(int modes, std::mt19937_64& rng);
  /// Exactly 0 at x = 0 and x = 1.
  double operator()(double x) const;
};

/// Feature values on the nodes of a 1D non-periodic grid; the endpoints are
/// exact zeros.
Field bb_feature_eval(const BrownianBridgeFeature& f, const Grid& grid);

/// Truncation used when none is given: the highest sine a K-point grid
/// distinguishes from zero, K - 2.
int bb_default_modes(const Grid& grid);

/// min(x, x') - x x'. Throws std::out_of_range outside [0, 1].
double bb_kernel_exact(double x, double xp);

/// modes x m matrix of independent N(0,1) draws, column j from sample_rng(seed, j).
Eigen::MatrixXd bb_draw_thetas(int modes, std::size_t m, std::uint64_t seed);

/// |xs| x m matrix of phi(xs_i; theta_j).
Eigen::MatrixXd bb_feature_matrix(const Eigen::MatrixXd& thetas, std::span<const double> xs);

/// k^(m)(x, x') = (1/m) sum_j phi(x; theta_j) phi(x'; theta_j) on xs x xs.
Eigen::MatrixXd bb_empirical_kernel(const Eigen::MatrixXd& thetas, std::span<const double> xs);

/// sup over xs x xs of |k^(m) - k|.
double bb_kernel_deviation(const Eigen::MatrixXd& thetas, std::span<const double> xs);

/// (1/m) sum_j c_j phi(x; theta_j) at each x.
Eigen::VectorXd monte_carlo_project_scalar(const Eigen::VectorXd& c, const Eigen::MatrixXd& thetas,
                                           std::span<const double> xs);

enum class ScalarSolve { primal, dual };

/// Scalar RFM trained on (x_i, y_i) with the squared loss. `primal` solves
/// the m x m normal equations; `dual` solves the equivalent n x n system,
/// which gives the same minimum-norm coefficients and is cheap when m >> n.
struct ScalarRfm {
  Eigen::MatrixXd thetas;
  Eigen::VectorXd coeffs;

  Eigen::VectorXd predict(std::span<const double> xs) const;
};

ScalarRfm train_scalar_bb(const Eigen::MatrixXd& thetas, std::span<const double> x,
                          const Eigen::VectorXd& y, double lambda, ScalarSolve solve);

/// Kernel interpolant sum_i k(., x_i) beta_i with the exact bridge kernel.
Eigen::VectorXd bb_kernel_interpolant(std::span<const double> x, const Eigen::VectorXd& y,
                                      std::span<const double> xs);

// Brownian bridge, operator setting.

/// phi(a; theta) = b_theta * a pointwise, b_theta a bridge draw. Linear in a,
/// used for small exact checks of the operator-valued theory.
class BrownianBridgeFamily final : public FeatureFamily {
 public:
  explicit BrownianBridgeFamily(Eigen::MatrixXd thetas);
  static std::shared_ptr<BrownianBridgeFamily> sample(int modes, std::size_t m, std::uint64_t seed);
  static std::shared_ptr<BrownianBridgeFamily> from_record(const FamilyRecord& rec);

  FeatureKind kind() const override { return FeatureKind::brownian_bridge; }
  std::size_t size() const override { return static_cast<std::size_t>(thetas_.cols()); }
  void check_grid(const Grid& grid) const override;
  Eigen::MatrixXd evaluate_all(const Field& a) const override;
  FamilyPtr permuted(std::span<const std::size_t> perm) const override;
  FamilyRecord record() const override;

  const Eigen::MatrixXd& thetas() const { return thetas_; }

 private:
  Eigen::MatrixXd thetas_;
};

// Empirical operator-valued kernel.

/// k^(m)(a, a') y = (1/m) sum_j <phi(a'; theta_j), y> phi(a; theta_j).
class EmpiricalKernelEval {
 public:
  explicit EmpiricalKernelEval(FamilyPtr family);

  const FeatureFamily& family() const { return *family_; }
  /// K x K matrix acting on nodal values of y (trapezoid weights included).
  Eigen::MatrixXd matrix(const Field& a, const Field& ap) const;

 private:
  FamilyPtr family_;
};

Field empirical_kernel_apply(const EmpiricalKernelEval& ek, const Field& a, const Field& ap, const Field& y);

/// F(a) = sum_j k^(m)(a, a_j) beta_j.
class KernelRidgePredictor {
 public:
  KernelRidgePredictor(EmpiricalKernelEval ek, std::vector<Field> inputs, std::vector<Field> betas);
  Field operator()(const Field& a) const;
  const std::vector<Field>& betas() const { return betas_; }

 private:
  EmpiricalKernelEval ek_;
  std::vector<Field> inputs_;
  std::vector<Field> betas_;
};

/// Largest n * K the representer solve accepts.
inline constexpr std::size_t kOracleLimit = 200000;

/// Solves (K + lambda I) beta = Y for the block operator K_il = k^(m)(a_i, a_l),
/// with a pseudoinverse at lambda = 0. Throws std::invalid_argument when
/// n * K exceeds kOracleLimit.
KernelRidgePredictor kernel_ridge_oracle(const EmpiricalKernelEval& ek, const Dataset& data, double lambda);

/// The map a -> (1/m) sum_j c_j phi(a; theta_j).
class MonteCarloProjection {
 public:
  MonteCarloProjection(FamilyPtr family, Eigen::VectorXd c);
  Field operator()(const Field& a) const;

 private:
  FamilyPtr family_;
  Eigen::VectorXd c_;
};

MonteCarloProjection monte_carlo_project(const Eigen::VectorXd& c, FamilyPtr family);

/// The integral operators of the theory under the empirical measures
/// nu = (1/n) sum delta_{a_i} and mu = (1/m) sum delta_{theta_j}, acting on
/// stacked nodal values (nK) and on coefficient vectors (m):
///   A c    = (1/m) sum_j c_j phi(a_i; theta_j)
///   A* F   = (1/n) sum_i <F_i, phi(a_i; theta_j)>
///   T F    = (1/n) sum_l k^(m)(a_i, a_l) F_l
struct IntegralOperators {
  Eigen::MatrixXd a;
  Eigen::MatrixXd a_star;
  Eigen::MatrixXd t;
};

IntegralOperators assemble_integral_operators(const EmpiricalKernelEval& ek, const std::vector<Field>& inputs);

// Small reference instances.

/// One input a = 1 + sum_{k<=4} xi_k sin(k pi x) / (2k) on an interval grid
/// and its output y solving -y'' = a, y(0) = y(1) = 0 (three-point stencil).
std::pair<Field, Field> bb_operator_sample(const Grid& grid, std::mt19937_64& rng);
Dataset bb_operator_dataset(std::size_t n, std::size_t points, std::uint64_t seed);

/// Largest pointwise gap between the RFM trained by the normal equations
/// and the kernel ridge oracle over k^(m), on held-out inputs.
double ridge_equivalence_gap(std::size_t m, std::size_t n, std::size_t points, double lambda, std::uint64_t seed);

struct KernelConvergence {
  std::vector<std::size_t> ms;
  std::vector<double> deviations;
  double slope = 0.0;
};

/// Sup deviation of the empirical bridge kernel on the pairs x_i = i/17,
/// i = 1..16, for each m, and the least-squares log-log slope.
KernelConvergence bb_kernel_convergence(const std::vector<std::size_t>& ms, int modes, std::uint64_t seed);

/// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace rfm::kernel

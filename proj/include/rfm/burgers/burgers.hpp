#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rfm/core/feature_family.hpp"
#include "rfm/core/rfm.hpp"
#include "rfm/field/field.hpp"
#include "rfm/grf/grf.hpp"

namespace rfm::burgers {

/// u_t + (u^2/2)_x = viscosity * u_xx on the periodic unit interval, f = 0.
struct BurgersProblem {
  double viscosity = 1e-2;
  double final_time = 1.0;

  void validate() const;
};

/// dt = min(0.5 / K, 0.01), shrunk so `horizon` is an integer number of steps.
double default_time_step(const Grid& grid, double horizon);

/// u(T) by Fourier pseudospectral discretization in space and integrating
/// factor RK4 in time, 2/3-rule dealiasing on the quadratic term.
/// Throws std::runtime_error naming the time if the solution blows up.
Field burgers_solve(const BurgersProblem& problem, const Field& a, double dt);

/// Solution at each requested time (ascending, each a multiple of dt).
std::vector<Field> burgers_solve_snapshots(const BurgersProblem& problem, const Field& a, double dt,
                                           std::span<const double> times);

/// sigma_chi(2 pi |k| delta) with sigma_chi(r) = max(0, min(2r, (r + 1/2)^-beta)).
double filter_chi(int k, double delta, double beta);

/// Exponential linear unit.
inline double elu(double r) { return r >= 0.0 ? r : std::expm1(r); }

struct FourierFeatureSpec {
  double delta = 0.0025;
  double beta = 4.0;
  grf::GrfSpec theta_measure{5.0, 2.0, grf::GrfBoundary::periodic_1d, 0};
  /// Highest wavenumber stored for each theta.
  int theta_modes = 512;
  /// Multiplies the filtered convolution before the activation. With the
  /// mean-normalized transform the convolution is O(1e-3) and ELU would act
  /// almost linearly; a fixed gain keeps features resolution independent.
  double gain = 1024.0;

  void validate() const;
};

/// ELU(gain * F^-1(chi * F a * F theta)) with theta given on a's grid.
Field fourier_feature(const Field& a, const Field& theta, const FourierFeatureSpec& spec);

/// Fourier space random features. Each theta_j is kept as its KL
/// coefficients, so features evaluate on any periodic grid; wavenumbers a
/// grid cannot resolve are dropped.
class FourierFeatureFamily final : public FeatureFamily {
 public:
  FourierFeatureFamily(FourierFeatureSpec spec, Eigen::MatrixXd thetas);

  /// m draws theta_j ~ N(0, C') from `seed`.
  static std::shared_ptr<FourierFeatureFamily> sample(const FourierFeatureSpec& spec, std::size_t m,
                                                      std::uint64_t seed);
  static std::shared_ptr<FourierFeatureFamily> from_record(const FamilyRecord& rec);

  FeatureKind kind() const override { return FeatureKind::fourier_burgers; }
  std::size_t size() const override { return static_cast<std::size_t>(thetas_.cols()); }
  void check_grid(const Grid& grid) const override;
  Eigen::MatrixXd evaluate_all(const Field& a) const override;
  FamilyPtr permuted(std::span<const std::size_t> perm) const override;
  FamilyRecord record() const override;

  const FourierFeatureSpec& spec() const { return spec_; }
  const Eigen::MatrixXd& thetas() const { return thetas_; }
  /// theta_j as KL coefficients.
  grf::KlCoefficients theta(std::size_t j) const;

 private:
  FourierFeatureSpec spec_;
  Eigen::MatrixXd thetas_;        // 2 * theta_modes x m
  Eigen::MatrixXcd theta_hat_;    // theta_modes x m, row k-1 holds wavenumber k
  Eigen::VectorXd chi_;           // chi(k), k = 0..theta_modes
};

/// The model applied j times, each output fed back as the next input.
Field semigroup_compose_eval(const TrainedModel& model, const Field& a, int j);

}  // namespace rfm::burgers

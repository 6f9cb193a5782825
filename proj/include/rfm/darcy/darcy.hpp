#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <span>

#include <Eigen/Core>

#include "rfm/core/feature_family.hpp"
#include "rfm/field/field.hpp"
#include "rfm/grf/grf.hpp"

namespace rfm::darcy {

/// -div(a grad u) = f on the unit square, u = 0 on the boundary.
struct DarcyProblem {
  double source = 1.0;
};

/// Conservative 5-point finite differences with harmonic means of adjacent
/// node values on the faces. Throws std::invalid_argument for non-positive a
/// or a grid that is not a Dirichlet square.
Field darcy_solve_fd(const DarcyProblem& problem, const Field& a);

/// Same solver with a general right-hand side field (interior values used).
Field darcy_solve_fd(const Field& a, const Field& f);

/// Applies the discrete Darcy operator to v (interior rows; boundary rows
/// return 0). v is treated as zero on the boundary.
Field darcy_apply(const Field& a, const Field& v);

/// Solves -Lap p = rhs for the 5-point Laplacian with p = 0 on the boundary
/// using a 2D sine transform. Only interior values of rhs are read.
Field fast_poisson_dirichlet(const Field& rhs);

struct HeatSmoothing {
  double eta = 1e-4;
  double dt = 0.03;
  int steps = 34;
};

/// Explicit heat steps with reflecting (Neumann) boundaries. Throws
/// std::invalid_argument when eta * dt / h^2 exceeds 1/4.
Field smooth_coefficient_heat(const Field& a, const HeatSmoothing& smoothing);

struct SigmoidParams {
  double s_plus = 1.0 / 12.0;
  double s_minus = -1.0 / 3.0;
  double delta = 0.15;
};

double sigma_gamma(double r, const SigmoidParams& gamma);

/// Centered-difference gradient; one-sided on the boundary ring.
std::pair<Field, Field> gradient(const Field& u);

struct PredictorCorrectorSpec {
  SigmoidParams gamma;
  grf::GrfSpec theta_measure{7.5, 2.0, grf::GrfBoundary::neumann_2d, 0};
  /// Wavenumbers per axis stored for each theta.
  int theta_modes = 32;
  HeatSmoothing smoothing;
  double source = 1.0;
  /// When false both sigmoid terms are dropped (the deterministic surrogate).
  bool use_theta = true;

  void validate() const;
};

/// p1 of the predictor-corrector pair for thetas given on a's grid.
Field predictor_corrector_feature(const Field& a, const Field& theta1, const Field& theta2,
                                  const PredictorCorrectorSpec& spec);

/// Predictor p0 (exposed for the corrector-improves-predictor check).
Field predictor_field(const Field& a, const Field& theta1, const PredictorCorrectorSpec& spec);

class PredictorCorrectorFamily final : public FeatureFamily {
 public:
  /// `thetas` holds theta1 coefficients in rows [0, L) and theta2 in [L, 2L)
  /// with L = (theta_modes + 1)^2.
  PredictorCorrectorFamily(PredictorCorrectorSpec spec, Eigen::MatrixXd thetas);

  static std::shared_ptr<PredictorCorrectorFamily> sample(const PredictorCorrectorSpec& spec,
                                                          std::size_t m, std::uint64_t seed);
  static std::shared_ptr<PredictorCorrectorFamily> from_record(const FamilyRecord& rec);

  FeatureKind kind() const override { return FeatureKind::predictor_corrector_darcy; }
  std::size_t size() const override { return static_cast<std::size_t>(thetas_.cols()); }
  void check_grid(const Grid& grid) const override;
  Eigen::MatrixXd evaluate_all(const Field& a) const override;
  FamilyPtr permuted(std::span<const std::size_t> perm) const override;
  FamilyRecord record() const override;

  const PredictorCorrectorSpec& spec() const { return spec_; }
  grf::KlCoefficients theta(std::size_t j, int which) const;

 private:
  // Poisson solves of sigma(theta1_j) and sigma(theta2_j) on one grid.
  struct GridCache {
    Eigen::MatrixXd q1;
    Eigen::MatrixXd q2;
  };
  // Only the most recent grid is kept; at r=129 and m=512 one entry is
  // already about 140 MB.
  std::shared_ptr<const GridCache> cache_for(const Grid& grid) const;

  PredictorCorrectorSpec spec_;
  Eigen::MatrixXd thetas_;
  mutable std::mutex cache_mutex_;
  mutable std::size_t cached_points_ = 0;
  mutable std::shared_ptr<const GridCache> cache_;
};

}  // namespace rfm::darcy

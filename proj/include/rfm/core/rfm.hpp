#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rfm/core/feature_family.hpp"
#include "rfm/field/field.hpp"

namespace rfm {

/// Input-output pairs (a_i, y_i = F(a_i)) on a common grid.
struct Dataset {
  Grid grid;
  std::vector<Field> inputs;
  std::vector<Field> outputs;
  std::map<std::string, std::string> provenance;

  std::size_t size() const { return inputs.size(); }
  /// Throws std::invalid_argument on length or grid mismatches.
  void validate() const;
};

/// Gram matrix and right-hand side of the RFM normal equations
///   (gram + lambda I) alpha = rhs,
///   gram[i,l] = (1/m) sum_j <phi(a_j;theta_i), phi(a_j;theta_l)>,
///   rhs[l]    = sum_j <y_j, phi(a_j;theta_l)>.
struct NormalSystem {
  Eigen::MatrixXd gram;
  Eigen::VectorXd rhs;
};

/// Incremental assembly from per-sample feature blocks. Only the lower
/// triangle is accumulated; finish() mirrors it so the result is exactly
/// symmetric.
class NormalSystemBuilder {
 public:
  explicit NormalSystemBuilder(std::size_t m);

  /// `features` is K x m (column l = phi(a_j; theta_l)), `y` the output on
  /// the same K nodes and `weights` the quadrature weights.
  void add(const Eigen::MatrixXd& features, const Eigen::VectorXd& y,
           const Eigen::VectorXd& weights);
  /// Adds a stack of pre-weighted blocks in one rank update.
  void add_weighted(const Eigen::MatrixXd& weighted_features, const Eigen::VectorXd& weighted_y);

  NormalSystem finish() const;

 private:
  std::size_t m_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd rhs_;
};

/// Evaluates every feature at every training input and assembles the normal
/// equations. Throws std::runtime_error naming (sample, feature) if any
/// feature value is non-finite.
NormalSystem assemble_normal_system(const FeatureFamily& family, const Dataset& data);

struct SolverDiagnostics {
  /// ||(gram + lambda I) alpha - rhs|| / ||rhs||.
  double relative_residual = 0.0;
  /// Number of singular values kept (lambda == 0) or m.
  std::size_t rank = 0;
  double sigma_max = 0.0;
  double cutoff = 0.0;
  std::string method;
};

struct RidgeSolution {
  Eigen::VectorXd coeffs;
  SolverDiagnostics diagnostics;
};

/// Singular value cutoff used for lambda == 0: m * machine epsilon * sigma_max.
double pseudoinverse_cutoff(std::size_t m, double sigma_max);

/// lambda > 0: solves (gram + lambda I) alpha = rhs. lambda == 0: minimum
/// norm least-squares solution through a truncated SVD of the symmetric gram.
/// Throws std::invalid_argument for non-square, non-symmetric or negative
/// lambda input.
RidgeSolution solve_ridge(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs, double lambda);

struct TrainingMetadata {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  SolverDiagnostics solver;
  double assemble_seconds = 0.0;
  double solve_seconds = 0.0;
};

/// Frozen feature family plus learned coefficients.
class TrainedModel {
 public:
  TrainedModel(FamilyPtr family, Eigen::VectorXd coeffs, double ridge, Grid train_grid,
               TrainingMetadata meta = {});

  const FeatureFamily& family() const { return *family_; }
  const FamilyPtr& family_ptr() const { return family_; }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  double ridge() const { return ridge_; }
  const Grid& train_grid() const { return train_grid_; }
  const TrainingMetadata& metadata() const { return meta_; }

 private:
  FamilyPtr family_;
  Eigen::VectorXd coeffs_;
  double ridge_;
  Grid train_grid_;
  TrainingMetadata meta_;
};

TrainedModel train(FamilyPtr family, const Dataset& data, double lambda, std::uint64_t seed = 0);

/// (1/m) sum_j alpha_j phi(a; theta_j) on a's grid.
Field predict(const TrainedModel& model, const Field& a);
Field predict(const FeatureFamily& family, const Eigen::VectorXd& coeffs, const Field& a);

/// Mean relative L2 error of the model over the test pairs.
double expected_relative_test_error(const TrainedModel& model, const Dataset& test);

/// sum_j 0.5 ||y_j - F_m(a_j; alpha)||^2 + lambda/(2m) ||alpha||^2.
double empirical_objective(const FeatureFamily& family, const Eigen::VectorXd& coeffs,
                           const Dataset& data, double lambda);

}  // namespace rfm

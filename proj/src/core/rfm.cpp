#include "rfm/core/rfm.hpp"

#include <chrono>
#include <exception>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "rfm/core/parallel.hpp"
#include "rfm/field/quadrature.hpp"

namespace rfm {

namespace {

constexpr std::size_t kChunk = 8;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void require_finite_features(const Eigen::MatrixXd& phi, std::size_t sample) {
  if (phi.allFinite()) return;
  for (Eigen::Index l = 0; l < phi.cols(); ++l) {
    if (!phi.col(l).allFinite()) {
      std::ostringstream os;
      os << "non-finite feature value for sample j=" << sample << ", feature l=" << l;
      throw std::runtime_error(os.str());
    }
  }
}

}  // namespace

void Dataset::validate() const {
  if (inputs.size() != outputs.size())
    throw std::invalid_argument("dataset has mismatched input/output counts");
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    require_same_grid(grid, inputs[i].grid(), "dataset input");
    require_same_grid(grid, outputs[i].grid(), "dataset output");
  }
}

NormalSystemBuilder::NormalSystemBuilder(std::size_t m)
    : m_(m),
      gram_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m))),
      rhs_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m))) {
  if (m == 0) throw std::invalid_argument("feature count must be positive");
}

void NormalSystemBuilder::add(const Eigen::MatrixXd& features, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& weights) {
  const Eigen::VectorXd sw = weights.cwiseSqrt();
  add_weighted(sw.asDiagonal() * features, sw.cwiseProduct(y));
}

void NormalSystemBuilder::add_weighted(const Eigen::MatrixXd& wf, const Eigen::VectorXd& wy) {
  if (static_cast<std::size_t>(wf.cols()) != m_ || wf.rows() != wy.size())
    throw std::invalid_argument("feature block has the wrong shape");
  gram_.selfadjointView<Eigen::Lower>().rankUpdate(wf.transpose());
  rhs_.noalias() += wf.transpose() * wy;
}

NormalSystem NormalSystemBuilder::finish() const {
  NormalSystem s{gram_, rhs_};
  s.gram = s.gram.triangularView<Eigen::Lower>();
  s.gram.triangularView<Eigen::StrictlyUpper>() = s.gram.transpose();
  s.gram /= static_cast<double>(m_);
  return s;
}

NormalSystem assemble_normal_system(const FeatureFamily& family, const Dataset& data) {
  data.validate();
  if (data.size() == 0) throw std::invalid_argument("cannot assemble from an empty dataset");
  family.check_grid(data.grid);
  const std::size_t m = family.size();
  const auto k = static_cast<Eigen::Index>(data.grid.size());
  const Eigen::VectorXd sw = quadrature_weights(data.grid).cwiseSqrt();

  NormalSystemBuilder builder(m);
  for (std::size_t start = 0; start < data.size(); start += kChunk) {
    const std::size_t count = std::min(kChunk, data.size() - start);
    Eigen::MatrixXd stacked(k * static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(m));
    Eigen::VectorXd ys(k * static_cast<Eigen::Index>(count));
    // Each sample writes its own rows; the rank update below runs in a fixed
    // order, so results do not depend on the thread count.
    FirstError err;
#pragma omp parallel for schedule(dynamic)
    for (std::size_t c = 0; c < count; ++c) {
      err.run([&] {
        const std::size_t j = start + c;
        Eigen::MatrixXd phi = family.evaluate_all(data.inputs[j]);
        require_finite_features(phi, j);
        const auto row = static_cast<Eigen::Index>(c) * k;
        stacked.middleRows(row, k) = sw.asDiagonal() * phi;
        ys.segment(row, k) = sw.cwiseProduct(data.outputs[j].values());
      });
    }
    err.rethrow();
    builder.add_weighted(stacked, ys);
  }
  return builder.finish();
}

double pseudoinverse_cutoff(std::size_t m, double sigma_max) {
  return static_cast<double>(m) * std::numeric_limits<double>::epsilon() * sigma_max;
}

RidgeSolution solve_ridge(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs, double lambda) {
  if (gram.rows() != gram.cols() || gram.rows() != rhs.size())
    throw std::invalid_argument("solve_ridge: gram must be square and match rhs");
  if (!(lambda >= 0.0)) throw std::invalid_argument("solve_ridge: lambda must be >= 0");
  const double scale = gram.cwiseAbs().maxCoeff();
  if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1e-300))
    throw std::invalid_argument("solve_ridge: gram is not symmetric");
  const auto m = static_cast<std::size_t>(gram.rows());

  RidgeSolution out;
  if (lambda > 0.0) {
    Eigen::MatrixXd a = gram;
    a.diagonal().array() += lambda;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    if (ldlt.info() != Eigen::Success) throw std::runtime_error("solve_ridge: LDLT failed");
    out.coeffs = ldlt.solve(rhs);
    // Two refinement sweeps tighten the residual on ill-conditioned grams.
    for (int it = 0; it < 2; ++it) out.coeffs += ldlt.solve(rhs - a * out.coeffs);
    out.diagnostics.rank = m;
    out.diagnostics.method = "ldlt";
    out.diagnostics.sigma_max = scale;
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success) throw std::runtime_error("solve_ridge: eigensolver failed");
    // For a symmetric matrix the singular values are |eigenvalues|.
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const double sigma_max = ev.cwiseAbs().maxCoeff();
    const double cutoff = pseudoinverse_cutoff(m, sigma_max);
    Eigen::VectorXd proj = eig.eigenvectors().transpose() * rhs;
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      if (std::abs(ev[i]) > cutoff) {
        proj[i] /= ev[i];
        ++rank;
      } else {
        proj[i] = 0.0;
      }
    }
    out.coeffs = eig.eigenvectors() * proj;
    out.diagnostics.rank = rank;
    out.diagnostics.sigma_max = sigma_max;
    out.diagnostics.cutoff = cutoff;
    out.diagnostics.method = "truncated-svd";
  }
  Eigen::VectorXd res = gram * out.coeffs + lambda * out.coeffs - rhs;
  const double rn = rhs.norm();
  out.diagnostics.relative_residual = rn > 0.0 ? res.norm() / rn : res.norm();
  if (!out.coeffs.allFinite()) throw std::runtime_error("solve_ridge: non-finite coefficients");
  return out;
}

TrainedModel::TrainedModel(FamilyPtr family, Eigen::VectorXd coeffs, double ridge,
                           Grid train_grid, TrainingMetadata meta)
    : family_(std::move(family)),
      coeffs_(std::move(coeffs)),
      ridge_(ridge),
      train_grid_(train_grid),
      meta_(std::move(meta)) {
  if (!family_) throw std::invalid_argument("trained model needs a feature family");
  if (static_cast<std::size_t>(coeffs_.size()) != family_->size())
    throw std::invalid_argument("coefficient count does not match feature count");
  if (!coeffs_.allFinite()) throw std::invalid_argument("coefficients must be finite");
  if (!(ridge_ >= 0.0)) throw std::invalid_argument("ridge must be >= 0");
}

TrainedModel train(FamilyPtr family, const Dataset& data, double lambda, std::uint64_t seed) {
  if (!family) throw std::invalid_argument("train: null family");
  TrainingMetadata meta;
  meta.n = data.size();
  meta.seed = seed;
  auto t0 = std::chrono::steady_clock::now();
  const NormalSystem sys = assemble_normal_system(*family, data);
  meta.assemble_seconds = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  RidgeSolution sol = solve_ridge(sys.gram, sys.rhs, lambda);
  meta.solve_seconds = seconds_since(t0);
  meta.solver = sol.diagnostics;
  return TrainedModel(std::move(family), std::move(sol.coeffs), lambda, data.grid, std::move(meta));
}

Field predict(const FeatureFamily& family, const Eigen::VectorXd& coeffs, const Field& a) {
  if (static_cast<std::size_t>(coeffs.size()) != family.size())
    throw std::invalid_argument("predict: coefficient count does not match feature count");
  family.check_grid(a.grid());
  Eigen::VectorXd v = family.evaluate_all(a) * coeffs;
  v /= static_cast<double>(family.size());
  return Field(a.grid(), std::move(v));
}

Field predict(const TrainedModel& model, const Field& a) {
  return predict(model.family(), model.coeffs(), a);
}

double expected_relative_test_error(const TrainedModel& model, const Dataset& test) {
  test.validate();
  if (test.size() == 0) throw std::invalid_argument("expected_relative_test_error: empty test set");
  std::vector<double> errs(test.size());
  FirstError err;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t j = 0; j < test.size(); ++j)
    err.run([&] { errs[j] = relative_l2_error(test.outputs[j], predict(model, test.inputs[j])); });
  err.rethrow();
  double sum = 0.0;
  for (double e : errs) sum += e;
  return sum / static_cast<double>(test.size());
}

double empirical_objective(const FeatureFamily& family, const Eigen::VectorXd& coeffs,
                           const Dataset& data, double lambda) {
  data.validate();
  double total = 0.0;
  for (std::size_t j = 0; j < data.size(); ++j) {
    const double r = norm_l2(data.outputs[j] - predict(family, coeffs, data.inputs[j]));
    total += 0.5 * r * r;
  }
  return total + lambda / (2.0 * static_cast<double>(family.size())) * coeffs.squaredNorm();
}

}  // namespace rfm

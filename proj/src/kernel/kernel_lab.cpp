#include "rfm/kernel/kernel_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "rfm/field/quadrature.hpp"
#include "rfm/grf/grf.hpp"

namespace rfm::kernel {

using std::numbers::pi;

namespace {

// sqrt(2)/(j pi) sin(j pi x) for j = 1..modes, with exact zeros at 0 and 1.
Eigen::VectorXd bb_basis(double x, int modes) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(modes);
  if (x == 0.0 || x == 1.0) return b;
  for (int j = 1; j <= modes; ++j) b[j - 1] = std::sqrt(2.0) / (j * pi) * std::sin(j * pi * x);
  return b;
}

// Basis on grid nodes x_i = i/N via exact index reduction, so sin(j pi) is 0.
Eigen::MatrixXd bb_grid_basis(const Grid& grid, int modes) {
  const auto n = static_cast<long>(grid.points_per_axis() - 1);
  Eigen::MatrixXd b(static_cast<Eigen::Index>(n + 1), modes);
  for (long i = 0; i <= n; ++i) {
    for (int j = 1; j <= modes; ++j) {
      const long q = (static_cast<long>(j) * i) % (2 * n);
      const double s = (q == 0 || q == n) ? 0.0 : std::sin(pi * static_cast<double>(q) / static_cast<double>(n));
      b(i, j - 1) = std::sqrt(2.0) / (j * pi) * s;
    }
  }
  return b;
}

void require_interval(const Grid& grid, const char* what) {
  if (grid.dim() != 1 || grid.is_periodic()) {
    std::ostringstream os;
    os << what << ": needs a 1D non-periodic grid, got " << grid.describe();
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

BrownianBridgeFeature BrownianBridgeFeature::sample(int modes, std::mt19937_64& rng) {
  if (modes < 1) throw std::invalid_argument("Brownian bridge needs at least one mode");
  std::normal_distribution<double> normal(0.0, 1.0);
  BrownianBridgeFeature f{Eigen::VectorXd(modes)};
  for (int j = 0; j < modes; ++j) f.theta[j] = normal(rng);
  return f;
}

double BrownianBridgeFeature::operator()(double x) const { return bb_basis(x, modes()).dot(theta); }

int bb_default_modes(const Grid& grid) {
  require_interval(grid, "bb_default_modes");
  return static_cast<int>(grid.points_per_axis()) - 2;
}

Field bb_feature_eval(const BrownianBridgeFeature& f, const Grid& grid) {
  require_interval(grid, "bb_feature_eval");
  return Field(grid, bb_grid_basis(grid, f.modes()) * f.theta);
}

double bb_kernel_exact(double x, double xp) {
  if (!(x >= 0.0 && x <= 1.0 && xp >= 0.0 && xp <= 1.0))
    throw std::out_of_range("bb_kernel_exact: arguments must lie in [0, 1]");
  return std::min(x, xp) - x * xp;
}

Eigen::MatrixXd bb_draw_thetas(int modes, std::size_t m, std::uint64_t seed) {
  Eigen::MatrixXd t(modes, static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) {
    auto rng = grf::sample_rng(seed, j);
    t.col(static_cast<Eigen::Index>(j)) = BrownianBridgeFeature::sample(modes, rng).theta;
  }
  return t;
}

Eigen::MatrixXd bb_feature_matrix(const Eigen::MatrixXd& thetas, std::span<const double> xs) {
  const auto modes = static_cast<int>(thetas.rows());
  Eigen::MatrixXd basis(static_cast<Eigen::Index>(xs.size()), modes);
  for (std::size_t i = 0; i < xs.size(); ++i) basis.row(static_cast<Eigen::Index>(i)) = bb_basis(xs[i], modes).transpose();
  return basis * thetas;
}

Eigen::MatrixXd bb_empirical_kernel(const Eigen::MatrixXd& thetas, std::span<const double> xs) {
  const Eigen::MatrixXd phi = bb_feature_matrix(thetas, xs);
  return phi * phi.transpose() / static_cast<double>(thetas.cols());
}

double bb_kernel_deviation(const Eigen::MatrixXd& thetas, std::span<const double> xs) {
  const Eigen::MatrixXd k = bb_empirical_kernel(thetas, xs);
  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t l = 0; l < xs.size(); ++l)
      worst = std::max(worst, std::abs(k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) -
                                       bb_kernel_exact(xs[i], xs[l])));
  return worst;
}

Eigen::VectorXd monte_carlo_project_scalar(const Eigen::VectorXd& c, const Eigen::MatrixXd& thetas,
                                           std::span<const double> xs) {
  if (c.size() != thetas.cols()) throw std::invalid_argument("coefficient count does not match feature count");
  return bb_feature_matrix(thetas, xs) * c / static_cast<double>(thetas.cols());
}

Eigen::VectorXd ScalarRfm::predict(std::span<const double> xs) const {
  return monte_carlo_project_scalar(coeffs, thetas, xs);
}

ScalarRfm train_scalar_bb(const Eigen::MatrixXd& thetas, std::span<const double> x,
                          const Eigen::VectorXd& y, double lambda, ScalarSolve solve) {
  if (static_cast<Eigen::Index>(x.size()) != y.size() || x.empty())
    throw std::invalid_argument("train_scalar_bb: need matching nonempty x and y");
  const Eigen::MatrixXd phi = bb_feature_matrix(thetas, x);  // n x m
  const double m = static_cast<double>(thetas.cols());
  ScalarRfm out{thetas, {}};
  if (solve == ScalarSolve::primal) {
    NormalSystemBuilder builder(static_cast<std::size_t>(thetas.cols()));
    builder.add_weighted(phi, y);
    const NormalSystem sys = builder.finish();
    out.coeffs = solve_ridge(sys.gram, sys.rhs, lambda).coeffs;
  } else {
    // alpha = phi^T gamma with (phi phi^T / m + lambda I) gamma = y has the
    // same predictions and lies in the row space of phi, so at lambda = 0 it
    // is the minimum-norm solution.
    Eigen::MatrixXd g = phi * phi.transpose() / m;
    g = 0.5 * (g + g.transpose()).eval();
    out.coeffs = phi.transpose() * solve_ridge(g, y, lambda).coeffs;
  }
  return out;
}

Eigen::VectorXd bb_kernel_interpolant(std::span<const double> x, const Eigen::VectorXd& y,
                                      std::span<const double> xs) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index l = 0; l < n; ++l) k(i, l) = bb_kernel_exact(x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(l)]);
  const Eigen::VectorXd beta = k.ldlt().solve(y);
  Eigen::VectorXd out(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t s = 0; s < xs.size(); ++s) {
    double v = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) v += bb_kernel_exact(xs[s], x[static_cast<std::size_t>(i)]) * beta[i];
    out[static_cast<Eigen::Index>(s)] = v;
  }
  return out;
}

BrownianBridgeFamily::BrownianBridgeFamily(Eigen::MatrixXd thetas) : thetas_(std::move(thetas)) {
  if (thetas_.rows() < 1 || thetas_.cols() < 1) throw std::invalid_argument("bridge family needs modes >= 1 and m >= 1");
}

std::shared_ptr<BrownianBridgeFamily> BrownianBridgeFamily::sample(int modes, std::size_t m, std::uint64_t seed) {
  return std::make_shared<BrownianBridgeFamily>(bb_draw_thetas(modes, m, seed));
}

std::shared_ptr<BrownianBridgeFamily> BrownianBridgeFamily::from_record(const FamilyRecord& rec) {
  if (rec.kind != to_string(FeatureKind::brownian_bridge))
    throw std::invalid_argument("record is not a brownian-bridge family");
  return std::make_shared<BrownianBridgeFamily>(rec.block("theta"));
}

void BrownianBridgeFamily::check_grid(const Grid& grid) const { require_interval(grid, "Brownian bridge features"); }

Eigen::MatrixXd BrownianBridgeFamily::evaluate_all(const Field& a) const {
  check_grid(a.grid());
  return a.values().asDiagonal() * (bb_grid_basis(a.grid(), static_cast<int>(thetas_.rows())) * thetas_);
}

FamilyPtr BrownianBridgeFamily::permuted(std::span<const std::size_t> perm) const {
  return std::make_shared<BrownianBridgeFamily>(permute_columns(thetas_, perm));
}

FamilyRecord BrownianBridgeFamily::record() const {
  FamilyRecord rec;
  rec.kind = std::string(to_string(kind()));
  rec.hyper["modes"] = std::to_string(thetas_.rows());
  rec.blocks.push_back(NamedBlock{"theta", thetas_});
  return rec;
}

EmpiricalKernelEval::EmpiricalKernelEval(FamilyPtr family) : family_(std::move(family)) {
  if (!family_) throw std::invalid_argument("empirical kernel needs a feature family");
}

Eigen::MatrixXd EmpiricalKernelEval::matrix(const Field& a, const Field& ap) const {
  require_same_grid(a.grid(), ap.grid(), "empirical kernel");
  const Eigen::MatrixXd pa = family_->evaluate_all(a);
  const Eigen::MatrixXd pb = family_->evaluate_all(ap);
  const Eigen::VectorXd w = quadrature_weights(a.grid());
  return pa * (w.asDiagonal() * pb).transpose() / static_cast<double>(family_->size());
}

Field empirical_kernel_apply(const EmpiricalKernelEval& ek, const Field& a, const Field& ap, const Field& y) {
  require_same_grid(a.grid(), y.grid(), "empirical_kernel_apply");
  return Field(a.grid(), ek.matrix(a, ap) * y.values());
}

KernelRidgePredictor::KernelRidgePredictor(EmpiricalKernelEval ek, std::vector<Field> inputs, std::vector<Field> betas)
    : ek_(std::move(ek)), inputs_(std::move(inputs)), betas_(std::move(betas)) {
  if (inputs_.size() != betas_.size() || inputs_.empty())
    throw std::invalid_argument("kernel predictor needs one beta per input");
}

Field KernelRidgePredictor::operator()(const Field& a) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(a.size()));
  for (std::size_t l = 0; l < inputs_.size(); ++l) out += empirical_kernel_apply(ek_, a, inputs_[l], betas_[l]).values();
  return Field(a.grid(), std::move(out));
}

KernelRidgePredictor kernel_ridge_oracle(const EmpiricalKernelEval& ek, const Dataset& data, double lambda) {
  data.validate();
  const std::size_t n = data.size();
  const auto k = static_cast<Eigen::Index>(data.grid.size());
  if (n == 0) throw std::invalid_argument("kernel_ridge_oracle: empty dataset");
  if (n * static_cast<std::size_t>(k) > kOracleLimit) {
    std::ostringstream os;
    os << "kernel_ridge_oracle: n*K = " << n * static_cast<std::size_t>(k) << " exceeds the oracle limit " << kOracleLimit;
    throw std::invalid_argument(os.str());
  }
  const auto nk = static_cast<Eigen::Index>(n) * k;
  const Eigen::VectorXd sw = quadrature_weights(data.grid).cwiseSqrt();
  // Each block k(a_i, a_l) is self-adjoint only in the weighted inner
  // product, so solve with W^{1/2} K W^{-1/2}, which is symmetric.
  Eigen::MatrixXd s(nk, nk);
  Eigen::VectorXd rhs(nk);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ri = static_cast<Eigen::Index>(i) * k;
    rhs.segment(ri, k) = sw.cwiseProduct(data.outputs[i].values());
    for (std::size_t l = 0; l < n; ++l) {
      const auto rl = static_cast<Eigen::Index>(l) * k;
      s.block(ri, rl, k, k) = sw.asDiagonal() * ek.matrix(data.inputs[i], data.inputs[l]) * sw.cwiseInverse().asDiagonal();
    }
  }
  s = 0.5 * (s + s.transpose()).eval();
  const Eigen::VectorXd x = solve_ridge(s, rhs, lambda).coeffs;
  std::vector<Field> betas;
  betas.reserve(n);
  for (std::size_t l = 0; l < n; ++l)
    betas.emplace_back(data.grid, x.segment(static_cast<Eigen::Index>(l) * k, k).cwiseQuotient(sw));
  return KernelRidgePredictor(ek, data.inputs, std::move(betas));
}

MonteCarloProjection::MonteCarloProjection(FamilyPtr family, Eigen::VectorXd c)
    : family_(std::move(family)), c_(std::move(c)) {
  if (!family_ || static_cast<std::size_t>(c_.size()) != family_->size())
    throw std::invalid_argument("monte carlo projection needs one coefficient per feature");
}

Field MonteCarloProjection::operator()(const Field& a) const { return predict(*family_, c_, a); }

MonteCarloProjection monte_carlo_project(const Eigen::VectorXd& c, FamilyPtr family) {
  return MonteCarloProjection(std::move(family), c);
}

IntegralOperators assemble_integral_operators(const EmpiricalKernelEval& ek, const std::vector<Field>& inputs) {
  if (inputs.empty()) throw std::invalid_argument("integral operators need at least one input");
  const Grid& g = inputs.front().grid();
  const auto n = static_cast<Eigen::Index>(inputs.size());
  const auto k = static_cast<Eigen::Index>(g.size());
  const auto m = static_cast<Eigen::Index>(ek.family().size());
  const Eigen::VectorXd w = quadrature_weights(g);

  IntegralOperators ops{Eigen::MatrixXd(n * k, m), Eigen::MatrixXd(m, n * k), Eigen::MatrixXd(n * k, n * k)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::MatrixXd phi = ek.family().evaluate_all(inputs[static_cast<std::size_t>(i)]);
    ops.a.middleRows(i * k, k) = phi / static_cast<double>(m);
    ops.a_star.middleCols(i * k, k) = (w.asDiagonal() * phi).transpose() / static_cast<double>(n);
    for (Eigen::Index l = 0; l < n; ++l)
      ops.t.block(i * k, l * k, k, k) =
          ek.matrix(inputs[static_cast<std::size_t>(i)], inputs[static_cast<std::size_t>(l)]) / static_cast<double>(n);
  }
  return ops;
}

}  // namespace rfm::kernel

namespace rfm::kernel {

std::pair<Field, Field> bb_operator_sample(const Grid& grid, std::mt19937_64& rng) {
  require_interval(grid, "bb_operator_sample");
  std::normal_distribution<double> normal(0.0, 1.0);
  double xi[4];
  for (double& v : xi) v = normal(rng);
  const Field a = Field::from_function(grid, [&xi](double x) {
    double s = 1.0;
    for (int k = 1; k <= 4; ++k) s += xi[k - 1] * std::sin(k * pi * x) / (2.0 * k);
    return s;
  });
  // Thomas algorithm on the interior of -y'' = a.
  const auto n = static_cast<Eigen::Index>(grid.size()) - 2;
  const double h2 = grid.spacing() * grid.spacing();
  Eigen::VectorXd c(n), d(n);
  double prev_c = 0.0, prev_d = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double denom = 2.0 + prev_c;  // diagonal 2, off-diagonals -1
    c[i] = -1.0 / denom;
    d[i] = (h2 * a[static_cast<std::size_t>(i + 1)] + prev_d) / denom;
    prev_c = c[i];
    prev_d = d[i];
  }
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n + 2);
  for (Eigen::Index i = n - 1; i >= 0; --i) y[i + 1] = d[i] - c[i] * y[i + 2];
  return {a, Field(grid, std::move(y))};
}

Dataset bb_operator_dataset(std::size_t n, std::size_t points, std::uint64_t seed) {
  const Grid g = Grid::interval(points, Boundary::dirichlet);
  Dataset d{g, {}, {}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = grf::sample_rng(seed, i);
    auto [a, y] = bb_operator_sample(g, rng);
    d.inputs.push_back(std::move(a));
    d.outputs.push_back(std::move(y));
  }
  return d;
}

double ridge_equivalence_gap(std::size_t m, std::size_t n, std::size_t points, double lambda, std::uint64_t seed) {
  const Dataset data = bb_operator_dataset(n, points, seed);
  const Dataset held_out = bb_operator_dataset(8, points, seed + 1);
  const auto family = BrownianBridgeFamily::sample(bb_default_modes(data.grid), m, seed + 2);
  const TrainedModel model = train(family, data, lambda, seed);
  const KernelRidgePredictor oracle = kernel_ridge_oracle(EmpiricalKernelEval(family), data, lambda);
  double gap = 0.0;
  auto compare = [&](const Field& a) {
    gap = std::max(gap, (predict(model, a).values() - oracle(a).values()).cwiseAbs().maxCoeff());
  };
  for (const Field& a : data.inputs) compare(a);
  for (const Field& a : held_out.inputs) compare(a);
  return gap;
}

KernelConvergence bb_kernel_convergence(const std::vector<std::size_t>& ms, int modes, std::uint64_t seed) {
  std::vector<double> xs;
  for (int i = 1; i <= 16; ++i) xs.push_back(i / 17.0);
  KernelConvergence out;
  out.ms = ms;
  std::vector<double> mx;
  for (std::size_t m : ms) {
    out.deviations.push_back(bb_kernel_deviation(bb_draw_thetas(modes, m, seed), xs));
    mx.push_back(static_cast<double>(m));
  }
  out.slope = loglog_slope(mx, out.deviations);
  return out;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("loglog_slope: values must be positive");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace rfm::kernel

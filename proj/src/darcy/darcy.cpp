#include "rfm/darcy/darcy.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "rfm/core/model_io.hpp"
#include "rfm/field/spectral.hpp"

namespace rfm::darcy {

namespace {

void require_dirichlet_square(const Grid& g, const char* what) {
  if (g.dim() != 2 || g.boundary() != Boundary::dirichlet) {
    std::ostringstream os;
    os << what << ": needs a 2D Dirichlet grid, got " << g.describe();
    throw std::invalid_argument(os.str());
  }
}

double harmonic(double x, double y) { return 2.0 * x * y / (x + y); }

}  // namespace

Field darcy_solve_fd(const DarcyProblem& problem, const Field& a) {
  return darcy_solve_fd(a, Field::constant(a.grid(), problem.source));
}

Field darcy_solve_fd(const Field& a, const Field& f) {
  const Grid& g = a.grid();
  require_dirichlet_square(g, "darcy_solve_fd");
  require_same_grid(g, f.grid(), "darcy_solve_fd");
  if (a.values().minCoeff() <= 0.0) throw std::invalid_argument("darcy_solve_fd: coefficient must be positive");
  const int r = static_cast<int>(g.points_per_axis());
  const int n = r - 2;
  const double h2 = g.spacing() * g.spacing();
  auto node = [r](int i1, int i2) { return i2 * r + i1; };
  auto unknown = [n](int i1, int i2) { return (i2 - 1) * n + (i1 - 1); };

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(5 * n * n));
  Eigen::VectorXd b(n * n);
  for (int i2 = 1; i2 <= n; ++i2) {
    for (int i1 = 1; i1 <= n; ++i1) {
      const int row = unknown(i1, i2);
      const double ac = a[node(i1, i2)];
      const int nb[4][2] = {{i1 - 1, i2}, {i1 + 1, i2}, {i1, i2 - 1}, {i1, i2 + 1}};
      double diag = 0.0;
      for (const auto& q : nb) {
        const double face = harmonic(ac, a[node(q[0], q[1])]);
        diag += face;
        const bool interior = q[0] >= 1 && q[0] <= n && q[1] >= 1 && q[1] <= n;
        // Only the lower triangle is needed by the LDLT below.
        if (interior && unknown(q[0], q[1]) < row) trip.emplace_back(row, unknown(q[0], q[1]), -face);
      }
      trip.emplace_back(row, row, diag);
      b[row] = h2 * f[node(i1, i2)];
    }
  }
  Eigen::SparseMatrix<double> mat(n * n, n * n);
  mat.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> solver(mat);
  if (solver.info() != Eigen::Success) throw std::runtime_error("darcy_solve_fd: factorization failed");
  const Eigen::VectorXd x = solver.solve(b);

  Eigen::VectorXd u = Eigen::VectorXd::Zero(r * r);
  for (int i2 = 1; i2 <= n; ++i2)
    for (int i1 = 1; i1 <= n; ++i1) u[node(i1, i2)] = x[unknown(i1, i2)];
  return Field(g, std::move(u));
}

Field darcy_apply(const Field& a, const Field& v) {
  const Grid& g = a.grid();
  require_dirichlet_square(g, "darcy_apply");
  require_same_grid(g, v.grid(), "darcy_apply");
  const int r = static_cast<int>(g.points_per_axis());
  const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
  auto node = [r](int i1, int i2) { return i2 * r + i1; };
  auto val = [&](int i1, int i2) {
    return (i1 == 0 || i2 == 0 || i1 == r - 1 || i2 == r - 1) ? 0.0 : v[node(i1, i2)];
  };
  Eigen::VectorXd out = Eigen::VectorXd::Zero(r * r);
  for (int i2 = 1; i2 < r - 1; ++i2) {
    for (int i1 = 1; i1 < r - 1; ++i1) {
      const double ac = a[node(i1, i2)], uc = val(i1, i2);
      const int nb[4][2] = {{i1 - 1, i2}, {i1 + 1, i2}, {i1, i2 - 1}, {i1, i2 + 1}};
      double s = 0.0;
      for (const auto& q : nb) s += harmonic(ac, a[node(q[0], q[1])]) * (uc - val(q[0], q[1]));
      out[node(i1, i2)] = s * inv_h2;
    }
  }
  return Field(g, std::move(out));
}

Field fast_poisson_dirichlet(const Field& rhs) {
  const Grid& g = rhs.grid();
  require_dirichlet_square(g, "fast_poisson_dirichlet");
  const int r = static_cast<int>(g.points_per_axis());
  const int n = r - 2;
  const double h = g.spacing();
  Eigen::VectorXd w(n * n);
  for (int i2 = 0; i2 < n; ++i2)
    for (int i1 = 0; i1 < n; ++i1) w[i2 * n + i1] = rhs[static_cast<std::size_t>((i2 + 1) * r + i1 + 1)];
  dst1_2d(w, n);
  std::vector<double> lam(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double s = std::sin(std::numbers::pi * (k + 1) / (2.0 * (n + 1)));
    lam[static_cast<std::size_t>(k)] = 4.0 * s * s / (h * h);
  }
  // RODFT00 applied twice per axis multiplies by 2(n+1).
  const double norm = 1.0 / (4.0 * (n + 1.0) * (n + 1.0));
  for (int k2 = 0; k2 < n; ++k2)
    for (int k1 = 0; k1 < n; ++k1)
      w[k2 * n + k1] *= norm / (lam[static_cast<std::size_t>(k1)] + lam[static_cast<std::size_t>(k2)]);
  dst1_2d(w, n);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(r * r);
  for (int i2 = 0; i2 < n; ++i2)
    for (int i1 = 0; i1 < n; ++i1) p[(i2 + 1) * r + i1 + 1] = w[i2 * n + i1];
  return Field(g, std::move(p));
}

Field smooth_coefficient_heat(const Field& a, const HeatSmoothing& sm) {
  const Grid& g = a.grid();
  if (g.dim() != 2) throw std::invalid_argument("smooth_coefficient_heat: needs a 2D grid");
  if (!(sm.eta >= 0.0) || !(sm.dt >= 0.0) || sm.steps < 0)
    throw std::invalid_argument("smooth_coefficient_heat: eta, dt and steps must be non-negative");
  const double h = g.spacing();
  const double mu = sm.eta * sm.dt / (h * h);
  if (mu > 0.25) {
    std::ostringstream os;
    os << "smooth_coefficient_heat: eta*dt/h^2 = " << mu << " exceeds the stability bound 1/4";
    throw std::invalid_argument(os.str());
  }
  const int r = static_cast<int>(g.points_per_axis());
  auto refl = [r](int i) { return i < 0 ? 1 : (i >= r ? r - 2 : i); };
  Eigen::VectorXd u = a.values(), next(u.size());
  for (int s = 0; s < sm.steps; ++s) {
    for (int i2 = 0; i2 < r; ++i2) {
      for (int i1 = 0; i1 < r; ++i1) {
        const double c = u[i2 * r + i1];
        const double lap = u[i2 * r + refl(i1 - 1)] + u[i2 * r + refl(i1 + 1)] +
                           u[refl(i2 - 1) * r + i1] + u[refl(i2 + 1) * r + i1] - 4.0 * c;
        next[i2 * r + i1] = c + mu * lap;
      }
    }
    u.swap(next);
  }
  return Field(g, std::move(u));
}

double sigma_gamma(double r, const SigmoidParams& gm) {
  return (gm.s_plus - gm.s_minus) / (1.0 + std::exp(-r / gm.delta)) + gm.s_minus;
}

std::pair<Field, Field> gradient(const Field& u) {
  const Grid& g = u.grid();
  if (g.dim() != 2) throw std::invalid_argument("gradient: needs a 2D grid");
  const int r = static_cast<int>(g.points_per_axis());
  const double h = g.spacing();
  const auto& v = u.values();
  Eigen::VectorXd gx(r * r), gy(r * r);
  // d/dx along a line of stride `step` starting at `base`.
  auto diff = [&](int base, int step, int i) {
    const auto at = [&](int k) { return v[base + k * step]; };
    if (i == 0) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
    if (i == r - 1) return (3.0 * at(r - 1) - 4.0 * at(r - 2) + at(r - 3)) / (2.0 * h);
    return (at(i + 1) - at(i - 1)) / (2.0 * h);
  };
  for (int i2 = 0; i2 < r; ++i2) {
    for (int i1 = 0; i1 < r; ++i1) {
      gx[i2 * r + i1] = diff(i2 * r, 1, i1);
      gy[i2 * r + i1] = diff(i1, r, i2);
    }
  }
  return {Field(g, std::move(gx)), Field(g, std::move(gy))};
}

void PredictorCorrectorSpec::validate() const {
  if (!(gamma.delta > 0.0)) throw std::invalid_argument("sigmoid delta must be positive");
  if (!(gamma.s_minus <= gamma.s_plus)) throw std::invalid_argument("sigmoid needs s_minus <= s_plus");
  if (theta_measure.boundary != grf::GrfBoundary::neumann_2d)
    throw std::invalid_argument("predictor-corrector thetas need a neumann-2d measure");
  theta_measure.validate();
  if (theta_modes < 1) throw std::invalid_argument("theta_modes must be positive");
}

namespace {

// The a-dependent pieces shared by every feature.
struct CoefficientTerms {
  Field base_rhs;  // f / a_eps
  Field log_gx, log_gy;
};

CoefficientTerms coefficient_terms(const Field& a, const PredictorCorrectorSpec& spec) {
  if (a.values().minCoeff() <= 0.0) throw std::invalid_argument("predictor-corrector: coefficient must be positive");
  const Field a_eps = smooth_coefficient_heat(a, spec.smoothing);
  const double f = spec.source;
  auto [gx, gy] = gradient(a_eps.map([](double x) { return std::log(x); }));
  return {a_eps.map([f](double x) { return f / x; }), std::move(gx), std::move(gy)};
}

Field advection(const CoefficientTerms& t, const Field& gx, const Field& gy) {
  Eigen::VectorXd c = t.log_gx.values().cwiseProduct(gx.values()) + t.log_gy.values().cwiseProduct(gy.values());
  return Field(gx.grid(), std::move(c));
}

Field sigmoid_field(const Field& theta, const PredictorCorrectorSpec& spec) {
  const SigmoidParams gm = spec.gamma;
  return theta.map([gm](double r) { return sigma_gamma(r, gm); });
}

}  // namespace

Field predictor_field(const Field& a, const Field& theta1, const PredictorCorrectorSpec& spec) {
  require_dirichlet_square(a.grid(), "predictor_corrector_feature");
  require_same_grid(a.grid(), theta1.grid(), "predictor_corrector_feature");
  const CoefficientTerms t = coefficient_terms(a, spec);
  return fast_poisson_dirichlet(spec.use_theta ? t.base_rhs + sigmoid_field(theta1, spec) : t.base_rhs);
}

Field predictor_corrector_feature(const Field& a, const Field& theta1, const Field& theta2,
                                  const PredictorCorrectorSpec& spec) {
  require_dirichlet_square(a.grid(), "predictor_corrector_feature");
  require_same_grid(a.grid(), theta1.grid(), "predictor_corrector_feature");
  require_same_grid(a.grid(), theta2.grid(), "predictor_corrector_feature");
  const CoefficientTerms t = coefficient_terms(a, spec);
  const Field p0 = fast_poisson_dirichlet(spec.use_theta ? t.base_rhs + sigmoid_field(theta1, spec) : t.base_rhs);
  const auto [gx, gy] = gradient(p0);
  Field rhs = t.base_rhs + advection(t, gx, gy);
  if (spec.use_theta) rhs = rhs + sigmoid_field(theta2, spec);
  return fast_poisson_dirichlet(rhs);
}

PredictorCorrectorFamily::PredictorCorrectorFamily(PredictorCorrectorSpec spec, Eigen::MatrixXd thetas)
    : spec_(spec), thetas_(std::move(thetas)) {
  spec_.validate();
  const auto len = static_cast<Eigen::Index>(grf::kl_length(grf::GrfBoundary::neumann_2d, spec_.theta_modes));
  if (thetas_.rows() != 2 * len || thetas_.cols() < 1)
    throw std::invalid_argument("theta block must be 2*(theta_modes+1)^2 x m");
}

std::shared_ptr<PredictorCorrectorFamily> PredictorCorrectorFamily::sample(const PredictorCorrectorSpec& spec,
                                                                           std::size_t m, std::uint64_t seed) {
  spec.validate();
  const auto len = static_cast<Eigen::Index>(grf::kl_length(grf::GrfBoundary::neumann_2d, spec.theta_modes));
  Eigen::MatrixXd thetas(2 * len, static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) {
    auto rng = grf::sample_rng(seed, j);
    const auto c = static_cast<Eigen::Index>(j);
    thetas.col(c).head(len) = grf::draw_kl_coefficients(spec.theta_measure, spec.theta_modes, rng).values;
    thetas.col(c).tail(len) = grf::draw_kl_coefficients(spec.theta_measure, spec.theta_modes, rng).values;
  }
  return std::make_shared<PredictorCorrectorFamily>(spec, std::move(thetas));
}

grf::KlCoefficients PredictorCorrectorFamily::theta(std::size_t j, int which) const {
  if (which != 1 && which != 2) throw std::invalid_argument("theta index must be 1 or 2");
  const Eigen::Index len = thetas_.rows() / 2;
  const auto col = thetas_.col(static_cast<Eigen::Index>(j));
  return grf::KlCoefficients{grf::GrfBoundary::neumann_2d, spec_.theta_modes,
                             which == 1 ? Eigen::VectorXd(col.head(len)) : Eigen::VectorXd(col.tail(len))};
}

void PredictorCorrectorFamily::check_grid(const Grid& grid) const {
  require_dirichlet_square(grid, "predictor-corrector features");
  if (grid.points_per_axis() < 5) throw std::invalid_argument("predictor-corrector features need r >= 5");
}

std::shared_ptr<const PredictorCorrectorFamily::GridCache> PredictorCorrectorFamily::cache_for(
    const Grid& grid) const {
  std::lock_guard lock(cache_mutex_);
  if (cache_ && cached_points_ == grid.points_per_axis()) return cache_;
  cache_.reset();
  auto fresh = std::make_shared<GridCache>();
  const auto k = static_cast<Eigen::Index>(grid.size());
  const auto m = thetas_.cols();
  fresh->q1.resize(k, m);
  fresh->q2.resize(k, m);
  if (spec_.use_theta) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const Field t1 = grf::synthesize(theta(static_cast<std::size_t>(j), 1), grid);
      const Field t2 = grf::synthesize(theta(static_cast<std::size_t>(j), 2), grid);
      fresh->q1.col(j) = fast_poisson_dirichlet(Field(grid, sigmoid_field(t1, spec_).values())).values();
      fresh->q2.col(j) = fast_poisson_dirichlet(Field(grid, sigmoid_field(t2, spec_).values())).values();
    }
  } else {
    fresh->q1.setZero();
    fresh->q2.setZero();
  }
  cache_ = fresh;
  cached_points_ = grid.points_per_axis();
  return cache_;
}

Eigen::MatrixXd PredictorCorrectorFamily::evaluate_all(const Field& a) const {
  check_grid(a.grid());
  const Grid& g = a.grid();
  const auto cache = cache_for(g);
  const CoefficientTerms t = coefficient_terms(a, spec_);
  // Both Poisson solves are linear, so p0 = P(f/a_eps) + P(sigma(theta1))
  // and only the corrector's advection term needs a per-feature solve.
  const Field base = fast_poisson_dirichlet(t.base_rhs);
  const auto [bx, by] = gradient(base);
  const Eigen::VectorXd base_adv = advection(t, bx, by).values();

  const auto m = thetas_.cols();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(g.size()), m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto [qx, qy] = gradient(Field(g, cache->q1.col(j)));
    Eigen::VectorXd adv = base_adv + advection(t, qx, qy).values();
    out.col(j) = base.values() + cache->q2.col(j) + fast_poisson_dirichlet(Field(g, std::move(adv))).values();
  }
  return out;
}

FamilyPtr PredictorCorrectorFamily::permuted(std::span<const std::size_t> perm) const {
  return std::make_shared<PredictorCorrectorFamily>(spec_, permute_columns(thetas_, perm));
}

FamilyRecord PredictorCorrectorFamily::record() const {
  FamilyRecord rec;
  rec.kind = std::string(to_string(kind()));
  auto put = [&rec](const char* key, double v) { rec.hyper[key] = format_double(v); };
  put("s_plus", spec_.gamma.s_plus);
  put("s_minus", spec_.gamma.s_minus);
  put("sigmoid_delta", spec_.gamma.delta);
  put("theta_tau", spec_.theta_measure.tau);
  put("theta_alpha", spec_.theta_measure.regularity);
  rec.hyper["theta_modes"] = std::to_string(spec_.theta_modes);
  put("eta", spec_.smoothing.eta);
  put("heat_dt", spec_.smoothing.dt);
  rec.hyper["heat_steps"] = std::to_string(spec_.smoothing.steps);
  put("source", spec_.source);
  rec.hyper["use_theta"] = spec_.use_theta ? "1" : "0";
  rec.blocks.push_back(NamedBlock{"theta", thetas_});
  return rec;
}

std::shared_ptr<PredictorCorrectorFamily> PredictorCorrectorFamily::from_record(const FamilyRecord& rec) {
  if (rec.kind != to_string(FeatureKind::predictor_corrector_darcy))
    throw std::invalid_argument("record is not a predictor-corrector family");
  PredictorCorrectorSpec spec;
  spec.gamma.s_plus = std::stod(rec.param("s_plus"));
  spec.gamma.s_minus = std::stod(rec.param("s_minus"));
  spec.gamma.delta = std::stod(rec.param("sigmoid_delta"));
  spec.theta_measure.tau = std::stod(rec.param("theta_tau"));
  spec.theta_measure.regularity = std::stod(rec.param("theta_alpha"));
  spec.theta_modes = std::stoi(rec.param("theta_modes"));
  spec.smoothing.eta = std::stod(rec.param("eta"));
  spec.smoothing.dt = std::stod(rec.param("heat_dt"));
  spec.smoothing.steps = std::stoi(rec.param("heat_steps"));
  spec.source = std::stod(rec.param("source"));
  spec.use_theta = rec.param("use_theta") == "1";
  return std::make_shared<PredictorCorrectorFamily>(spec, rec.block("theta"));
}

}  // namespace rfm::darcy

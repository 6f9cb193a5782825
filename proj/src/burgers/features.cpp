#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "rfm/burgers/burgers.hpp"
#include "rfm/core/model_io.hpp"
#include "rfm/field/spectral.hpp"

namespace rfm::burgers {

using cplx = std::complex<double>;
using std::numbers::pi;

double filter_chi(int k, double delta, double beta) {
  const double r = 2 * pi * std::abs(k) * delta;
  return std::max(0.0, std::min(2 * r, std::pow(r + 0.5, -beta)));
}

void FourierFeatureSpec::validate() const {
  if (!(delta > 0.0) || !(beta > 0.0)) throw std::invalid_argument("filter delta and beta must be positive");
  if (!(gain > 0.0) || !std::isfinite(gain)) throw std::invalid_argument("feature gain must be positive");
  if (theta_measure.boundary != grf::GrfBoundary::periodic_1d)
    throw std::invalid_argument("Fourier features need a periodic-1d theta measure");
  theta_measure.validate();
  if (theta_modes < 1) throw std::invalid_argument("theta_modes must be positive");
}

namespace {

// Highest wavenumber kept on an n-point periodic grid; the Nyquist mode of
// an even grid has no real-valued sin/cos pair and is dropped.
int band_limit(int n) { return (n - 1) / 2; }

}  // namespace

Field fourier_feature(const Field& a, const Field& theta, const FourierFeatureSpec& spec) {
  if (!a.grid().is_periodic()) throw std::invalid_argument("fourier_feature needs a periodic grid");
  require_same_grid(a.grid(), theta.grid(), "fourier_feature");
  const SpectralField ah = spectral_transform(a);
  const SpectralField th = spectral_transform(theta);
  const int n = static_cast<int>(a.size());
  std::vector<cplx> prod(static_cast<std::size_t>(n / 2 + 1));
  for (int k = 1; k <= band_limit(n); ++k)
    prod[static_cast<std::size_t>(k)] = spec.gain * filter_chi(k, spec.delta, spec.beta) * ah(k) * th(k);
  return inverse_transform(SpectralField(a.grid(), std::move(prod))).map(elu);
}

FourierFeatureFamily::FourierFeatureFamily(FourierFeatureSpec spec, Eigen::MatrixXd thetas)
    : spec_(spec), thetas_(std::move(thetas)) {
  spec_.validate();
  if (thetas_.rows() != 2 * spec_.theta_modes || thetas_.cols() < 1)
    throw std::invalid_argument("theta block must be 2*theta_modes x m");
  const int jm = spec_.theta_modes;
  theta_hat_.resize(jm, thetas_.cols());
  for (Eigen::Index c = 0; c < thetas_.cols(); ++c)
    for (int j = 1; j <= jm; ++j)
      theta_hat_(j - 1, c) = cplx(thetas_(2 * (j - 1) + 1, c), -thetas_(2 * (j - 1), c)) / std::sqrt(2.0);
  chi_.resize(jm + 1);
  for (int k = 0; k <= jm; ++k) chi_[k] = spec_.gain * filter_chi(k, spec_.delta, spec_.beta);
}

std::shared_ptr<FourierFeatureFamily> FourierFeatureFamily::sample(const FourierFeatureSpec& spec,
                                                                   std::size_t m, std::uint64_t seed) {
  spec.validate();
  Eigen::MatrixXd thetas(2 * spec.theta_modes, static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) {
    auto rng = grf::sample_rng(seed, j);
    thetas.col(static_cast<Eigen::Index>(j)) =
        grf::draw_kl_coefficients(spec.theta_measure, spec.theta_modes, rng).values;
  }
  return std::make_shared<FourierFeatureFamily>(spec, std::move(thetas));
}

void FourierFeatureFamily::check_grid(const Grid& grid) const {
  if (!grid.is_periodic()) throw std::invalid_argument("Fourier features need a periodic 1D grid");
}

Eigen::MatrixXd FourierFeatureFamily::evaluate_all(const Field& a) const {
  check_grid(a.grid());
  const int n = static_cast<int>(a.size());
  const SpectralField ah = spectral_transform(a);
  const int kmax = std::min(band_limit(n), spec_.theta_modes);
  std::vector<cplx> filtered_a(static_cast<std::size_t>(kmax + 1));
  for (int k = 1; k <= kmax; ++k) filtered_a[static_cast<std::size_t>(k)] = chi_[k] * ah(k);

  Eigen::MatrixXd out(n, thetas_.cols());
  std::vector<cplx> prod(static_cast<std::size_t>(n / 2 + 1));
  for (Eigen::Index c = 0; c < thetas_.cols(); ++c) {
    std::fill(prod.begin(), prod.end(), cplx(0.0, 0.0));
    for (int k = 1; k <= kmax; ++k)
      prod[static_cast<std::size_t>(k)] = filtered_a[static_cast<std::size_t>(k)] * theta_hat_(k - 1, c);
    double* col = out.col(c).data();
    irfft(prod.data(), col, n);
    for (int i = 0; i < n; ++i) col[i] = elu(col[i]);
  }
  return out;
}

FamilyPtr FourierFeatureFamily::permuted(std::span<const std::size_t> perm) const {
  return std::make_shared<FourierFeatureFamily>(spec_, permute_columns(thetas_, perm));
}

grf::KlCoefficients FourierFeatureFamily::theta(std::size_t j) const {
  return grf::KlCoefficients{grf::GrfBoundary::periodic_1d, spec_.theta_modes,
                             thetas_.col(static_cast<Eigen::Index>(j))};
}

FamilyRecord FourierFeatureFamily::record() const {
  FamilyRecord rec;
  rec.kind = std::string(to_string(kind()));
  rec.hyper["delta"] = format_double(spec_.delta);
  rec.hyper["beta"] = format_double(spec_.beta);
  rec.hyper["gain"] = format_double(spec_.gain);
  rec.hyper["theta_tau"] = format_double(spec_.theta_measure.tau);
  rec.hyper["theta_alpha"] = format_double(spec_.theta_measure.regularity);
  rec.hyper["theta_modes"] = std::to_string(spec_.theta_modes);
  rec.blocks.push_back(NamedBlock{"theta", thetas_});
  return rec;
}

std::shared_ptr<FourierFeatureFamily> FourierFeatureFamily::from_record(const FamilyRecord& rec) {
  if (rec.kind != to_string(FeatureKind::fourier_burgers))
    throw std::invalid_argument("record is not a fourier-burgers family");
  FourierFeatureSpec spec;
  spec.delta = std::stod(rec.param("delta"));
  spec.beta = std::stod(rec.param("beta"));
  spec.gain = std::stod(rec.param("gain"));
  spec.theta_measure.tau = std::stod(rec.param("theta_tau"));
  spec.theta_measure.regularity = std::stod(rec.param("theta_alpha"));
  spec.theta_modes = std::stoi(rec.param("theta_modes"));
  return std::make_shared<FourierFeatureFamily>(spec, rec.block("theta"));
}

Field semigroup_compose_eval(const TrainedModel& model, const Field& a, int j) {
  if (j < 1) throw std::invalid_argument("semigroup composition count must be >= 1");
  Field u = predict(model, a);
  for (int i = 1; i < j; ++i) u = predict(model, u);
  return u;
}

}  // namespace rfm::burgers

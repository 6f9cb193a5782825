#include "rfm/field/spectral.hpp"

#include <cmath>
#include <stdexcept>

#include "fftw_plans.hpp"

namespace rfm {

namespace detail {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

PlanSlot::~PlanSlot() {
  if (plan != nullptr) {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
}

PlanSlot& plan_for(PlanKind kind, int n) {
  thread_local std::map<std::pair<int, int>, PlanSlot> cache;
  const auto key = std::make_pair(static_cast<int>(kind), n);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  PlanSlot slot;
  std::lock_guard lock(fftw_planner_mutex());
  switch (kind) {
    case PlanKind::r2c:
      slot.real = fftw_alloc<double>(static_cast<std::size_t>(n));
      slot.complex = fftw_alloc<fftw_complex>(static_cast<std::size_t>(n / 2 + 1));
      slot.plan = fftw_plan_dft_r2c_1d(n, slot.real.get(), slot.complex.get(), FFTW_ESTIMATE);
      break;
    case PlanKind::c2r:
      slot.real = fftw_alloc<double>(static_cast<std::size_t>(n));
      slot.complex = fftw_alloc<fftw_complex>(static_cast<std::size_t>(n / 2 + 1));
      slot.plan = fftw_plan_dft_c2r_1d(n, slot.complex.get(), slot.real.get(), FFTW_ESTIMATE);
      break;
    case PlanKind::dst1_2d:
      slot.real = fftw_alloc<double>(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
      slot.plan = fftw_plan_r2r_2d(n, n, slot.real.get(), slot.real.get(), FFTW_RODFT00,
                                   FFTW_RODFT00, FFTW_ESTIMATE);
      break;
    case PlanKind::dct1_2d:
      slot.real = fftw_alloc<double>(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
      slot.plan = fftw_plan_r2r_2d(n, n, slot.real.get(), slot.real.get(), FFTW_REDFT00,
                                   FFTW_REDFT00, FFTW_ESTIMATE);
      break;
  }
  if (slot.plan == nullptr) throw std::runtime_error("FFTW failed to create a plan");
  return cache.emplace(key, std::move(slot)).first->second;
}

}  // namespace detail

using detail::PlanKind;
using detail::plan_for;

void rfft(const double* in, std::complex<double>* out, int n) {
  auto& slot = plan_for(PlanKind::r2c, n);
  std::copy(in, in + n, slot.real.get());
  fftw_execute(slot.plan);
  const auto* c = reinterpret_cast<const std::complex<double>*>(slot.complex.get());
  std::copy(c, c + n / 2 + 1, out);
}

void irfft(const std::complex<double>* in, double* out, int n) {
  auto& slot = plan_for(PlanKind::c2r, n);
  std::copy(in, in + n / 2 + 1, reinterpret_cast<std::complex<double>*>(slot.complex.get()));
  fftw_execute(slot.plan);
  std::copy(slot.real.get(), slot.real.get() + n, out);
}

void dst1_2d(Eigen::Ref<Eigen::VectorXd> data, int n) {
  if (data.size() != static_cast<Eigen::Index>(n) * n)
    throw std::invalid_argument("dst1_2d: size mismatch");
  auto& slot = plan_for(PlanKind::dst1_2d, n);
  std::copy(data.data(), data.data() + data.size(), slot.real.get());
  fftw_execute(slot.plan);
  std::copy(slot.real.get(), slot.real.get() + data.size(), data.data());
}

void dct1_2d(Eigen::Ref<Eigen::VectorXd> data, int n) {
  if (n < 2) throw std::invalid_argument("dct1_2d: need n >= 2");
  if (data.size() != static_cast<Eigen::Index>(n) * n)
    throw std::invalid_argument("dct1_2d: size mismatch");
  auto& slot = plan_for(PlanKind::dct1_2d, n);
  std::copy(data.data(), data.data() + data.size(), slot.real.get());
  fftw_execute(slot.plan);
  std::copy(slot.real.get(), slot.real.get() + data.size(), data.data());
}

SpectralField::SpectralField(Grid grid, std::vector<std::complex<double>> half_spectrum)
    : grid_(grid), coeffs_(std::move(half_spectrum)) {
  if (!grid_.is_periodic()) throw std::invalid_argument("spectral fields need a periodic grid");
  if (coeffs_.size() != grid_.size() / 2 + 1)
    throw std::invalid_argument("half spectrum length does not match grid");
}

std::complex<double> SpectralField::operator()(int k) const {
  const int kk = k < 0 ? -k : k;
  if (kk > max_wavenumber()) throw std::out_of_range("wavenumber beyond grid Nyquist");
  const auto c = coeffs_[static_cast<std::size_t>(kk)];
  return k < 0 ? std::conj(c) : c;
}

SpectralField spectral_transform(const Field& u) {
  if (!u.grid().is_periodic())
    throw std::invalid_argument("spectral_transform needs a periodic grid");
  const int n = static_cast<int>(u.size());
  std::vector<std::complex<double>> c(static_cast<std::size_t>(n / 2 + 1));
  rfft(u.values().data(), c.data(), n);
  const double inv = 1.0 / n;
  for (auto& z : c) z *= inv;
  return SpectralField(u.grid(), std::move(c));
}

Field inverse_transform(const SpectralField& s) {
  const int n = static_cast<int>(s.grid().size());
  Eigen::VectorXd v(n);
  // c2r ignores imaginary parts of the k=0 and Nyquist inputs, matching a
  // real field's spectrum.
  irfft(s.half_spectrum().data(), v.data(), n);
  return Field(s.grid(), std::move(v));
}

double spectral_energy(const SpectralField& s) {
  const auto& c = s.half_spectrum();
  const std::size_t n = s.grid().size();
  double e = std::norm(c[0]);
  for (std::size_t k = 1; k < c.size(); ++k) {
    const bool nyquist = (n % 2 == 0) && k == n / 2;
    e += (nyquist ? 1.0 : 2.0) * std::norm(c[k]);
  }
  return e;
}

}  // namespace rfm

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "rfm/burgers/burgers.hpp"
#include "rfm/field/spectral.hpp"

namespace rfm::burgers {

using cplx = std::complex<double>;
using std::numbers::pi;

void BurgersProblem::validate() const {
  if (!(viscosity > 0.0)) throw std::invalid_argument("Burgers viscosity must be positive");
  if (!(final_time > 0.0)) throw std::invalid_argument("Burgers final time must be positive");
}

double default_time_step(const Grid& grid, double horizon) {
  const double dt0 = std::min(0.5 / static_cast<double>(grid.points_per_axis()), 0.01);
  const double steps = std::ceil(horizon / dt0 - 1e-9);
  return horizon / steps;
}

namespace {

class IfRk4 {
 public:
  IfRk4(double viscosity, int n, double dt) : n_(n), dt_(dt) {
    const int nk = n / 2 + 1;
    e_half_.resize(nk);
    e_full_.resize(nk);
    deriv_.resize(nk);
    for (int k = 0; k < nk; ++k) {
      const double kk = 2 * pi * k;
      e_half_[k] = std::exp(-viscosity * kk * kk * dt / 2);
      e_full_[k] = e_half_[k] * e_half_[k];
      // 2/3 rule: the quadratic term keeps |k| <= n/3 only.
      const bool keep = 3 * k <= n && !(n % 2 == 0 && 2 * k == n);
      deriv_[k] = keep ? cplx(0.0, -kk / 2) : cplx(0.0, 0.0);
    }
    u_.resize(n);
    tmp_.resize(nk);
  }

  // -(ik/2) F(u^2), dealiased.
  void nonlinear(const std::vector<cplx>& uh, std::vector<cplx>& out) {
    irfft(uh.data(), u_.data(), n_);
    for (auto& v : u_) v *= v;
    rfft(u_.data(), out.data(), n_);
    const double inv = 1.0 / n_;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] *= deriv_[k] * inv;
  }

  void step(std::vector<cplx>& uh) {
    const std::size_t nk = uh.size();
    std::vector<cplx> k1(nk), k2(nk), k3(nk), k4(nk), w(nk);
    nonlinear(uh, k1);
    for (std::size_t k = 0; k < nk; ++k) w[k] = e_half_[k] * (uh[k] + 0.5 * dt_ * k1[k]);
    nonlinear(w, k2);
    for (std::size_t k = 0; k < nk; ++k) w[k] = e_half_[k] * uh[k] + 0.5 * dt_ * k2[k];
    nonlinear(w, k3);
    for (std::size_t k = 0; k < nk; ++k) w[k] = e_full_[k] * uh[k] + dt_ * e_half_[k] * k3[k];
    nonlinear(w, k4);
    for (std::size_t k = 0; k < nk; ++k)
      uh[k] = e_full_[k] * uh[k] +
              dt_ / 6.0 * (e_full_[k] * k1[k] + 2.0 * e_half_[k] * (k2[k] + k3[k]) + k4[k]);
  }

 private:
  int n_;
  double dt_;
  std::vector<double> e_half_, e_full_;
  std::vector<cplx> deriv_;
  std::vector<double> u_;
  std::vector<cplx> tmp_;
};

bool all_finite(const std::vector<cplx>& v) {
  for (const auto& z : v)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

}  // namespace

std::vector<Field> burgers_solve_snapshots(const BurgersProblem& problem, const Field& a, double dt,
                                           std::span<const double> times) {
  problem.validate();
  if (!a.grid().is_periodic()) throw std::invalid_argument("burgers_solve needs a periodic grid");
  if (!(dt > 0.0)) throw std::invalid_argument("burgers_solve: dt must be positive");
  const int n = static_cast<int>(a.size());
  SpectralField s = spectral_transform(a);
  std::vector<cplx> uh = s.half_spectrum();
  IfRk4 stepper(problem.viscosity, n, dt);

  std::vector<Field> out;
  long done = 0;
  double prev = 0.0;
  for (double t : times) {
    if (!(t >= prev)) throw std::invalid_argument("snapshot times must be ascending");
    const double ratio = t / dt;
    const long target = std::lround(ratio);
    if (std::abs(ratio - static_cast<double>(target)) > 1e-6 * std::max(1.0, ratio))
      throw std::invalid_argument("snapshot time is not a multiple of dt");
    for (; done < target; ++done) {
      stepper.step(uh);
      if (!all_finite(uh)) {
        std::ostringstream os;
        os << "Burgers solution blew up at t=" << (done + 1) * dt;
        throw std::runtime_error(os.str());
      }
    }
    out.push_back(inverse_transform(SpectralField(a.grid(), uh)));
    prev = t;
  }
  return out;
}

Field burgers_solve(const BurgersProblem& problem, const Field& a, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("burgers_solve: dt must be positive");
  // Adjust dt so the final time is hit exactly.
  const double steps = std::max(1.0, std::round(problem.final_time / dt));
  const double t[] = {problem.final_time};
  return burgers_solve_snapshots(problem, a, problem.final_time / steps, t).front();
}

}  // namespace rfm::burgers

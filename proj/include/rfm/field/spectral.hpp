#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

#include "rfm/field/field.hpp"

namespace rfm {

/// Fourier coefficients of a real periodic field on a 1D periodic grid.
///
/// Convention: with N stored values u_i at x_i = i/N,
///   c_k = (1/N) sum_i u_i exp(-2 pi i k x_i),   u(x) = sum_k c_k exp(2 pi i k x),
/// so c_0 is the field mean. Only k = 0..N/2 is stored; c_{-k} = conj(c_k).
class SpectralField {
 public:
  SpectralField(Grid grid, std::vector<std::complex<double>> half_spectrum);

  const Grid& grid() const { return grid_; }
  /// Highest stored wavenumber, N/2.
  int max_wavenumber() const { return static_cast<int>(coeffs_.size()) - 1; }
  /// Coefficient at any integer k with |k| <= N/2.
  std::complex<double> operator()(int k) const;
  const std::vector<std::complex<double>>& half_spectrum() const { return coeffs_; }

 private:
  Grid grid_;
  std::vector<std::complex<double>> coeffs_;
};

/// Throws std::invalid_argument for non-periodic grids.
SpectralField spectral_transform(const Field& u);
Field inverse_transform(const SpectralField& s);

/// Sum of |c_k|^2 over all wavenumbers, equal to the mean of u^2.
double spectral_energy(const SpectralField& s);

// Raw transforms used by solvers; all are unnormalized FFTW conventions.

/// Real-to-half-complex forward DFT of length n (n/2+1 outputs).
void rfft(const double* in, std::complex<double>* out, int n);
/// Inverse of rfft without the 1/n factor.
void irfft(const std::complex<double>* in, double* out, int n);

/// 2D DST-I (FFTW RODFT00) of an n x n array, in place, row-major.
void dst1_2d(Eigen::Ref<Eigen::VectorXd> data, int n);
/// 2D DCT-I (FFTW REDFT00) of an n x n array, in place, row-major; n >= 2.
void dct1_2d(Eigen::Ref<Eigen::VectorXd> data, int n);

}  // namespace rfm

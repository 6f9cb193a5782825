#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "rfm/field/field.hpp"

namespace rfm::grf {

enum class GrfBoundary { periodic_1d, neumann_2d };

std::string_view to_string(GrfBoundary b);
GrfBoundary grf_boundary_from_string(std::string_view s);

/// Gaussian measure N(0, C) with C = tau^(2 alpha - d) (-Laplacian + tau^2)^(-alpha).
struct GrfSpec {
  double tau = 7.0;
  double regularity = 2.5;  // alpha
  GrfBoundary boundary = GrfBoundary::periodic_1d;
  /// Highest retained wavenumber per axis; 0 keeps every mode the sampling
  /// grid resolves below its Nyquist wavenumber.
  int truncation = 0;

  int dim() const { return boundary == GrfBoundary::periodic_1d ? 1 : 2; }
  /// Throws std::invalid_argument if tau < 0 or alpha <= d/2.
  void validate() const;
};

/// Eigenvalue of C for the periodic mode pair with wavenumber j >= 0.
double eigenvalue_periodic(const GrfSpec& spec, int j);
/// Eigenvalue of C for the Neumann cosine mode (k1, k2).
double eigenvalue_neumann(const GrfSpec& spec, int k1, int k2);

struct Eigenpair {
  double eigenvalue;
  /// 1D: position in the sin/cos enumeration (0, 2j-1 for sin, 2j for cos).
  /// 2D: the multi-index (k1, k2).
  std::array<int, 2> index;
  Field eigenfunction;
};

/// Leading `count` eigenpairs in non-increasing eigenvalue order, ties broken
/// lexicographically by index. Includes the constant mode (index 0).
/// Throws std::invalid_argument when `count` exceeds the modes the grid
/// resolves without aliasing.
std::vector<Eigenpair> eigenpairs_periodic_1d(const GrfSpec& spec, const Grid& grid,
                                              std::size_t count);
/// As above for the Neumann cosine basis; the constant mode is excluded.
std::vector<Eigenpair> eigenpairs_neumann_2d(const GrfSpec& spec, const Grid& grid,
                                             std::size_t count);

/// Highest wavenumber per axis `grid` resolves without aliasing.
int max_resolved_mode(GrfBoundary boundary, const Grid& grid);

/// Karhunen-Loeve coefficients sqrt(lambda_k) xi_k of one draw.
///
/// 1D layout: [s_1, c_1, s_2, c_2, ...] for the sqrt(2) sin / sqrt(2) cos
/// pair at each wavenumber j = 1..modes. 2D layout: (modes+1)^2 entries,
/// index k2 * (modes+1) + k1, for the normalized cosine products; entry 0 is
/// the zeroed constant mode.
struct KlCoefficients {
  GrfBoundary boundary = GrfBoundary::periodic_1d;
  int modes = 0;
  Eigen::VectorXd values;

  double at(int k1, int k2) const {
    return values[static_cast<Eigen::Index>(k2) * (modes + 1) + k1];
  }
};

/// Size of the KL coefficient vector for `modes` wavenumbers per axis.
std::size_t kl_length(GrfBoundary boundary, int modes);

/// Deterministic generator for sample `index` of a dataset seeded by `seed`.
std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index);

/// Draws xi_k ~ N(0,1) in a fixed order so that the coefficients for a
/// smaller `modes` are a prefix-consistent truncation of a larger draw.
KlCoefficients draw_kl_coefficients(const GrfSpec& spec, int modes, std::mt19937_64& rng);

/// Exact nodal values of the truncated KL sum on `grid`. Modes above the
/// grid's resolution alias onto resolved ones, so synthesizing on a nested
/// coarse grid equals subsampling the fine synthesis.
Field synthesize(const KlCoefficients& coeffs, const Grid& grid);

/// One zero-mean draw on `grid` by fast (FFT / DCT) summation.
Field sample_grf(const GrfSpec& spec, const Grid& grid, std::mt19937_64& rng);

/// Two-valued coefficient prior obtained by thresholding a Gaussian field.
struct LevelSetSpec {
  double a_plus = 12.0;
  double a_minus = 3.0;
  GrfSpec underlying{3.0, 2.0, GrfBoundary::neumann_2d, 0};

  void validate() const;
};

/// a_plus where g > 0 and a_minus where g <= 0.
Field pushforward_levelset(const LevelSetSpec& spec, const Field& g);

Field sample_levelset(const LevelSetSpec& spec, const Grid& grid, std::mt19937_64& rng);

}  // namespace rfm::grf

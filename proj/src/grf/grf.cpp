#include "rfm/grf/grf.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include "rfm/field/spectral.hpp"

namespace rfm::grf {

using std::numbers::pi;

std::string_view to_string(GrfBoundary b) {
  return b == GrfBoundary::periodic_1d ? "periodic-1d" : "neumann-2d";
}

GrfBoundary grf_boundary_from_string(std::string_view s) {
  if (s == "periodic-1d") return GrfBoundary::periodic_1d;
  if (s == "neumann-2d") return GrfBoundary::neumann_2d;
  throw std::invalid_argument("unknown GRF boundary '" + std::string(s) + "'");
}

void GrfSpec::validate() const {
  if (!(tau >= 0.0)) throw std::invalid_argument("GRF tau must be >= 0");
  if (!(regularity > 0.5 * dim()))
    throw std::invalid_argument("GRF regularity must exceed d/2 for a trace-class covariance");
  if (truncation < 0) throw std::invalid_argument("GRF truncation must be >= 0");
}

double eigenvalue_periodic(const GrfSpec& spec, int j) {
  const double t = spec.tau, a = spec.regularity;
  if (j == 0) return 1.0 / t;
  return std::pow(t, 2 * a - 1) * std::pow(4 * pi * pi * j * j + t * t, -a);
}

double eigenvalue_neumann(const GrfSpec& spec, int k1, int k2) {
  const double t = spec.tau, a = spec.regularity;
  const double k2sum = static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2;
  return std::pow(t, 2 * a - 2) * std::pow(pi * pi * k2sum + t * t, -a);
}

int max_resolved_mode(GrfBoundary boundary, const Grid& grid) {
  if (boundary == GrfBoundary::periodic_1d) {
    if (!grid.is_periodic()) throw std::invalid_argument("periodic-1d GRF needs a periodic grid");
    return static_cast<int>((grid.size() - 1) / 2);
  }
  if (grid.dim() != 2 || grid.is_periodic())
    throw std::invalid_argument("neumann-2d GRF needs a non-periodic 2D grid");
  return static_cast<int>(grid.points_per_axis()) - 2;
}

std::vector<Eigenpair> eigenpairs_periodic_1d(const GrfSpec& spec, const Grid& grid,
                                              std::size_t count) {
  spec.validate();
  if (spec.boundary != GrfBoundary::periodic_1d)
    throw std::invalid_argument("eigenpairs_periodic_1d: spec is not periodic-1d");
  const int jmax = max_resolved_mode(spec.boundary, grid);
  if (count > static_cast<std::size_t>(1 + 2 * jmax))
    throw std::invalid_argument("requested " + std::to_string(count) +
                                " eigenpairs but the grid resolves only " +
                                std::to_string(1 + 2 * jmax));
  // Eigenvalues decrease strictly in j, so enumeration order is already sorted
  // with the sin member (2j-1) ahead of its cos twin (2j).
  std::vector<Eigenpair> out;
  out.reserve(count);
  for (std::size_t idx = 0; idx < count; ++idx) {
    const int i = static_cast<int>(idx);
    const int j = (i + 1) / 2;
    const double lambda = eigenvalue_periodic(spec, j);
    Field phi = i == 0 ? Field::constant(grid, 1.0)
                : (i % 2 == 1)
                    ? Field::from_function(grid, [j](double x) { return std::sqrt(2.0) * std::sin(2 * pi * j * x); })
                    : Field::from_function(grid, [j](double x) { return std::sqrt(2.0) * std::cos(2 * pi * j * x); });
    out.push_back(Eigenpair{lambda, {i, 0}, std::move(phi)});
  }
  return out;
}

std::vector<Eigenpair> eigenpairs_neumann_2d(const GrfSpec& spec, const Grid& grid,
                                             std::size_t count) {
  spec.validate();
  if (spec.boundary != GrfBoundary::neumann_2d)
    throw std::invalid_argument("eigenpairs_neumann_2d: spec is not neumann-2d");
  const int kmax = max_resolved_mode(spec.boundary, grid);
  const std::size_t available = static_cast<std::size_t>((kmax + 1) * (kmax + 1) - 1);
  if (count > available)
    throw std::invalid_argument("requested " + std::to_string(count) +
                                " eigenpairs but the grid resolves only " +
                                std::to_string(available));
  std::vector<std::array<int, 2>> modes;
  modes.reserve(available);
  for (int k1 = 0; k1 <= kmax; ++k1)
    for (int k2 = 0; k2 <= kmax; ++k2)
      if (k1 != 0 || k2 != 0) modes.push_back({k1, k2});
  // Eigenvalue order is the order of |k|^2; ties keep lexicographic order.
  std::stable_sort(modes.begin(), modes.end(), [](const auto& a, const auto& b) {
    return a[0] * a[0] + a[1] * a[1] < b[0] * b[0] + b[1] * b[1];
  });
  std::vector<Eigenpair> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto [k1, k2] = modes[i];
    const double c = (k1 == 0 || k2 == 0) ? std::sqrt(2.0) : 2.0;
    Field phi = Field::from_function(grid, [=](double x1, double x2) {
      return c * std::cos(k1 * pi * x1) * std::cos(k2 * pi * x2);
    });
    out.push_back(Eigenpair{eigenvalue_neumann(spec, k1, k2), {k1, k2}, std::move(phi)});
  }
  return out;
}

std::size_t kl_length(GrfBoundary boundary, int modes) {
  const auto m = static_cast<std::size_t>(modes);
  return boundary == GrfBoundary::periodic_1d ? 2 * m : (m + 1) * (m + 1);
}

std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over (seed, index) so neighbouring indices get
  // unrelated streams.
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return std::mt19937_64(mix(mix(seed) ^ index));
}

KlCoefficients draw_kl_coefficients(const GrfSpec& spec, int modes, std::mt19937_64& rng) {
  spec.validate();
  if (modes < 1) throw std::invalid_argument("KL draw needs at least one mode");
  std::normal_distribution<double> normal(0.0, 1.0);
  KlCoefficients c{spec.boundary, modes, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(kl_length(spec.boundary, modes)))};
  if (spec.boundary == GrfBoundary::periodic_1d) {
    for (int j = 1; j <= modes; ++j) {
      const double s = std::sqrt(eigenvalue_periodic(spec, j));
      c.values[2 * (j - 1)] = s * normal(rng);
      c.values[2 * (j - 1) + 1] = s * normal(rng);
    }
    return c;
  }
  // Shell order (max(k1,k2) = 1, 2, ...) keeps smaller truncations a prefix.
  const int stride = modes + 1;
  for (int shell = 1; shell <= modes; ++shell) {
    for (int k1 = 0; k1 <= shell; ++k1) {
      for (int k2 = 0; k2 <= shell; ++k2) {
        if (std::max(k1, k2) != shell) continue;
        c.values[k2 * stride + k1] = std::sqrt(eigenvalue_neumann(spec, k1, k2)) * normal(rng);
      }
    }
  }
  return c;
}

namespace {

Field synthesize_periodic(const KlCoefficients& c, const Grid& grid) {
  if (!grid.is_periodic()) throw std::invalid_argument("synthesize: periodic coefficients need a periodic grid");
  const int n = static_cast<int>(grid.size());
  std::vector<std::complex<double>> half(static_cast<std::size_t>(n / 2 + 1));
  for (int j = 1; j <= c.modes; ++j) {
    // sqrt(2) (s sin + c cos) = z e^{2 pi i j x} + conj, z = (c - i s) / sqrt(2)
    const std::complex<double> z(c.values[2 * (j - 1) + 1] / std::sqrt(2.0),
                                 -c.values[2 * (j - 1)] / std::sqrt(2.0));
    const int k = j % n;
    if (k == 0) {
      half[0] += 2.0 * z.real();
    } else if (2 * k == n) {
      half[static_cast<std::size_t>(k)] += 2.0 * z.real();
    } else if (2 * k < n) {
      half[static_cast<std::size_t>(k)] += z;
    } else {
      half[static_cast<std::size_t>(n - k)] += std::conj(z);
    }
  }
  Eigen::VectorXd v(n);
  irfft(half.data(), v.data(), n);
  return Field(grid, std::move(v));
}

Field synthesize_neumann(const KlCoefficients& c, const Grid& grid) {
  if (grid.dim() != 2 || grid.is_periodic())
    throw std::invalid_argument("synthesize: Neumann coefficients need a non-periodic 2D grid");
  const int r = static_cast<int>(grid.points_per_axis());
  const int nn = r - 1;
  auto fold = [nn](int k) {
    k %= 2 * nn;
    return k > nn ? 2 * nn - k : k;
  };
  // REDFT00 computes X_0 + (-1)^i X_N + 2 sum_{0<k<N} X_k cos(pi k i / N).
  auto axis_scale = [nn](int k) { return (k == 0 || k == nn) ? 1.0 : 0.5; };
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(r) * r);
  const int stride = c.modes + 1;
  for (int k2 = 0; k2 <= c.modes; ++k2) {
    for (int k1 = 0; k1 <= c.modes; ++k1) {
      const double v = c.values[k2 * stride + k1];
      if (v == 0.0) continue;
      const double norm = (k1 == 0 || k2 == 0) ? std::sqrt(2.0) : 2.0;
      const int f1 = fold(k1), f2 = fold(k2);
      x[static_cast<Eigen::Index>(f2) * r + f1] += norm * v * axis_scale(f1) * axis_scale(f2);
    }
  }
  dct1_2d(x, r);
  return Field(grid, std::move(x));
}

}  // namespace

Field synthesize(const KlCoefficients& c, const Grid& grid) {
  return c.boundary == GrfBoundary::periodic_1d ? synthesize_periodic(c, grid)
                                                : synthesize_neumann(c, grid);
}

Field sample_grf(const GrfSpec& spec, const Grid& grid, std::mt19937_64& rng) {
  const int modes = spec.truncation > 0 ? spec.truncation : max_resolved_mode(spec.boundary, grid);
  return synthesize(draw_kl_coefficients(spec, modes, rng), grid);
}

void LevelSetSpec::validate() const {
  if (!(a_minus > 0.0) || !(a_plus >= a_minus))
    throw std::invalid_argument("level set values need 0 < a_minus <= a_plus");
  underlying.validate();
}

Field pushforward_levelset(const LevelSetSpec& spec, const Field& g) {
  const double hi = spec.a_plus, lo = spec.a_minus;
  return g.map([=](double r) { return r > 0.0 ? hi : lo; });
}

Field sample_levelset(const LevelSetSpec& spec, const Grid& grid, std::mt19937_64& rng) {
  spec.validate();
  return pushforward_levelset(spec, sample_grf(spec.underlying, grid, rng));
}

}  // namespace rfm::grf

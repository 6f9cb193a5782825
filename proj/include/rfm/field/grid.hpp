#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace rfm {

enum class Boundary { periodic, dirichlet, neumann };

std::string_view to_string(Boundary b);
Boundary boundary_from_string(std::string_view s);

/// Equispaced grid on the unit interval or the unit square.
///
/// `points_per_axis` always counts both endpoints of the axis. For periodic
/// 1D grids the last point duplicates the first and is not stored, so a
/// periodic grid with K points holds K - 1 values.
class Grid {
 public:
  static Grid periodic(std::size_t points);
  static Grid interval(std::size_t points, Boundary boundary);
  static Grid square(std::size_t points_per_axis, Boundary boundary);

  int dim() const { return dim_; }
  std::size_t points_per_axis() const { return points_; }
  Boundary boundary() const { return boundary_; }
  bool is_periodic() const { return boundary_ == Boundary::periodic; }

  /// Number of stored values along one axis.
  std::size_t stored_per_axis() const { return is_periodic() ? points_ - 1 : points_; }
  /// Total number of stored values.
  std::size_t size() const {
    return dim_ == 1 ? stored_per_axis() : stored_per_axis() * stored_per_axis();
  }

  double spacing() const { return 1.0 / static_cast<double>(points_ - 1); }
  double coordinate(std::size_t i) const { return static_cast<double>(i) * spacing(); }

  /// Composite trapezoid weight of stored value `index`.
  double weight(std::size_t index) const;

  std::string describe() const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  Grid(int dim, std::size_t points, Boundary boundary);

  int dim_;
  std::size_t points_;
  Boundary boundary_;
};

}  // namespace rfm

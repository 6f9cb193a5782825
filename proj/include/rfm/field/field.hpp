#pragma once

#include <functional>
#include <utility>

#include <Eigen/Core>

#include "rfm/field/grid.hpp"

namespace rfm {

/// Real samples of a function on a Grid. Values are stored row-major with
/// x1 fastest in 2D; periodic grids omit the duplicate endpoint.
class Field {
 public:
  /// Throws std::invalid_argument on a size mismatch or non-finite values.
  Field(Grid grid, Eigen::VectorXd values);

  static Field zeros(const Grid& grid);
  static Field constant(const Grid& grid, double c);
  /// Samples f at every stored node.
  static Field from_function(const Grid& grid, const std::function<double(double)>& f);
  static Field from_function(const Grid& grid, const std::function<double(double, double)>& f);

  const Grid& grid() const { return grid_; }
  const Eigen::VectorXd& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
  double at(std::size_t i1, std::size_t i2) const {
    return values_[static_cast<Eigen::Index>(i2 * grid_.stored_per_axis() + i1)];
  }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

  /// Pointwise map; result must stay finite.
  Field map(const std::function<double(double)>& f) const;

 private:
  Grid grid_;
  Eigen::VectorXd values_;
};

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(double s, const Field& a);

/// Throws std::invalid_argument when the grids differ.
void require_same_grid(const Grid& a, const Grid& b, const char* what);

}  // namespace rfm

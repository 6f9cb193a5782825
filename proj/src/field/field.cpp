#include "rfm/field/field.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rfm {

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b))
    throw std::invalid_argument(std::string(what) + ": grid mismatch (" + a.describe() + " vs " +
                                b.describe() + ")");
}

Field::Field(Grid grid, Eigen::VectorXd values) : grid_(grid), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.size()) != grid_.size())
    throw std::invalid_argument("field has " + std::to_string(values_.size()) +
                                " values but grid stores " + std::to_string(grid_.size()));
  if (!values_.allFinite()) throw std::invalid_argument("field contains non-finite values");
}

Field Field::zeros(const Grid& grid) {
  return Field(grid, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size())));
}

Field Field::constant(const Grid& grid, double c) {
  return Field(grid, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(grid.size()), c));
}

Field Field::from_function(const Grid& grid, const std::function<double(double)>& f) {
  if (grid.dim() != 1) throw std::invalid_argument("from_function(x) needs a 1D grid");
  Eigen::VectorXd v(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) v[static_cast<Eigen::Index>(i)] = f(grid.coordinate(i));
  return Field(grid, std::move(v));
}

Field Field::from_function(const Grid& grid, const std::function<double(double, double)>& f) {
  if (grid.dim() != 2) throw std::invalid_argument("from_function(x1, x2) needs a 2D grid");
  const std::size_t n = grid.stored_per_axis();
  Eigen::VectorXd v(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i2 = 0; i2 < n; ++i2)
    for (std::size_t i1 = 0; i1 < n; ++i1)
      v[static_cast<Eigen::Index>(i2 * n + i1)] = f(grid.coordinate(i1), grid.coordinate(i2));
  return Field(grid, std::move(v));
}

Field Field::map(const std::function<double(double)>& f) const {
  Eigen::VectorXd v = values_.unaryExpr(f);
  return Field(grid_, std::move(v));
}

Field operator+(const Field& a, const Field& b) {
  require_same_grid(a.grid(), b.grid(), "field sum");
  return Field(a.grid(), a.values() + b.values());
}

Field operator-(const Field& a, const Field& b) {
  require_same_grid(a.grid(), b.grid(), "field difference");
  return Field(a.grid(), a.values() - b.values());
}

Field operator*(double s, const Field& a) { return Field(a.grid(), s * a.values()); }

}  // namespace rfm

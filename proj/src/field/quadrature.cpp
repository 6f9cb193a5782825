#include "rfm/field/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace rfm {

Eigen::VectorXd quadrature_weights(const Grid& grid) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) w[static_cast<Eigen::Index>(i)] = grid.weight(i);
  return w;
}

double inner_product_l2(const Field& u, const Field& v) {
  require_same_grid(u.grid(), v.grid(), "inner_product_l2");
  const Eigen::VectorXd w = quadrature_weights(u.grid());
  return (w.array() * u.values().array() * v.values().array()).sum();
}

double norm_l2(const Field& u) { return std::sqrt(inner_product_l2(u, u)); }

double relative_l2_error(const Field& truth, const Field& approx) {
  require_same_grid(truth.grid(), approx.grid(), "relative_l2_error");
  const double denom = norm_l2(truth);
  if (!(denom > 0.0)) throw std::domain_error("relative_l2_error: truth has zero L2 norm");
  return norm_l2(truth - approx) / denom;
}

double integral(const Field& u) {
  return quadrature_weights(u.grid()).dot(u.values());
}

}  // namespace rfm

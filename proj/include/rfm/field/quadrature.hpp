#pragma once

#include <Eigen/Core>

#include "rfm/field/field.hpp"

namespace rfm {

/// Composite trapezoid weights for every stored value of `grid`.
Eigen::VectorXd quadrature_weights(const Grid& grid);

/// Trapezoid approximation of the L2 inner product over the unit domain.
double inner_product_l2(const Field& u, const Field& v);
double norm_l2(const Field& u);

/// ||truth - approx|| / ||truth||; throws std::domain_error if ||truth|| == 0.
double relative_l2_error(const Field& truth, const Field& approx);

/// Trapezoid approximation of the integral of u over the unit domain.
double integral(const Field& u);

}  // namespace rfm

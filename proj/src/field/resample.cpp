#include "rfm/field/resample.hpp"

#include <stdexcept>

namespace rfm {

bool is_nested(const Grid& source, const Grid& target) {
  if (source.dim() != target.dim() || source.boundary() != target.boundary()) return false;
  const std::size_t fine = source.points_per_axis() - 1;
  const std::size_t coarse = target.points_per_axis() - 1;
  return coarse <= fine && fine % coarse == 0;
}

Field subsample(const Field& u, const Grid& target) {
  const Grid& source = u.grid();
  if (!is_nested(source, target))
    throw std::invalid_argument("subsample: " + target.describe() + " is not nested in " +
                                source.describe());
  const std::size_t stride = (source.points_per_axis() - 1) / (target.points_per_axis() - 1);
  const std::size_t ns = source.stored_per_axis();
  const std::size_t nt = target.stored_per_axis();
  Eigen::VectorXd v(static_cast<Eigen::Index>(target.size()));
  if (target.dim() == 1) {
    for (std::size_t i = 0; i < nt; ++i) v[static_cast<Eigen::Index>(i)] = u[i * stride];
  } else {
    for (std::size_t i2 = 0; i2 < nt; ++i2)
      for (std::size_t i1 = 0; i1 < nt; ++i1)
        v[static_cast<Eigen::Index>(i2 * nt + i1)] = u[(i2 * stride) * ns + i1 * stride];
  }
  return Field(target, std::move(v));
}

}  // namespace rfm

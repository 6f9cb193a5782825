#pragma once

#include "rfm/field/field.hpp"

namespace rfm {

/// True when `target` nodes are a subset of `source` nodes.
bool is_nested(const Grid& source, const Grid& target);

/// Copies values at the nodes shared with a coarser nested grid.
/// Throws std::invalid_argument when the grids are not nested.
Field subsample(const Field& u, const Grid& target);

}  // namespace rfm

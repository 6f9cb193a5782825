#include "rfm/field/grid.hpp"

#include <sstream>
#include <stdexcept>

namespace rfm {

std::string_view to_string(Boundary b) {
  switch (b) {
    case Boundary::periodic: return "periodic";
    case Boundary::dirichlet: return "dirichlet";
    case Boundary::neumann: return "neumann";
  }
  return "unknown";
}

Boundary boundary_from_string(std::string_view s) {
  if (s == "periodic") return Boundary::periodic;
  if (s == "dirichlet") return Boundary::dirichlet;
  if (s == "neumann") return Boundary::neumann;
  throw std::invalid_argument("unknown boundary '" + std::string(s) + "'");
}

Grid::Grid(int dim, std::size_t points, Boundary boundary)
    : dim_(dim), points_(points), boundary_(boundary) {
  if (points_ < 3) throw std::invalid_argument("grid needs at least 3 points per axis");
  if (dim_ == 2 && boundary_ == Boundary::periodic)
    throw std::invalid_argument("periodic grids are 1D only");
}

Grid Grid::periodic(std::size_t points) { return Grid(1, points, Boundary::periodic); }

Grid Grid::interval(std::size_t points, Boundary boundary) { return Grid(1, points, boundary); }

Grid Grid::square(std::size_t points_per_axis, Boundary boundary) {
  return Grid(2, points_per_axis, boundary);
}

double Grid::weight(std::size_t index) const {
  const double h = spacing();
  if (is_periodic()) return h;
  const std::size_t n = stored_per_axis();
  auto axis = [&](std::size_t i) { return (i == 0 || i == n - 1) ? 0.5 * h : h; };
  if (dim_ == 1) return axis(index);
  return axis(index % n) * axis(index / n);
}

std::string Grid::describe() const {
  std::ostringstream os;
  os << dim_ << "D " << to_string(boundary_) << " grid, " << points_ << " points per axis";
  return os.str();
}

}  // namespace rfm

#include "rfm/field/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rfm {

namespace {

constexpr const char* kMagic = "RFMFIELDS 1";

std::size_t values_on_disk(const Grid& g) {
  return g.dim() == 1 ? g.points_per_axis() : g.points_per_axis() * g.points_per_axis();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void write_f64_le(std::ostream& os, const double* data, std::size_t count) {
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * 8));
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      std::uint64_t bits;
      std::memcpy(&bits, data + i, 8);
      char buf[8];
      for (int b = 0; b < 8; ++b) buf[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
      os.write(buf, 8);
    }
  }
}

void read_f64_le(std::istream& is, double* data, std::size_t count) {
  if constexpr (std::endian::native == std::endian::little) {
    is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * 8));
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      unsigned char buf[8];
      is.read(reinterpret_cast<char*>(buf), 8);
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(buf[b]) << (8 * b);
      std::memcpy(data + i, &bits, 8);
    }
  }
  if (!is) throw std::runtime_error("unexpected end of binary data");
}

void write_fields(const std::filesystem::path& path, const FieldCollection& c) {
  for (const auto& f : c.fields) require_same_grid(c.grid, f.grid(), "write_fields");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << kMagic << '\n'
     << "dim: " << c.grid.dim() << '\n'
     << "points_per_axis: " << c.grid.points_per_axis() << '\n'
     << "boundary: " << to_string(c.grid.boundary()) << '\n'
     << "count: " << c.fields.size() << '\n';
  for (const auto& [k, v] : c.provenance) {
    if (k.find_first_of(":\n") != std::string::npos || v.find('\n') != std::string::npos)
      throw std::invalid_argument("provenance entries must be single-line and colon-free keys");
    os << "meta." << k << ": " << v << '\n';
  }
  os << "end_header\n";
  std::vector<double> buf(values_on_disk(c.grid));
  for (const auto& f : c.fields) {
    const auto& v = f.values();
    if (c.grid.is_periodic()) {
      std::copy(v.data(), v.data() + v.size(), buf.begin());
      buf.back() = v[0];
    } else {
      std::copy(v.data(), v.data() + v.size(), buf.begin());
    }
    write_f64_le(os, buf.data(), buf.size());
  }
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

namespace {

FieldCollection parse_header(std::istream& is, const std::filesystem::path& path,
                             std::size_t& count) {
  std::string line;
  if (!std::getline(is, line) || trim(line) != kMagic)
    throw std::runtime_error(path.string() + ": not a field container");
  int dim = 0;
  std::size_t points = 0;
  std::string boundary;
  bool have_count = false;
  std::map<std::string, std::string> meta;
  while (std::getline(is, line)) {
    if (trim(line) == "end_header") break;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw std::runtime_error(path.string() + ": bad header line");
    const std::string key = trim(line.substr(0, colon));
    const std::string value = trim(line.substr(colon + 1));
    if (key == "dim") dim = std::stoi(value);
    else if (key == "points_per_axis") points = std::stoul(value);
    else if (key == "boundary") boundary = value;
    else if (key == "count") { count = std::stoul(value); have_count = true; }
    else if (key.rfind("meta.", 0) == 0) meta[key.substr(5)] = value;
    else throw std::runtime_error(path.string() + ": unknown header key '" + key + "'");
  }
  if (!have_count || points == 0 || boundary.empty())
    throw std::runtime_error(path.string() + ": incomplete header");
  const Boundary b = boundary_from_string(boundary);
  Grid g = dim == 1 ? (b == Boundary::periodic ? Grid::periodic(points) : Grid::interval(points, b))
           : dim == 2 ? Grid::square(points, b)
                      : throw std::runtime_error(path.string() + ": bad dim");
  return FieldCollection{g, {}, std::move(meta)};
}

}  // namespace

FieldCollection read_field_header(const std::filesystem::path& path, std::size_t* count) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::size_t n = 0;
  auto c = parse_header(is, path, n);
  if (count) *count = n;
  return c;
}

FieldCollection read_fields(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::size_t count = 0;
  auto c = parse_header(is, path, count);
  std::vector<double> buf(values_on_disk(c.grid));
  c.fields.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    read_f64_le(is, buf.data(), buf.size());
    Eigen::VectorXd v(static_cast<Eigen::Index>(c.grid.size()));
    std::copy(buf.begin(), buf.begin() + v.size(), v.data());
    c.fields.emplace_back(c.grid, std::move(v));
  }
  return c;
}

void write_fields_csv(const std::filesystem::path& path, const std::vector<Field>& fields) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << "index";
  for (std::size_t j = 0; j < fields.size(); ++j) os << ",field" << j;
  os << '\n';
  if (fields.empty()) return;
  const std::size_t n = fields.front().size();
  os.precision(17);
  for (std::size_t i = 0; i < n; ++i) {
    os << i;
    for (const auto& f : fields) os << ',' << f[i];
    os << '\n';
  }
}

}  // namespace rfm

#include "rfm/core/model_io.hpp"

#include <charconv>
#include <optional>
#include <tuple>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rfm/field/field_io.hpp"

namespace rfm {

namespace {

constexpr const char* kMagic = "RFMMODEL 1";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void check_single_line(const std::string& k, const std::string& v) {
  if (k.find_first_of(":\n ") != std::string::npos || v.find('\n') != std::string::npos)
    throw std::invalid_argument("model header entry '" + k + "' is not a single-line key/value");
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, p);
}

void save_model(const std::filesystem::path& path, const TrainedModel& model,
                const std::map<std::string, std::string>& meta) {
  FamilyRecord rec = model.family().record();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const Grid& g = model.train_grid();
  const auto& md = model.metadata();
  os << kMagic << '\n'
     << "kind: " << rec.kind << '\n'
     << "m: " << model.family().size() << '\n'
     << "lambda: " << format_double(model.ridge()) << '\n'
     << "train_grid: " << g.dim() << ' ' << g.points_per_axis() << ' ' << to_string(g.boundary()) << '\n'
     << "n: " << md.n << '\n'
     << "seed: " << md.seed << '\n'
     << "solver.method: " << (md.solver.method.empty() ? "none" : md.solver.method) << '\n'
     << "solver.rank: " << md.solver.rank << '\n'
     << "solver.relative_residual: " << format_double(md.solver.relative_residual) << '\n'
     << "solver.sigma_max: " << format_double(md.solver.sigma_max) << '\n'
     << "solver.cutoff: " << format_double(md.solver.cutoff) << '\n';
  for (const auto& [k, v] : rec.hyper) {
    check_single_line(k, v);
    os << "hyper." << k << ": " << v << '\n';
  }
  for (const auto& [k, v] : meta) {
    check_single_line(k, v);
    os << "meta." << k << ": " << v << '\n';
  }
  for (const auto& b : rec.blocks) {
    if (b.name == "alpha" || b.name.find_first_of(" \n") != std::string::npos)
      throw std::invalid_argument("bad block name '" + b.name + "'");
    os << "block: " << b.name << ' ' << b.data.rows() << ' ' << b.data.cols() << '\n';
  }
  os << "block: alpha " << model.coeffs().size() << " 1\n";
  os << "end_header\n";
  for (const auto& b : rec.blocks)
    write_f64_le(os, b.data.data(), static_cast<std::size_t>(b.data.size()));
  write_f64_le(os, model.coeffs().data(), static_cast<std::size_t>(model.coeffs().size()));
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

LoadedModel load_model(const std::filesystem::path& path, const FamilyDecoder& decode) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line) || trim(line) != kMagic)
    throw std::runtime_error(path.string() + ": not a model file");

  FamilyRecord rec;
  std::map<std::string, std::string> meta;
  std::vector<std::tuple<std::string, Eigen::Index, Eigen::Index>> layout;
  std::size_t m = 0;
  double lambda = 0.0;
  TrainingMetadata md;
  std::optional<Grid> grid;
  while (std::getline(is, line)) {
    if (trim(line) == "end_header") break;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw std::runtime_error(path.string() + ": bad header line");
    const std::string key = trim(line.substr(0, colon));
    const std::string value = trim(line.substr(colon + 1));
    if (key == "kind") rec.kind = value;
    else if (key == "m") m = std::stoul(value);
    else if (key == "lambda") lambda = std::stod(value);
    else if (key == "n") md.n = std::stoul(value);
    else if (key == "seed") md.seed = std::stoull(value);
    else if (key == "solver.method") md.solver.method = value;
    else if (key == "solver.rank") md.solver.rank = std::stoul(value);
    else if (key == "solver.relative_residual") md.solver.relative_residual = std::stod(value);
    else if (key == "solver.sigma_max") md.solver.sigma_max = std::stod(value);
    else if (key == "solver.cutoff") md.solver.cutoff = std::stod(value);
    else if (key == "train_grid") {
      std::istringstream ss(value);
      int dim = 0;
      std::size_t pts = 0;
      std::string b;
      ss >> dim >> pts >> b;
      const Boundary bd = boundary_from_string(b);
      grid = dim == 2 ? Grid::square(pts, bd)
                      : (bd == Boundary::periodic ? Grid::periodic(pts) : Grid::interval(pts, bd));
    } else if (key == "block") {
      std::istringstream ss(value);
      std::string name;
      Eigen::Index rows = 0, cols = 0;
      ss >> name >> rows >> cols;
      if (!ss || rows < 0 || cols < 0) throw std::runtime_error(path.string() + ": bad block line");
      layout.emplace_back(name, rows, cols);
    } else if (key.rfind("hyper.", 0) == 0) rec.hyper[key.substr(6)] = value;
    else if (key.rfind("meta.", 0) == 0) meta[key.substr(5)] = value;
    else throw std::runtime_error(path.string() + ": unknown header key '" + key + "'");
  }
  if (!grid || rec.kind.empty() || layout.empty() || std::get<0>(layout.back()) != "alpha")
    throw std::runtime_error(path.string() + ": incomplete model header");

  Eigen::VectorXd alpha;
  for (const auto& [name, rows, cols] : layout) {
    Eigen::MatrixXd b(rows, cols);
    read_f64_le(is, b.data(), static_cast<std::size_t>(b.size()));
    if (name == "alpha") alpha = b.col(0);
    else rec.blocks.push_back(NamedBlock{name, std::move(b)});
  }
  FamilyPtr family = decode(rec);
  if (family->size() != m) throw std::runtime_error(path.string() + ": feature count mismatch");
  return LoadedModel{TrainedModel(std::move(family), std::move(alpha), lambda, *grid, md), std::move(meta)};
}

}  // namespace rfm

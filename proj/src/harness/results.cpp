#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rfm/harness/harness.hpp"

namespace rfm::harness {

namespace fs = std::filesystem;

namespace {

// Notes are free text; quote them and double embedded quotes.
std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (in_quotes) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        in_quotes = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      in_quotes = true;
    } else if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (in_quotes) throw std::invalid_argument("unterminated quote in CSV line");
  cells.push_back(cur);
  return cells;
}

std::string format_row(const ResultRow& r) {
  std::ostringstream os;
  os << r.experiment << ',' << r.config_hash << ',' << r.k_train << ',' << r.k_test << ',' << r.m << ',' << r.n
     << ',' << format_double(r.lambda) << ',' << (r.error ? format_double(*r.error) : std::string()) << ','
     << format_double(r.wall_seconds) << ',' << quote(r.note);
  return os.str();
}

std::ofstream open_for_write(const fs::path& path, std::ios::openmode mode = std::ios::trunc) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::out | mode);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

}  // namespace

void ResultTable::append(const ResultTable& other) {
  for (const ResultRow& r : other.rows()) rows_.push_back(r);
}

void ResultTable::write_csv(const fs::path& path) const {
  auto os = open_for_write(path);
  os << kCsvHeader << "\n";
  for (const ResultRow& r : rows_) os << format_row(r) << "\n";
}

void ResultTable::append_to_csv(const fs::path& path) const {
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  auto os = open_for_write(path, std::ios::app);
  if (fresh) os << kCsvHeader << "\n";
  for (const ResultRow& r : rows_) os << format_row(r) << "\n";
}

ResultTable ResultTable::read_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw std::invalid_argument(path.string() + ": not a result table");
  ResultTable t;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto c = split_csv_line(line);
    if (c.size() != 10) throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": expected 10 columns");
    ResultRow r;
    r.experiment = c[0];
    r.config_hash = c[1];
    r.k_train = std::stoul(c[2]);
    r.k_test = std::stoul(c[3]);
    r.m = std::stoul(c[4]);
    r.n = std::stoul(c[5]);
    r.lambda = std::stod(c[6]);
    if (!c[7].empty()) r.error = std::stod(c[7]);
    r.wall_seconds = std::stod(c[8]);
    r.note = c[9];
    t.append(std::move(r));
  }
  return t;
}

std::vector<fs::path> export_results(const ResultTable& table, const fs::path& dir) {
  std::vector<fs::path> written;
  table.write_csv(dir / "results.csv");
  written.push_back(dir / "results.csv");

  std::vector<const ResultRow*> transfer, sweep;
  for (const ResultRow& r : table.rows()) {
    if (!r.error) continue;
    if (r.experiment == "transfer") transfer.push_back(&r);
    if (r.experiment == "sweep-m") sweep.push_back(&r);
  }
  if (!transfer.empty()) {
    auto os = open_for_write(dir / "error_vs_resolution.csv");
    os << "k_train,k_test,error,low_resolution,config_hash\n";
    for (const ResultRow* r : transfer)
      os << r->k_train << ',' << r->k_test << ',' << format_double(*r->error) << ','
         << (r->note == "low-resolution" ? 1 : 0) << ',' << r->config_hash << "\n";
    written.push_back(dir / "error_vs_resolution.csv");
  }
  if (!sweep.empty()) {
    const ResultRow& last = *sweep.back();
    const double c = *last.error * std::sqrt(static_cast<double>(last.m));
    auto os = open_for_write(dir / "error_vs_m.csv");
    os << "m,error,reference,config_hash\n";
    for (const ResultRow* r : sweep)
      os << r->m << ',' << format_double(*r->error) << ',' << format_double(c / std::sqrt(static_cast<double>(r->m)))
         << ',' << r->config_hash << "\n";
    written.push_back(dir / "error_vs_m.csv");
  }
  return written;
}

}  // namespace rfm::harness

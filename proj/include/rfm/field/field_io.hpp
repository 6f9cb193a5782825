#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rfm/field/field.hpp"

namespace rfm {

/// A list of fields on one grid plus free-form provenance entries.
struct FieldCollection {
  Grid grid;
  std::vector<Field> fields;
  std::map<std::string, std::string> provenance;
};

// Container layout:
//   RFMFIELDS 1
//   dim: <1|2>
//   points_per_axis: <K or r>
//   boundary: <periodic|dirichlet|neumann>
//   count: <number of fields>
//   meta.<key>: <value>          (zero or more)
//   end_header
//   <count * values_per_field little-endian float64>
// Periodic fields are written with the duplicate endpoint appended, so each
// field carries points_per_axis^dim values on disk.
void write_fields(const std::filesystem::path& path, const FieldCollection& fields);
FieldCollection read_fields(const std::filesystem::path& path);

/// Reads only the structured-text header (grid, count and provenance).
FieldCollection read_field_header(const std::filesystem::path& path, std::size_t* count = nullptr);

/// One field per column, first column the node index, for plotting.
void write_fields_csv(const std::filesystem::path& path, const std::vector<Field>& fields);

// Little-endian float64 helpers shared with the model format.
void write_f64_le(std::ostream& os, const double* data, std::size_t count);
void read_f64_le(std::istream& is, double* data, std::size_t count);

}  // namespace rfm

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>

#include "rfm/core/rfm.hpp"

namespace rfm {

/// Rebuilds a concrete family from its serialized record.
using FamilyDecoder = std::function<FamilyPtr(const FamilyRecord&)>;

// Model file layout:
//   RFMMODEL 1
//   kind: <feature kind>
//   m: <feature count>
//   lambda: <ridge, %.17g>
//   train_grid: <dim> <points_per_axis> <boundary>
//   n: <training pairs>   seed: <seed>
//   solver.*: diagnostics
//   hyper.<key>: <value>            (family hyperparameters)
//   meta.<key>: <value>             (provenance, e.g. config hash)
//   block: <name> <rows> <cols>     (one line per block, in data order)
//   end_header
// followed by each block as column-major little-endian float64, the
// coefficient vector last under the name "alpha".
void save_model(const std::filesystem::path& path, const TrainedModel& model,
                const std::map<std::string, std::string>& meta = {});

struct LoadedModel {
  TrainedModel model;
  std::map<std::string, std::string> meta;
};

LoadedModel load_model(const std::filesystem::path& path, const FamilyDecoder& decode);

/// Shortest round-trip decimal text for a double.
std::string format_double(double x);

}  // namespace rfm

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "rfm/burgers/burgers.hpp"
#include "rfm/core/model_io.hpp"
#include "rfm/core/rfm.hpp"
#include "rfm/darcy/darcy.hpp"
#include "rfm/grf/grf.hpp"

namespace rfm::harness {

enum class Problem { burgers, darcy, brownian_bridge };

std::string_view to_string(Problem p);
Problem problem_from_string(std::string_view s);

struct Seeds {
  std::uint64_t train = 1;
  std::uint64_t test = 2;
  std::uint64_t features = 7;
};

struct DataConfig {
  std::size_t n = 512;
  std::size_t n_test = 500;
  /// Resolution the reference solver runs at (K for 1D, r for 2D).
  std::size_t master_resolution = 513;
  /// Coarser nested resolutions written alongside the master files.
  std::vector<std::size_t> resolutions{33, 65, 129, 257};
  /// Burgers output times; other problems use a single output.
  std::vector<double> times{0.5, 1.0, 1.5, 2.0};
  double viscosity = 1e-2;
  grf::GrfSpec prior{7.0, 2.5, grf::GrfBoundary::periodic_1d, 0};
  double a_plus = 12.0;
  double a_minus = 3.0;
};

struct TrainConfig {
  std::size_t m = 1024;
  double lambda = 0.0;
  std::size_t resolution = 129;
  /// Index into DataConfig::times selecting the training target.
  std::size_t time_index = 1;
};

struct ExperimentConfig {
  Problem problem = Problem::burgers;
  std::string name = "burgers";
  std::filesystem::path output_dir = "runs/burgers";
  Seeds seeds;
  DataConfig data;
  TrainConfig train;
  burgers::FourierFeatureSpec burgers_features;
  darcy::PredictorCorrectorSpec darcy_features;
  int bridge_modes = 0;  // 0: grid default
  std::vector<std::size_t> transfer_resolutions{33, 65, 257, 513};
  int semigroup_steps = 4;
  std::vector<std::size_t> sweep_m{256, 512, 1024};

  /// Defaults for one problem, matching the reference experiments.
  static ExperimentConfig defaults(Problem p);
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& c);
/// Missing keys take the problem's defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);

ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const ExperimentConfig& c);

/// Applies "a.b.c=value" to the JSON tree; the value is parsed as JSON when
/// possible and kept as a string otherwise.
void apply_override(nlohmann::json& j, const std::string& assignment);

/// FNV-1a 64 of the canonical JSON with output_dir removed, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);
/// Same hash over only the fields that determine the datasets.
std::string data_hash(const ExperimentConfig& c);

struct ResultRow {
  std::string experiment;
  std::string config_hash;
  std::size_t k_train = 0;
  std::size_t k_test = 0;
  std::size_t m = 0;
  std::size_t n = 0;
  double lambda = 0.0;
  std::optional<double> error;
  double wall_seconds = 0.0;
  std::string note;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

/// Append-only list of rows.
class ResultTable {
 public:
  void append(ResultRow row) { rows_.push_back(std::move(row)); }
  void append(const ResultTable& other);
  const std::vector<ResultRow>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }

  void write_csv(const std::filesystem::path& path) const;
  static ResultTable read_csv(const std::filesystem::path& path);
  /// Appends rows to an existing CSV (writing the header if it is new).
  void append_to_csv(const std::filesystem::path& path) const;

 private:
  std::vector<ResultRow> rows_;
};

inline const char* kCsvHeader = "experiment,config_hash,k_train,k_test,m,n,lambda,error,wall_seconds,note";

// Dataset files.
std::filesystem::path input_path(const ExperimentConfig& c, std::string_view split, std::size_t resolution);
std::filesystem::path output_path(const ExperimentConfig& c, std::string_view split, std::size_t resolution,
                                  std::size_t time_index);
std::filesystem::path model_path(const ExperimentConfig& c);

Grid problem_grid(Problem p, std::size_t resolution);

/// Writes train and test inputs/outputs at the master resolution and every
/// requested nested resolution. Returns the paths written.
std::vector<std::filesystem::path> generate_dataset(const ExperimentConfig& c);

/// Loads one split at one resolution and output time.
Dataset load_dataset(const ExperimentConfig& c, std::string_view split, std::size_t resolution,
                     std::size_t time_index);

/// Fresh feature family drawn from the feature seed.
FamilyPtr make_family(const ExperimentConfig& c, std::size_t m);
/// Rebuilds any built-in family from its record.
FamilyPtr decode_family(const FamilyRecord& rec);

struct TrainingOutcome {
  TrainedModel model;
  ResultRow row;
  std::filesystem::path model_file;
};

TrainingOutcome run_training(const ExperimentConfig& c);

/// Evaluates the saved model at every resolution against the test split.
ResultTable run_mesh_transfer(const ExperimentConfig& c, const std::filesystem::path& model_file,
                              const std::vector<std::size_t>& resolutions);

struct SemigroupResult {
  ResultTable table;
  std::vector<std::string> warnings;
};

/// Errors of the j-fold composed model against outputs at times j*T.
/// The j-th row needs DataConfig::times[j-1] == j * times[time_index].
SemigroupResult run_semigroup_experiment(const ExperimentConfig& c, const std::filesystem::path& model_file,
                                         int j_max);

/// Trains one model per m at the training resolution.
ResultTable run_sweep_m(const ExperimentConfig& c, const std::vector<std::size_t>& ms);

/// Writes results.csv and, when the rows allow, error_vs_resolution.csv and
/// error_vs_m.csv (with the c m^-1/2 reference fitted to the last point).
std::vector<std::filesystem::path> export_results(const ResultTable& table, const std::filesystem::path& dir);

/// True when the file's header records `hash` as its config hash.
bool check_provenance(const std::filesystem::path& file, const std::string& hash);

struct VerifyCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
};

/// Small kernel-lab checks of the ridge/kernel equivalence and kernel
/// convergence. Seconds to run.
std::vector<VerifyCheck> run_verify(std::uint64_t seed);

}  // namespace rfm::harness

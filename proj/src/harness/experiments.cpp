#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "rfm/core/parallel.hpp"
#include "rfm/field/field_io.hpp"
#include "rfm/field/quadrature.hpp"
#include "rfm/field/resample.hpp"
#include "rfm/harness/harness.hpp"
#include "rfm/kernel/kernel_lab.hpp"

namespace rfm::harness {

namespace fs = std::filesystem;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::size_t> written_resolutions(const ExperimentConfig& c) {
  std::vector<std::size_t> rs{c.data.master_resolution};
  for (std::size_t r : c.data.resolutions)
    if (std::find(rs.begin(), rs.end(), r) == rs.end()) rs.push_back(r);
  return rs;
}

struct Sample {
  Field input;
  std::vector<Field> outputs;  // one per output time
};

Sample generate_sample(const ExperimentConfig& c, const Grid& master, std::uint64_t seed, std::size_t index) {
  auto rng = grf::sample_rng(seed, index);
  switch (c.problem) {
    case Problem::burgers: {
      Field a = grf::sample_grf(c.data.prior, master, rng);
      const burgers::BurgersProblem prob{c.data.viscosity, c.data.times.back()};
      const double dt = burgers::default_time_step(master, *std::min_element(c.data.times.begin(), c.data.times.end()));
      auto outs = burgers::burgers_solve_snapshots(prob, a, dt, c.data.times);
      return {std::move(a), std::move(outs)};
    }
    case Problem::darcy: {
      grf::LevelSetSpec ls{c.data.a_plus, c.data.a_minus, c.data.prior};
      Field a = grf::sample_levelset(ls, master, rng);
      Field u = darcy::darcy_solve_fd(darcy::DarcyProblem{c.darcy_features.source}, a);
      return {std::move(a), {std::move(u)}};
    }
    case Problem::brownian_bridge: {
      auto [a, y] = kernel::bb_operator_sample(master, rng);
      return {std::move(a), {std::move(y)}};
    }
  }
  throw std::logic_error("unreachable");
}

std::map<std::string, std::string> base_provenance(const ExperimentConfig& c) {
  return {{"config_hash", config_hash(c)}, {"data_hash", data_hash(c)}, {"problem", std::string(to_string(c.problem))}};
}

std::string solver_description(const ExperimentConfig& c) {
  switch (c.problem) {
    case Problem::burgers: return "fourier-pseudospectral if-rk4 dealias-2/3";
    case Problem::darcy: return "fd-5point harmonic-faces sparse-ldlt";
    case Problem::brownian_bridge: return "fd-3point thomas";
  }
  return "";
}

void write_split(const ExperimentConfig& c, std::string_view split, std::uint64_t seed, std::size_t count,
                 std::vector<fs::path>& written) {
  const Grid master = problem_grid(c.problem, c.data.master_resolution);
  std::vector<Sample> samples(count, Sample{Field::zeros(master), {}});
  FirstError err;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < count; ++i) {
    err.run([&] {
      try {
        samples[i] = generate_sample(c, master, seed, i);
      } catch (const std::exception& e) {
        std::ostringstream os;
        os << "generating " << split << " sample " << i << ": " << e.what();
        throw std::runtime_error(os.str());
      }
    });
  }
  err.rethrow();

  const std::size_t n_times = c.problem == Problem::burgers ? c.data.times.size() : 1;
  for (std::size_t r : written_resolutions(c)) {
    const Grid g = problem_grid(c.problem, r);
    auto prov = base_provenance(c);
    prov["split"] = std::string(split);
    prov["seed"] = std::to_string(seed);
    prov["solver"] = solver_description(c);
    prov["master_resolution"] = std::to_string(c.data.master_resolution);

    std::vector<Field> inputs;
    for (const Sample& s : samples) inputs.push_back(subsample(s.input, g));
    FieldCollection in{g, std::move(inputs), prov};
    in.provenance["role"] = "input";
    write_fields(input_path(c, split, r), in);
    written.push_back(input_path(c, split, r));

    for (std::size_t t = 0; t < n_times; ++t) {
      std::vector<Field> outs;
      for (const Sample& s : samples) outs.push_back(subsample(s.outputs[t], g));
      FieldCollection out{g, std::move(outs), prov};
      out.provenance["role"] = "output";
      out.provenance["time"] = format_double(c.data.times[t]);
      write_fields(output_path(c, split, r, t), out);
      written.push_back(output_path(c, split, r, t));
    }
  }
}

std::size_t model_time_index(const LoadedModel& lm) {
  auto it = lm.meta.find("time_index");
  return it == lm.meta.end() ? 0 : static_cast<std::size_t>(std::stoul(it->second));
}

void require_matching_problem(const ExperimentConfig& c, const LoadedModel& lm) {
  auto it = lm.meta.find("problem");
  if (it != lm.meta.end() && it->second != to_string(c.problem))
    throw std::invalid_argument("model was trained for problem '" + it->second + "', config is '" +
                                std::string(to_string(c.problem)) + "'");
}

}  // namespace

Grid problem_grid(Problem p, std::size_t resolution) {
  switch (p) {
    case Problem::burgers: return Grid::periodic(resolution);
    case Problem::darcy: return Grid::square(resolution, Boundary::dirichlet);
    case Problem::brownian_bridge: return Grid::interval(resolution, Boundary::dirichlet);
  }
  throw std::logic_error("unreachable");
}

fs::path input_path(const ExperimentConfig& c, std::string_view split, std::size_t resolution) {
  std::ostringstream os;
  os << split << "_inputs_r" << resolution << ".fields";
  return c.output_dir / "data" / os.str();
}

fs::path output_path(const ExperimentConfig& c, std::string_view split, std::size_t resolution,
                     std::size_t time_index) {
  std::ostringstream os;
  os << split << "_outputs_r" << resolution << "_t" << time_index << ".fields";
  return c.output_dir / "data" / os.str();
}

fs::path model_path(const ExperimentConfig& c) {
  std::ostringstream os;
  os << c.name << "_m" << c.train.m << "_r" << c.train.resolution << "_t" << c.train.time_index << ".model";
  return c.output_dir / "models" / os.str();
}

std::vector<fs::path> generate_dataset(const ExperimentConfig& c) {
  c.validate();
  fs::create_directories(c.output_dir / "data");
  std::vector<fs::path> written;
  write_split(c, "train", c.seeds.train, c.data.n, written);
  if (c.data.n_test > 0) write_split(c, "test", c.seeds.test, c.data.n_test, written);
  return written;
}

Dataset load_dataset(const ExperimentConfig& c, std::string_view split, std::size_t resolution,
                     std::size_t time_index) {
  const fs::path ip = input_path(c, split, resolution);
  const fs::path op = output_path(c, split, resolution, time_index);
  if (!fs::exists(ip) || !fs::exists(op))
    throw std::runtime_error("dataset " + ip.string() + " not found; run `generate` first");
  FieldCollection in = read_fields(ip);
  FieldCollection out = read_fields(op);
  const std::string want = data_hash(c);
  for (const auto* fc : {&in, &out}) {
    auto it = fc->provenance.find("data_hash");
    if (it == fc->provenance.end() || it->second != want)
      throw std::runtime_error("dataset in " + c.output_dir.string() +
                               " was generated from different data settings; rerun `generate`");
  }
  Dataset d{in.grid, std::move(in.fields), std::move(out.fields), in.provenance};
  d.validate();
  return d;
}

FamilyPtr make_family(const ExperimentConfig& c, std::size_t m) {
  switch (c.problem) {
    case Problem::burgers: return burgers::FourierFeatureFamily::sample(c.burgers_features, m, c.seeds.features);
    case Problem::darcy: return darcy::PredictorCorrectorFamily::sample(c.darcy_features, m, c.seeds.features);
    case Problem::brownian_bridge: {
      const int modes = c.bridge_modes > 0 ? c.bridge_modes
                                           : kernel::bb_default_modes(problem_grid(c.problem, c.train.resolution));
      return kernel::BrownianBridgeFamily::sample(modes, m, c.seeds.features);
    }
  }
  throw std::logic_error("unreachable");
}

FamilyPtr decode_family(const FamilyRecord& rec) {
  switch (feature_kind_from_string(rec.kind)) {
    case FeatureKind::fourier_burgers: return burgers::FourierFeatureFamily::from_record(rec);
    case FeatureKind::predictor_corrector_darcy: return darcy::PredictorCorrectorFamily::from_record(rec);
    case FeatureKind::brownian_bridge: return kernel::BrownianBridgeFamily::from_record(rec);
    case FeatureKind::custom: break;
  }
  throw std::invalid_argument("feature kind '" + rec.kind + "' cannot be rebuilt from a file");
}

TrainingOutcome run_training(const ExperimentConfig& c) {
  c.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset data = load_dataset(c, "train", c.train.resolution, c.train.time_index);
  TrainedModel model = train(make_family(c, c.train.m), data, c.train.lambda, c.seeds.features);
  auto meta = base_provenance(c);
  meta["time_index"] = std::to_string(c.train.time_index);
  meta["time"] = format_double(c.data.times[c.train.time_index]);
  const fs::path file = model_path(c);
  fs::create_directories(file.parent_path());
  save_model(file, model, meta);

  ResultRow row;
  row.experiment = "train";
  row.config_hash = config_hash(c);
  row.k_train = row.k_test = c.train.resolution;
  row.m = c.train.m;
  row.n = data.size();
  row.lambda = c.train.lambda;
  if (c.data.n_test > 0) {
    const Dataset test = load_dataset(c, "test", c.train.resolution, c.train.time_index);
    row.error = expected_relative_test_error(model, test);
  }
  row.wall_seconds = seconds_since(t0);
  std::ostringstream note;
  note << "solver=" << model.metadata().solver.method << " rank=" << model.metadata().solver.rank;
  row.note = note.str();
  return TrainingOutcome{std::move(model), std::move(row), file};
}

ResultTable run_mesh_transfer(const ExperimentConfig& c, const fs::path& model_file,
                              const std::vector<std::size_t>& resolutions) {
  const LoadedModel lm = load_model(model_file, decode_family);
  require_matching_problem(c, lm);
  const std::size_t t = model_time_index(lm);
  ResultTable table;
  for (std::size_t r : resolutions) {
    const auto t0 = std::chrono::steady_clock::now();
    const Dataset test = load_dataset(c, "test", r, t);
    ResultRow row;
    row.experiment = "transfer";
    row.config_hash = config_hash(c);
    row.k_train = lm.model.train_grid().points_per_axis();
    row.k_test = r;
    row.m = lm.model.family().size();
    row.n = lm.model.metadata().n;
    row.lambda = lm.model.ridge();
    row.error = expected_relative_test_error(lm.model, test);
    row.wall_seconds = seconds_since(t0);
    // Below this size the error is dominated by discretization error.
    if (r <= 17) row.note = "low-resolution";
    table.append(std::move(row));
  }
  return table;
}

SemigroupResult run_semigroup_experiment(const ExperimentConfig& c, const fs::path& model_file, int j_max) {
  if (c.problem != Problem::burgers) throw std::invalid_argument("semigroup experiments need the burgers problem");
  if (j_max < 1) throw std::invalid_argument("semigroup: j_max must be >= 1");
  const LoadedModel lm = load_model(model_file, decode_family);
  require_matching_problem(c, lm);
  const double horizon = c.data.times.at(model_time_index(lm));
  const std::size_t r = lm.model.train_grid().points_per_axis();

  SemigroupResult out;
  std::optional<double> previous;
  for (int j = 1; j <= j_max; ++j) {
    const double target = j * horizon;
    std::size_t idx = c.data.times.size();
    for (std::size_t i = 0; i < c.data.times.size(); ++i)
      if (std::abs(c.data.times[i] - target) <= 1e-9 * std::max(1.0, target)) idx = i;
    if (idx == c.data.times.size()) {
      std::ostringstream os;
      os << "semigroup: no test outputs at time " << target << " (add it to data.times)";
      throw std::invalid_argument(os.str());
    }
    const auto t0 = std::chrono::steady_clock::now();
    const Dataset test = load_dataset(c, "test", r, idx);
    std::vector<double> errs(test.size());
    FirstError err;
#pragma omp parallel for schedule(dynamic)
    for (std::size_t s = 0; s < test.size(); ++s)
      err.run([&] {
        errs[s] = relative_l2_error(test.outputs[s], burgers::semigroup_compose_eval(lm.model, test.inputs[s], j));
      });
    err.rethrow();
    double mean = 0.0;
    for (double e : errs) mean += e;
    mean /= static_cast<double>(errs.size());

    ResultRow row;
    row.experiment = "semigroup-j" + std::to_string(j);
    row.config_hash = config_hash(c);
    row.k_train = row.k_test = r;
    row.m = lm.model.family().size();
    row.n = lm.model.metadata().n;
    row.lambda = lm.model.ridge();
    row.error = mean;
    row.wall_seconds = seconds_since(t0);
    row.note = "time=" + format_double(target);
    if (previous && mean < *previous) {
      std::ostringstream os;
      os << "semigroup error decreased from j=" << j - 1 << " (" << *previous << ") to j=" << j << " (" << mean << ")";
      out.warnings.push_back(os.str());
    }
    previous = mean;
    out.table.append(std::move(row));
  }
  return out;
}

ResultTable run_sweep_m(const ExperimentConfig& c, const std::vector<std::size_t>& ms) {
  ResultTable table;
  for (std::size_t m : ms) {
    ExperimentConfig cm = c;
    cm.train.m = m;
    TrainingOutcome o = run_training(cm);
    o.row.experiment = "sweep-m";
    table.append(std::move(o.row));
  }
  return table;
}

bool check_provenance(const fs::path& file, const std::string& hash) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + file.string());
  std::string line;
  const std::string key = "meta.config_hash: ";
  // Text headers end at end_header; CSV files carry the hash per row.
  bool csv = file.extension() == ".csv";
  bool found = false;
  while (std::getline(is, line)) {
    if (csv) {
      if (line.rfind("experiment,", 0) == 0) continue;
      const auto first = line.find(',');
      const auto second = line.find(',', first + 1);
      if (first == std::string::npos || second == std::string::npos) return false;
      if (line.substr(first + 1, second - first - 1) != hash) return false;
      found = true;
      continue;
    }
    if (line == "end_header") break;
    if (line.rfind(key, 0) == 0) return line.substr(key.size()) == hash;
  }
  return found;
}

std::vector<VerifyCheck> run_verify(std::uint64_t seed) {
  std::vector<VerifyCheck> checks;
  for (double lambda : {0.0, 1e-3}) {
    const double gap = kernel::ridge_equivalence_gap(8, 16, 65, lambda, seed);
    checks.push_back({"ridge-kernel equivalence, lambda=" + format_double(lambda), gap <= 1e-8, gap, 1e-8});
  }
  const auto kc = kernel::bb_kernel_convergence({100, 1000, 10000}, 1024, seed);
  checks.push_back({"bridge kernel convergence slope", std::abs(kc.slope + 0.5) <= 0.15, kc.slope, 0.15});

  const Dataset d = kernel::bb_operator_dataset(6, 33, seed);
  const kernel::EmpiricalKernelEval ek(kernel::BrownianBridgeFamily::sample(31, 5, seed + 1));
  const auto ops = kernel::assemble_integral_operators(ek, d.inputs);
  const double diff = (ops.a * ops.a_star - ops.t).cwiseAbs().maxCoeff();
  checks.push_back({"A A* = T under empirical measures", diff <= 1e-10, diff, 1e-10});
  return checks;
}

}  // namespace rfm::harness

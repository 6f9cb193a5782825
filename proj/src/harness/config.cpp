#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "rfm/field/resample.hpp"
#include "rfm/harness/harness.hpp"

namespace rfm::harness {

using nlohmann::json;

std::string_view to_string(Problem p) {
  switch (p) {
    case Problem::burgers: return "burgers";
    case Problem::darcy: return "darcy";
    case Problem::brownian_bridge: return "brownian-bridge";
  }
  return "?";
}

Problem problem_from_string(std::string_view s) {
  if (s == "burgers") return Problem::burgers;
  if (s == "darcy") return Problem::darcy;
  if (s == "brownian-bridge") return Problem::brownian_bridge;
  throw std::invalid_argument("unknown problem '" + std::string(s) + "'");
}

ExperimentConfig ExperimentConfig::defaults(Problem p) {
  ExperimentConfig c;
  c.problem = p;
  c.name = std::string(to_string(p));
  c.output_dir = std::filesystem::path("runs") / c.name;
  switch (p) {
    case Problem::burgers:
      break;
    case Problem::darcy:
      c.data.n = 256;
      c.data.n_test = 500;
      c.data.master_resolution = 129;
      c.data.resolutions = {33, 65};
      c.data.times = {0.0};
      c.data.prior = grf::GrfSpec{3.0, 2.0, grf::GrfBoundary::neumann_2d, 0};
      c.train = TrainConfig{512, 1e-8, 33, 0};
      c.transfer_resolutions = {33, 65, 129};
      c.semigroup_steps = 0;
      c.sweep_m = {64, 128, 256, 512};
      break;
    case Problem::brownian_bridge:
      c.data.n = 16;
      c.data.n_test = 16;
      c.data.master_resolution = 65;
      c.data.resolutions = {17, 33};
      c.data.times = {0.0};
      c.train = TrainConfig{8, 0.0, 65, 0};
      c.transfer_resolutions = {17, 33, 65};
      c.semigroup_steps = 0;
      c.sweep_m = {8, 16, 32};
      break;
  }
  return c;
}

void ExperimentConfig::validate() const {
  if (data.n == 0) throw std::invalid_argument("config: data.n must be positive");
  if (data.times.empty()) throw std::invalid_argument("config: data.times must not be empty");
  if (train.time_index >= data.times.size()) throw std::invalid_argument("config: train.time_index out of range");
  if (train.m == 0) throw std::invalid_argument("config: train.m must be positive");
  if (!(train.lambda >= 0.0)) throw std::invalid_argument("config: train.lambda must be >= 0");
  const Grid master = problem_grid(problem, data.master_resolution);
  for (std::size_t r : data.resolutions) {
    if (!is_nested(master, problem_grid(problem, r))) {
      std::ostringstream os;
      os << "config: resolution " << r << " is not nested in master resolution " << data.master_resolution;
      throw std::invalid_argument(os.str());
    }
  }
  auto available = [&](std::size_t r) {
    return r == data.master_resolution ||
           std::find(data.resolutions.begin(), data.resolutions.end(), r) != data.resolutions.end();
  };
  if (!available(train.resolution)) throw std::invalid_argument("config: train.resolution is not generated");
  if (problem == Problem::burgers) {
    for (double t : data.times)
      if (!(t > 0.0)) throw std::invalid_argument("config: burgers output times must be positive");
    if (!(data.viscosity > 0.0)) throw std::invalid_argument("config: viscosity must be positive");
    burgers_features.validate();
  }
  if (problem == Problem::darcy) {
    if (!(data.a_minus > 0.0) || data.a_plus < data.a_minus)
      throw std::invalid_argument("config: need 0 < a_minus <= a_plus");
    darcy_features.validate();
  }
  if (bridge_modes < 0) throw std::invalid_argument("config: features.modes must be >= 0");
  data.prior.validate();
}

namespace {

json features_json(const ExperimentConfig& c) {
  switch (c.problem) {
    case Problem::burgers: {
      const auto& f = c.burgers_features;
      return {{"delta", f.delta},
              {"beta", f.beta},
              {"gain", f.gain},
              {"theta_tau", f.theta_measure.tau},
              {"theta_alpha", f.theta_measure.regularity},
              {"theta_modes", f.theta_modes}};
    }
    case Problem::darcy: {
      const auto& f = c.darcy_features;
      return {{"s_plus", f.gamma.s_plus},
              {"s_minus", f.gamma.s_minus},
              {"sigmoid_delta", f.gamma.delta},
              {"theta_tau", f.theta_measure.tau},
              {"theta_alpha", f.theta_measure.regularity},
              {"theta_modes", f.theta_modes},
              {"eta", f.smoothing.eta},
              {"heat_dt", f.smoothing.dt},
              {"heat_steps", f.smoothing.steps},
              {"use_theta", f.use_theta}};
    }
    case Problem::brownian_bridge:
      return {{"modes", c.bridge_modes}};
  }
  return json::object();
}

void require_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument("config: '" + where + "' must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!ok.count(key)) throw std::invalid_argument("config: unknown key '" + where + (where.empty() ? "" : ".") + key + "'");
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

json to_json(const ExperimentConfig& c) {
  json j;
  j["problem"] = std::string(to_string(c.problem));
  j["name"] = c.name;
  j["output_dir"] = c.output_dir.string();
  j["seeds"] = {{"train", c.seeds.train}, {"test", c.seeds.test}, {"features", c.seeds.features}};
  j["data"] = {{"n", c.data.n},
               {"n_test", c.data.n_test},
               {"master_resolution", c.data.master_resolution},
               {"resolutions", c.data.resolutions},
               {"times", c.data.times},
               {"viscosity", c.data.viscosity},
               {"prior", {{"tau", c.data.prior.tau}, {"alpha", c.data.prior.regularity}, {"truncation", c.data.prior.truncation}}},
               {"a_plus", c.data.a_plus},
               {"a_minus", c.data.a_minus}};
  j["train"] = {{"m", c.train.m}, {"lambda", c.train.lambda}, {"resolution", c.train.resolution}, {"time_index", c.train.time_index}};
  j["features"] = features_json(c);
  j["transfer"] = {{"resolutions", c.transfer_resolutions}};
  j["semigroup"] = {{"steps", c.semigroup_steps}};
  j["sweep"] = {{"m", c.sweep_m}};
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  require_keys(j, {"problem", "name", "output_dir", "seeds", "data", "train", "features", "transfer", "semigroup", "sweep"}, "");
  ExperimentConfig c = ExperimentConfig::defaults(problem_from_string(j.value("problem", std::string("burgers"))));
  read(j, "name", c.name);
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  else c.output_dir = std::filesystem::path("runs") / c.name;
  if (j.contains("seeds")) {
    const json& s = j.at("seeds");
    require_keys(s, {"train", "test", "features"}, "seeds");
    read(s, "train", c.seeds.train);
    read(s, "test", c.seeds.test);
    read(s, "features", c.seeds.features);
  }
  if (j.contains("data")) {
    const json& d = j.at("data");
    require_keys(d, {"n", "n_test", "master_resolution", "resolutions", "times", "viscosity", "prior", "a_plus", "a_minus"}, "data");
    read(d, "n", c.data.n);
    read(d, "n_test", c.data.n_test);
    read(d, "master_resolution", c.data.master_resolution);
    read(d, "resolutions", c.data.resolutions);
    read(d, "times", c.data.times);
    read(d, "viscosity", c.data.viscosity);
    read(d, "a_plus", c.data.a_plus);
    read(d, "a_minus", c.data.a_minus);
    if (d.contains("prior")) {
      const json& p = d.at("prior");
      require_keys(p, {"tau", "alpha", "truncation"}, "data.prior");
      read(p, "tau", c.data.prior.tau);
      read(p, "alpha", c.data.prior.regularity);
      read(p, "truncation", c.data.prior.truncation);
    }
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    require_keys(t, {"m", "lambda", "resolution", "time_index"}, "train");
    read(t, "m", c.train.m);
    read(t, "lambda", c.train.lambda);
    read(t, "resolution", c.train.resolution);
    read(t, "time_index", c.train.time_index);
  }
  if (j.contains("features")) {
    const json& f = j.at("features");
    switch (c.problem) {
      case Problem::burgers: {
        require_keys(f, {"delta", "beta", "gain", "theta_tau", "theta_alpha", "theta_modes"}, "features");
        auto& s = c.burgers_features;
        read(f, "delta", s.delta);
        read(f, "beta", s.beta);
        read(f, "gain", s.gain);
        read(f, "theta_tau", s.theta_measure.tau);
        read(f, "theta_alpha", s.theta_measure.regularity);
        read(f, "theta_modes", s.theta_modes);
        break;
      }
      case Problem::darcy: {
        require_keys(f, {"s_plus", "s_minus", "sigmoid_delta", "theta_tau", "theta_alpha", "theta_modes", "eta", "heat_dt", "heat_steps", "use_theta"}, "features");
        auto& s = c.darcy_features;
        read(f, "s_plus", s.gamma.s_plus);
        read(f, "s_minus", s.gamma.s_minus);
        read(f, "sigmoid_delta", s.gamma.delta);
        read(f, "theta_tau", s.theta_measure.tau);
        read(f, "theta_alpha", s.theta_measure.regularity);
        read(f, "theta_modes", s.theta_modes);
        read(f, "eta", s.smoothing.eta);
        read(f, "heat_dt", s.smoothing.dt);
        read(f, "heat_steps", s.smoothing.steps);
        read(f, "use_theta", s.use_theta);
        break;
      }
      case Problem::brownian_bridge:
        require_keys(f, {"modes"}, "features");
        read(f, "modes", c.bridge_modes);
        break;
    }
  }
  if (j.contains("transfer")) {
    require_keys(j.at("transfer"), {"resolutions"}, "transfer");
    read(j.at("transfer"), "resolutions", c.transfer_resolutions);
  }
  if (j.contains("semigroup")) {
    require_keys(j.at("semigroup"), {"steps"}, "semigroup");
    read(j.at("semigroup"), "steps", c.semigroup_steps);
  }
  if (j.contains("sweep")) {
    require_keys(j.at("sweep"), {"m"}, "sweep");
    read(j.at("sweep"), "m", c.sweep_m);
  }
  c.darcy_features.source = 1.0;
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void save_config(const std::filesystem::path& path, const ExperimentConfig& c) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write config " + path.string());
  os << to_json(c).dump(2) << "\n";
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw std::invalid_argument("override must look like key.path=value: " + assignment);
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw std::invalid_argument("override has an empty key: " + assignment);
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    if (!node->contains(key) || !(*node)[key].is_object()) (*node)[key] = json::object();
    node = &(*node)[key];
    start = dot + 1;
  }
}

namespace {

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

std::string config_hash(const ExperimentConfig& c) {
  json j = to_json(c);
  j.erase("output_dir");
  return fnv1a_hex(j.dump());
}

std::string data_hash(const ExperimentConfig& c) {
  const json full = to_json(c);
  json j = {{"problem", full["problem"]}, {"data", full["data"]}, {"train_seed", c.seeds.train}, {"test_seed", c.seeds.test}};
  return fnv1a_hex(j.dump());
}

}  // namespace rfm::harness

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rfm/harness/harness.hpp"

namespace fs = std::filesystem;
using namespace rfm;
using namespace rfm::harness;

namespace {

struct CommonOptions {
  std::string config_file;
  std::string problem = "burgers";
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("-c,--config", opts.config_file, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("-p,--problem", opts.problem, "problem defaults when no config is given: burgers, darcy, brownian-bridge");
  cmd->add_option("-s,--set", opts.overrides, "override a config field, e.g. --set train.m=512");
}

ExperimentConfig resolve(const CommonOptions& opts) {
  nlohmann::json j;
  if (!opts.config_file.empty()) {
    std::ifstream is(opts.config_file);
    j = nlohmann::json::parse(is);
  } else {
    j = to_json(ExperimentConfig::defaults(problem_from_string(opts.problem)));
  }
  for (const auto& o : opts.overrides) apply_override(j, o);
  return config_from_json(j);
}

void print_rows(const ResultTable& t) {
  for (const ResultRow& r : t.rows()) {
    std::cout << r.experiment << "  K_train=" << r.k_train << "  K_test=" << r.k_test << "  m=" << r.m
              << "  n=" << r.n << "  lambda=" << r.lambda << "  error=";
    if (r.error) std::cout << *r.error;
    else std::cout << "-";
    std::cout << "  (" << r.wall_seconds << " s)";
    if (!r.note.empty()) std::cout << "  " << r.note;
    std::cout << "\n";
  }
}

fs::path results_file(const ExperimentConfig& c) { return c.output_dir / "results.csv"; }

void record(const ExperimentConfig& c, const ResultTable& t) {
  t.append_to_csv(results_file(c));
  print_rows(t);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random feature models for operator learning"};
  app.require_subcommand(1);

  CommonOptions gen_o, train_o, eval_o, transfer_o, semi_o, sweep_o, export_o, show_o;
  std::string model_file;
  std::vector<std::size_t> resolutions, ms;
  std::size_t eval_resolution = 0;
  int j_max = 0;
  std::uint64_t verify_seed = 3;
  std::vector<std::string> provenance_files;
  std::string export_dir;

  auto* gen = app.add_subcommand("generate", "generate train/test datasets");
  add_common(gen, gen_o);

  auto* tr = app.add_subcommand("train", "train a model and evaluate it on the test split");
  add_common(tr, train_o);

  auto* ev = app.add_subcommand("eval", "evaluate a saved model on the test split");
  add_common(ev, eval_o);
  ev->add_option("-m,--model", model_file, "model file (default: the config's model path)");
  ev->add_option("-r,--resolution", eval_resolution, "test resolution (default: training resolution)");

  auto* tf = app.add_subcommand("transfer", "evaluate a saved model across resolutions");
  add_common(tf, transfer_o);
  tf->add_option("-m,--model", model_file, "model file (default: the config's model path)");
  tf->add_option("-r,--resolutions", resolutions, "test resolutions (default: transfer.resolutions)");

  auto* sg = app.add_subcommand("semigroup", "compose a Burgers model to reach later times");
  add_common(sg, semi_o);
  sg->add_option("-m,--model", model_file, "model file (default: the config's model path)");
  sg->add_option("-j,--steps", j_max, "number of compositions (default: semigroup.steps)");

  auto* sw = app.add_subcommand("sweep-m", "train one model per feature count");
  add_common(sw, sweep_o);
  sw->add_option("--m", ms, "feature counts (default: sweep.m)");

  auto* vf = app.add_subcommand("verify", "run the kernel identity checks and optional provenance checks");
  vf->add_option("--seed", verify_seed, "seed for the random instances");
  vf->add_option("--provenance", provenance_files, "files whose embedded config hash should match the config");
  CommonOptions verify_o;
  add_common(vf, verify_o);

  auto* ex = app.add_subcommand("export", "write CSV tables and plot data from results.csv");
  add_common(ex, export_o);
  ex->add_option("-o,--out", export_dir, "output directory (default: <output_dir>/export)");

  auto* sh = app.add_subcommand("config", "print the resolved config and its hash");
  add_common(sh, show_o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const auto c = resolve(gen_o);
      const auto files = generate_dataset(c);
      std::cout << "wrote " << files.size() << " dataset files to " << (c.output_dir / "data") << "\n";
    } else if (*tr) {
      const auto c = resolve(train_o);
      const auto out = run_training(c);
      ResultTable t;
      t.append(out.row);
      record(c, t);
      std::cout << "model: " << out.model_file << "\n";
    } else if (*ev) {
      const auto c = resolve(eval_o);
      const fs::path mf = model_file.empty() ? model_path(c) : fs::path(model_file);
      auto t = run_mesh_transfer(c, mf, {eval_resolution ? eval_resolution : c.train.resolution});
      ResultTable relabeled;
      for (ResultRow r : t.rows()) {
        r.experiment = "eval";
        relabeled.append(std::move(r));
      }
      record(c, relabeled);
    } else if (*tf) {
      const auto c = resolve(transfer_o);
      const fs::path mf = model_file.empty() ? model_path(c) : fs::path(model_file);
      record(c, run_mesh_transfer(c, mf, resolutions.empty() ? c.transfer_resolutions : resolutions));
    } else if (*sg) {
      const auto c = resolve(semi_o);
      const fs::path mf = model_file.empty() ? model_path(c) : fs::path(model_file);
      const auto res = run_semigroup_experiment(c, mf, j_max > 0 ? j_max : c.semigroup_steps);
      record(c, res.table);
      for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
    } else if (*sw) {
      const auto c = resolve(sweep_o);
      record(c, run_sweep_m(c, ms.empty() ? c.sweep_m : ms));
    } else if (*vf) {
      bool ok = true;
      for (const auto& chk : run_verify(verify_seed)) {
        std::cout << (chk.passed ? "PASS " : "FAIL ") << chk.name << ": " << chk.value << " (tolerance " << chk.tolerance
                  << ")\n";
        ok = ok && chk.passed;
      }
      if (!provenance_files.empty()) {
        const auto c = resolve(verify_o);
        const std::string hash = config_hash(c);
        for (const auto& f : provenance_files) {
          const bool match = check_provenance(f, hash);
          std::cout << (match ? "PASS " : "FAIL ") << "provenance " << f << " (config hash " << hash << ")\n";
          ok = ok && match;
        }
      }
      return ok ? 0 : 1;
    } else if (*ex) {
      const auto c = resolve(export_o);
      const auto table = ResultTable::read_csv(results_file(c));
      const fs::path dir = export_dir.empty() ? c.output_dir / "export" : fs::path(export_dir);
      for (const auto& f : export_results(table, dir)) std::cout << "wrote " << f << "\n";
    } else if (*sh) {
      const auto c = resolve(show_o);
      std::cout << to_json(c).dump(2) << "\nconfig_hash: " << config_hash(c) << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

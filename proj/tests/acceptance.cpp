// Desk-scale acceptance runs. One PASS/FAIL line per criterion; the exit
// status is nonzero if any criterion fails. Datasets are kept under
// acceptance_runs/ and reused when their data hash still matches.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rfm/burgers/burgers.hpp"
#include "rfm/darcy/darcy.hpp"
#include "rfm/field/quadrature.hpp"
#include "rfm/grf/grf.hpp"
#include "rfm/harness/harness.hpp"
#include "rfm/kernel/kernel_lab.hpp"

using namespace rfm;
using namespace rfm::harness;
using std::numbers::pi;

namespace {

constexpr double kBurgersErrorMax = 0.06;
constexpr double kRateBand = 0.35;
constexpr double kUpscaleRatioMax = 3.0;
constexpr double kBurgersTransferRatioMax = 1.25;
constexpr double kDarcyErrorMax = 0.09;
constexpr double kDarcyTransferRatioMax = 1.35;
constexpr double kEquivalenceGapMax = 1e-8;
constexpr double kKernelSlope = -0.5, kKernelSlopeBand = 0.15;
constexpr double kRk4Order = 4.0, kRk4Band = 0.5;
constexpr double kDarcyOrder = 2.0, kDarcyOrderBand = 0.3;
constexpr double kFastPoissonMax = 1e-10;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;
ResultTable all_rows;

void criterion(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("error: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s %d %s: %s (%.0f s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

void ensure_dataset(const ExperimentConfig& c) {
  try {
    load_dataset(c, "train", c.data.master_resolution, 0);
    load_dataset(c, "test", c.data.master_resolution, 0);
    return;
  } catch (const std::exception&) {
  }
  generate_dataset(c);
}

double ratio_max_min(const ResultTable& t) {
  double lo = 1e300, hi = 0.0;
  for (const ResultRow& r : t.rows()) {
    lo = std::min(lo, *r.error);
    hi = std::max(hi, *r.error);
  }
  return hi / lo;
}

std::string errors_of(const ResultTable& t) {
  std::string s;
  for (const ResultRow& r : t.rows()) s += (s.empty() ? "" : " ") + fmt(*r.error);
  return s;
}

Outcome solver_verification() {
  const grf::GrfSpec prior{7.0, 2.5, grf::GrfBoundary::periodic_1d, 0};
  const Grid g = Grid::periodic(129);
  auto rng = grf::sample_rng(101, 0);
  const Field a = grf::sample_grf(prior, g, rng);
  const burgers::BurgersProblem p{1e-2, 1.0};
  const Field u1 = burgers::burgers_solve(p, a, 0.02), u2 = burgers::burgers_solve(p, a, 0.01),
              u4 = burgers::burgers_solve(p, a, 0.005);
  const double rk4 = std::log2(norm_l2(u1 - u2) / norm_l2(u2 - u4));

  auto manufactured = [](std::size_t r) {
    const Grid sq = Grid::square(r, Boundary::dirichlet);
    const Field exact = Field::from_function(sq, [](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); });
    return norm_l2(darcy::darcy_solve_fd(Field::constant(sq, 1.0), 2 * pi * pi * exact) - exact);
  };
  const double darcy_order = std::log2(manufactured(17) / manufactured(65)) / 2.0;

  // Dense 5-point stencil on the 15 x 15 interior at r = 17.
  const Grid g17 = Grid::square(17, Boundary::dirichlet);
  std::mt19937_64 gen(40);
  std::normal_distribution<double> n01;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(17 * 17);
  for (int j = 1; j < 16; ++j)
    for (int i = 1; i < 16; ++i) rhs[j * 17 + i] = n01(gen);
  const int n = 15;
  const double h2 = 1.0 / 256.0;
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n * n, n * n);
  Eigen::VectorXd b(n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int row = j * n + i;
      dense(row, row) = 4.0 / h2;
      if (i > 0) dense(row, row - 1) = -1.0 / h2;
      if (i + 1 < n) dense(row, row + 1) = -1.0 / h2;
      if (j > 0) dense(row, row - n) = -1.0 / h2;
      if (j + 1 < n) dense(row, row + n) = -1.0 / h2;
      b[row] = rhs[(j + 1) * 17 + i + 1];
    }
  const Eigen::VectorXd x = dense.partialPivLu().solve(b);
  const Field fast = darcy::fast_poisson_dirichlet(Field(g17, rhs));
  double gap = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) gap = std::max(gap, std::abs(fast.at(i + 1, j + 1) - x[j * n + i]));

  const bool pass = std::abs(rk4 - kRk4Order) <= kRk4Band && std::abs(darcy_order - kDarcyOrder) <= kDarcyOrderBand &&
                    gap <= kFastPoissonMax;
  return {pass, "rk4 order " + fmt(rk4) + " (4 +- 0.5), darcy order " + fmt(darcy_order) + " (2 +- 0.3), fast poisson gap " +
                    fmt(gap) + " (<= 1e-10)"};
}

}  // namespace

int main() {
  criterion(7, "ridge/kernel equivalence", [] {
    double worst = 0.0;
    for (double lambda : {0.0, 1e-3}) worst = std::max(worst, kernel::ridge_equivalence_gap(8, 16, 65, lambda, 3));
    return Outcome{worst <= kEquivalenceGapMax, "max gap " + fmt(worst) + " (<= 1e-8)"};
  });

  criterion(8, "bridge kernel convergence", [] {
    const auto kc = kernel::bb_kernel_convergence({100, 1000, 10000}, 1024, 3);
    std::string devs;
    for (double d : kc.deviations) devs += " " + fmt(d);
    return Outcome{std::abs(kc.slope - kKernelSlope) <= kKernelSlopeBand,
                   "slope " + fmt(kc.slope) + " (-0.5 +- 0.15), deviations" + devs};
  });

  criterion(9, "solver verification", solver_verification);

  ExperimentConfig burgers = ExperimentConfig::defaults(Problem::burgers);
  burgers.output_dir = "acceptance_runs/burgers";
  ensure_dataset(burgers);

  ResultTable sweep;
  criterion(2, "burgers monte carlo rate", [&] {
    sweep = run_sweep_m(burgers, {256, 512, 1024});
    all_rows.append(sweep);
    std::vector<double> scaled;
    for (const ResultRow& r : sweep.rows()) scaled.push_back(*r.error * std::sqrt(static_cast<double>(r.m)));
    double mean = 0.0;
    for (double s : scaled) mean += s / static_cast<double>(scaled.size());
    double worst = 0.0;
    for (double s : scaled) worst = std::max(worst, std::abs(s / mean - 1.0));
    return Outcome{worst <= kRateBand, "errors " + errors_of(sweep) + ", max deviation of e*sqrt(m) from its mean " +
                                           fmt(worst) + " (<= 0.35)"};
  });

  // The m = 1024 sweep run is the T = 1 desk-scale model.
  criterion(1, "burgers error", [&] {
    if (sweep.rows().size() != 3) throw std::runtime_error("sweep did not run");
    const double e = *sweep.rows().back().error;
    return Outcome{e <= kBurgersErrorMax, "error " + fmt(e) + " (<= 0.06)"};
  });

  criterion(4, "burgers mesh transfer", [&] {
    const ResultTable t = run_mesh_transfer(burgers, model_path(burgers), {33, 65, 257, 513});
    all_rows.append(t);
    const double ratio = ratio_max_min(t);
    return Outcome{ratio <= kBurgersTransferRatioMax, "errors " + errors_of(t) + ", max/min " + fmt(ratio) + " (<= 1.25)"};
  });

  criterion(3, "burgers time upscaling", [&] {
    ExperimentConfig half = burgers;
    half.train.time_index = 0;
    const TrainingOutcome o = run_training(half);
    const SemigroupResult s = run_semigroup_experiment(half, o.model_file, 4);
    all_rows.append(s.table);
    bool monotone = true;
    const auto& rows = s.table.rows();
    for (std::size_t j = 1; j < rows.size(); ++j) monotone = monotone && *rows[j].error >= *rows[j - 1].error;
    const double ratio = *rows.back().error / *rows.front().error;
    return Outcome{monotone && ratio <= kUpscaleRatioMax,
                   "errors " + errors_of(s.table) + (monotone ? ", non-decreasing" : ", NOT non-decreasing") +
                       ", e4/e1 " + fmt(ratio) + " (<= 3)"};
  });

  ExperimentConfig darcy = ExperimentConfig::defaults(Problem::darcy);
  darcy.output_dir = "acceptance_runs/darcy";
  ensure_dataset(darcy);

  std::filesystem::path darcy_model;
  criterion(5, "darcy error", [&] {
    TrainingOutcome o = run_training(darcy);
    darcy_model = o.model_file;
    ResultTable t;
    t.append(o.row);
    all_rows.append(t);
    return Outcome{*o.row.error <= kDarcyErrorMax, "error " + fmt(*o.row.error) + " (<= 0.09)"};
  });

  criterion(6, "darcy mesh transfer", [&] {
    const ResultTable t = run_mesh_transfer(darcy, model_path(darcy), {33, 65, 129});
    all_rows.append(t);
    const double ratio = ratio_max_min(t);
    return Outcome{ratio <= kDarcyTransferRatioMax, "errors " + errors_of(t) + ", max/min " + fmt(ratio) + " (<= 1.35)"};
  });

  export_results(all_rows, "acceptance_runs");
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

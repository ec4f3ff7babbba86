#include <CLI11.hpp>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "trek/io.hpp"
#include "trek/kernels.hpp"
#include "trek/simulate.hpp"
#include "trek/smoother.hpp"
#include "trek/threading.hpp"

#ifdef __unix__
#include <sys/resource.h>
#endif

namespace {

namespace fs = std::filesystem;

struct RunConfig {
  std::string process = "bm";
  std::string kernel = "gaussian:200";
  int n = 20;
  int r = 100;
  int m = 500;
  double sigma = 0.3;
  double eta = 0.05;
  double nu = 0.05;
  double tol = 1e-10;
  int maxiter = 500;
  std::uint64_t seed = 1;
  std::string mode = "second-moment";
  std::string out;
  std::string dataset;
  bool strict = false;
  bool truncate_negative = false;
  int threads = 1;
  std::string fit_path;
};

std::vector<double> regular_grid(int m) {
  std::vector<double> grid(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) grid[static_cast<std::size_t>(k)] = static_cast<double>(k) / m;
  return grid;
}

std::optional<std::uint64_t> max_rss_bytes() {
#ifdef __unix__
  rusage usage{};
  if (getrusage(RUSAGE_SELF, &usage) == 0) {
    return static_cast<std::uint64_t>(usage.ru_maxrss) * 1024u;
  }
#endif
  return std::nullopt;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
}

nlohmann::json config_json(const RunConfig& cfg) {
  return {{"process", cfg.process}, {"kernel", cfg.kernel}, {"n", cfg.n},
          {"r", cfg.r},             {"m", cfg.m},           {"sigma", cfg.sigma},
          {"eta", cfg.eta},         {"nu", cfg.nu},         {"tol", cfg.tol},
          {"maxiter", cfg.maxiter}, {"seed", cfg.seed},     {"mode", cfg.mode}};
}

trek::FunctionalDataset simulate_from_config(const RunConfig& cfg) {
  const trek::Process process = trek::parse_process(cfg.process);
  const trek::ProcessSpec spec =
      trek::ProcessSpec::uniform(process, cfg.n, cfg.r, cfg.sigma, cfg.seed);
  return trek::sample_dataset(spec);
}

int cmd_simulate(const RunConfig& cfg) {
  fs::create_directories(cfg.out);
  const trek::FunctionalDataset data = simulate_from_config(cfg);
  trek::io::write_dataset_csv((fs::path(cfg.out) / "dataset.csv").string(), data);
  write_json(fs::path(cfg.out) / "dataset.json", config_json(cfg));
  std::cout << "wrote " << data.layout.total() << " observations from " << data.layout.blocks()
            << " functions to " << cfg.out << "/dataset.csv\n";
  return 0;
}

int cmd_smooth(const RunConfig& cfg, bool process_given) {
  fs::create_directories(cfg.out);
  const fs::path out_dir(cfg.out);

  trek::FunctionalDataset data;
  std::string process_spec;
  double noise = cfg.sigma;
  if (!cfg.dataset.empty()) {
    data = trek::io::read_dataset_csv(cfg.dataset);
    // A sidecar written by `simulate` tells us the generating process, which
    // is needed for truth.csv; an explicit --process wins.
    const fs::path sidecar = fs::path(cfg.dataset).replace_extension(".json");
    if (process_given) {
      process_spec = cfg.process;
    } else if (fs::exists(sidecar)) {
      std::ifstream in(sidecar);
      nlohmann::json j;
      in >> j;
      process_spec = j.value("process", std::string{});
      noise = j.value("sigma", cfg.sigma);
    }
  } else {
    data = simulate_from_config(cfg);
    process_spec = cfg.process;
    trek::io::write_dataset_csv((out_dir / "dataset.csv").string(), data);
    write_json(out_dir / "dataset.json", config_json(cfg));
  }

  const trek::Kernel kernel = trek::parse_kernel(cfg.kernel);
  trek::SolverConfig solver;
  solver.tol = cfg.tol;
  solver.maxiter = cfg.maxiter;

  const trek::GramMatrix gram = trek::gram(kernel, data.layout, data.locations);

  const auto t0 = std::chrono::steady_clock::now();
  trek::CovarianceFit fit;
  std::optional<trek::MeanFit> mean;
  if (cfg.mode == "second-moment") {
    fit = trek::fit_second_moment(data, gram, cfg.eta, solver);
  } else if (cfg.mode == "centered") {
    auto [mean_fit, cov_fit] = trek::fit_covariance_centered(data, gram, cfg.nu, cfg.eta, solver);
    mean = std::move(mean_fit);
    fit = std::move(cov_fit);
  } else if (cfg.mode == "plugin") {
    mean = trek::fit_mean(data, gram, cfg.nu);
    fit = trek::fit_second_moment(data, gram, cfg.eta, solver);
  } else {
    throw CLI::ValidationError("--mode must be one of second-moment, centered, plugin");
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::vector<double> grid = regular_grid(cfg.m);
  const Eigen::MatrixXd frame = trek::frame(kernel, data.layout, data.locations, grid);
  const Eigen::MatrixXd surface = trek::evaluate_on_grid(fit, frame, mean ? &*mean : nullptr);

  trek::io::write_residuals_csv((out_dir / "residuals.csv").string(), fit.report);
  trek::io::write_surface_csv((out_dir / "surface.csv").string(), grid, surface);

  if (!process_spec.empty()) {
    const trek::Process process = trek::parse_process(process_spec);
    Eigen::MatrixXd truth(cfg.m, cfg.m);
    for (int k1 = 0; k1 < cfg.m; ++k1) {
      for (int k2 = 0; k2 < cfg.m; ++k2) {
        truth(k1, k2) = trek::true_second_moment(process, grid[static_cast<std::size_t>(k1)],
                                                 grid[static_cast<std::size_t>(k2)]);
      }
    }
    trek::io::write_surface_csv((out_dir / "truth.csv").string(), grid, truth);
  }

  nlohmann::json report = {{"iterations", fit.report.iterations},
                           {"status", trek::to_string(fit.report.status)},
                           {"final_delta", fit.report.residual_trace.back()},
                           {"wall_time_seconds", wall},
                           {"config", config_json(cfg)}};
  if (const auto rss = max_rss_bytes()) report["max_rss_bytes"] = *rss;
  write_json(out_dir / "report.json", report);

  trek::io::FitArtifact artifact;
  artifact.kernel = cfg.kernel;
  artifact.mode = cfg.mode;
  artifact.eta = cfg.eta;
  artifact.nu = cfg.nu;
  artifact.locations = data.locations;
  artifact.coefficients = fit.coefficients;
  if (mean) artifact.mean_coefficients = mean->coefficients;
  artifact.report = fit.report;
  artifact.process = process_spec;
  artifact.noise = noise;
  artifact.seed = cfg.seed;
  trek::io::save_fit_json((out_dir / "fit.json").string(), artifact);

  std::cout << "status " << trek::to_string(fit.report.status) << " after " << fit.report.iterations
            << " iterations (" << wall << " s), artifacts in " << cfg.out << '\n';
  if (cfg.strict && fit.report.status == trek::SolveStatus::Diverged) return 2;
  return 0;
}

int cmd_fpca(const RunConfig& cfg) {
  fs::create_directories(cfg.out);
  const trek::io::FitArtifact artifact = trek::io::load_fit_json(cfg.fit_path);
  const trek::Kernel kernel = trek::parse_kernel(artifact.kernel);
  std::vector<int> counts;
  for (const auto& block : artifact.locations) counts.push_back(static_cast<int>(block.size()));
  const trek::BlockLayout layout{counts};
  const trek::GramMatrix gram = trek::gram(kernel, layout, artifact.locations);

  const trek::CovarianceFit fit = artifact.covariance_fit();
  std::optional<trek::MeanFit> mean;
  if (artifact.has_mean()) mean = artifact.mean_fit();

  const trek::FpcaResult result =
      trek::fpca(fit, gram, mean ? &*mean : nullptr, cfg.truncate_negative);

  const std::vector<double> grid = regular_grid(cfg.m);
  const Eigen::MatrixXd frame = trek::frame(kernel, layout, artifact.locations, grid);
  const Eigen::MatrixXd values = trek::evaluate_eigenfunctions(result, frame);

  const fs::path out_dir(cfg.out);
  trek::io::write_eigenvalues_csv((out_dir / "eigen.csv").string(), result.eigenvalues);
  trek::io::write_eigenfunctions_csv((out_dir / "eigenfunctions.csv").string(), grid, values);
  std::cout << "kept " << result.rank() << " components, wrote eigen.csv and eigenfunctions.csv to "
            << cfg.out << '\n';
  return 0;
}

int cmd_eval(const RunConfig& cfg) {
  fs::create_directories(cfg.out);
  const trek::io::FitArtifact artifact = trek::io::load_fit_json(cfg.fit_path);
  const trek::Kernel kernel = trek::parse_kernel(artifact.kernel);
  std::vector<int> counts;
  for (const auto& block : artifact.locations) counts.push_back(static_cast<int>(block.size()));
  const trek::BlockLayout layout{counts};

  const trek::CovarianceFit fit = artifact.covariance_fit();
  std::optional<trek::MeanFit> mean;
  if (artifact.has_mean()) mean = artifact.mean_fit();

  const std::vector<double> grid = regular_grid(cfg.m);
  const Eigen::MatrixXd frame = trek::frame(kernel, layout, artifact.locations, grid);
  const Eigen::MatrixXd surface = trek::evaluate_on_grid(fit, frame, mean ? &*mean : nullptr);
  trek::io::write_surface_csv((fs::path(cfg.out) / "surface.csv").string(), grid, surface);
  std::cout << "wrote " << cfg.m << "x" << cfg.m << " surface to " << cfg.out << "/surface.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Covariance smoothing for sparsely observed random functions"};
  app.require_subcommand(1);
  RunConfig cfg;

  const auto add_sim_options = [&cfg](CLI::App* cmd) {
    cmd->add_option("--process", cfg.process, "Process: bm, bb, ibm, ou:theta:sigma");
    cmd->add_option("--n", cfg.n, "Number of functions");
    cmd->add_option("--r", cfg.r, "Observations per function");
    cmd->add_option("--sigma", cfg.sigma, "Observation noise sd");
    cmd->add_option("--seed", cfg.seed, "RNG seed");
  };

  auto* sim = app.add_subcommand("simulate", "Sample a synthetic dataset");
  add_sim_options(sim);
  sim->add_option("--out", cfg.out, "Output directory")->required();

  auto* smooth = app.add_subcommand("smooth", "Fit the second-moment/covariance surface");
  add_sim_options(smooth);
  smooth->add_option("--dataset", cfg.dataset, "Dataset CSV (simulates one when omitted)");
  smooth->add_option("--kernel", cfg.kernel, "Kernel: gaussian:g, laplacian:g, linear, poly:d:c");
  smooth->add_option("--m", cfg.m, "Evaluation grid resolution");
  smooth->add_option("--eta", cfg.eta, "Second-moment ridge");
  smooth->add_option("--nu", cfg.nu, "Mean ridge (centered/plugin modes)");
  smooth->add_option("--tol", cfg.tol, "Squared projected-residual tolerance");
  smooth->add_option("--maxiter", cfg.maxiter, "Iteration cap");
  smooth->add_option("--mode", cfg.mode, "second-moment, centered, or plugin")
      ->check(CLI::IsMember({"second-moment", "centered", "plugin"}));
  smooth->add_option("--threads", cfg.threads, "Worker-thread cap");
  smooth->add_flag("--strict", cfg.strict, "Exit nonzero when the solver diverges");
  smooth->add_option("--out", cfg.out, "Output directory")->required();

  auto* fpca = app.add_subcommand("fpca", "Eigendecompose a saved fit");
  fpca->add_option("--fit", cfg.fit_path, "fit.json from a smooth run")->required();
  fpca->add_option("--m", cfg.m, "Evaluation grid resolution");
  fpca->add_flag("--truncate-negative", cfg.truncate_negative, "Drop negative eigenvalues");
  fpca->add_option("--out", cfg.out, "Output directory")->required();

  auto* eval = app.add_subcommand("eval", "Re-evaluate a saved fit on a grid");
  eval->add_option("--fit", cfg.fit_path, "fit.json from a smooth run")->required();
  eval->add_option("--m", cfg.m, "Evaluation grid resolution");
  eval->add_option("--out", cfg.out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    trek::set_max_threads(cfg.threads);
    if (sim->parsed()) return cmd_simulate(cfg);
    if (smooth->parsed()) return cmd_smooth(cfg, smooth->count("--process") > 0);
    if (fpca->parsed()) return cmd_fpca(cfg);
    if (eval->parsed()) return cmd_eval(cfg);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}

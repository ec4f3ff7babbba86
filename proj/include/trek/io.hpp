#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "trek/smoother.hpp"

namespace trek::io {

// All files are UTF-8, LF line endings, header row mandatory, floating-point
// values at 17 significant digits so identical runs produce identical bytes.

/// Dataset rows: function_index (1-based), location, value.
void write_dataset_csv(const std::string& path, const FunctionalDataset& data);
FunctionalDataset read_dataset_csv(const std::string& path);

/// Residual trace rows: iteration, delta, starting at iteration 0.
void write_residuals_csv(const std::string& path, const SolveReport& report);

/// Surface rows: k1, k2, z1, z2, value over grid x grid (k 1-based).
void write_surface_csv(const std::string& path, const std::vector<double>& grid,
                       const Eigen::MatrixXd& surface);

/// Eigenvalue rows: l, lambda (l 1-based, descending by signed value).
void write_eigenvalues_csv(const std::string& path, const Eigen::VectorXd& eigenvalues);

/// Eigenfunction rows: l, k, z, value.
void write_eigenfunctions_csv(const std::string& path, const std::vector<double>& grid,
                              const Eigen::MatrixXd& values);

/// Everything a saved smoothing run needs for later evaluation and FPCA.
struct FitArtifact {
  std::string kernel;     // kernel spec string
  std::string mode;       // second-moment | centered | plugin
  double eta = 0.0;
  double nu = 0.0;
  std::vector<std::vector<double>> locations;
  BlockDiagMatrix coefficients;
  Eigen::VectorXd mean_coefficients;  // empty unless mode needs the mean
  SolveReport report;
  std::string process;  // process spec string, empty when unknown
  double noise = 0.0;
  std::uint64_t seed = 0;

  FitMode fit_mode() const { return mode == "centered" ? FitMode::CenteredCovariance : FitMode::SecondMoment; }
  CovarianceFit covariance_fit() const;
  bool has_mean() const { return mean_coefficients.size() > 0; }
  MeanFit mean_fit() const;
};

void save_fit_json(const std::string& path, const FitArtifact& artifact);
FitArtifact load_fit_json(const std::string& path);

}  // namespace trek::io

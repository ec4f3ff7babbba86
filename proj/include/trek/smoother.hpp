#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "trek/block_diag.hpp"
#include "trek/kernels.hpp"
#include "trek/rek.hpp"

namespace trek {

/// Sparsely observed random functions: per-function measurement locations
/// X_ij and noisy values Y_ij. The block layout is derived from the lists.
struct FunctionalDataset {
  BlockLayout layout;
  std::vector<std::vector<double>> locations;
  std::vector<std::vector<double>> values;

  FunctionalDataset() = default;
  FunctionalDataset(std::vector<std::vector<double>> locations_in,
                    std::vector<std::vector<double>> values_in);
};

struct MeanFit {
  Eigen::VectorXd coefficients;  // a-hat, length R
  double ridge = 0.0;            // nu
  double residual_norm = 0.0;    // ||(K + nu I) a - y||, checkable post-condition
};

enum class FitMode { SecondMoment, CenteredCovariance };

struct CovarianceFit {
  BlockDiagMatrix coefficients;  // B-hat: symmetric, zero-diagonal blocks
  double ridge = 0.0;            // eta
  SolveReport report;
  FitMode mode = FitMode::SecondMoment;
};

struct FpcaResult {
  Eigen::VectorXd eigenvalues;   // descending by signed value
  Eigen::MatrixXd coefficients;  // U, R x q, with U^T K U = I_q
  Eigen::Index rank() const { return eigenvalues.size(); }
};

/// Kernel ridge mean estimate: solves (K + nu I) a = y.
MeanFit fit_mean(const FunctionalDataset& data, const GramMatrix& gram, double nu);
MeanFit fit_mean(const FunctionalDataset& data, const Kernel& kernel, double nu);

/// Second-moment smoother: minimizes
///   1/2 <B, (K (*) K + eta I) B>_F - <B, diag(y_i y_i^T)>_F
/// over symmetric zero-diagonal block-diagonal B with the restricted Krylov
/// iteration, using diagonal elimination as the projector and the lazy
/// Khatri-Rao operator as the forward action. Needs at least two
/// observations per function. The optional initial guess is projected on
/// entry; divergence returns the last finite iterate together with the
/// status.
CovarianceFit fit_second_moment(const FunctionalDataset& data, const GramMatrix& gram, double eta,
                                const SolverConfig& cfg, const BlockDiagMatrix* initial = nullptr);
CovarianceFit fit_second_moment(const FunctionalDataset& data, const Kernel& kernel, double eta,
                                const SolverConfig& cfg, const BlockDiagMatrix* initial = nullptr);

/// Centered route: fit the mean, subtract it at the data locations, then run
/// the second-moment smoother on the centered products.
std::pair<MeanFit, CovarianceFit> fit_covariance_centered(const FunctionalDataset& data,
                                                          const GramMatrix& gram, double nu, double eta,
                                                          const SolverConfig& cfg);
std::pair<MeanFit, CovarianceFit> fit_covariance_centered(const FunctionalDataset& data,
                                                          const Kernel& kernel, double nu, double eta,
                                                          const SolverConfig& cfg);

/// Mean values over the frame's grid: F^T a.
Eigen::VectorXd evaluate_mean(const MeanFit& fit, const Eigen::MatrixXd& frame_matrix);

/// Surface values over the frame's grid: F^T B F, minus the rank-one plug-in
/// correction (F^T a)(F^T a)^T when a mean is supplied and the fit is a raw
/// second moment. Output is exactly symmetric.
Eigen::MatrixXd evaluate_on_grid(const CovarianceFit& fit, const Eigen::MatrixXd& frame_matrix,
                                 const MeanFit* mean = nullptr);

/// Effective coefficients: entry for pair (j1 < j2) of block i equals
/// 2*B_i(j1, j2), ordered by j1 + (j2-1)(j2-2)/2 within each block.
Eigen::VectorXd recover_coefficients(const CovarianceFit& fit);

/// Spectral decomposition of the fitted tensor through the symmetric matrix
/// K^{1/2} B K^{1/2} (with the rank-one plug-in correction when a mean is
/// supplied and the fit is a raw second moment). Eigenvalues below
/// 1e-10 * max|lambda| are dropped; truncate_negative additionally drops
/// negative ones. K^{1/2} uses a clamped eigendecomposition, so rank-deficient
/// Gram matrices are handled through their pseudo-inverse.
FpcaResult fpca(const CovarianceFit& fit, const GramMatrix& gram, const MeanFit* mean = nullptr,
                bool truncate_negative = false);

/// Eigenfunction values over the frame's grid, one column per component.
Eigen::MatrixXd evaluate_eigenfunctions(const FpcaResult& result, const Eigen::MatrixXd& frame_matrix);

}  // namespace trek

#include "trek/smoother.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>

#include "trek/lazy_khatri.hpp"

namespace trek {

namespace {

BlockLayout layout_from(const std::vector<std::vector<double>>& locations) {
  std::vector<int> counts;
  counts.reserve(locations.size());
  for (const auto& block : locations) counts.push_back(static_cast<int>(block.size()));
  return BlockLayout(std::move(counts));
}

Eigen::VectorXd flat_values(const FunctionalDataset& data) {
  Eigen::VectorXd y(data.layout.total());
  for (int i = 0; i < data.layout.blocks(); ++i) {
    const auto& block = data.values[static_cast<std::size_t>(i)];
    for (int j = 0; j < data.layout.count(i); ++j) y[data.layout.offset(i) + j] = block[static_cast<std::size_t>(j)];
  }
  return y;
}

}  // namespace

FunctionalDataset::FunctionalDataset(std::vector<std::vector<double>> locations_in,
                                     std::vector<std::vector<double>> values_in)
    : layout(layout_from(locations_in)), locations(std::move(locations_in)), values(std::move(values_in)) {
  if (values.size() != locations.size()) {
    throw std::invalid_argument("FunctionalDataset: " + std::to_string(locations.size()) +
                                " location blocks but " + std::to_string(values.size()) + " value blocks");
  }
  for (std::size_t i = 0; i < locations.size(); ++i) {
    if (values[i].size() != locations[i].size()) {
      throw std::invalid_argument("FunctionalDataset: block " + std::to_string(i) + " has " +
                                  std::to_string(locations[i].size()) + " locations but " +
                                  std::to_string(values[i].size()) + " values");
    }
    for (const double v : values[i]) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("FunctionalDataset: non-finite value in block " + std::to_string(i));
      }
    }
    for (const double x : locations[i]) {
      if (!std::isfinite(x)) {
        throw std::invalid_argument("FunctionalDataset: non-finite location in block " + std::to_string(i));
      }
    }
  }
}

MeanFit fit_mean(const FunctionalDataset& data, const GramMatrix& gram, double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("fit_mean: nu must be > 0");
  if (gram.layout != data.layout) throw std::invalid_argument("fit_mean: gram layout mismatch");
  const Eigen::VectorXd y = flat_values(data);
  Eigen::MatrixXd system = gram.values;
  system.diagonal().array() += nu;
  const Eigen::LDLT<Eigen::MatrixXd> solver(system);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("fit_mean: factorization of K + nu I failed");
  }
  MeanFit fit;
  fit.coefficients = solver.solve(y);
  fit.ridge = nu;
  fit.residual_norm = (system * fit.coefficients - y).norm();
  if (!fit.coefficients.allFinite()) {
    throw std::runtime_error("fit_mean: solve produced non-finite coefficients");
  }
  return fit;
}

MeanFit fit_mean(const FunctionalDataset& data, const Kernel& kernel, double nu) {
  return fit_mean(data, gram(kernel, data.layout, data.locations), nu);
}

CovarianceFit fit_second_moment(const FunctionalDataset& data, const GramMatrix& gram, double eta,
                                const SolverConfig& cfg, const BlockDiagMatrix* initial) {
  if (!(eta > 0.0)) throw std::invalid_argument("fit_second_moment: eta must be > 0");
  if (gram.layout != data.layout) throw std::invalid_argument("fit_second_moment: gram layout mismatch");
  for (int i = 0; i < data.layout.blocks(); ++i) {
    if (data.layout.count(i) < 2) {
      throw std::invalid_argument("fit_second_moment: block " + std::to_string(i) +
                                  " has fewer than two observations");
    }
  }
  const BlockLayout& layout = data.layout;

  BlockDiagMatrix rhs = BlockDiagMatrix::outer_products(layout, data.values);
  diag_elim_in_place(rhs);

  BlockDiagMatrix solution = initial ? *initial : BlockDiagMatrix(layout);
  if (initial && initial->layout() != layout) {
    throw std::invalid_argument("fit_second_moment: initial guess layout mismatch");
  }

  const LazyKhatriOperator op(gram, eta);
  Eigen::MatrixXd scratch(layout.max_count(), layout.max_count());
  const auto apply = [&op, &scratch](const BlockDiagMatrix& in, BlockDiagMatrix& out) {
    op.apply(in, out, scratch);
  };
  const auto project = [](BlockDiagMatrix& b) { diag_elim_in_place(b); };
#ifndef NDEBUG
  const auto observe = [](int, const BlockDiagMatrix& x, const BlockDiagMatrix& r, const BlockDiagMatrix&) {
    if (x.is_symmetric() && x.all_finite() && r.all_finite()) {
      assert(x.max_asymmetry() == 0.0);
      assert(r.max_asymmetry() == 0.0);
      for (int i = 0; i < x.blocks(); ++i) {
        assert(x.block(i).diagonal().cwiseAbs().maxCoeff() == 0.0);
        assert(r.block(i).diagonal().cwiseAbs().maxCoeff() == 0.0);
      }
    }
  };
  SolveReport report = rek_solve_in_place(apply, project, rhs, solution, cfg, observe);
#else
  SolveReport report = rek_solve_in_place(apply, project, rhs, solution, cfg);
#endif

  if (!solution.is_symmetric()) solution.symmetrize();
  CovarianceFit fit;
  fit.coefficients = std::move(solution);
  fit.ridge = eta;
  fit.report = std::move(report);
  fit.mode = FitMode::SecondMoment;
  return fit;
}

CovarianceFit fit_second_moment(const FunctionalDataset& data, const Kernel& kernel, double eta,
                                const SolverConfig& cfg, const BlockDiagMatrix* initial) {
  return fit_second_moment(data, gram(kernel, data.layout, data.locations), eta, cfg, initial);
}

std::pair<MeanFit, CovarianceFit> fit_covariance_centered(const FunctionalDataset& data,
                                                          const GramMatrix& gram, double nu, double eta,
                                                          const SolverConfig& cfg) {
  MeanFit mean = fit_mean(data, gram, nu);
  // The mean at the data locations is K a: the frame over the locations is
  // the Gram matrix itself.
  const Eigen::VectorXd mean_at_data = gram.values * mean.coefficients;
  std::vector<std::vector<double>> centered = data.values;
  for (int i = 0; i < data.layout.blocks(); ++i) {
    for (int j = 0; j < data.layout.count(i); ++j) {
      centered[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -=
          mean_at_data[data.layout.offset(i) + j];
    }
  }
  FunctionalDataset centered_data(data.locations, std::move(centered));
  CovarianceFit fit = fit_second_moment(centered_data, gram, eta, cfg);
  fit.mode = FitMode::CenteredCovariance;
  return {std::move(mean), std::move(fit)};
}

std::pair<MeanFit, CovarianceFit> fit_covariance_centered(const FunctionalDataset& data,
                                                          const Kernel& kernel, double nu, double eta,
                                                          const SolverConfig& cfg) {
  return fit_covariance_centered(data, gram(kernel, data.layout, data.locations), nu, eta, cfg);
}

Eigen::VectorXd evaluate_mean(const MeanFit& fit, const Eigen::MatrixXd& frame_matrix) {
  if (frame_matrix.rows() != fit.coefficients.size()) {
    throw std::invalid_argument("evaluate_mean: frame rows do not match coefficient length");
  }
  return frame_matrix.transpose() * fit.coefficients;
}

Eigen::MatrixXd evaluate_on_grid(const CovarianceFit& fit, const Eigen::MatrixXd& frame_matrix,
                                 const MeanFit* mean) {
  const BlockLayout& layout = fit.coefficients.layout();
  if (frame_matrix.rows() != layout.total()) {
    throw std::invalid_argument("evaluate_on_grid: frame rows do not match layout");
  }
  const auto m = frame_matrix.cols();
  Eigen::MatrixXd bf(layout.total(), m);
  for (int i = 0; i < layout.blocks(); ++i) {
    bf.middleRows(layout.offset(i), layout.count(i)).noalias() =
        fit.coefficients.block(i) * frame_matrix.middleRows(layout.offset(i), layout.count(i));
  }
  Eigen::MatrixXd surface = frame_matrix.transpose() * bf;
  if (mean != nullptr && fit.mode == FitMode::SecondMoment) {
    const Eigen::VectorXd mean_grid = evaluate_mean(*mean, frame_matrix);
    surface.noalias() -= mean_grid * mean_grid.transpose();
  }
  surface = ((surface + surface.transpose()) / 2.0).eval();
  return surface;
}

Eigen::VectorXd recover_coefficients(const CovarianceFit& fit) {
  const BlockLayout& layout = fit.coefficients.layout();
  Eigen::VectorXd out(layout.total_pairs());
  for (int i = 0; i < layout.blocks(); ++i) {
    const auto& block = fit.coefficients.block(i);
    const long long base = layout.pair_offset(i);
    for (int j2 = 1; j2 < layout.count(i); ++j2) {
      for (int j1 = 0; j1 < j2; ++j1) {
        out[base + j1 + static_cast<long long>(j2) * (j2 - 1) / 2] = 2.0 * block(j1, j2);
      }
    }
  }
  return out;
}

FpcaResult fpca(const CovarianceFit& fit, const GramMatrix& gram, const MeanFit* mean,
                bool truncate_negative) {
  const BlockLayout& layout = fit.coefficients.layout();
  if (gram.layout != layout) throw std::invalid_argument("fpca: gram layout mismatch");
  const auto R = gram.values.rows();

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> kernel_eig(gram.values);
  if (kernel_eig.info() != Eigen::Success) throw std::runtime_error("fpca: Gram eigendecomposition failed");
  const Eigen::VectorXd d = kernel_eig.eigenvalues();
  const double d_max = d.maxCoeff();
  Eigen::VectorXd sqrt_d = Eigen::VectorXd::Zero(R);
  Eigen::VectorXd inv_sqrt_d = Eigen::VectorXd::Zero(R);
  if (d_max > 0.0) {
    for (Eigen::Index l = 0; l < R; ++l) {
      if (d[l] > 1e-12 * d_max) {
        sqrt_d[l] = std::sqrt(d[l]);
        inv_sqrt_d[l] = 1.0 / sqrt_d[l];
      }
    }
  }
  const Eigen::MatrixXd& q_basis = kernel_eig.eigenvectors();
  const Eigen::MatrixXd root = q_basis * sqrt_d.asDiagonal() * q_basis.transpose();  // K^{1/2}

  Eigen::MatrixXd broot(R, R);  // B K^{1/2}, block rows
  for (int i = 0; i < layout.blocks(); ++i) {
    broot.middleRows(layout.offset(i), layout.count(i)).noalias() =
        fit.coefficients.block(i) * root.middleRows(layout.offset(i), layout.count(i));
  }
  Eigen::MatrixXd core = root * broot;  // K^{1/2} B K^{1/2}
  if (mean != nullptr && fit.mode == FitMode::SecondMoment) {
    const Eigen::VectorXd w = root * mean->coefficients;
    core.noalias() -= w * w.transpose();
  }
  core = ((core + core.transpose()) / 2.0).eval();

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> core_eig(core);
  if (core_eig.info() != Eigen::Success) throw std::runtime_error("fpca: spectral decomposition failed");
  const Eigen::VectorXd lambda = core_eig.eigenvalues();
  const double lambda_scale = lambda.cwiseAbs().maxCoeff();

  std::vector<Eigen::Index> kept;
  if (lambda_scale > 0.0) {
    for (Eigen::Index l = 0; l < R; ++l) {
      if (std::abs(lambda[l]) <= 1e-10 * lambda_scale) continue;
      if (truncate_negative && lambda[l] <= 0.0) continue;
      kept.push_back(l);
    }
  }
  // Descending by signed value; SelfAdjointEigenSolver sorts ascending, so
  // reversing keeps the original index order within ties.
  std::stable_sort(kept.begin(), kept.end(),
                   [&lambda](Eigen::Index a, Eigen::Index b) { return lambda[a] > lambda[b]; });

  FpcaResult result;
  const auto q = static_cast<Eigen::Index>(kept.size());
  result.eigenvalues.resize(q);
  Eigen::MatrixXd kept_vectors(R, q);
  for (Eigen::Index c = 0; c < q; ++c) {
    result.eigenvalues[c] = lambda[kept[static_cast<std::size_t>(c)]];
    kept_vectors.col(c) = core_eig.eigenvectors().col(kept[static_cast<std::size_t>(c)]);
  }
  // U solves K^{1/2} U = V through the clamped eigenbasis.
  result.coefficients = q_basis * inv_sqrt_d.asDiagonal() * (q_basis.transpose() * kept_vectors);
  if (q > 0) {
    // The pseudo-inverse amplifies whatever out-of-range noise the kept
    // eigenvectors carry when K is close to singular; one pass of
    // orthonormalization in the K metric restores U^T K U = I.
    const Eigen::MatrixXd metric =
        result.coefficients.transpose() * gram.values * result.coefficients;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> metric_eig(
        ((metric + metric.transpose()) / 2.0).eval());
    Eigen::VectorXd scale = metric_eig.eigenvalues();
    for (Eigen::Index l = 0; l < q; ++l) scale[l] = scale[l] > 0.0 ? 1.0 / std::sqrt(scale[l]) : 0.0;
    result.coefficients = result.coefficients * metric_eig.eigenvectors() * scale.asDiagonal() *
                          metric_eig.eigenvectors().transpose();
  }
  return result;
}

Eigen::MatrixXd evaluate_eigenfunctions(const FpcaResult& result, const Eigen::MatrixXd& frame_matrix) {
  if (frame_matrix.rows() != result.coefficients.rows()) {
    throw std::invalid_argument("evaluate_eigenfunctions: frame rows do not match coefficient length");
  }
  return frame_matrix.transpose() * result.coefficients;
}

}  // namespace trek

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "trek/block_layout.hpp"

namespace trek {

/// Block-diagonal matrix with n dense square blocks B_1..B_n. This is the
/// solution, residual and direction object of the tensorized solver. The
/// `symmetric` flag is structural: operations that provably preserve exact
/// blockwise symmetry propagate it, and the Khatri-Rao apply re-symmetrizes
/// its output whenever the flag is set.
class BlockDiagMatrix {
 public:
  BlockDiagMatrix() = default;
  explicit BlockDiagMatrix(BlockLayout layout);  // zero blocks
  BlockDiagMatrix(const BlockDiagMatrix& other);
  BlockDiagMatrix(BlockDiagMatrix&& other) noexcept = default;
  BlockDiagMatrix& operator=(const BlockDiagMatrix& other) = default;
  BlockDiagMatrix& operator=(BlockDiagMatrix&& other) noexcept = default;

  /// diag(y_1 y_1^T, ..., y_n y_n^T) from per-block value vectors.
  static BlockDiagMatrix outer_products(const BlockLayout& layout,
                                        const std::vector<std::vector<double>>& values);

  const BlockLayout& layout() const { return layout_; }
  int blocks() const { return layout_.blocks(); }
  Eigen::MatrixXd& block(int i) { return blocks_[static_cast<std::size_t>(i)]; }
  const Eigen::MatrixXd& block(int i) const { return blocks_[static_cast<std::size_t>(i)]; }

  bool is_symmetric() const { return symmetric_; }
  void set_symmetric(bool value) { symmetric_ = value; }

  void setZero();
  /// Blockwise (B + B^T)/2; marks the matrix symmetric.
  void symmetrize();
  bool all_finite() const;
  /// Max |B_i - B_i^T| entry over all blocks.
  double max_asymmetry() const;

  /// Dense R x R assembly; test and FPCA convenience, not used in iterations.
  Eigen::MatrixXd to_dense() const;

 private:
  BlockLayout layout_;
  std::vector<Eigen::MatrixXd> blocks_;
  bool symmetric_ = false;
};

namespace detail {
/// Number of block-diagonal buffers allocated so far (process-wide). The
/// iteration loop of the tensorized solver must not grow this.
std::uint64_t block_buffer_allocations();
}  // namespace detail

/// sum_i trace(A_i^T B_i) == odvec(A)^T odvec(B).
double frobenius_dot(const BlockDiagMatrix& a, const BlockDiagMatrix& b);

/// Zeroes every diagonal entry of every block. For symmetric input this is
/// the orthogonal projection onto the solver's feasible set.
BlockDiagMatrix diag_elim(const BlockDiagMatrix& b);
void diag_elim_in_place(BlockDiagMatrix& b);

/// Full projection for general (possibly asymmetric) input: off-diagonal
/// entries are averaged with their mirror, diagonals zeroed. Coincides with
/// diag_elim on symmetric input.
BlockDiagMatrix offdiag_symmetric_part(const BlockDiagMatrix& b);

/// Column-major stacking of the blocks into a length sum(r_i^2) vector, and
/// its inverse.
Eigen::VectorXd odvec(const BlockDiagMatrix& b);
BlockDiagMatrix odmat(const Eigen::VectorXd& v, const BlockLayout& layout);

// Inner-product-space operations used by the generic solver.
inline double dot(const BlockDiagMatrix& a, const BlockDiagMatrix& b) { return frobenius_dot(a, b); }
void axpy(double alpha, const BlockDiagMatrix& x, BlockDiagMatrix& y);  // y += alpha*x
void xpby(const BlockDiagMatrix& x, double beta, BlockDiagMatrix& y);   // y = x + beta*y
inline bool is_finite(const BlockDiagMatrix& b) { return b.all_finite(); }

}  // namespace trek

#pragma once

#include <Eigen/Dense>

#include "trek/block_diag.hpp"
#include "trek/kernels.hpp"

namespace trek {

/// Matrix-free action of (K (*) K + eta*I) on diagonally vectorized
/// block-diagonal matrices, where (*) is the block-wise Khatri-Rao product.
/// Per output block: C_i = eta*B_i + sum_i' K_ii' B_i' K_ii'^T. The Gram
/// blocks are addressed as views into the dense R x R storage; no copy of K
/// is made. With the input flagged symmetric the output is re-symmetrized,
/// so solver iterates keep exact blockwise symmetry.
class LazyKhatriOperator {
 public:
  LazyKhatriOperator(const GramMatrix& gram, double ridge);

  const GramMatrix& gram() const { return *gram_; }
  double ridge() const { return ridge_; }

  /// scratch must be at least max_count x max_count; it is the only working
  /// buffer of the serial path.
  void apply(const BlockDiagMatrix& in, BlockDiagMatrix& out, Eigen::MatrixXd& scratch) const;
  BlockDiagMatrix apply(const BlockDiagMatrix& in) const;

 private:
  void apply_block(int i, const BlockDiagMatrix& in, BlockDiagMatrix& out,
                   Eigen::MatrixXd& scratch) const;
  void check_symmetry(int i, const BlockDiagMatrix& in, const BlockDiagMatrix& out) const;

  const GramMatrix* gram_;
  double ridge_;
  double gram_scale_;  // max |K| entry, the scale reference for symmetry checks
};

inline BlockDiagMatrix lazy_khatri_apply(const LazyKhatriOperator& op, const BlockDiagMatrix& b) {
  return op.apply(b);
}

}  // namespace trek

#include "trek/lazy_khatri.hpp"

#include <cassert>
#include <stdexcept>

#include "trek/threading.hpp"

namespace trek {

LazyKhatriOperator::LazyKhatriOperator(const GramMatrix& gram, double ridge)
    : gram_(&gram), ridge_(ridge), gram_scale_(gram.values.size() > 0 ? gram.values.cwiseAbs().maxCoeff() : 0.0) {
  if (ridge < 0.0) throw std::invalid_argument("LazyKhatriOperator: ridge must be >= 0");
}

void LazyKhatriOperator::apply_block(int i, const BlockDiagMatrix& in, BlockDiagMatrix& out,
                                     Eigen::MatrixXd& scratch) const {
  const BlockLayout& layout = gram_->layout;
  const int n = layout.blocks();
  const int ri = layout.count(i);
  Eigen::MatrixXd& ci = out.block(i);
  ci = ridge_ * in.block(i);
  for (int ip = 0; ip < n; ++ip) {
    const int rp = layout.count(ip);
    const auto kblock = gram_->block(i, ip);
    auto tmp = scratch.topLeftCorner(ri, rp);
    tmp.noalias() = kblock * in.block(ip);
    ci.noalias() += tmp * kblock.transpose();
  }
  if (in.is_symmetric()) {
#ifndef NDEBUG
    check_symmetry(i, in, out);
#endif
    ci = ((ci + ci.transpose()) / 2.0).eval();
  }
}

void LazyKhatriOperator::check_symmetry(int i, const BlockDiagMatrix& in,
                                        const BlockDiagMatrix& out) const {
  // The rounding asymmetry of K B K^T scales with the products' magnitude,
  // not with the (possibly cancelled) output, so the tolerance is relative to
  // an upper bound on the intermediate terms.
  const Eigen::MatrixXd& ci = out.block(i);
  if (!ci.allFinite()) return;
  double in_scale = 0.0;
  for (int ip = 0; ip < in.blocks(); ++ip) {
    in_scale = std::max(in_scale, in.block(ip).cwiseAbs().maxCoeff());
  }
  const double scale = std::max(
      ridge_ * in_scale +
          gram_scale_ * gram_scale_ * in_scale * static_cast<double>(gram_->layout.total()),
      1e-300);
  assert((ci - ci.transpose()).cwiseAbs().maxCoeff() <= 1e-13 * scale);
  (void)scale;
}

void LazyKhatriOperator::apply(const BlockDiagMatrix& in, BlockDiagMatrix& out,
                               Eigen::MatrixXd& scratch) const {
  const BlockLayout& layout = gram_->layout;
  if (in.layout() != layout) throw std::invalid_argument("LazyKhatriOperator: input layout mismatch");
  if (out.layout() != layout) throw std::invalid_argument("LazyKhatriOperator: output layout mismatch");
  const int n = layout.blocks();
  if (max_threads() <= 1) {
    if (scratch.rows() < layout.max_count() || scratch.cols() < layout.max_count()) {
      throw std::invalid_argument("LazyKhatriOperator: scratch buffer too small");
    }
    for (int i = 0; i < n; ++i) apply_block(i, in, out, scratch);
  } else {
    // Output blocks are independent; each worker owns a private scratch.
    detail::parallel_for(0, n, [&](int i) {
      thread_local Eigen::MatrixXd local;
      if (local.rows() < layout.max_count() || local.cols() < layout.max_count()) {
        local.resize(layout.max_count(), layout.max_count());
      }
      apply_block(i, in, out, local);
    });
  }
  out.set_symmetric(in.is_symmetric());
}

BlockDiagMatrix LazyKhatriOperator::apply(const BlockDiagMatrix& in) const {
  BlockDiagMatrix out(gram_->layout);
  Eigen::MatrixXd scratch(gram_->layout.max_count(), gram_->layout.max_count());
  apply(in, out, scratch);
  return out;
}

}  // namespace trek

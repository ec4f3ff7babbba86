#include "trek/block_diag.hpp"

#include <atomic>
#include <stdexcept>
#include <string>

namespace trek {

namespace {

std::atomic<std::uint64_t> g_block_allocations{0};

void check_same_layout(const BlockDiagMatrix& a, const BlockDiagMatrix& b, const char* where) {
  if (a.layout() != b.layout()) {
    throw std::invalid_argument(std::string(where) + ": block layouts differ");
  }
}

}  // namespace

namespace detail {
std::uint64_t block_buffer_allocations() { return g_block_allocations.load(std::memory_order_relaxed); }
}  // namespace detail

BlockDiagMatrix::BlockDiagMatrix(BlockLayout layout) : layout_(std::move(layout)) {
  blocks_.resize(static_cast<std::size_t>(layout_.blocks()));
  for (int i = 0; i < layout_.blocks(); ++i) {
    blocks_[static_cast<std::size_t>(i)].setZero(layout_.count(i), layout_.count(i));
  }
  symmetric_ = true;  // zero is symmetric
  g_block_allocations.fetch_add(1, std::memory_order_relaxed);
}

BlockDiagMatrix::BlockDiagMatrix(const BlockDiagMatrix& other)
    : layout_(other.layout_), blocks_(other.blocks_), symmetric_(other.symmetric_) {
  g_block_allocations.fetch_add(1, std::memory_order_relaxed);
}

BlockDiagMatrix BlockDiagMatrix::outer_products(const BlockLayout& layout,
                                                const std::vector<std::vector<double>>& values) {
  if (static_cast<int>(values.size()) != layout.blocks()) {
    throw std::invalid_argument("outer_products: got " + std::to_string(values.size()) +
                                " value blocks, layout expects " + std::to_string(layout.blocks()));
  }
  BlockDiagMatrix out(layout);
  for (int i = 0; i < layout.blocks(); ++i) {
    if (static_cast<int>(values[static_cast<std::size_t>(i)].size()) != layout.count(i)) {
      throw std::invalid_argument("outer_products: block " + std::to_string(i) + " has " +
                                  std::to_string(values[static_cast<std::size_t>(i)].size()) +
                                  " values, layout expects " + std::to_string(layout.count(i)));
    }
    const Eigen::Map<const Eigen::VectorXd> y(values[static_cast<std::size_t>(i)].data(), layout.count(i));
    out.block(i).noalias() = y * y.transpose();
  }
  out.set_symmetric(true);
  return out;
}

void BlockDiagMatrix::setZero() {
  for (auto& b : blocks_) b.setZero();
  symmetric_ = true;
}

void BlockDiagMatrix::symmetrize() {
  for (auto& b : blocks_) b = ((b + b.transpose()) / 2.0).eval();
  symmetric_ = true;
}

bool BlockDiagMatrix::all_finite() const {
  for (const auto& b : blocks_) {
    if (!b.allFinite()) return false;
  }
  return true;
}

double BlockDiagMatrix::max_asymmetry() const {
  double worst = 0.0;
  for (const auto& b : blocks_) {
    const double asym = (b - b.transpose()).cwiseAbs().maxCoeff();
    if (asym > worst) worst = asym;
  }
  return worst;
}

Eigen::MatrixXd BlockDiagMatrix::to_dense() const {
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(layout_.total(), layout_.total());
  for (int i = 0; i < layout_.blocks(); ++i) {
    dense.block(layout_.offset(i), layout_.offset(i), layout_.count(i), layout_.count(i)) = block(i);
  }
  return dense;
}

double frobenius_dot(const BlockDiagMatrix& a, const BlockDiagMatrix& b) {
  check_same_layout(a, b, "frobenius_dot");
  double sum = 0.0;
  for (int i = 0; i < a.blocks(); ++i) {
    sum += a.block(i).cwiseProduct(b.block(i)).sum();
  }
  return sum;
}

BlockDiagMatrix diag_elim(const BlockDiagMatrix& b) {
  BlockDiagMatrix out = b;
  diag_elim_in_place(out);
  return out;
}

void diag_elim_in_place(BlockDiagMatrix& b) {
  for (int i = 0; i < b.blocks(); ++i) b.block(i).diagonal().setZero();
}

BlockDiagMatrix offdiag_symmetric_part(const BlockDiagMatrix& b) {
  BlockDiagMatrix out(b.layout());
  for (int i = 0; i < b.blocks(); ++i) {
    out.block(i) = (b.block(i) + b.block(i).transpose()) / 2.0;
    out.block(i).diagonal().setZero();
  }
  out.set_symmetric(true);
  return out;
}

Eigen::VectorXd odvec(const BlockDiagMatrix& b) {
  Eigen::VectorXd v(b.layout().total_squared());
  for (int i = 0; i < b.blocks(); ++i) {
    const auto& block = b.block(i);
    const auto len = block.size();
    v.segment(b.layout().squared_offset(i), len) =
        Eigen::Map<const Eigen::VectorXd>(block.data(), len);
  }
  return v;
}

BlockDiagMatrix odmat(const Eigen::VectorXd& v, const BlockLayout& layout) {
  if (v.size() != layout.total_squared()) {
    throw std::invalid_argument("odmat: vector length " + std::to_string(v.size()) +
                                " does not match layout total " + std::to_string(layout.total_squared()));
  }
  BlockDiagMatrix out(layout);
  for (int i = 0; i < layout.blocks(); ++i) {
    const int r = layout.count(i);
    out.block(i) = Eigen::Map<const Eigen::MatrixXd>(v.data() + layout.squared_offset(i), r, r);
  }
  out.set_symmetric(false);
  return out;
}

void axpy(double alpha, const BlockDiagMatrix& x, BlockDiagMatrix& y) {
  check_same_layout(x, y, "axpy");
  for (int i = 0; i < y.blocks(); ++i) y.block(i).noalias() += alpha * x.block(i);
  y.set_symmetric(y.is_symmetric() && x.is_symmetric());
}

void xpby(const BlockDiagMatrix& x, double beta, BlockDiagMatrix& y) {
  check_same_layout(x, y, "xpby");
  for (int i = 0; i < y.blocks(); ++i) y.block(i) = x.block(i) + beta * y.block(i);
  y.set_symmetric(y.is_symmetric() && x.is_symmetric());
}

}  // namespace trek

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace trek {

enum class SolveStatus { Converged, MaxIterReached, Diverged, NonPositiveCurvature };

const char* to_string(SolveStatus status);
SolveStatus solve_status_from_string(const std::string& name);

struct SolverConfig {
  double tol = 1e-10;            // threshold on the squared projected-residual norm
  int maxiter = 500;
  double divergence_cap = 1e12;  // abort when delta exceeds cap * delta_0
  bool relative_tol = false;     // converge on delta < tol * delta_0 instead

  void validate() const {
    if (!(tol > 0.0)) throw std::invalid_argument("SolverConfig: tol must be > 0");
    if (maxiter < 1) throw std::invalid_argument("SolverConfig: maxiter must be >= 1");
    if (!(divergence_cap > 0.0)) throw std::invalid_argument("SolverConfig: divergence_cap must be > 0");
  }
};

struct SolveReport {
  int iterations = 0;                  // kappa
  std::vector<double> residual_trace;  // delta_0 .. delta_kappa
  SolveStatus status = SolveStatus::MaxIterReached;
};

// Inner-product-space operations for flat vectors; the solver is written
// against dot/axpy/xpby/is_finite and works for any type providing them
// (block-diagonal matrices supply their own overloads).
inline double dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.dot(b); }
inline void axpy(double alpha, const Eigen::VectorXd& x, Eigen::VectorXd& y) { y.noalias() += alpha * x; }
inline void xpby(const Eigen::VectorXd& x, double beta, Eigen::VectorXd& y) { y = x + beta * y; }
inline bool is_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

struct NullSolveObserver {
  template <class Vec>
  void operator()(int, const Vec&, const Vec&, const Vec&) const {}
};

/// Conjugate gradient descent restricted to the range of an orthogonal
/// projector: minimizes 1/2 x^T S x - b^T x over that range. `apply(in, out)`
/// must be the action of a matrix that is symmetric positive definite on the
/// range; `project` applies the projector in place. The projected residual
/// overwrites the residual, so one operator application and four vector
/// buffers are the entire per-iteration cost. x enters as the initial guess
/// (projected on entry) and leaves as the solution.
///
/// The observer is called as observe(k, x, r, p) with the projected residual
/// after every accepted iterate, including k = 0.
///
/// Behavior for right-hand sides driving the iteration off the projector's
/// range is undefined; the non-positive-curvature guard is the only check.
template <class Vec, class ApplyFn, class ProjectFn, class Observer = NullSolveObserver>
SolveReport rek_solve_in_place(ApplyFn&& apply, ProjectFn&& project, const Vec& rhs, Vec& x,
                               const SolverConfig& cfg, Observer&& observe = Observer{}) {
  cfg.validate();
  SolveReport report;
  project(x);
  Vec v = x;           // buffer for S p
  apply(x, v);
  Vec r = rhs;
  axpy(-1.0, v, r);    // r = b - S x
  project(r);
  Vec p = r;
  double delta = dot(r, r);  // delta_old; also delta_new before the loop
  report.residual_trace.push_back(delta);
  observe(0, x, r, p);
  if (!std::isfinite(delta)) {
    report.status = SolveStatus::Diverged;
    return report;
  }
  const double delta0 = delta;
  const double threshold = cfg.relative_tol ? cfg.tol * delta0 : cfg.tol;
  if (delta < threshold) {  // already converged; perform zero iterations
    report.status = SolveStatus::Converged;
    return report;
  }
  const double cap = cfg.divergence_cap * delta0;
  Vec x_prev = x;
  int k = 0;
  report.status = SolveStatus::MaxIterReached;
  while (k < cfg.maxiter) {
    apply(p, v);
    const double curvature = dot(p, v);
    if (!std::isfinite(curvature)) {
      report.status = SolveStatus::Diverged;
      break;
    }
    if (curvature <= 0.0) {
      report.status = SolveStatus::NonPositiveCurvature;
      break;
    }
    const double alpha = delta / curvature;
    x_prev = x;
    axpy(alpha, p, x);
    axpy(-alpha, v, r);
    project(r);  // overwrite: the projected residual is all later steps need
    const double delta_new = dot(r, r);
    ++k;
    report.residual_trace.push_back(delta_new);
    observe(k, x, r, p);
    if (!std::isfinite(delta_new) || delta_new > cap) {
      report.status = SolveStatus::Diverged;
      if (!is_finite(x)) x = x_prev;  // keep the last finite iterate
      break;
    }
    const double beta = delta_new / delta;
    delta = delta_new;
    if (delta < threshold) {
      report.status = SolveStatus::Converged;
      break;
    }
    xpby(r, beta, p);  // p = r + beta p
  }
  report.iterations = k;
  return report;
}

/// Abstract positive-definite operator on flat vectors.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual Eigen::Index dim() const = 0;
  virtual void apply(const Eigen::VectorXd& in, Eigen::VectorXd& out) const = 0;
};

/// Abstract orthogonal projector on flat vectors. Implementations must be
/// idempotent and self-adjoint.
class Projector {
 public:
  virtual ~Projector() = default;
  virtual void apply_in_place(Eigen::VectorXd& v) const = 0;
};

class DenseOperator final : public LinearOperator {
 public:
  explicit DenseOperator(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {}
  Eigen::Index dim() const override { return matrix_.rows(); }
  void apply(const Eigen::VectorXd& in, Eigen::VectorXd& out) const override {
    out.noalias() = matrix_ * in;
  }
  const Eigen::MatrixXd& matrix() const { return matrix_; }

 private:
  Eigen::MatrixXd matrix_;
};

class IdentityProjector final : public Projector {
 public:
  void apply_in_place(Eigen::VectorXd&) const override {}
};

class DenseProjector final : public Projector {
 public:
  explicit DenseProjector(Eigen::MatrixXd projection) : projection_(std::move(projection)) {}
  void apply_in_place(Eigen::VectorXd& v) const override { v = (projection_ * v).eval(); }
  const Eigen::MatrixXd& matrix() const { return projection_; }

 private:
  Eigen::MatrixXd projection_;
};

std::pair<Eigen::VectorXd, SolveReport> rek_solve(const LinearOperator& op, const Projector& projector,
                                                  const Eigen::VectorXd& rhs, const Eigen::VectorXd& x0,
                                                  const SolverConfig& cfg);

}  // namespace trek

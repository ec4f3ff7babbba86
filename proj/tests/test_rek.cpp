#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "trek/rek.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using trek::SolveReport;
using trek::SolverConfig;
using trek::SolveStatus;

namespace {

std::mt19937& rng() {
  static std::mt19937 gen(1234);
  return gen;
}

MatrixXd random_spd(int n) {
  // Well conditioned on purpose: the finite-termination and per-iterate
  // comparisons below are exact-arithmetic properties.
  std::normal_distribution<double> gauss;
  MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = gauss(rng());
  MatrixXd s = a * a.transpose() / n + MatrixXd::Identity(n, n);
  return ((s + s.transpose()) / 2.0).eval();
}

VectorXd random_vector(int n) {
  std::normal_distribution<double> gauss;
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = gauss(rng());
  return v;
}

/// Orthogonal projector onto the span of `rank` random directions.
MatrixXd random_projector(int n, int rank) {
  MatrixXd a(n, rank);
  std::normal_distribution<double> gauss;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < rank; ++j) a(i, j) = gauss(rng());
  const Eigen::HouseholderQR<MatrixXd> qr(a);
  const MatrixXd q = qr.householderQ() * MatrixXd::Identity(n, rank);
  return q * q.transpose();
}

/// Restricted solution through an explicit basis: x = C y with C^T S C y = C^T b.
VectorXd dense_restricted_solve(const MatrixXd& s, const MatrixXd& basis, const VectorXd& b) {
  const MatrixXd reduced = basis.transpose() * s * basis;
  const VectorXd rhs = basis.transpose() * b;
  return basis * reduced.ldlt().solve(rhs);
}

/// Textbook conjugate gradient descent, kept independent of the solver under
/// test on purpose.
std::vector<VectorXd> plain_cgd_iterates(const MatrixXd& s, const VectorXd& b, double tol, int maxiter) {
  std::vector<VectorXd> iterates;
  VectorXd x = VectorXd::Zero(b.size());
  iterates.push_back(x);
  VectorXd r = b - s * x;
  VectorXd p = r;
  double delta = r.squaredNorm();
  for (int k = 0; k < maxiter && delta >= tol; ++k) {
    const VectorXd v = s * p;
    const double alpha = delta / p.dot(v);
    x += alpha * p;
    iterates.push_back(x);
    r -= alpha * v;
    const double delta_new = r.squaredNorm();
    p = r + (delta_new / delta) * p;
    delta = delta_new;
  }
  return iterates;
}

double objective(const MatrixXd& s, const VectorXd& b, const VectorXd& x) {
  return 0.5 * x.dot(s * x) - b.dot(x);
}

}  // namespace

TEST_CASE("identity system converges in one iteration") {
  const int n = 6;
  const trek::DenseOperator op(MatrixXd::Identity(n, n));
  const trek::IdentityProjector projector;
  const VectorXd b = random_vector(n);
  const auto [x, report] = trek::rek_solve(op, projector, b, VectorXd::Zero(n), SolverConfig{});
  CHECK(report.status == SolveStatus::Converged);
  CHECK(report.iterations == 1);
  CHECK((x - b).norm() <= 1e-12 * b.norm());
  CHECK(report.residual_trace.size() == 2);
  CHECK(report.residual_trace.back() < 1e-10);
}

TEST_CASE("rank-one restriction of a diagonal system") {
  MatrixXd s(2, 2);
  s << 1.0, 0.0, 0.0, 2.0;
  MatrixXd projection = MatrixXd::Zero(2, 2);
  projection(0, 0) = 1.0;  // span{(1,0)}
  const VectorXd b = (VectorXd(2) << 3.0, 5.0).finished();
  const auto [x, report] =
      trek::rek_solve(trek::DenseOperator(s), trek::DenseProjector(projection), b, VectorXd::Zero(2),
                      SolverConfig{});
  CHECK(report.status == SolveStatus::Converged);
  CHECK(x(0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(x(1) == 0.0);
}

TEST_CASE("random restricted systems match the dense restricted solve") {
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 8, rank = 3;
    const MatrixXd s = random_spd(n);
    MatrixXd basis(n, rank);
    std::normal_distribution<double> gauss;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < rank; ++j) basis(i, j) = gauss(rng());
    const Eigen::HouseholderQR<MatrixXd> qr(basis);
    const MatrixXd q = qr.householderQ() * MatrixXd::Identity(n, rank);
    const VectorXd b = random_vector(n);
    const auto [x, report] = trek::rek_solve(trek::DenseOperator(s), trek::DenseProjector(q * q.transpose()),
                                             b, VectorXd::Zero(n), SolverConfig{});
    CHECK(report.status == SolveStatus::Converged);
    CHECK(report.iterations <= rank);
    const VectorXd expected = dense_restricted_solve(s, q, b);
    CHECK((x - expected).norm() <= 1e-8 * (1.0 + expected.norm()));
  }
}

TEST_CASE("finite termination within the projector rank") {
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 4 + static_cast<int>(rng()() % 17);  // up to 20
    const int rank = 1 + static_cast<int>(rng()() % n);
    const MatrixXd s = random_spd(n);
    const VectorXd b = random_vector(n);
    const auto [x, report] = trek::rek_solve(trek::DenseOperator(s), trek::DenseProjector(random_projector(n, rank)),
                                             b, VectorXd::Zero(n), SolverConfig{});
    CHECK(report.status == SolveStatus::Converged);
    CHECK(report.iterations <= rank);
    CHECK(report.residual_trace.size() == static_cast<std::size_t>(report.iterations) + 1);
  }
}

TEST_CASE("projected residuals stay mutually orthogonal and directions conjugate") {
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 6 + static_cast<int>(rng()() % 7);  // up to 12
    const int rank = 2 + static_cast<int>(rng()() % (n - 2));
    const MatrixXd s = random_spd(n);
    const MatrixXd projection = random_projector(n, rank);
    const VectorXd b = random_vector(n);

    std::vector<VectorXd> residuals;
    std::vector<VectorXd> directions;
    std::vector<VectorXd> iterates;
    const auto observe = [&](int, const VectorXd& x, const VectorXd& r, const VectorXd& p) {
      iterates.push_back(x);
      residuals.push_back(r);
      directions.push_back(p);
    };
    VectorXd x = VectorXd::Zero(n);
    trek::rek_solve_in_place(
        [&s](const VectorXd& in, VectorXd& out) { out.noalias() = s * in; },
        [&projection](VectorXd& v) { v = (projection * v).eval(); }, b, x, SolverConfig{}, observe);

    const double r0 = residuals.front().squaredNorm();
    for (std::size_t k = 1; k < residuals.size(); ++k) {
      for (std::size_t i = 0; i < k; ++i) {
        CHECK(std::abs(residuals[k].dot(projection * residuals[i])) <= 1e-8 * r0);
      }
    }
    // Directions recorded at step k are p_{k-1}; skip the k=0 snapshot of p_0.
    double max_curvature = 0.0;
    for (std::size_t k = 1; k < directions.size(); ++k) {
      max_curvature = std::max(max_curvature, directions[k].dot(s * directions[k]));
    }
    for (std::size_t k = 2; k < directions.size(); ++k) {
      for (std::size_t i = 1; i < k; ++i) {
        CHECK(std::abs(directions[k].dot(s * directions[i])) <= 1e-8 * max_curvature);
      }
    }
    // Best-approximation property: the objective never increases.
    for (std::size_t k = 1; k < iterates.size(); ++k) {
      CHECK(objective(s, b, iterates[k]) <= objective(s, b, iterates[k - 1]));
    }
  }
}

TEST_CASE("identity projector reduces to plain conjugate gradient descent") {
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 5 + static_cast<int>(rng()() % 46);  // up to 50
    const MatrixXd s = random_spd(n);
    VectorXd b = random_vector(n);
    b.normalize();
    const auto reference = plain_cgd_iterates(s, b, 1e-10, 200);

    std::vector<VectorXd> iterates;
    VectorXd x = VectorXd::Zero(n);
    trek::rek_solve_in_place(
        [&s](const VectorXd& in, VectorXd& out) { out.noalias() = s * in; }, [](VectorXd&) {}, b, x,
        SolverConfig{1e-10, 200}, [&](int, const VectorXd& xk, const VectorXd&, const VectorXd&) {
          iterates.push_back(xk);
        });

    REQUIRE(iterates.size() == reference.size());
    for (std::size_t k = 0; k < iterates.size(); ++k) {
      CHECK((iterates[k] - reference[k]).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("already-converged start performs zero iterations") {
  const int n = 5;
  const MatrixXd s = random_spd(n);
  const VectorXd b = random_vector(n);
  const VectorXd x_star = s.ldlt().solve(b);
  const auto [x, report] =
      trek::rek_solve(trek::DenseOperator(s), trek::IdentityProjector{}, b, x_star, SolverConfig{});
  CHECK(report.status == SolveStatus::Converged);
  CHECK(report.iterations == 0);
  CHECK(report.residual_trace.size() == 1);
  SUBCASE("zero right-hand side") {
    const auto [x0, rep0] = trek::rek_solve(trek::DenseOperator(s), trek::IdentityProjector{},
                                            VectorXd::Zero(n), VectorXd::Zero(n), SolverConfig{});
    CHECK(rep0.status == SolveStatus::Converged);
    CHECK(rep0.iterations == 0);
    CHECK(x0.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("initial guess is projected on entry") {
  MatrixXd s(2, 2);
  s << 2.0, 0.0, 0.0, 3.0;
  MatrixXd projection = MatrixXd::Zero(2, 2);
  projection(0, 0) = 1.0;
  const VectorXd b = (VectorXd(2) << 4.0, 7.0).finished();
  const VectorXd x0 = (VectorXd(2) << 100.0, -50.0).finished();  // off the range
  const auto [x, report] =
      trek::rek_solve(trek::DenseOperator(s), trek::DenseProjector(projection), b, x0, SolverConfig{});
  CHECK(report.status == SolveStatus::Converged);
  CHECK(x(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(x(1) == 0.0);
}

TEST_CASE("non-positive curvature aborts with the current iterate") {
  const int n = 4;
  const MatrixXd s = -MatrixXd::Identity(n, n);
  const VectorXd b = random_vector(n);
  const auto [x, report] =
      trek::rek_solve(trek::DenseOperator(s), trek::IdentityProjector{}, b, VectorXd::Zero(n), SolverConfig{});
  CHECK(report.status == SolveStatus::NonPositiveCurvature);
  CHECK(x.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("non-finite operator output reports divergence with a finite iterate") {
  const int n = 3;
  const VectorXd b = random_vector(n);
  VectorXd x = VectorXd::Zero(n);
  int calls = 0;
  const SolveReport report = trek::rek_solve_in_place(
      [&calls](const VectorXd& in, VectorXd& out) {
        ++calls;
        out = calls <= 1 ? VectorXd(2.0 * in)
                         : VectorXd(VectorXd::Constant(in.size(), std::numeric_limits<double>::quiet_NaN()));
      },
      [](VectorXd&) {}, b, x, SolverConfig{1e-30, 50});
  CHECK(report.status == SolveStatus::Diverged);
  CHECK(x.allFinite());
}

TEST_CASE("residual blow-up past the cap reports divergence") {
  // A (deliberately non-symmetric) action with a huge off-axis component:
  // positive curvature on the first direction, residual norm 1e16 after one
  // step, far past divergence_cap * delta_0.
  const VectorXd b = (VectorXd(3) << 1.0, 0.0, 0.0).finished();
  VectorXd x = VectorXd::Zero(3);
  SolverConfig cfg;
  cfg.divergence_cap = 10.0;
  cfg.tol = 1e-30;
  const SolveReport report = trek::rek_solve_in_place(
      [](const VectorXd& in, VectorXd& out) {
        out = in;
        out += 1e8 * in.reverse();
      },
      [](VectorXd&) {}, b, x, cfg);
  CHECK(report.status == SolveStatus::Diverged);
  CHECK(x.allFinite());
  CHECK(report.residual_trace.back() > 10.0 * report.residual_trace.front());
}

TEST_CASE("relative tolerance mode") {
  const int n = 10;
  const MatrixXd s = random_spd(n);
  const VectorXd b = 1e6 * random_vector(n);
  SolverConfig cfg;
  cfg.relative_tol = true;
  cfg.tol = 1e-12;
  const auto [x, report] = trek::rek_solve(trek::DenseOperator(s), trek::IdentityProjector{}, b,
                                           VectorXd::Zero(n), cfg);
  CHECK(report.status == SolveStatus::Converged);
  CHECK(report.residual_trace.back() < 1e-12 * report.residual_trace.front());
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(SolverConfig{0.0}.validate(), std::invalid_argument);
  CHECK_THROWS_AS((SolverConfig{1e-10, 0}).validate(), std::invalid_argument);
}

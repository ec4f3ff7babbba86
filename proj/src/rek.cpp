#include "trek/rek.hpp"

#include <stdexcept>

namespace trek {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::MaxIterReached: return "MaxIterReached";
    case SolveStatus::Diverged: return "Diverged";
    case SolveStatus::NonPositiveCurvature: return "NonPositiveCurvature";
  }
  return "Unknown";
}

SolveStatus solve_status_from_string(const std::string& name) {
  if (name == "Converged") return SolveStatus::Converged;
  if (name == "MaxIterReached") return SolveStatus::MaxIterReached;
  if (name == "Diverged") return SolveStatus::Diverged;
  if (name == "NonPositiveCurvature") return SolveStatus::NonPositiveCurvature;
  throw std::invalid_argument("unknown solve status '" + name + "'");
}

std::pair<Eigen::VectorXd, SolveReport> rek_solve(const LinearOperator& op, const Projector& projector,
                                                  const Eigen::VectorXd& rhs, const Eigen::VectorXd& x0,
                                                  const SolverConfig& cfg) {
  if (rhs.size() != op.dim() || x0.size() != op.dim()) {
    throw std::invalid_argument("rek_solve: vector length does not match operator dimension");
  }
  Eigen::VectorXd x = x0;
  SolveReport report = rek_solve_in_place(
      [&op](const Eigen::VectorXd& in, Eigen::VectorXd& out) { op.apply(in, out); },
      [&projector](Eigen::VectorXd& v) { projector.apply_in_place(v); }, rhs, x, cfg);
  return {std::move(x), std::move(report)};
}

}  // namespace trek

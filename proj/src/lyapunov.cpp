#include "lpvsyn/lyapunov.hpp"

#include <stdexcept>

namespace lpvsyn {

BiquadraticLyapunov::BiquadraticLyapunov(Matrix p, double tol) : p_(symmetrized(p)) {
  if (p_.rows() != p_.cols()) {
    throw std::invalid_argument("BiquadraticLyapunov: P must be square");
  }
  if (!symmetric_spectrum(p_).positive_definite(tol)) {
    throw std::invalid_argument("BiquadraticLyapunov: P must be positive definite");
  }
}

Matrix BiquadraticLyapunov::P_inverse(double condition_limit) const {
  return spd_inverse(p_, condition_limit);
}

double eval_V(const BiquadraticLyapunov& lyap, const Vector& x, const SchedulingPoint& p) {
  const int n_x = static_cast<int>(x.size());
  if (lyap.size() % n_x != 0 || n_x * (1 + static_cast<int>(p.size())) != lyap.size()) {
    throw std::invalid_argument("eval_V: dimensions of x, p do not match P");
  }
  const Vector xi = lift_scheduling(p, n_x) * x;
  return xi.dot(lyap.P() * xi);
}

DecreaseLmi decrease_lmi(const LpvPlant& plant, const AffineGain& gain,
                         const BiquadraticLyapunov& lyap, const SchedulingPoint& p_next,
                         double tol) {
  const int lifted = plant.n_x() * (1 + plant.n_p());
  if (lyap.size() != lifted) {
    throw std::invalid_argument("decrease_lmi: P size does not match the lifted state dimension");
  }
  if (p_next.size() != plant.n_p()) {
    throw std::invalid_argument("decrease_lmi: scheduling dimension mismatch");
  }
  const Matrix p_inv = lyap.P_inverse();
  const Matrix coupled = lift_scheduling(p_next, plant.n_x()) * closed_loop_matrix(plant, gain);

  DecreaseLmi result;
  result.block = Matrix::Zero(2 * lifted, 2 * lifted);
  result.block.topLeftCorner(lifted, lifted) = p_inv;
  result.block.topRightCorner(lifted, lifted) = coupled;
  result.block.bottomLeftCorner(lifted, lifted) = coupled.transpose();
  result.block.bottomRightCorner(lifted, lifted) = lyap.P();

  const auto spectrum = symmetric_spectrum(result.block);
  result.holds = spectrum.positive_definite(tol);
  result.relative_margin = spectrum.relative_margin();
  return result;
}

PolytopeDecreaseReport check_decrease_on_polytope(const LpvPlant& plant, const AffineGain& gain,
                                                  const BiquadraticLyapunov& lyap,
                                                  const SchedulingPolytope& polytope,
                                                  double tol) {
  if (polytope.dim() != plant.n_p()) {
    throw std::invalid_argument("check_decrease_on_polytope: polytope dimension mismatch");
  }
  PolytopeDecreaseReport report;
  report.holds = true;
  report.worst_margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < polytope.vertex_count(); ++i) {
    const auto lmi = decrease_lmi(plant, gain, lyap, polytope.vertices()[static_cast<std::size_t>(i)], tol);
    report.holds = report.holds && lmi.holds;
    if (lmi.relative_margin < report.worst_margin) {
      report.worst_margin = lmi.relative_margin;
      report.worst_vertex = i;
    }
  }
  return report;
}

TrajectoryAudit trajectory_decrease_audit(const Trajectory& traj, const BiquadraticLyapunov& lyap) {
  traj.validate();
  if (traj.w.cwiseAbs().maxCoeff() != 0.0) {
    throw std::invalid_argument("trajectory_decrease_audit: trajectory must be noise-free");
  }
  const int n = traj.steps();

  TrajectoryAudit audit;
  audit.values.reserve(static_cast<std::size_t>(n));
  // p_k is only recorded for k < N, so V is evaluated along the first N steps;
  // the decrease at step k compares V(x_k, p_k) against V(x_{k+1}, p_{k+1}).
  for (int k = 0; k < n; ++k) {
    audit.values.push_back(eval_V(lyap, traj.x.col(k), traj.p.col(k)));
  }
  for (int k = 0; k + 1 < n; ++k) {
    const bool state_nonzero = traj.x.col(k).norm() > 0.0;
    if (state_nonzero && audit.values[static_cast<std::size_t>(k + 1)] >=
                             audit.values[static_cast<std::size_t>(k)]) {
      audit.violations.push_back(DecreaseViolation{k, audit.values[static_cast<std::size_t>(k)],
                                                   audit.values[static_cast<std::size_t>(k + 1)]});
    }
  }
  return audit;
}

}  // namespace lpvsyn

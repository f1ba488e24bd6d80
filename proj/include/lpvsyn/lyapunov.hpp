#pragma once

#include <vector>

#include "lpvsyn/lpv.hpp"
#include "lpvsyn/numeric.hpp"

namespace lpvsyn {

/// Lyapunov function V(x, p) = x^T lift(p)^T P lift(p) x, quadratic in both
/// the state and the scheduling variable. P must be positive definite
/// (tolerance-checked at construction).
class BiquadraticLyapunov {
 public:
  explicit BiquadraticLyapunov(Matrix p, double tol = Tolerances{}.definiteness);

  const Matrix& P() const { return p_; }
  int size() const { return static_cast<int>(p_.rows()); }

  /// P^{-1} via Cholesky; refuses (throws) above the conditioning limit
  /// instead of regularizing.
  Matrix P_inverse(double condition_limit = Tolerances{}.condition_limit) const;

 private:
  Matrix p_;
};

double eval_V(const BiquadraticLyapunov& lyap, const Vector& x, const SchedulingPoint& p);

struct DecreaseLmi {
  /// Coupled block form [P^{-1}, L(A+BK); (A+BK)^T L^T, P].
  Matrix block;
  bool holds = false;
  /// Minimum eigenvalue normalized by (1 + matrix norm).
  double relative_margin = 0.0;
};

/// One-step decrease condition of the closed loop at a fixed next scheduling
/// value; the block-form verdict coincides with both Schur-complement forms.
DecreaseLmi decrease_lmi(const LpvPlant& plant, const AffineGain& gain,
                         const BiquadraticLyapunov& lyap, const SchedulingPoint& p_next,
                         double tol = Tolerances{}.definiteness);

struct PolytopeDecreaseReport {
  bool holds = false;
  double worst_margin = 0.0;
  int worst_vertex = -1;
};

/// Checks the decrease block at every vertex; affinity of the lift in p makes
/// the vertex verdict certify the whole polytope.
PolytopeDecreaseReport check_decrease_on_polytope(const LpvPlant& plant, const AffineGain& gain,
                                                  const BiquadraticLyapunov& lyap,
                                                  const SchedulingPolytope& polytope,
                                                  double tol = Tolerances{}.definiteness);

struct DecreaseViolation {
  int step = 0;
  double v_before = 0.0;
  double v_after = 0.0;
};

struct TrajectoryAudit {
  std::vector<double> values;  // V along the trajectory
  std::vector<DecreaseViolation> violations;
  bool clean() const { return violations.empty(); }
};

/// Audits V along a noise-free closed-loop trajectory, reporting every step
/// where V fails to strictly decrease while the state is nonzero.
TrajectoryAudit trajectory_decrease_audit(const Trajectory& traj, const BiquadraticLyapunov& lyap);

}  // namespace lpvsyn

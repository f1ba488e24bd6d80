#include "lpvsyn/consistency.hpp"

#include <stdexcept>

namespace lpvsyn {

Qmi make_qmi(Matrix psi, int q, int r) {
  if (psi.rows() != psi.cols() || psi.rows() != q + r) {
    throw std::invalid_argument("make_qmi: Psi must be square of size q + r");
  }
  return Qmi{symmetrized(psi), q, r};
}

ConsistencyQmi build_consistency_qmi(const DataSet& ds, const NoiseModel& noise, double tol) {
  const DataDims& d = ds.dims;
  if (noise.n_x != d.n_x || noise.N_d != d.N_d) {
    throw std::invalid_argument("build_consistency_qmi: noise model dimensions do not match dataset");
  }
  // [I X_+; 0 -Phi] of size (n_x + phi_rows) x (n_x + N_d).
  Matrix outer = Matrix::Zero(d.n_x + d.phi_rows(), d.n_x + d.N_d);
  outer.topLeftCorner(d.n_x, d.n_x) = Matrix::Identity(d.n_x, d.n_x);
  outer.topRightCorner(d.n_x, d.N_d) = ds.xplus;
  outer.bottomRightCorner(d.phi_rows(), d.N_d) = -ds.phi;

  ConsistencyQmi c;
  c.qmi = make_qmi(outer * noise.pi * outer.transpose(), d.n_x, d.phi_rows());
  c.dims = d;
  c.noise_report = validate_noise_model(noise, tol);
  c.dataset_id = ds.id;
  c.noise_model_id = noise.id;
  return c;
}

Qmi schedule_lift_qmi(const ConsistencyQmi& c, const SchedulingPoint& p) {
  if (!c.noise_report.ok()) {
    throw std::invalid_argument("schedule_lift_qmi: source noise model violates the existence/boundedness conditions");
  }
  if (p.size() != c.dims.n_p) {
    throw std::invalid_argument("schedule_lift_qmi: scheduling dimension mismatch");
  }
  const int lifted = c.dims.lifted();
  const int r = c.dims.phi_rows();
  const Matrix l = lift_scheduling(p, c.dims.n_x);
  Matrix t = Matrix::Zero(lifted + r, c.dims.n_x + r);
  t.topLeftCorner(lifted, c.dims.n_x) = l;
  t.bottomRightCorner(r, r) = Matrix::Identity(r, r);
  return make_qmi(t * c.qmi.psi * t.transpose(), lifted, r);
}

bool qmi_membership(const Qmi& qmi, const Matrix& z, bool strict, double tol) {
  if (z.rows() != qmi.r || z.cols() != qmi.q) {
    throw std::invalid_argument("qmi_membership: Z must be r x q");
  }
  Matrix stacked(qmi.q + qmi.r, qmi.q);
  stacked.topRows(qmi.q) = Matrix::Identity(qmi.q, qmi.q);
  stacked.bottomRows(qmi.r) = z;
  const double min_eig = min_eigenvalue(symmetrized(stacked.transpose() * qmi.psi * stacked));
  const double scaled_tol = tol * (1.0 + spectral_norm_sym(qmi.psi));
  return strict ? min_eig > scaled_tol : min_eig >= -scaled_tol;
}

MatrixBall qmi_to_ball(const Qmi& qmi, double tol) {
  const Matrix psi22 = qmi.psi22();
  if (!is_negative_definite(psi22, tol)) {
    throw std::invalid_argument("qmi_to_ball: Psi22 must be negative definite (solution set unbounded)");
  }
  MatrixBall ball;
  ball.q = qmi.q;
  ball.r = qmi.r;
  ball.d = symmetrized(-psi22);
  const Matrix d_inv = spd_inverse(ball.d);
  ball.center = d_inv * qmi.psi12().transpose();  // -Psi22^{-1} Psi21
  ball.radius = symmetrized(qmi.psi11() + qmi.psi12() * ball.center);
  // The Schur complement is formed by cancellation of terms at the scale of
  // Psi, so negativity is judged at that scale; surviving round-off is
  // clamped away (the radius is PSD whenever the set is nonempty).
  const double scale = 1.0 + spectral_norm_sym(qmi.psi);
  if (min_eigenvalue(ball.radius) < -tol * scale) {
    throw std::invalid_argument("qmi_to_ball: negative generalized radius (empty solution set)");
  }
  ball.radius = psd_clamp(ball.radius);
  return ball;
}

bool ball_membership(const MatrixBall& ball, const Matrix& z, double tol) {
  if (z.rows() != ball.r || z.cols() != ball.q) {
    throw std::invalid_argument("ball_membership: Z must be r x q");
  }
  const Matrix diff = z - ball.center;
  const Matrix gap = symmetrized(ball.radius - diff.transpose() * ball.d * diff);
  const double scale =
      1.0 + std::max(spectral_norm_sym(ball.radius), spectral_norm_sym(ball.d));
  return min_eigenvalue(gap) >= -tol * scale;
}

Matrix sample_ball_member(const MatrixBall& ball, Rng& rng, double radius_scale) {
  const Matrix d_sqrt_inv = spd_inverse(psd_sqrt(ball.d));
  const Matrix r_sqrt = psd_sqrt(ball.radius);
  const Matrix u = haar_orthogonal(rng, ball.r);
  const Matrix v = haar_orthogonal(rng, ball.q);
  std::uniform_real_distribution<double> unif(0.0, radius_scale);
  Matrix s = Matrix::Zero(ball.r, ball.q);
  for (int i = 0; i < std::min(ball.r, ball.q); ++i) s(i, i) = unif(rng);
  return ball.center + d_sqrt_inv * u * s * v.transpose() * r_sqrt;
}

std::vector<LpvPlant> sample_compatible_systems(const ConsistencyQmi& c, int count,
                                                std::uint64_t seed) {
  const MatrixBall ball = qmi_to_ball(c.qmi);
  std::vector<LpvPlant> systems;
  systems.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Rng rng = make_rng(seed, "compatible-system", static_cast<std::uint64_t>(i));
    const Matrix z = sample_ball_member(ball, rng);
    systems.push_back(
        LpvPlant::from_system_matrix(z.transpose(), c.dims.n_x, c.dims.n_u, c.dims.n_p));
  }
  return systems;
}

}  // namespace lpvsyn

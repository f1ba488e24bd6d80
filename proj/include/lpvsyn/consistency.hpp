#pragma once

#include <cstdint>
#include <vector>

#include "lpvsyn/data.hpp"
#include "lpvsyn/lpv.hpp"

namespace lpvsyn {

/// Symmetric matrix Psi in S^{q+r} defining the solution set
/// { Z in R^{r x q} : [I; Z]^T Psi [I; Z] >= 0 }.
struct Qmi {
  Matrix psi;
  int q = 0;
  int r = 0;

  Matrix psi11() const { return psi.topLeftCorner(q, q); }
  Matrix psi12() const { return psi.topRightCorner(q, r); }
  Matrix psi22() const { return psi.bottomRightCorner(r, r); }
};

Qmi make_qmi(Matrix psi, int q, int r);

/// The set of systems [A_stack B]^T consistent with a dataset under a noise
/// model, characterized by the matrix Upsilon obtained from the congruence of
/// Pi with [I X_+; 0 -Phi].
struct ConsistencyQmi {
  Qmi qmi;
  DataDims dims;
  /// Assumption-1 verdict of the source noise model, checked at build time.
  NoiseModelReport noise_report;
  std::uint64_t dataset_id = 0;
  std::uint64_t noise_model_id = 0;
};

ConsistencyQmi build_consistency_qmi(const DataSet& ds, const NoiseModel& noise,
                                     double tol = Tolerances{}.definiteness);

/// Congruence of Upsilon with blkdiag(lift(p), I): the solution set of the
/// result equals { Z lift(p)^T : Z consistent } when the noise model satisfies
/// the existence/boundedness conditions. Sizes: q = n_x(1+n_p),
/// r = n_u + n_x(1+n_p).
Qmi schedule_lift_qmi(const ConsistencyQmi& c, const SchedulingPoint& p);

/// Evaluates min eig of [I; Z]^T Psi [I; Z], scaled by (1 + |Psi|):
/// nonstrict requires >= -tol, strict requires > +tol.
bool qmi_membership(const Qmi& qmi, const Matrix& z, bool strict = false,
                    double tol = Tolerances{}.membership);

/// Completed-square form of a QMI with Psi22 < 0: Z is a solution iff
/// (Z - center)^T D (Z - center) <= R.
struct MatrixBall {
  Matrix center;  // r x q
  Matrix d;       // -Psi22, positive definite
  Matrix radius;  // Schur complement Psi | Psi22, PSD
  int q = 0;
  int r = 0;
};

MatrixBall qmi_to_ball(const Qmi& qmi, double tol = Tolerances{}.definiteness);

bool ball_membership(const MatrixBall& ball, const Matrix& z,
                     double tol = Tolerances{}.membership);

/// Random member Z = center + D^{-1/2} S R^{1/2} with ||S||_2 <= radius_scale.
/// S is drawn as U diag(sigma) V^T with Haar U, V and sigma uniform on
/// [0, radius_scale]; this covers (but is not uniform over) the ball.
Matrix sample_ball_member(const MatrixBall& ball, Rng& rng, double radius_scale = 1.0);

/// Draws `count` systems compatible with the data, returned as plants.
std::vector<LpvPlant> sample_compatible_systems(const ConsistencyQmi& c, int count,
                                                std::uint64_t seed);

}  // namespace lpvsyn

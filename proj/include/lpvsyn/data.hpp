#pragma once

#include <cstdint>

#include "lpvsyn/lpv.hpp"
#include "lpvsyn/numeric.hpp"

namespace lpvsyn {

/// Content hash used as a provenance id for datasets and noise models.
std::uint64_t matrix_content_id(const Matrix& m, std::uint64_t h = 0xcbf29ce484222325ULL);

struct DataDims {
  int n_x = 0;
  int n_u = 0;
  int n_p = 0;
  int N_d = 0;

  /// Lifted state dimension n_x(1+n_p).
  int lifted() const { return n_x * (1 + n_p); }
  /// Row count of the regressor matrix, n_x(1+n_p) + n_u.
  int phi_rows() const { return lifted() + n_u; }
};

/// Regressor/target matrices assembled from a measured trajectory: column k of
/// phi is [lift(p_k) x_k; u_k], column k of xplus is x_{k+1}.
struct DataSet {
  Matrix phi;
  Matrix xplus;
  DataDims dims;
  std::uint64_t id = 0;
};

DataSet build_dataset(const Trajectory& traj);

struct PeReport {
  bool persistently_exciting = false;
  int rank = 0;
  int required = 0;
};

/// Persistency of excitation: numerical rank of phi equals n_u + n_x(1+n_p).
PeReport is_persistently_exciting(const DataSet& ds);

/// Energy bound Omega with W W^T <= Omega.
struct EnergyBound {
  Matrix omega;
};

/// True disturbance columns, available in synthetic experiments only.
struct NoiseRecord {
  Matrix w;
};

/// Trace-minimal energy bound dominating W W^T; the minimizer is W W^T itself.
EnergyBound energy_bound_from_noise(const NoiseRecord& record);

/// Quadratic disturbance model: [I; W^T]^T Pi [I; W^T] >= 0 with
/// Pi in S^{n_x + N_d}, partitioned into Pi11 (n_x), Pi12, Pi22 (N_d).
struct NoiseModel {
  Matrix pi;
  int n_x = 0;
  int N_d = 0;
  std::uint64_t id = 0;

  Matrix pi11() const { return pi.topLeftCorner(n_x, n_x); }
  Matrix pi12() const { return pi.topRightCorner(n_x, N_d); }
  Matrix pi22() const { return pi.bottomRightCorner(N_d, N_d); }
};

NoiseModel make_noise_model(Matrix pi, int n_x, int N_d);

/// Pi = blkdiag(Omega, -I); its feasible set is exactly {W : W W^T <= Omega}.
NoiseModel noise_model_from_energy_bound(const EnergyBound& bound, int N_d,
                                         double tol = Tolerances{}.definiteness);

struct NoiseModelReport {
  /// Schur complement Pi | Pi22 is PSD: the feasible set is nonempty.
  bool existence = false;
  /// Pi22 is negative definite: the feasible set is bounded.
  bool boundedness = false;
  double schur_min_eig = 0.0;
  double pi22_max_eig = 0.0;

  bool ok() const { return existence && boundedness; }
};

NoiseModelReport validate_noise_model(const NoiseModel& model,
                                      double tol = Tolerances{}.definiteness);

/// Direct evaluation of the disturbance QMI for a candidate W.
bool noise_membership(const NoiseModel& model, const Matrix& w,
                      double tol = Tolerances{}.membership);

}  // namespace lpvsyn

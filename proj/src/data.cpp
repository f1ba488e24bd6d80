#include "lpvsyn/data.hpp"

#include <stdexcept>

namespace lpvsyn {

std::uint64_t matrix_content_id(const Matrix& m, std::uint64_t h) {
  const auto* bytes = reinterpret_cast<const unsigned char*>(m.data());
  const std::size_t n = sizeof(double) * static_cast<std::size_t>(m.size());
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

DataSet build_dataset(const Trajectory& traj) {
  traj.validate();
  const int n = traj.steps();
  if (n < 1) throw std::invalid_argument("build_dataset: trajectory must contain at least one step");

  DataDims dims;
  dims.n_x = static_cast<int>(traj.x.rows());
  dims.n_u = static_cast<int>(traj.u.rows());
  dims.n_p = static_cast<int>(traj.p.rows());
  dims.N_d = n;

  DataSet ds;
  ds.dims = dims;
  ds.phi.resize(dims.phi_rows(), n);
  ds.xplus.resize(dims.n_x, n);
  for (int k = 0; k < n; ++k) {
    ds.phi.col(k).head(dims.lifted()) = lift_scheduling(traj.p.col(k), dims.n_x) * traj.x.col(k);
    ds.phi.col(k).tail(dims.n_u) = traj.u.col(k);
    ds.xplus.col(k) = traj.x.col(k + 1);
  }
  ds.id = matrix_content_id(ds.xplus, matrix_content_id(ds.phi));
  return ds;
}

PeReport is_persistently_exciting(const DataSet& ds) {
  PeReport report;
  report.required = ds.dims.phi_rows();
  report.rank = numerical_rank(ds.phi);
  report.persistently_exciting = report.rank == report.required;
  return report;
}

EnergyBound energy_bound_from_noise(const NoiseRecord& record) {
  return EnergyBound{symmetrized(record.w * record.w.transpose())};
}

NoiseModel make_noise_model(Matrix pi, int n_x, int N_d) {
  if (pi.rows() != pi.cols() || pi.rows() != n_x + N_d) {
    throw std::invalid_argument("make_noise_model: Pi must be square of size n_x + N_d");
  }
  NoiseModel model;
  model.pi = symmetrized(pi);
  model.n_x = n_x;
  model.N_d = N_d;
  model.id = matrix_content_id(model.pi);
  return model;
}

NoiseModel noise_model_from_energy_bound(const EnergyBound& bound, int N_d, double tol) {
  const int n_x = static_cast<int>(bound.omega.rows());
  if (!is_positive_semidefinite(bound.omega, tol)) {
    throw std::invalid_argument("noise_model_from_energy_bound: Omega must be PSD");
  }
  Matrix pi = Matrix::Zero(n_x + N_d, n_x + N_d);
  pi.topLeftCorner(n_x, n_x) = symmetrized(bound.omega);
  pi.bottomRightCorner(N_d, N_d) = -Matrix::Identity(N_d, N_d);
  return make_noise_model(std::move(pi), n_x, N_d);
}

NoiseModelReport validate_noise_model(const NoiseModel& model, double tol) {
  NoiseModelReport report;
  const auto pi22 = symmetric_spectrum(model.pi22());
  report.pi22_max_eig = pi22.max_eig;
  report.boundedness = pi22.negative_definite(tol);

  if (report.boundedness) {
    const Matrix schur =
        model.pi11() - model.pi12() * spd_inverse(-model.pi22()) * model.pi12().transpose();
    const auto s = symmetric_spectrum(symmetrized(schur));
    report.schur_min_eig = s.min_eig;
    report.existence = s.positive_semidefinite(tol);
  } else {
    // Without Pi22 < 0 the Schur complement is not defined through this route;
    // fall back to a pseudo-inverse so the report still carries eigenvalues.
    const Matrix pinv = model.pi22().completeOrthogonalDecomposition().pseudoInverse();
    const Matrix schur = model.pi11() - model.pi12() * pinv * model.pi12().transpose();
    const auto s = symmetric_spectrum(symmetrized(schur));
    report.schur_min_eig = s.min_eig;
    report.existence = s.positive_semidefinite(tol);
  }
  return report;
}

bool noise_membership(const NoiseModel& model, const Matrix& w, double tol) {
  if (w.rows() != model.n_x || w.cols() != model.N_d) {
    throw std::invalid_argument("noise_membership: W must be n_x x N_d");
  }
  Matrix stacked(model.n_x + model.N_d, model.n_x);
  stacked.topRows(model.n_x) = Matrix::Identity(model.n_x, model.n_x);
  stacked.bottomRows(model.N_d) = w.transpose();
  const Matrix value = symmetrized(stacked.transpose() * model.pi * stacked);
  const double scale = 1.0 + spectral_norm_sym(model.pi);
  return min_eigenvalue(value) >= -tol * scale;
}

}  // namespace lpvsyn

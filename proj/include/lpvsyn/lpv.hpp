#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lpvsyn/numeric.hpp"
#include "lpvsyn/random.hpp"

namespace lpvsyn {

/// Scheduling coordinates p in R^{n_p}.
using SchedulingPoint = Vector;

/// Convex polytope of admissible scheduling values, stored by its vertices.
class SchedulingPolytope {
 public:
  explicit SchedulingPolytope(std::vector<SchedulingPoint> vertices);

  /// Axis-aligned box [lo_1, hi_1] x ... x [lo_np, hi_np] with 2^{n_p} vertices.
  static SchedulingPolytope box(const Vector& lo, const Vector& hi);

  const std::vector<SchedulingPoint>& vertices() const { return vertices_; }
  int dim() const { return static_cast<int>(vertices_.front().size()); }
  int vertex_count() const { return static_cast<int>(vertices_.size()); }

  /// Convex-hull membership, decided by a nonnegative least-squares fit of the
  /// convex-combination constraints (exact active-set method).
  bool contains(const SchedulingPoint& p, double tol = 1e-9) const;

  /// Random point inside the polytope: convex combination with Dirichlet(1)
  /// weights over the vertices.
  SchedulingPoint sample_interior(Rng& rng) const;

 private:
  std::vector<SchedulingPoint> vertices_;
};

/// Discrete-time plant x+ = A(p) x + B u + w with A(p) affine in p. The
/// coefficient list holds A[0]..A[n_p]; B is constant by construction and a
/// p-dependent input matrix is rejected.
class LpvPlant {
 public:
  LpvPlant(std::vector<Matrix> a_coeffs, Matrix b);

  int n_x() const { return static_cast<int>(a_[0].rows()); }
  int n_u() const { return static_cast<int>(b_.cols()); }
  int n_p() const { return static_cast<int>(a_.size()) - 1; }

  const std::vector<Matrix>& A() const { return a_; }
  const Matrix& A(int i) const { return a_.at(static_cast<std::size_t>(i)); }
  const Matrix& B() const { return b_; }

  /// Stacked coefficient matrix [A_0 A_1 ... A_{n_p}] of size n_x x n_x(1+n_p).
  Matrix stacked_A() const;

  /// Splits a stacked system matrix [A_0 ... A_{n_p}  B] back into a plant.
  static LpvPlant from_system_matrix(const Matrix& ab, int n_x, int n_u, int n_p);

 private:
  std::vector<Matrix> a_;
  Matrix b_;
};

/// Affine state-feedback gain u = (K_0 + sum_i p_i K_i) x.
class AffineGain {
 public:
  AffineGain(std::vector<Matrix> k_coeffs);
  static AffineGain zero(int n_u, int n_x, int n_p);
  static AffineGain from_stacked(const Matrix& stacked, int n_x);

  int n_u() const { return static_cast<int>(k_[0].rows()); }
  int n_x() const { return static_cast<int>(k_[0].cols()); }
  int n_p() const { return static_cast<int>(k_.size()) - 1; }

  const std::vector<Matrix>& K() const { return k_; }

  /// Stacked gain [K_0 K_1 ... K_{n_p}] of size n_u x n_x(1+n_p).
  Matrix stacked() const;

  /// K(p) = K_0 + sum_i p_i K_i.
  Matrix eval(const SchedulingPoint& p) const;

 private:
  std::vector<Matrix> k_;
};

/// Vertical stack [I; p_1 I; ...; p_{n_p} I] of size n_x(1+n_p) x n_x.
Matrix lift_scheduling(const SchedulingPoint& p, int n_x);

/// A(p) = A_0 + sum_i p_i A_i.
Matrix eval_A(const LpvPlant& plant, const SchedulingPoint& p);

/// Stacked closed-loop coefficient matrix A_stack + B * K_stack (independent
/// of p; compose with lift_scheduling for the state map).
Matrix closed_loop_matrix(const LpvPlant& plant, const AffineGain& gain);

/// Scheduling signal source: either a map psi evaluated on the current state
/// (endogenous) or a stored sequence (exogenous).
class SchedulingMap {
 public:
  static SchedulingMap endogenous(std::function<SchedulingPoint(const Vector&)> psi, int n_p);
  static SchedulingMap exogenous(std::vector<SchedulingPoint> sequence);

  SchedulingPoint at(int k, const Vector& x) const;
  int n_p() const { return n_p_; }
  bool is_endogenous() const { return static_cast<bool>(psi_); }

 private:
  SchedulingMap() = default;
  std::function<SchedulingPoint(const Vector&)> psi_;
  std::vector<SchedulingPoint> sequence_;
  int n_p_ = 0;
};

/// Per-step disturbance source. All built-ins are deterministic given their
/// construction arguments; the uniform source derives an independent stream
/// per step so samples do not depend on evaluation order.
class DisturbanceSource {
 public:
  static DisturbanceSource zero(int n_x);
  static DisturbanceSource uniform(int n_x, double w_max, std::uint64_t seed);
  static DisturbanceSource replay(Matrix w_columns);

  Vector at(int k) const;
  int n_x() const { return n_x_; }

 private:
  DisturbanceSource() = default;
  int n_x_ = 0;
  double w_max_ = 0.0;
  std::uint64_t seed_ = 0;
  std::optional<Matrix> replay_;
  bool is_uniform_ = false;
};

/// Per-step input source for open-loop simulation.
class InputSource {
 public:
  static InputSource zero(int n_u);
  static InputSource gaussian(int n_u, double stddev, std::uint64_t seed);
  static InputSource replay(Matrix u_columns);

  Vector at(int k) const;
  int n_u() const { return n_u_; }

 private:
  InputSource() = default;
  int n_u_ = 0;
  double stddev_ = 0.0;
  std::uint64_t seed_ = 0;
  std::optional<Matrix> replay_;
  bool is_gaussian_ = false;
};

/// Recorded sample path. Columns are samples: x has N+1 columns, u/p/w have N.
struct Trajectory {
  Matrix x;
  Matrix u;
  Matrix p;
  Matrix w;

  int steps() const { return static_cast<int>(u.cols()); }
  void validate() const;
};

/// Reported when the simulated state stops being finite.
class SimulationOverflow : public std::runtime_error {
 public:
  SimulationOverflow(int step, const std::string& what) : std::runtime_error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// Closed-loop simulation with u_k = K(p_k) x_k, p_k from the scheduling map.
Trajectory simulate(const LpvPlant& plant, const AffineGain& gain, const SchedulingMap& scheduling,
                    const DisturbanceSource& noise, const Vector& x0, int steps);

/// Open-loop simulation with the supplied input sequence.
Trajectory simulate(const LpvPlant& plant, const InputSource& inputs,
                    const SchedulingMap& scheduling, const DisturbanceSource& noise,
                    const Vector& x0, int steps);

/// Benchmark plant: a two-state nonlinear map embedded as an LPV system with
/// endogenous scheduling psi(x) = [delta sin(x_1), delta cos(x_2)] ranging over
/// the box [-delta, delta]^2.
struct ExamplePlant {
  LpvPlant plant;
  SchedulingMap scheduling;
  SchedulingPolytope polytope;
};
ExamplePlant example_plant(double delta);

}  // namespace lpvsyn

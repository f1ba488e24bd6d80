#pragma once

#include <optional>

#include "lpvsyn/synthesis.hpp"

namespace lpvsyn {

struct CertificationWitness {
  int system_index = -1;
  SchedulingPoint p;
  double eigenvalue = 0.0;
};

struct CertificationReport {
  bool pass = false;
  /// Stricter tier: minimum margin at least half the strict-encoding base.
  bool strict_pass = false;
  double tol = 0.0;
  int n_systems = 0;
  int n_p_samples = 0;
  int checks = 0;
  /// Minimum relative decrease-block margin over all (system, p) pairs.
  double min_margin = 0.0;
  std::optional<CertificationWitness> witness;
};

/// Relative margin of the coupled decrease block for one plant at one
/// scheduling value, dispatching on the certificate structure of the result
/// (lifted block for scheduling-dependent certificates, plain block for the
/// common-Lyapunov baseline).
double decrease_block_margin(const SynthesisResult& result, const Controller& controller,
                             const LpvPlant& plant, const SchedulingPoint& p);

/// A-posteriori certification: samples compatible systems from the
/// consistency set and checks the decrease block at every polytope vertex and
/// at `n_p_samples` random interior scheduling points. With n_systems = 0
/// only the ball center (least-squares system) is checked.
CertificationReport certify_decrease(const SynthesisResult& result, const ConsistencyQmi& c,
                                     const SchedulingPolytope& polytope, int n_systems,
                                     int n_p_samples, std::uint64_t seed,
                                     double tol = Tolerances{}.verify);

struct MonteCarloStats {
  int plant_index = 0;
  int ic_index = 0;
  double final_norm = 0.0;
  double max_norm = 0.0;
  int decrease_violations = 0;
  bool diverged = false;
};

struct MonteCarloEnsemble {
  std::vector<Trajectory> trajectories;
  std::vector<MonteCarloStats> stats;
  double max_final_norm = 0.0;
  int total_decrease_violations = 0;
  int diverged_count = 0;
};

/// Closed-loop ensemble over (plant, initial condition) pairs. Disturbances
/// are uniform with bound `w_max` (zero bound disables noise); per-member
/// streams are derived from the seed, so the ensemble is deterministic.
/// Decrease violations are counted only for noise-free members. Divergence is
/// flagged per member and does not abort the ensemble.
MonteCarloEnsemble closed_loop_montecarlo(const SynthesisResult& result,
                                          const std::vector<LpvPlant>& plants,
                                          const SchedulingMap& scheduling,
                                          const std::vector<Vector>& initial_conditions,
                                          double w_max, int steps, std::uint64_t seed);

/// Spectral radius of the frozen-scheduling lifted transition
/// lift(p) (A_stack + B K_stack). A value below one is necessary for
/// frozen-p stability; diagnostic only, never a certificate.
double frozen_spectrum_diagnostic(const LpvPlant& plant, const AffineGain& gain,
                                  const SchedulingPoint& p);

/// Initial conditions evenly spaced on the unit circle (first two state
/// coordinates; remaining coordinates zero).
std::vector<Vector> unit_circle_initial_conditions(int count, int n_x);

}  // namespace lpvsyn

#include "lpvsyn/verify.hpp"

#include <cmath>

namespace lpvsyn {

double decrease_block_margin(const SynthesisResult& result, const Controller& controller,
                             const LpvPlant& plant, const SchedulingPoint& p) {
  if (result.method == SynthesisMethod::Slf) {
    // Common-Lyapunov block [P0^{-1}, A_cl(p); A_cl(p)^T, P0].
    const int n_x = plant.n_x();
    const Matrix p0 = controller.lyapunov.P();
    const Matrix p0_inv = controller.lyapunov.P_inverse();
    const Matrix a_cl =
        closed_loop_matrix(plant, controller.gain) * lift_scheduling(p, n_x);
    Matrix block(2 * n_x, 2 * n_x);
    block.topLeftCorner(n_x, n_x) = p0_inv;
    block.topRightCorner(n_x, n_x) = a_cl;
    block.bottomLeftCorner(n_x, n_x) = a_cl.transpose();
    block.bottomRightCorner(n_x, n_x) = p0;
    return symmetric_spectrum(block).relative_margin();
  }
  return decrease_lmi(plant, controller.gain, controller.lyapunov, p).relative_margin;
}

CertificationReport certify_decrease(const SynthesisResult& result, const ConsistencyQmi& c,
                                     const SchedulingPolytope& polytope, int n_systems,
                                     int n_p_samples, std::uint64_t seed, double tol) {
  if (!result.feasible()) {
    throw std::invalid_argument("certify_decrease: result is not feasible");
  }
  const Controller controller = recover_controller(result);

  std::vector<LpvPlant> systems;
  if (n_systems <= 0) {
    const MatrixBall ball = qmi_to_ball(c.qmi);
    systems.push_back(
        LpvPlant::from_system_matrix(ball.center.transpose(), c.dims.n_x, c.dims.n_u, c.dims.n_p));
  } else {
    systems = sample_compatible_systems(c, n_systems, derive_seed(seed, "certify-systems"));
  }

  std::vector<SchedulingPoint> points = polytope.vertices();
  Rng rng = make_rng(seed, "certify-scheduling");
  for (int i = 0; i < n_p_samples; ++i) points.push_back(polytope.sample_interior(rng));

  CertificationReport report;
  report.tol = tol;
  report.n_systems = static_cast<int>(systems.size());
  report.n_p_samples = n_p_samples;
  report.min_margin = std::numeric_limits<double>::infinity();

  for (std::size_t si = 0; si < systems.size(); ++si) {
    for (const auto& p : points) {
      const double margin = decrease_block_margin(result, controller, systems[si], p);
      ++report.checks;
      if (margin < report.min_margin) {
        report.min_margin = margin;
        if (margin < -tol) {
          report.witness = CertificationWitness{static_cast<int>(si), p, margin};
        }
      }
    }
  }
  report.pass = report.min_margin >= -tol;
  return report;
}

namespace {

double lyapunov_value(const SynthesisResult& result, const Controller& controller, const Vector& x,
                      const SchedulingPoint& p) {
  if (result.method == SynthesisMethod::Slf) {
    return x.dot(controller.lyapunov.P() * x);
  }
  return eval_V(controller.lyapunov, x, p);
}

}  // namespace

MonteCarloEnsemble closed_loop_montecarlo(const SynthesisResult& result,
                                          const std::vector<LpvPlant>& plants,
                                          const SchedulingMap& scheduling,
                                          const std::vector<Vector>& initial_conditions,
                                          double w_max, int steps, std::uint64_t seed) {
  if (!result.feasible() || result.G.rows() == 0) {
    throw std::invalid_argument("closed_loop_montecarlo: result carries no gain");
  }
  const Controller controller = recover_controller(result);

  MonteCarloEnsemble ensemble;
  int member = 0;
  for (std::size_t pi = 0; pi < plants.size(); ++pi) {
    for (std::size_t ii = 0; ii < initial_conditions.size(); ++ii, ++member) {
      MonteCarloStats stats;
      stats.plant_index = static_cast<int>(pi);
      stats.ic_index = static_cast<int>(ii);
      const DisturbanceSource noise =
          w_max > 0.0
              ? DisturbanceSource::uniform(plants[pi].n_x(), w_max,
                                           derive_seed(seed, "mc-noise", static_cast<std::uint64_t>(member)))
              : DisturbanceSource::zero(plants[pi].n_x());
      try {
        Trajectory traj = simulate(plants[pi], controller.gain, scheduling, noise,
                                   initial_conditions[ii], steps);
        stats.final_norm = traj.x.col(steps).norm();
        stats.max_norm = traj.x.colwise().norm().maxCoeff();
        if (w_max == 0.0) {
          for (int k = 0; k + 1 < traj.steps(); ++k) {
            const double v0 = lyapunov_value(result, controller, traj.x.col(k), traj.p.col(k));
            const double v1 =
                lyapunov_value(result, controller, traj.x.col(k + 1), traj.p.col(k + 1));
            if (traj.x.col(k).norm() > 0.0 && v1 >= v0) ++stats.decrease_violations;
          }
        }
        ensemble.trajectories.push_back(std::move(traj));
      } catch (const SimulationOverflow&) {
        stats.diverged = true;
        stats.final_norm = std::numeric_limits<double>::infinity();
        stats.max_norm = std::numeric_limits<double>::infinity();
        ensemble.trajectories.emplace_back();
        ++ensemble.diverged_count;
      }
      ensemble.max_final_norm = std::max(ensemble.max_final_norm, stats.final_norm);
      ensemble.total_decrease_violations += stats.decrease_violations;
      ensemble.stats.push_back(std::move(stats));
    }
  }
  return ensemble;
}

double frozen_spectrum_diagnostic(const LpvPlant& plant, const AffineGain& gain,
                                  const SchedulingPoint& p) {
  return spectral_radius(lift_scheduling(p, plant.n_x()) * closed_loop_matrix(plant, gain));
}

std::vector<Vector> unit_circle_initial_conditions(int count, int n_x) {
  if (n_x < 2) throw std::invalid_argument("unit_circle_initial_conditions: n_x must be >= 2");
  std::vector<Vector> ics;
  ics.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double theta = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(count);
    Vector x0 = Vector::Zero(n_x);
    x0(0) = std::cos(theta);
    x0(1) = std::sin(theta);
    ics.push_back(std::move(x0));
  }
  return ics;
}

}  // namespace lpvsyn

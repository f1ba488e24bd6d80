#pragma once

#include <optional>
#include <string>

#include "lpvsyn/consistency.hpp"
#include "lpvsyn/lmi.hpp"
#include "lpvsyn/lyapunov.hpp"

namespace lpvsyn {

enum class SynthesisMethod { Blf, Slf, Fbsp, Analysis };

std::string to_string(SynthesisMethod method);
SynthesisMethod synthesis_method_from_string(const std::string& name);

struct SynthesisSettings {
  lmi::SolveSettings solver;
  /// Grid mode for scheduling sets that are not polytopes: the program is
  /// solved on the supplied grid points instead of polytope vertices and the
  /// result is stamped non-certified (stability holds only near the grid).
  bool grid_mode = false;
  std::vector<SchedulingPoint> grid;
};

struct SynthesisResult {
  SynthesisMethod method = SynthesisMethod::Blf;
  lmi::SolveStatus status = lmi::SolveStatus::Inconclusive;
  DataDims dims;
  /// Lyapunov certificate variable: size n_x(1+n_p) for Blf/Fbsp/Analysis,
  /// size n_x for the Slf baseline.
  Matrix F;
  /// Stacked gain change-of-variables [G_0 ... G_{n_p}]; empty for Analysis.
  Matrix G;
  std::vector<double> alpha;  // per vertex; single entry for Fbsp
  std::vector<double> beta;
  std::optional<Matrix> xi;   // full-block multiplier (Fbsp)
  double epsilon = 0.0;       // Fbsp slack
  bool certified = true;      // false when produced in grid mode
  std::vector<lmi::ConstraintMargin> solver_margins;
  double slack = 0.0;
  double wall_time_s = 0.0;
  std::string diagnostics;

  bool feasible() const { return status == lmi::SolveStatus::Feasible; }
};

struct BlfVertexVars {
  lmi::Variable F;
  std::optional<lmi::Variable> G;  // absent when n_u = 0
  lmi::Variable alpha;
  lmi::Variable beta;
};

/// Vertex constraint of the gain-synthesis program: the block LMI of size
/// 3 n_x(1+n_p) + n_u, affine in (F, G, alpha, beta), built on the lifted
/// consistency QMI at one scheduling vertex. The dense pre-Schur form
/// blkdiag(P^{-1}, -[I; K] P^{-1} [I; K]^T) is never materialized with
/// variables; this is its linearized Schur lift.
lmi::AffineMatrixExpr assemble_blf_vertex_constraint(const Qmi& upsilon_p, const DataDims& dims,
                                                     const BlfVertexVars& vars);

/// Scheduling-dependent Lyapunov synthesis: shared (F, G) with per-vertex
/// multipliers (alpha_i, beta_i); feasibility certifies the one-step decrease
/// for every data-consistent system and every scheduling value in the
/// polytope.
SynthesisResult synthesize_blf(const ConsistencyQmi& c, const SchedulingPolytope& polytope,
                               const SynthesisSettings& settings = {});

/// Common-Lyapunov baseline: a single quadratic V(x) = x^T F0^{-1} x shared
/// across the scheduling range, derived by the same multiplier argument
/// applied to the unlifted consistency QMI. More conservative than the
/// scheduling-dependent program by construction.
SynthesisResult synthesize_slf_baseline(const ConsistencyQmi& c,
                                        const SchedulingPolytope& polytope,
                                        const SynthesisSettings& settings = {});

/// Full-block multiplier relaxation: one scheduling-independent LMI plus
/// per-vertex multiplier conditions; sufficient for the same vertex program,
/// trading necessity for numerical robustness.
SynthesisResult synthesize_fbsp(const ConsistencyQmi& c, const SchedulingPolytope& polytope,
                                const SynthesisSettings& settings = {});

/// Open-loop stability analysis for input-free data (n_u = 0): the same
/// vertex program with the gain rows removed.
SynthesisResult analyze_stability(const ConsistencyQmi& c, const SchedulingPolytope& polytope,
                                  const SynthesisSettings& settings = {});

struct Controller {
  AffineGain gain;
  BiquadraticLyapunov lyapunov;
};

/// Recovers the gain K = G F^{-1} (columns split into K_0..K_{n_p}) and the
/// Lyapunov matrix P = F^{-1}. For the Slf baseline the gain blocks are
/// K_i = G_i F0^{-1} and P is the common n_x-sized matrix.
Controller recover_controller(const SynthesisResult& result,
                              double condition_limit = Tolerances{}.condition_limit);

}  // namespace lpvsyn

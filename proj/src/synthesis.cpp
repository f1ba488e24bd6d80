#include "lpvsyn/synthesis.hpp"

#include <chrono>
#include <stdexcept>

namespace lpvsyn {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_preconditions(const ConsistencyQmi& c, const SchedulingPolytope& polytope) {
  if (!c.noise_report.ok()) {
    throw std::invalid_argument("synthesis: noise model violates the existence/boundedness conditions");
  }
  if (polytope.dim() != c.dims.n_p) {
    throw std::invalid_argument("synthesis: polytope dimension does not match the dataset");
  }
}

const std::vector<SchedulingPoint>& synthesis_points(const SchedulingPolytope& polytope,
                                                     const SynthesisSettings& settings) {
  if (settings.grid_mode) {
    if (settings.grid.empty()) {
      throw std::invalid_argument("synthesis: grid mode requires a nonempty grid");
    }
    return settings.grid;
  }
  return polytope.vertices();
}

void fill_outcome(SynthesisResult& result, const lmi::SolveOutcome& outcome) {
  result.status = outcome.status;
  result.solver_margins = outcome.verification.margins;
  result.slack = outcome.slack;
  result.diagnostics = outcome.diagnostics;
}

}  // namespace

std::string to_string(SynthesisMethod method) {
  switch (method) {
    case SynthesisMethod::Blf: return "blf";
    case SynthesisMethod::Slf: return "slf";
    case SynthesisMethod::Fbsp: return "fbsp";
    case SynthesisMethod::Analysis: return "analysis";
  }
  return "unknown";
}

SynthesisMethod synthesis_method_from_string(const std::string& name) {
  if (name == "blf") return SynthesisMethod::Blf;
  if (name == "slf") return SynthesisMethod::Slf;
  if (name == "fbsp") return SynthesisMethod::Fbsp;
  if (name == "analysis") return SynthesisMethod::Analysis;
  throw std::invalid_argument("unknown synthesis method: " + name);
}

lmi::AffineMatrixExpr assemble_blf_vertex_constraint(const Qmi& upsilon_p, const DataDims& dims,
                                                     const BlfVertexVars& vars) {
  const int s = dims.lifted();
  const int n_u = dims.n_u;
  if (upsilon_p.q != s || upsilon_p.r != s + n_u) {
    throw std::invalid_argument("assemble_blf_vertex_constraint: lifted QMI has wrong block sizes");
  }
  if (n_u > 0 && !vars.G) {
    throw std::invalid_argument("assemble_blf_vertex_constraint: gain variable required for n_u > 0");
  }
  const int total = 3 * s + n_u;
  const int b1 = 0;        // F - beta I row block
  const int b2 = s;        // first column of the Schur lift
  const int b3 = 2 * s;    // gain rows
  const int b4 = 2 * s + n_u;

  lmi::AffineMatrixExpr expr(total);
  expr.add_block(vars.F, b1, b1, 1.0);
  expr.add_scalar_identity(vars.beta, b1, s, -1.0);
  expr.add_block(vars.F, b2, b4, 1.0);
  if (n_u > 0) expr.add_block(*vars.G, b3, b4, 1.0);
  expr.add_block(vars.F, b4, b4, 1.0);

  Matrix alpha_coeff = Matrix::Zero(total, total);
  alpha_coeff.topLeftCorner(2 * s + n_u, 2 * s + n_u) = -upsilon_p.psi;
  expr.add_scalar_coeff(vars.alpha, alpha_coeff);
  return expr;
}

namespace {

SynthesisResult run_blf_family(const ConsistencyQmi& c, const SchedulingPolytope& polytope,
                               const SynthesisSettings& settings, SynthesisMethod method) {
  const auto start = Clock::now();
  check_preconditions(c, polytope);
  const auto& points = synthesis_points(polytope, settings);
  const DataDims& dims = c.dims;

  lmi::LmiProblem prob;
  BlfVertexVars vars{prob.add_symmetric("F", dims.lifted(), /*positive_definite=*/true),
                     std::nullopt, {}, {}};
  if (dims.n_u > 0) vars.G = prob.add_rectangular("G", dims.n_u, dims.lifted());

  std::vector<lmi::Variable> alphas, betas;
  for (std::size_t j = 0; j < points.size(); ++j) {
    alphas.push_back(prob.add_scalar("alpha" + std::to_string(j), lmi::ScalarSign::NonNegative));
    betas.push_back(prob.add_scalar("beta" + std::to_string(j), lmi::ScalarSign::Positive));
    vars.alpha = alphas.back();
    vars.beta = betas.back();
    prob.add_constraint(assemble_blf_vertex_constraint(schedule_lift_qmi(c, points[j]), dims, vars),
                        0.0, "vertex" + std::to_string(j));
  }

  const lmi::SolveOutcome outcome = lmi::solve(prob, settings.solver);

  SynthesisResult result;
  result.method = method;
  result.dims = dims;
  result.certified = !settings.grid_mode;
  fill_outcome(result, outcome);
  if (outcome.status == lmi::SolveStatus::Feasible) {
    result.F = outcome.assignment.at(vars.F.id);
    result.G = vars.G ? outcome.assignment.at(vars.G->id) : Matrix(0, dims.lifted());
    for (std::size_t j = 0; j < points.size(); ++j) {
      result.alpha.push_back(outcome.assignment.at(alphas[j].id)(0, 0));
      result.beta.push_back(outcome.assignment.at(betas[j].id)(0, 0));
    }
  }
  result.wall_time_s = seconds_since(start);
  return result;
}

}  // namespace

SynthesisResult synthesize_blf(const ConsistencyQmi& c, const SchedulingPolytope& polytope,
                               const SynthesisSettings& settings) {
  return run_blf_family(c, polytope, settings, SynthesisMethod::Blf);
}

SynthesisResult analyze_stability(const ConsistencyQmi& c, const SchedulingPolytope& polytope,
                                  const SynthesisSettings& settings) {
  if (c.dims.n_u != 0) {
    throw std::invalid_argument("analyze_stability: dataset must have n_u = 0");
  }
  return run_blf_family(c, polytope, settings, SynthesisMethod::Analysis);
}

SynthesisResult synthesize_slf_baseline(const ConsistencyQmi& c,
                                        const SchedulingPolytope& polytope,
                                        const SynthesisSettings& settings) {
  const auto start = Clock::now();
  check_preconditions(c, polytope);
  const auto& points = synthesis_points(polytope, settings);
  const DataDims& dims = c.dims;
  const int n_x = dims.n_x;
  const int s = dims.lifted();
  const int r = dims.phi_rows();
  const int total = n_x + r + n_x;
  const int b2 = n_x;
  const int b3 = n_x + r;

  lmi::LmiProblem prob;
  const auto f0 = prob.add_symmetric("F0", n_x, /*positive_definite=*/true);
  std::optional<lmi::Variable> g;
  if (dims.n_u > 0) g = prob.add_rectangular("G", dims.n_u, s);

  std::vector<lmi::Variable> alphas, betas;
  for (std::size_t j = 0; j < points.size(); ++j) {
    const SchedulingPoint& p = points[j];
    alphas.push_back(prob.add_scalar("alpha" + std::to_string(j), lmi::ScalarSign::NonNegative));
    betas.push_back(prob.add_scalar("beta" + std::to_string(j), lmi::ScalarSign::Positive));

    lmi::AffineMatrixExpr expr(total);
    expr.add_block(f0, 0, 0, 1.0);
    expr.add_scalar_identity(betas.back(), 0, n_x, -1.0);
    Matrix alpha_coeff = Matrix::Zero(total, total);
    alpha_coeff.topLeftCorner(n_x + r, n_x + r) = -c.qmi.psi;
    expr.add_scalar_coeff(alphas.back(), alpha_coeff);
    // N = [lift(p) F0; G lift(p)] placed against the trailing F0 block.
    for (int i = 0; i <= dims.n_p; ++i) {
      const double w = i == 0 ? 1.0 : p(i - 1);
      expr.add_block(f0, b2 + i * n_x, b3, w);
      if (g) expr.add_sub_block(*g, 0, i * n_x, dims.n_u, n_x, b2 + s, b3, w);
    }
    expr.add_block(f0, b3, b3, 1.0);
    prob.add_constraint(std::move(expr), 0.0, "vertex" + std::to_string(j));
  }

  const lmi::SolveOutcome outcome = lmi::solve(prob, settings.solver);

  SynthesisResult result;
  result.method = SynthesisMethod::Slf;
  result.dims = dims;
  result.certified = !settings.grid_mode;
  fill_outcome(result, outcome);
  if (outcome.status == lmi::SolveStatus::Feasible) {
    result.F = outcome.assignment.at(f0.id);
    result.G = g ? outcome.assignment.at(g->id) : Matrix(0, s);
    for (std::size_t j = 0; j < points.size(); ++j) {
      result.alpha.push_back(outcome.assignment.at(alphas[j].id)(0, 0));
      result.beta.push_back(outcome.assignment.at(betas[j].id)(0, 0));
    }
  }
  result.wall_time_s = seconds_since(start);
  return result;
}

SynthesisResult synthesize_fbsp(const ConsistencyQmi& c, const SchedulingPolytope& polytope,
                                const SynthesisSettings& settings) {
  const auto start = Clock::now();
  check_preconditions(c, polytope);
  const auto& points = synthesis_points(polytope, settings);
  const DataDims& dims = c.dims;
  const int n_x = dims.n_x;
  const int n_u = dims.n_u;
  const int n_p = dims.n_p;
  const int s = dims.lifted();
  if (n_p < 1) {
    throw std::invalid_argument("synthesize_fbsp: requires at least one scheduling variable");
  }
  const int k = n_x * n_p;       // multiplier channel size
  const int n_f = 3 * s + n_u;   // vertex LMI size
  const int total = k + n_f;     // size of the scheduling-independent LMI

  // Linear-fractional factors of the lifted constraint stack.
  Matrix l12 = Matrix::Zero(k, n_f);
  l12.middleCols(n_x, k) = Matrix::Identity(k, k);
  Matrix l21_top(n_x, k);  // [I I ... I]
  for (int i = 0; i < n_p; ++i) l21_top.middleCols(i * n_x, n_x) = Matrix::Identity(n_x, n_x);

  Matrix r1 = Matrix::Zero(k, total);  // [L11 L12] with L11 = 0
  r1.rightCols(n_f) = l12;
  Matrix r2 = Matrix::Zero(k, total);  // [I 0]
  r2.leftCols(k) = Matrix::Identity(k, k);

  // Rows of [L21 L22] hit by the consistency QMI: the top n_x + s + n_u rows.
  const int upsilon_rows = n_x + s + n_u;
  Matrix mu = Matrix::Zero(upsilon_rows, total);
  mu.topLeftCorner(n_x, k) = l21_top;
  mu.block(0, k, n_x, n_x) = Matrix::Identity(n_x, n_x);  // Gamma, first row block
  mu.block(n_x, k + s, s + n_u, s + n_u) = Matrix::Identity(s + n_u, s + n_u);

  lmi::LmiProblem prob;
  const auto f = prob.add_symmetric("F", s, /*positive_definite=*/true);
  std::optional<lmi::Variable> g;
  if (n_u > 0) g = prob.add_rectangular("G", n_u, s);
  const auto alpha = prob.add_scalar("alpha", lmi::ScalarSign::NonNegative);
  const auto beta = prob.add_scalar("beta", lmi::ScalarSign::Positive);
  const auto xi = prob.add_symmetric("Xi", 2 * k);

  // The strictness slack epsilon is pinned to the constraint margin so the
  // two cancel in the implied vertex inequality: any positive feasibility
  // slack then certifies the vertex LMI strictly. A free epsilon would be
  // inflated by the max-slack objective and weaken the guarantee by exactly
  // that amount.
  const double epsilon = settings.solver.eps_strict;

  // Scheduling-independent condition, assembled in negated form so the
  // constraint reads >= margin.
  lmi::AffineMatrixExpr main_expr(total);
  main_expr.add_term(xi, 0, 0, k, k, r1.transpose(), r1, -0.5);
  main_expr.add_term(xi, 0, k, k, k, r1.transpose(), r2, -1.0);
  main_expr.add_term(xi, k, k, k, k, r2.transpose(), r2, -0.5);
  main_expr.add_scalar_coeff(alpha, -(mu.transpose() * c.qmi.psi * mu));
  {
    const int base = k;
    const int b1 = base;
    const int b2 = base + s;
    const int b3 = base + 2 * s;
    const int b4 = base + 2 * s + n_u;
    main_expr.add_block(f, b1, b1, 1.0);
    main_expr.add_scalar_identity(beta, b1, s, -1.0);
    main_expr.add_block(f, b2, b4, 1.0);
    if (g) main_expr.add_block(*g, b3, b4, 1.0);
    main_expr.add_block(f, b4, b4, 1.0);
    Matrix eps_shift = Matrix::Zero(total, total);
    eps_shift.block(base, base, n_f, n_f) = epsilon * Matrix::Identity(n_f, n_f);
    main_expr.add_constant(eps_shift);
  }
  prob.add_constraint(std::move(main_expr), epsilon, "main");

  // Vertex multiplier conditions [I; Delta]^T Xi [I; Delta] >= 0.
  const Matrix id_k = Matrix::Identity(k, k);
  for (std::size_t j = 0; j < points.size(); ++j) {
    Matrix delta = Matrix::Zero(k, k);
    for (int i = 0; i < n_p; ++i) {
      delta.block(i * n_x, i * n_x, n_x, n_x) =
          points[j](i) * Matrix::Identity(n_x, n_x);
    }
    lmi::AffineMatrixExpr expr(k);
    expr.add_term(xi, 0, 0, k, k, id_k, id_k, 0.5);
    expr.add_term(xi, 0, k, k, k, id_k, delta, 1.0);
    expr.add_term(xi, k, k, k, k, delta.transpose(), delta, 0.5);
    prob.add_constraint(std::move(expr), 0.0, "multiplier" + std::to_string(j));
  }
  // Convexity in the scheduling variable: Xi22 < 0.
  {
    lmi::AffineMatrixExpr expr(k);
    expr.add_term(xi, k, k, k, k, id_k, id_k, -0.5);
    prob.add_constraint(std::move(expr), settings.solver.eps_strict, "xi22_nd");
  }

  const lmi::SolveOutcome outcome = lmi::solve(prob, settings.solver);

  SynthesisResult result;
  result.method = SynthesisMethod::Fbsp;
  result.dims = dims;
  result.certified = !settings.grid_mode;
  fill_outcome(result, outcome);
  if (outcome.status == lmi::SolveStatus::Feasible) {
    result.F = outcome.assignment.at(f.id);
    result.G = g ? outcome.assignment.at(g->id) : Matrix(0, s);
    result.alpha.push_back(outcome.assignment.at(alpha.id)(0, 0));
    result.beta.push_back(outcome.assignment.at(beta.id)(0, 0));
    result.xi = outcome.assignment.at(xi.id);
    result.epsilon = epsilon;
  }
  result.wall_time_s = seconds_since(start);
  return result;
}

Controller recover_controller(const SynthesisResult& result, double condition_limit) {
  if (!result.feasible() || result.F.size() == 0) {
    throw std::invalid_argument("recover_controller: result carries no feasible certificate");
  }
  const Matrix f_inv = spd_inverse(result.F, condition_limit);
  const int n_x = result.dims.n_x;

  if (result.method == SynthesisMethod::Slf) {
    Matrix stacked(result.G.rows(), result.G.cols());
    for (int i = 0; i <= result.dims.n_p; ++i) {
      stacked.middleCols(i * n_x, n_x) = result.G.middleCols(i * n_x, n_x) * f_inv;
    }
    return Controller{AffineGain::from_stacked(stacked, n_x), BiquadraticLyapunov(f_inv)};
  }
  const Matrix stacked = result.G * f_inv;
  return Controller{AffineGain::from_stacked(stacked, n_x), BiquadraticLyapunov(f_inv)};
}

}  // namespace lpvsyn

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "lpvsyn/lmi.hpp"
#include "lpvsyn/random.hpp"

using namespace lpvsyn;
using namespace lpvsyn::lmi;

namespace {

/// Closed-form discrete Lyapunov solve via the Kronecker identity:
/// P - A' P A = Q  =>  (I - kron(A', A')) vec(P) = vec(Q).
Matrix lyapunov_equation(const Matrix& a, const Matrix& q) {
  const int n = static_cast<int>(a.rows());
  Matrix at = a.transpose();
  Matrix kron(n * n, n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      kron.block(i * n, j * n, n, n) = at(i, j) * at;
  Matrix sys = Matrix::Identity(n * n, n * n) - kron;
  Vector vec_q(n * n);
  for (int c = 0; c < n; ++c) vec_q.segment(c * n, n) = q.col(c);
  Vector vec_p = sys.fullPivLu().solve(vec_q);
  Matrix p(n, n);
  for (int c = 0; c < n; ++c) p.col(c) = vec_p.segment(c * n, n);
  return symmetrized(p);
}

LmiProblem lyapunov_problem(const Matrix& a, double margin, Variable* p_out) {
  LmiProblem prob;
  auto p = prob.add_symmetric("P", static_cast<int>(a.rows()), /*positive_definite=*/true);
  AffineMatrixExpr expr(static_cast<int>(a.rows()));
  expr.add_block(p, 0, 0, 1.0);
  expr.add_term(p, 0, 0, static_cast<int>(a.rows()), static_cast<int>(a.rows()),
                Matrix(-a.transpose()), a, 0.5);
  prob.add_constraint(std::move(expr), margin, "decrease");
  *p_out = p;
  return prob;
}

}  // namespace

TEST_CASE("trivial scalar problem is feasible with positive slack") {
  LmiProblem prob;
  auto x = prob.add_scalar("x", ScalarSign::NonNegative);
  AffineMatrixExpr e(1);
  e.add_scalar_coeff(x, Matrix::Identity(1, 1));
  prob.add_constraint(std::move(e), 0.0, "x_psd");
  prob.set_maximize(x);
  auto out = solve(prob);
  CHECK(out.status == SolveStatus::Feasible);
  CHECK(out.slack > 0.0);
  CHECK(out.assignment.at(x.id)(0, 0) > 0.0);
}

TEST_CASE("constant negative constraint is infeasible") {
  LmiProblem prob;
  auto x = prob.add_scalar("x", ScalarSign::Free);
  AffineMatrixExpr e(1);
  e.add_constant(-Matrix::Identity(1, 1));
  e.add_scalar_coeff(x, Matrix::Zero(1, 1));
  prob.add_constraint(std::move(e), 0.0, "neg");
  auto out = solve(prob);
  CHECK(out.status == SolveStatus::Infeasible);
  CHECK(out.slack < 0.0);
}

TEST_CASE("discrete Lyapunov LMI agrees with the closed-form oracle") {
  Matrix a(2, 2);
  a << 0.5, 0.3, -0.2, 0.4;
  Variable p;
  auto prob = lyapunov_problem(a, 1e-3, &p);
  auto out = solve(prob);
  REQUIRE(out.status == SolveStatus::Feasible);
  const Matrix p_lmi = out.assignment.at(p.id);
  CHECK(min_eigenvalue(p_lmi - a.transpose() * p_lmi * a) >= 1e-3 - 1e-9);

  // The closed-form solution of P - A'PA = Q exists, is PD, and satisfies the
  // same constraint set, confirming the verdict independently.
  const Matrix q = Matrix::Identity(2, 2);
  const Matrix p_exact = lyapunov_equation(a, q);
  CHECK(is_positive_definite(p_exact));
  CHECK((p_exact - a.transpose() * p_exact * a - q).norm() < 1e-10);
  auto report = verify_assignment(prob, {{p.id, p_exact}}, 1e-7);
  CHECK(report.all_ok);
}

TEST_CASE("unstable dynamics make the Lyapunov LMI infeasible") {
  Matrix a(2, 2);
  a << 1.2, 0.3, 0.0, 1.1;
  Variable p;
  auto prob = lyapunov_problem(a, 1e-3, &p);
  auto out = solve(prob);
  CHECK(out.status == SolveStatus::Infeasible);
}

TEST_CASE("verification replays, detects perturbations, and is vacuous when empty") {
  Matrix a(2, 2);
  a << 0.6, 0.1, 0.0, 0.5;
  Variable p;
  auto prob = lyapunov_problem(a, 1e-3, &p);
  auto out = solve(prob);
  REQUIRE(out.status == SolveStatus::Feasible);

  auto replay = verify_assignment(prob, out.assignment, 1e-7);
  CHECK(replay.all_ok);

  // A large rank-deforming perturbation must be flagged. Flipping the sign of
  // P breaks the PD encoding.
  Assignment tampered = out.assignment;
  tampered.at(p.id) = -tampered.at(p.id);
  CHECK_FALSE(verify_assignment(prob, tampered, 1e-7).all_ok);

  LmiProblem empty;
  auto vacuous = verify_assignment(empty, {}, 1e-7);
  CHECK(vacuous.all_ok);
  CHECK(vacuous.margins.empty());
}

TEST_CASE("feasible outcomes always pass the independent verification") {
  Rng rng = make_rng(88, "honesty");
  int feasible_count = 0;
  for (int trial = 0; trial < 12; ++trial) {
    Matrix a = 0.8 * gaussian_matrix(rng, 3, 3) / std::sqrt(3.0);
    Variable p;
    auto prob = lyapunov_problem(a, 1e-4, &p);
    auto out = solve(prob);
    if (out.status == SolveStatus::Feasible) {
      ++feasible_count;
      CHECK(verify_assignment(prob, out.assignment, 1e-7).all_ok);
    }
  }
  CHECK(feasible_count > 0);
}

TEST_CASE("solve is deterministic") {
  Matrix a(2, 2);
  a << 0.4, 0.2, -0.1, 0.7;
  Variable p1, p2;
  auto prob1 = lyapunov_problem(a, 1e-3, &p1);
  auto prob2 = lyapunov_problem(a, 1e-3, &p2);
  auto out1 = solve(prob1);
  auto out2 = solve(prob2);
  CHECK(out1.status == out2.status);
  CHECK(out1.slack == out2.slack);
  CHECK(out1.assignment.at(p1.id) == out2.assignment.at(p2.id));
}

TEST_CASE("strict encodings deliver at least half the requested margin") {
  const double eps = SolveSettings{}.eps_strict;
  Matrix a(2, 2);
  a << 0.3, 0.0, 0.1, 0.2;
  Variable p;
  auto prob = lyapunov_problem(a, eps, &p);
  auto out = solve(prob);
  REQUIRE(out.status == SolveStatus::Feasible);
  const Matrix pv = out.assignment.at(p.id);
  CHECK(min_eigenvalue(pv - a.transpose() * pv * a) >= eps / 2.0);
  CHECK(min_eigenvalue(pv) >= eps / 2.0);
}

TEST_CASE("expression evaluation matches a hand-assembled block matrix") {
  LmiProblem prob;
  auto f = prob.add_symmetric("F", 2);
  auto g = prob.add_rectangular("G", 1, 2);
  auto a = prob.add_scalar("a");

  AffineMatrixExpr e(5);
  e.add_block(f, 0, 0, 2.0);
  e.add_block(g, 2, 0, 1.0);              // G at rows 2, cols 0..1, mirrored
  e.add_sub_block(f, 0, 1, 2, 1, 0, 3);   // second column of F at (0, 3)
  Matrix coeff = Matrix::Zero(5, 5);
  coeff(4, 4) = -3.0;
  e.add_scalar_coeff(a, coeff);
  Matrix c = Matrix::Zero(5, 5);
  c(3, 3) = 7.0;
  e.add_constant(c);

  Rng rng = make_rng(5, "expr");
  Matrix fv = symmetrized(gaussian_matrix(rng, 2, 2));
  Matrix gv = gaussian_matrix(rng, 1, 2);
  const double av = 1.3;
  Assignment assign{{f.id, fv}, {g.id, gv}, {a.id, av * Matrix::Identity(1, 1)}};

  Matrix want = Matrix::Zero(5, 5);
  want.topLeftCorner(2, 2) = 2.0 * fv;
  want.block(2, 0, 1, 2) = gv;
  want.block(0, 2, 2, 1) = gv.transpose();
  want.block(0, 3, 2, 1) += fv.col(1);
  want.block(3, 0, 1, 2) += fv.col(1).transpose();
  want(4, 4) = -3.0 * av;
  want(3, 3) += 7.0;

  CHECK((e.evaluate(assign) - want).norm() < 1e-14 * (1.0 + want.norm()));
}

TEST_CASE("scalarized representation agrees with direct evaluation") {
  Rng rng = make_rng(60, "scalarize");
  LmiProblem prob;
  auto f = prob.add_symmetric("F", 3, true);
  auto g = prob.add_rectangular("G", 2, 3);
  auto a = prob.add_scalar("a", ScalarSign::NonNegative);

  AffineMatrixExpr e1(8);
  e1.add_block(f, 0, 0, 1.0);
  e1.add_block(g, 3, 0, -0.5);
  e1.add_sub_block(f, 0, 0, 3, 2, 5, 0, 2.0);
  e1.add_term(f, 0, 0, 3, 3, gaussian_matrix(rng, 8, 3), gaussian_matrix(rng, 3, 8), 0.7);
  e1.add_scalar_coeff(a, symmetrized(gaussian_matrix(rng, 8, 8)));
  e1.add_constant(symmetrized(gaussian_matrix(rng, 8, 8)));
  prob.add_constraint(std::move(e1), 0.25, "mixed");

  Assignment assign{{f.id, symmetrized(gaussian_matrix(rng, 3, 3))},
                    {g.id, gaussian_matrix(rng, 2, 3)},
                    {a.id, 0.9 * Matrix::Identity(1, 1)}};
  const auto scalarized = scalarized_constraint_values(prob, assign);
  const auto effective = prob.effective_constraints(SolveSettings{}.eps_strict);
  REQUIRE(scalarized.size() == effective.size());
  for (std::size_t i = 0; i < effective.size(); ++i) {
    const Matrix direct = effective[i].expr.evaluate(assign);
    CHECK((scalarized[i] - direct).norm() < 1e-12 * (1.0 + direct.norm()));
  }
}

TEST_CASE("malformed expressions are rejected") {
  LmiProblem prob;
  auto f = prob.add_symmetric("F", 2);

  // Undeclared variable (from a different problem).
  LmiProblem other;
  auto alien = other.add_symmetric("X", 3);
  AffineMatrixExpr e(3);
  e.add_block(alien, 0, 0, 1.0);
  CHECK_THROWS_AS(prob.add_constraint(std::move(e), 0.0), std::invalid_argument);

  AffineMatrixExpr bad(2);
  CHECK_THROWS_AS(bad.add_block(f, 1, 1, 1.0), std::invalid_argument);  // out of range
  CHECK_THROWS_AS(bad.add_constant(Matrix::Zero(3, 3)), std::invalid_argument);

  AffineMatrixExpr ok(2);
  ok.add_block(f, 0, 0, 1.0);
  CHECK_THROWS_AS(prob.add_constraint(std::move(ok), -1.0), std::invalid_argument);
}

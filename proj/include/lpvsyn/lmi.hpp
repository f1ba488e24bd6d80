#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lpvsyn/numeric.hpp"

namespace lpvsyn::lmi {

enum class VarKind { Scalar, Symmetric, Rectangular };
enum class ScalarSign { Free, NonNegative, Positive };

/// Solver decision variable. Scalars carry an optional sign constraint;
/// symmetric matrix variables an optional positive-definiteness flag.
/// Rectangular variables house gain-like blocks with no shape constraint.
struct Variable {
  int id = -1;
  VarKind kind = VarKind::Scalar;
  int rows = 1;
  int cols = 1;
  ScalarSign sign = ScalarSign::Free;
  bool positive_definite = false;
  std::string name;

  int component_count() const {
    switch (kind) {
      case VarKind::Scalar: return 1;
      case VarKind::Symmetric: return rows * (rows + 1) / 2;
      case VarKind::Rectangular: return rows * cols;
    }
    return 0;
  }
};

/// Variable values keyed by id; scalars are stored as 1x1 matrices.
using Assignment = std::map<int, Matrix>;

/// Symmetric matrix expression affine in the declared variables. Terms are
/// symmetrized by construction: a block placed off the diagonal implies its
/// mirrored transpose.
class AffineMatrixExpr {
 public:
  explicit AffineMatrixExpr(int size);

  int size() const { return static_cast<int>(constant_.rows()); }

  /// Adds a full-size symmetric constant.
  void add_constant(const Matrix& sym);
  /// Places `m` at (row, col) and m^T at (col, row); a diagonal placement
  /// (row == col) requires `m` symmetric and is added once.
  void add_constant_block(int row, int col, const Matrix& m);

  /// General affine term: scale * (L * V_sub * R + (L * V_sub * R)^T), where
  /// V_sub = V[r0 : r0+k, c0 : c0+l]. L is size() x k, R is l x size().
  void add_term(const Variable& v, int r0, int c0, int k, int l, Matrix left, Matrix right,
                double scale);

  /// Whole-variable placement at (row, col) with the mirror convention; a
  /// diagonal placement requires a square variable and contributes
  /// scale * V there (symmetrized).
  void add_block(const Variable& v, int row, int col, double scale = 1.0);

  /// Sub-block placement V[r0:r0+k, c0:c0+l] at (row, col), mirrored.
  void add_sub_block(const Variable& v, int r0, int c0, int k, int l, int row, int col,
                     double scale = 1.0);

  /// y * coeff for a scalar variable; coeff is full-size and symmetrized.
  void add_scalar_coeff(const Variable& v, const Matrix& coeff);

  /// y * scale * I_k placed at diagonal offset `row`.
  void add_scalar_identity(const Variable& v, int row, int k, double scale);

  Matrix evaluate(const Assignment& assignment) const;

  struct MatrixTerm {
    Variable var;
    int r0, c0, k, l;
    Matrix left;
    Matrix right;
    double scale;
  };
  struct ScalarTerm {
    Variable var;
    Matrix coeff;
  };

  const Matrix& constant() const { return constant_; }
  const std::vector<MatrixTerm>& matrix_terms() const { return matrix_terms_; }
  const std::vector<ScalarTerm>& scalar_terms() const { return scalar_terms_; }

 private:
  Matrix constant_;
  std::vector<MatrixTerm> matrix_terms_;
  std::vector<ScalarTerm> scalar_terms_;
};

struct Constraint {
  AffineMatrixExpr expr;
  double margin = 0.0;  // requires min eig(expr) >= margin
  std::string name;
};

/// Feasibility problem over affine matrix inequalities.
class LmiProblem {
 public:
  Variable add_scalar(std::string name, ScalarSign sign = ScalarSign::Free);
  Variable add_symmetric(std::string name, int size, bool positive_definite = false);
  Variable add_rectangular(std::string name, int rows, int cols);

  void add_constraint(AffineMatrixExpr expr, double margin = 0.0, std::string name = "");

  /// Optional: additionally maximize this scalar variable on top of the
  /// uniform feasibility slack.
  void set_maximize(const Variable& v);

  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const std::optional<int>& objective_variable() const { return objective_var_; }

  /// User constraints plus the encodings of variable flags: PD matrix
  /// variables as V >= eps_strict * I, positive scalars as y >= eps_strict,
  /// nonnegative scalars as y >= 0.
  std::vector<Constraint> effective_constraints(double eps_strict) const;

  int component_count() const;

 private:
  void check_expr(const AffineMatrixExpr& expr) const;

  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
  std::optional<int> objective_var_;
};

enum class SolveStatus { Feasible, Infeasible, Inconclusive };

std::string to_string(SolveStatus status);

struct SolveSettings {
  /// Base margin for strict-inequality encodings (scaled by 1 + |constant|).
  double eps_strict = 1e-6;
  /// Box radius for the scaled decision variables; bounds the search region
  /// that infeasibility statements refer to.
  double box_radius = 1e5;
  /// Cap on the uniform slack; keeps homogeneous problems from drifting to
  /// the box boundary once clearly feasible.
  double slack_cap = 100.0;
  double mu_initial = 1.0;
  double mu_final = 1e-11;
  double mu_shrink = 0.2;
  int max_newton_per_stage = 120;
  double newton_tol = 1e-9;
  /// Relative tolerance of the independent verification pass.
  double verify_tol = 1e-7;
  /// Stage-by-stage trace on stderr.
  bool verbose = false;
};

struct ConstraintMargin {
  std::string name;
  double min_eig = 0.0;
  double required = 0.0;
  double scale = 1.0;
  bool ok = false;
};

struct VerificationReport {
  std::vector<ConstraintMargin> margins;
  bool all_ok = true;
  double worst_relative = 0.0;
};

struct SolveOutcome {
  SolveStatus status = SolveStatus::Inconclusive;
  Assignment assignment;
  /// Uniform slack achieved, in scaled solver units.
  double slack = 0.0;
  VerificationReport verification;
  std::string diagnostics;
  int newton_iterations = 0;
};

/// Solves the feasibility problem by maximizing a uniform slack t subject to
/// expr_j - (margin_j + t) I >= 0 with a path-following log-det barrier.
/// Feasible outcomes are re-checked by an independent eigenvalue pass; a
/// verification failure downgrades the status to Inconclusive, never to a
/// false Feasible. Infeasible means the best slack is provably negative
/// within the variable box.
SolveOutcome solve(const LmiProblem& problem, const SolveSettings& settings = {});

/// Recomputes every effective constraint matrix numerically under the
/// assignment; independent of the solver internals.
VerificationReport verify_assignment(const LmiProblem& problem, const Assignment& assignment,
                                     double tol, double eps_strict = SolveSettings{}.eps_strict);

/// Constraint values computed through the solver's scalarized representation
/// (test hook: must agree with AffineMatrixExpr::evaluate).
std::vector<Matrix> scalarized_constraint_values(const LmiProblem& problem,
                                                 const Assignment& assignment,
                                                 double eps_strict = SolveSettings{}.eps_strict);

}  // namespace lpvsyn::lmi

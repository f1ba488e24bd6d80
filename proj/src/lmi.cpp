#include "lpvsyn/lmi.hpp"

#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace lpvsyn::lmi {

// ---------------------------------------------------------------------------
// AffineMatrixExpr
// ---------------------------------------------------------------------------

AffineMatrixExpr::AffineMatrixExpr(int size) {
  if (size < 0) throw std::invalid_argument("AffineMatrixExpr: negative size");
  constant_ = Matrix::Zero(size, size);
}

void AffineMatrixExpr::add_constant(const Matrix& sym) {
  if (sym.rows() != size() || sym.cols() != size()) {
    throw std::invalid_argument("AffineMatrixExpr::add_constant: size mismatch");
  }
  constant_ += symmetrized(sym);
}

void AffineMatrixExpr::add_constant_block(int row, int col, const Matrix& m) {
  if (row < 0 || col < 0 || row + m.rows() > size() || col + m.cols() > size()) {
    throw std::invalid_argument("AffineMatrixExpr::add_constant_block: placement out of range");
  }
  if (row == col) {
    if (m.rows() != m.cols()) {
      throw std::invalid_argument("AffineMatrixExpr: diagonal constant block must be square");
    }
    constant_.block(row, col, m.rows(), m.cols()) += symmetrized(m);
  } else {
    constant_.block(row, col, m.rows(), m.cols()) += m;
    constant_.block(col, row, m.cols(), m.rows()) += m.transpose();
  }
}

void AffineMatrixExpr::add_term(const Variable& v, int r0, int c0, int k, int l, Matrix left,
                                Matrix right, double scale) {
  if (r0 < 0 || c0 < 0 || k <= 0 || l <= 0 || r0 + k > v.rows || c0 + l > v.cols) {
    throw std::invalid_argument("AffineMatrixExpr::add_term: sub-block out of variable range");
  }
  if (left.rows() != size() || left.cols() != k || right.rows() != l || right.cols() != size()) {
    throw std::invalid_argument("AffineMatrixExpr::add_term: factor shape mismatch");
  }
  matrix_terms_.push_back(MatrixTerm{v, r0, c0, k, l, std::move(left), std::move(right), scale});
}

void AffineMatrixExpr::add_block(const Variable& v, int row, int col, double scale) {
  add_sub_block(v, 0, 0, v.rows, v.cols, row, col, scale);
}

void AffineMatrixExpr::add_sub_block(const Variable& v, int r0, int c0, int k, int l, int row,
                                     int col, double scale) {
  if (row < 0 || col < 0 || row + k > size() || col + l > size()) {
    throw std::invalid_argument("AffineMatrixExpr::add_sub_block: placement out of range");
  }
  if (row == col && k != l) {
    throw std::invalid_argument("AffineMatrixExpr::add_sub_block: diagonal placement must be square");
  }
  Matrix left = Matrix::Zero(size(), k);
  left.middleRows(row, k) = Matrix::Identity(k, k);
  Matrix right = Matrix::Zero(l, size());
  right.middleCols(col, l) = Matrix::Identity(l, l);
  const double s = row == col ? 0.5 * scale : scale;
  add_term(v, r0, c0, k, l, std::move(left), std::move(right), s);
}

void AffineMatrixExpr::add_scalar_coeff(const Variable& v, const Matrix& coeff) {
  if (v.kind != VarKind::Scalar) {
    throw std::invalid_argument("AffineMatrixExpr::add_scalar_coeff: variable is not scalar");
  }
  if (coeff.rows() != size() || coeff.cols() != size()) {
    throw std::invalid_argument("AffineMatrixExpr::add_scalar_coeff: coefficient size mismatch");
  }
  scalar_terms_.push_back(ScalarTerm{v, symmetrized(coeff)});
}

void AffineMatrixExpr::add_scalar_identity(const Variable& v, int row, int k, double scale) {
  Matrix coeff = Matrix::Zero(size(), size());
  coeff.block(row, row, k, k) = scale * Matrix::Identity(k, k);
  add_scalar_coeff(v, coeff);
}

Matrix AffineMatrixExpr::evaluate(const Assignment& assignment) const {
  Matrix out = constant_;
  for (const auto& t : matrix_terms_) {
    auto it = assignment.find(t.var.id);
    if (it == assignment.end()) {
      throw std::invalid_argument("AffineMatrixExpr::evaluate: missing variable " + t.var.name);
    }
    const Matrix& v = it->second;
    if (v.rows() != t.var.rows || v.cols() != t.var.cols) {
      throw std::invalid_argument("AffineMatrixExpr::evaluate: value shape mismatch for " + t.var.name);
    }
    const Matrix prod = t.scale * (t.left * v.block(t.r0, t.c0, t.k, t.l) * t.right);
    out += prod + prod.transpose();
  }
  for (const auto& t : scalar_terms_) {
    auto it = assignment.find(t.var.id);
    if (it == assignment.end()) {
      throw std::invalid_argument("AffineMatrixExpr::evaluate: missing variable " + t.var.name);
    }
    out += it->second(0, 0) * t.coeff;
  }
  return out;
}

// ---------------------------------------------------------------------------
// LmiProblem
// ---------------------------------------------------------------------------

Variable LmiProblem::add_scalar(std::string name, ScalarSign sign) {
  Variable v;
  v.id = static_cast<int>(variables_.size());
  v.kind = VarKind::Scalar;
  v.sign = sign;
  v.name = std::move(name);
  variables_.push_back(v);
  return v;
}

Variable LmiProblem::add_symmetric(std::string name, int size, bool positive_definite) {
  if (size <= 0) throw std::invalid_argument("LmiProblem::add_symmetric: size must be positive");
  Variable v;
  v.id = static_cast<int>(variables_.size());
  v.kind = VarKind::Symmetric;
  v.rows = v.cols = size;
  v.positive_definite = positive_definite;
  v.name = std::move(name);
  variables_.push_back(v);
  return v;
}

Variable LmiProblem::add_rectangular(std::string name, int rows, int cols) {
  if (rows <= 0 || cols <= 0) {
    throw std::invalid_argument("LmiProblem::add_rectangular: dimensions must be positive");
  }
  Variable v;
  v.id = static_cast<int>(variables_.size());
  v.kind = VarKind::Rectangular;
  v.rows = rows;
  v.cols = cols;
  v.name = std::move(name);
  variables_.push_back(v);
  return v;
}

void LmiProblem::check_expr(const AffineMatrixExpr& expr) const {
  auto check_var = [this](const Variable& v) {
    if (v.id < 0 || v.id >= static_cast<int>(variables_.size())) {
      throw std::invalid_argument("LmiProblem: expression references an undeclared variable");
    }
    const Variable& d = variables_[static_cast<std::size_t>(v.id)];
    if (d.kind != v.kind || d.rows != v.rows || d.cols != v.cols) {
      throw std::invalid_argument("LmiProblem: expression variable shape differs from declaration");
    }
  };
  for (const auto& t : expr.matrix_terms()) check_var(t.var);
  for (const auto& t : expr.scalar_terms()) check_var(t.var);
}

void LmiProblem::add_constraint(AffineMatrixExpr expr, double margin, std::string name) {
  if (margin < 0.0) throw std::invalid_argument("LmiProblem::add_constraint: margin must be >= 0");
  check_expr(expr);
  if (name.empty()) name = "c" + std::to_string(constraints_.size());
  constraints_.push_back(Constraint{std::move(expr), margin, std::move(name)});
}

void LmiProblem::set_maximize(const Variable& v) {
  if (v.kind != VarKind::Scalar) {
    throw std::invalid_argument("LmiProblem::set_maximize: objective must be a scalar variable");
  }
  objective_var_ = v.id;
}

std::vector<Constraint> LmiProblem::effective_constraints(double eps_strict) const {
  std::vector<Constraint> all = constraints_;
  for (const auto& v : variables_) {
    if (v.kind == VarKind::Symmetric && v.positive_definite) {
      AffineMatrixExpr expr(v.rows);
      expr.add_block(v, 0, 0, 1.0);
      all.push_back(Constraint{std::move(expr), eps_strict, v.name + "_pd"});
    } else if (v.kind == VarKind::Scalar && v.sign != ScalarSign::Free) {
      AffineMatrixExpr expr(1);
      expr.add_scalar_coeff(v, Matrix::Identity(1, 1));
      const double margin = v.sign == ScalarSign::Positive ? eps_strict : 0.0;
      all.push_back(Constraint{std::move(expr), margin, v.name + "_sign"});
    }
  }
  return all;
}

int LmiProblem::component_count() const {
  int m = 0;
  for (const auto& v : variables_) m += v.component_count();
  return m;
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Feasible: return "feasible";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Scalarization
// ---------------------------------------------------------------------------

namespace {

int packed_index(int a, int b, int n) {
  // (a, b) with a <= b into upper-triangle packed order.
  return a * n - a * (a + 1) / 2 + b;
}

struct ScalarizedBlock {
  int n = 0;
  Matrix c;                                   // constant with margin absorbed
  std::vector<std::pair<int, Matrix>> comps;  // (component index, coefficient)
  std::string name;
};

void accumulate(std::map<int, Matrix>& coeffs, int index, const Matrix& add) {
  auto it = coeffs.find(index);
  if (it == coeffs.end()) {
    coeffs.emplace(index, add);
  } else {
    it->second += add;
  }
}

ScalarizedBlock scalarize(const Constraint& con, const std::vector<int>& offsets) {
  ScalarizedBlock block;
  block.n = con.expr.size();
  block.name = con.name;
  block.c = con.expr.constant() - con.margin * Matrix::Identity(block.n, block.n);

  std::map<int, Matrix> coeffs;
  for (const auto& t : con.expr.matrix_terms()) {
    const int offset = offsets[static_cast<std::size_t>(t.var.id)];
    for (int ii = 0; ii < t.k; ++ii) {
      for (int jj = 0; jj < t.l; ++jj) {
        const int gr = t.r0 + ii;
        const int gc = t.c0 + jj;
        int idx = 0;
        switch (t.var.kind) {
          case VarKind::Scalar: idx = 0; break;
          case VarKind::Rectangular: idx = gr * t.var.cols + gc; break;
          case VarKind::Symmetric:
            idx = gr <= gc ? packed_index(gr, gc, t.var.rows) : packed_index(gc, gr, t.var.rows);
            break;
        }
        const Matrix outer = t.scale * (t.left.col(ii) * t.right.row(jj));
        accumulate(coeffs, offset + idx, outer + outer.transpose());
      }
    }
  }
  for (const auto& t : con.expr.scalar_terms()) {
    accumulate(coeffs, offsets[static_cast<std::size_t>(t.var.id)], t.coeff);
  }
  block.comps.assign(coeffs.begin(), coeffs.end());
  return block;
}

Assignment reconstruct(const std::vector<Variable>& vars, const std::vector<int>& offsets,
                       const Vector& y) {
  Assignment a;
  for (const auto& v : vars) {
    const int off = offsets[static_cast<std::size_t>(v.id)];
    Matrix m(v.rows, v.cols);
    switch (v.kind) {
      case VarKind::Scalar: m(0, 0) = y(off); break;
      case VarKind::Rectangular:
        for (int i = 0; i < v.rows; ++i)
          for (int j = 0; j < v.cols; ++j) m(i, j) = y(off + i * v.cols + j);
        break;
      case VarKind::Symmetric:
        for (int i = 0; i < v.rows; ++i)
          for (int j = i; j < v.cols; ++j) m(i, j) = m(j, i) = y(off + packed_index(i, j, v.rows));
        break;
    }
    a.emplace(v.id, std::move(m));
  }
  return a;
}

// Barrier state: blocks plus box terms on the scaled variables and the slack.
struct BarrierProblem {
  std::vector<ScalarizedBlock> blocks;  // scaled
  int m = 0;                            // variable components (slack is z[m])
  double box = 1e5;
  double slack_cap = 100.0;
  double slack_floor = -1e5;
  int objective_comp = -1;  // additional scalar to maximize, or -1

  int nz() const { return m + 1; }

  bool in_box(const Vector& z) const {
    for (int i = 0; i < m; ++i) {
      if (std::abs(z(i)) >= box) return false;
    }
    return z(m) > slack_floor && z(m) < slack_cap;
  }

  Matrix block_value(const ScalarizedBlock& b, const Vector& z) const {
    Matrix s = b.c - z(m) * Matrix::Identity(b.n, b.n);
    for (const auto& [idx, coeff] : b.comps) s += z(idx) * coeff;
    return s;
  }

  // Barrier value; ok=false when outside the domain.
  bool value(const Vector& z, double inv_mu, double& f) const {
    if (!in_box(z)) return false;
    f = -inv_mu * z(m);
    if (objective_comp >= 0) f -= inv_mu * z(objective_comp);
    for (const auto& b : blocks) {
      Eigen::LLT<Matrix> llt(block_value(b, z));
      if (llt.info() != Eigen::Success) return false;
      double logdet = 0.0;
      for (int i = 0; i < b.n; ++i) logdet += std::log(llt.matrixL()(i, i));
      f -= 2.0 * logdet;
    }
    for (int i = 0; i < m; ++i) f -= std::log(box - z(i)) + std::log(box + z(i));
    f -= std::log(slack_cap - z(m)) + std::log(z(m) - slack_floor);
    return std::isfinite(f);
  }

  // Gradient and Hessian at a strictly feasible z.
  bool derivatives(const Vector& z, double inv_mu, Vector& g, Matrix& h) const {
    g = Vector::Zero(nz());
    h = Matrix::Zero(nz(), nz());
    g(m) = -inv_mu;
    if (objective_comp >= 0) g(objective_comp) -= inv_mu;

    std::vector<int> idxs;
    std::vector<Matrix> us;
    for (const auto& b : blocks) {
      Eigen::LLT<Matrix> llt(block_value(b, z));
      if (llt.info() != Eigen::Success) return false;
      const auto& l = llt.matrixL();
      idxs.clear();
      us.clear();
      for (const auto& [idx, coeff] : b.comps) {
        Matrix tmp = l.solve(coeff);
        us.push_back(l.solve(tmp.transpose()).transpose());  // L^-1 A L^-T
        idxs.push_back(idx);
      }
      {
        Matrix tmp = l.solve(-Matrix::Identity(b.n, b.n));
        us.push_back(l.solve(tmp.transpose()).transpose());
        idxs.push_back(m);
      }
      for (std::size_t a = 0; a < us.size(); ++a) {
        g(idxs[a]) -= us[a].trace();
        for (std::size_t c = a; c < us.size(); ++c) {
          const double v = us[a].cwiseProduct(us[c]).sum();
          h(idxs[a], idxs[c]) += v;
          if (idxs[a] != idxs[c]) h(idxs[c], idxs[a]) += v;
        }
      }
    }
    for (int i = 0; i < m; ++i) {
      g(i) += 1.0 / (box - z(i)) - 1.0 / (box + z(i));
      h(i, i) += 1.0 / ((box - z(i)) * (box - z(i))) + 1.0 / ((box + z(i)) * (box + z(i)));
    }
    g(m) += 1.0 / (slack_cap - z(m)) - 1.0 / (z(m) - slack_floor);
    h(m, m) += 1.0 / ((slack_cap - z(m)) * (slack_cap - z(m))) +
               1.0 / ((z(m) - slack_floor) * (z(m) - slack_floor));
    return true;
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// verify_assignment
// ---------------------------------------------------------------------------

VerificationReport verify_assignment(const LmiProblem& problem, const Assignment& assignment,
                                     double tol, double eps_strict) {
  VerificationReport report;
  report.worst_relative = std::numeric_limits<double>::infinity();
  for (const auto& con : problem.effective_constraints(eps_strict)) {
    const Matrix value = con.expr.evaluate(assignment);
    const auto spectrum = symmetric_spectrum(value);
    ConstraintMargin cm;
    cm.name = con.name;
    cm.min_eig = spectrum.min_eig;
    cm.required = con.margin;
    cm.scale = spectrum.scale();
    cm.ok = spectrum.min_eig >= con.margin - tol * cm.scale;
    report.all_ok = report.all_ok && cm.ok;
    report.worst_relative = std::min(report.worst_relative, (cm.min_eig - cm.required) / cm.scale);
    report.margins.push_back(std::move(cm));
  }
  if (report.margins.empty()) report.worst_relative = 0.0;
  return report;
}

std::vector<Matrix> scalarized_constraint_values(const LmiProblem& problem,
                                                 const Assignment& assignment,
                                                 double eps_strict) {
  std::vector<int> offsets(problem.variables().size(), 0);
  int m = 0;
  for (const auto& v : problem.variables()) {
    offsets[static_cast<std::size_t>(v.id)] = m;
    m += v.component_count();
  }
  Vector y(m);
  for (const auto& v : problem.variables()) {
    const Matrix& val = assignment.at(v.id);
    const int off = offsets[static_cast<std::size_t>(v.id)];
    switch (v.kind) {
      case VarKind::Scalar: y(off) = val(0, 0); break;
      case VarKind::Rectangular:
        for (int i = 0; i < v.rows; ++i)
          for (int j = 0; j < v.cols; ++j) y(off + i * v.cols + j) = val(i, j);
        break;
      case VarKind::Symmetric:
        for (int i = 0; i < v.rows; ++i)
          for (int j = i; j < v.cols; ++j) y(off + packed_index(i, j, v.rows)) = val(i, j);
        break;
    }
  }
  std::vector<Matrix> values;
  for (const auto& con : problem.effective_constraints(eps_strict)) {
    ScalarizedBlock b = scalarize(con, offsets);
    Matrix s = b.c + con.margin * Matrix::Identity(b.n, b.n);  // margin was absorbed
    for (const auto& [idx, coeff] : b.comps) s += y(idx) * coeff;
    values.push_back(std::move(s));
  }
  return values;
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

SolveOutcome solve(const LmiProblem& problem, const SolveSettings& settings) {
  SolveOutcome outcome;
  const auto constraints = problem.effective_constraints(settings.eps_strict);

  // Component offsets.
  std::vector<int> offsets(problem.variables().size(), 0);
  int m = 0;
  for (const auto& v : problem.variables()) {
    offsets[static_cast<std::size_t>(v.id)] = m;
    m += v.component_count();
  }

  BarrierProblem bp;
  bp.m = m;
  bp.box = settings.box_radius;
  bp.slack_floor = -settings.box_radius;
  bp.slack_cap = settings.slack_cap;
  if (problem.objective_variable()) {
    bp.objective_comp = offsets[static_cast<std::size_t>(*problem.objective_variable())];
  }
  for (const auto& con : constraints) {
    if (con.expr.size() == 0) continue;
    bp.blocks.push_back(scalarize(con, offsets));
  }

  // Variable scaling: divide each component's coefficients by its largest
  // magnitude across blocks, so the scaled coefficients are O(1).
  Vector d = Vector::Ones(m);
  for (const auto& b : bp.blocks) {
    for (const auto& [idx, coeff] : b.comps) {
      d(idx) = std::max(d(idx), coeff.cwiseAbs().maxCoeff());
    }
  }
  for (auto& b : bp.blocks) {
    for (auto& [idx, coeff] : b.comps) coeff /= d(idx);
  }
  // Block scaling normalizes the constant terms.
  std::vector<double> block_scale;
  for (auto& b : bp.blocks) {
    const double s = std::max(1.0, b.c.size() > 0 ? b.c.cwiseAbs().maxCoeff() : 0.0);
    b.c /= s;
    for (auto& [idx, coeff] : b.comps) coeff /= s;
    block_scale.push_back(s);
  }

  // Strictly feasible start: y = 0, slack below the least eigenvalue of the
  // scaled constants.
  Vector z = Vector::Zero(bp.nz());
  double t0 = 0.0;
  for (const auto& b : bp.blocks) t0 = std::min(t0, min_eigenvalue(b.c));
  z(m) = t0 - 1.0;

  double nu = 2.0 * (m + 1);  // box barrier terms
  for (const auto& b : bp.blocks) nu += b.n;

  double mu = settings.mu_initial;
  bool broke_down = false;
  bool centered = false;
  std::ostringstream diag;

  while (true) {
    const double inv_mu = 1.0 / mu;
    centered = false;
    for (int it = 0; it < settings.max_newton_per_stage; ++it) {
      Vector g;
      Matrix h;
      if (!bp.derivatives(z, inv_mu, g, h)) {
        broke_down = true;
        diag << "derivative evaluation failed at mu=" << mu << "; ";
        break;
      }
      Vector step;
      double ridge = 0.0;
      for (int attempt = 0; attempt < 8; ++attempt) {
        Matrix hr = h;
        if (ridge > 0.0) hr += ridge * Matrix::Identity(bp.nz(), bp.nz());
        Eigen::LDLT<Matrix> ldlt(hr);
        step = ldlt.solve(-g);
        if (ldlt.info() == Eigen::Success && step.allFinite()) break;
        ridge = ridge == 0.0 ? 1e-12 * std::max(1.0, h.diagonal().maxCoeff()) : ridge * 100.0;
      }
      if (!step.allFinite()) {
        broke_down = true;
        diag << "newton system unsolvable at mu=" << mu << "; ";
        break;
      }
      const double decrement_sq = -g.dot(step);
      if (decrement_sq <= 2.0 * settings.newton_tol) {
        centered = true;
        break;
      }

      double f0 = 0.0;
      if (!bp.value(z, inv_mu, f0)) {
        broke_down = true;
        break;
      }
      double alpha = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 70; ++ls) {
        double f1 = 0.0;
        const Vector trial = z + alpha * step;
        if (bp.value(trial, inv_mu, f1) && f1 <= f0 + 0.25 * alpha * g.dot(step)) {
          z = trial;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      ++outcome.newton_iterations;
      if (!moved) break;  // stalled; accept current center for this stage
    }
    if (settings.verbose) {
      std::cerr << "[lmi] mu=" << mu << " t=" << z(m) << " centered=" << centered
                << " iters=" << outcome.newton_iterations << "\n";
    }
    if (broke_down || mu <= settings.mu_final) break;
    mu = std::max(settings.mu_final, mu * settings.mu_shrink);
  }

  const double slack = z(m);
  outcome.slack = slack;

  // Undo variable scaling and reconstruct matrices.
  Vector y(m);
  for (int i = 0; i < m; ++i) y(i) = z(i) / d(i);
  outcome.assignment = reconstruct(problem.variables(), offsets, y);
  outcome.verification = verify_assignment(problem, outcome.assignment, settings.verify_tol,
                                           settings.eps_strict);

  const double gap_bound = 2.0 * nu * mu;
  bool at_box = false;
  for (int i = 0; i < m; ++i) at_box = at_box || std::abs(z(i)) > 0.99 * bp.box;

  if (broke_down) {
    outcome.status = SolveStatus::Inconclusive;
    diag << "numerical breakdown before convergence";
  } else if (slack > 0.0 && outcome.verification.all_ok) {
    outcome.status = SolveStatus::Feasible;
    diag << "slack " << slack << " with all margins verified";
  } else if (slack > 0.0) {
    outcome.status = SolveStatus::Inconclusive;
    diag << "positive slack " << slack << " but independent verification failed";
  } else if (slack + gap_bound < 0.0 && !at_box && centered) {
    outcome.status = SolveStatus::Infeasible;
    diag << "maximal feasibility slack " << slack << " + gap bound " << gap_bound
         << " is negative: no assignment within the variable box satisfies all constraints";
  } else if (at_box) {
    outcome.status = SolveStatus::Inconclusive;
    diag << "solution pinned at the variable box (radius " << bp.box << ")";
  } else if (!centered) {
    outcome.status = SolveStatus::Inconclusive;
    diag << "final stage not centered; slack " << slack << " is not a trusted optimum";
  } else {
    outcome.status = SolveStatus::Inconclusive;
    diag << "slack " << slack << " within the optimality gap " << gap_bound;
  }
  outcome.diagnostics = diag.str();
  return outcome;
}

}  // namespace lpvsyn::lmi

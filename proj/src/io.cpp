#include "lpvsyn/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace lpvsyn::io {

json matrix_to_json(const Matrix& m) {
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(i, c));
  }
  j["data"] = std::move(data);
  return j;
}

Matrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw std::invalid_argument("matrix_from_json: data length does not match rows*cols");
  }
  Matrix m(rows, cols);
  std::size_t idx = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = data[idx++];
  }
  return m;
}

json dims_to_json(const DataDims& dims) {
  return json{{"n_x", dims.n_x}, {"n_u", dims.n_u}, {"n_p", dims.n_p}, {"N_d", dims.N_d}};
}

DataDims dims_from_json(const json& j) {
  DataDims d;
  d.n_x = j.at("n_x").get<int>();
  d.n_u = j.at("n_u").get<int>();
  d.n_p = j.at("n_p").get<int>();
  d.N_d = j.at("N_d").get<int>();
  return d;
}

json dataset_to_json(const DataSet& ds) {
  json j;
  j["dims"] = dims_to_json(ds.dims);
  j["phi"] = matrix_to_json(ds.phi);
  j["xplus"] = matrix_to_json(ds.xplus);
  return j;
}

DataSet dataset_from_json(const json& j) {
  DataSet ds;
  ds.dims = dims_from_json(j.at("dims"));
  ds.phi = matrix_from_json(j.at("phi"));
  ds.xplus = matrix_from_json(j.at("xplus"));
  if (ds.phi.rows() != ds.dims.phi_rows() || ds.phi.cols() != ds.dims.N_d ||
      ds.xplus.rows() != ds.dims.n_x || ds.xplus.cols() != ds.dims.N_d) {
    throw std::invalid_argument("dataset_from_json: matrix shapes do not match dims");
  }
  ds.id = matrix_content_id(ds.xplus, matrix_content_id(ds.phi));
  return ds;
}

json noise_record_to_json(const NoiseRecord& record) { return json{{"w", matrix_to_json(record.w)}}; }

NoiseRecord noise_record_from_json(const json& j) {
  return NoiseRecord{matrix_from_json(j.at("w"))};
}

json noise_model_to_json(const NoiseModel& model) {
  return json{{"pi", matrix_to_json(model.pi)}, {"n_x", model.n_x}, {"N_d", model.N_d}};
}

NoiseModel noise_model_from_json(const json& j) {
  return make_noise_model(matrix_from_json(j.at("pi")), j.at("n_x").get<int>(),
                          j.at("N_d").get<int>());
}

json qmi_to_json(const Qmi& qmi) {
  return json{{"psi", matrix_to_json(qmi.psi)}, {"q", qmi.q}, {"r", qmi.r}};
}

json consistency_to_json(const ConsistencyQmi& c) {
  json j;
  j["upsilon"] = qmi_to_json(c.qmi);
  j["dims"] = dims_to_json(c.dims);
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(c.dataset_id));
  j["dataset_id"] = buf;
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(c.noise_model_id));
  j["noise_model_id"] = buf;
  return j;
}

json ball_to_json(const MatrixBall& ball) {
  return json{{"center", matrix_to_json(ball.center)},
              {"d", matrix_to_json(ball.d)},
              {"radius", matrix_to_json(ball.radius)},
              {"q", ball.q},
              {"r", ball.r}};
}

json audit_to_json(const TrajectoryAudit& audit) {
  json j;
  j["values"] = audit.values;
  j["clean"] = audit.clean();
  json violations = json::array();
  for (const auto& v : audit.violations) {
    violations.push_back(json{{"step", v.step}, {"v_before", v.v_before}, {"v_after", v.v_after}});
  }
  j["violations"] = std::move(violations);
  return j;
}

namespace {

json margins_to_json(const std::vector<lmi::ConstraintMargin>& margins) {
  json arr = json::array();
  for (const auto& m : margins) {
    arr.push_back(json{{"name", m.name},
                       {"min_eig", m.min_eig},
                       {"required", m.required},
                       {"scale", m.scale},
                       {"ok", m.ok}});
  }
  return arr;
}

}  // namespace

json synthesis_result_to_json(const SynthesisResult& result) {
  json j;
  j["method"] = to_string(result.method);
  j["status"] = lmi::to_string(result.status);
  j["dims"] = dims_to_json(result.dims);
  j["certified"] = result.certified;
  j["slack"] = result.slack;
  j["diagnostics"] = result.diagnostics;
  if (result.feasible()) {
    j["F"] = matrix_to_json(result.F);
    j["G"] = matrix_to_json(result.G);
    j["alpha"] = result.alpha;
    j["beta"] = result.beta;
    if (result.xi) {
      j["xi"] = matrix_to_json(*result.xi);
      j["epsilon"] = result.epsilon;
    }
  }
  j["solver_margins"] = margins_to_json(result.solver_margins);
  // Timing lives in its own object so deterministic content can be compared
  // with this field stripped.
  j["timing"] = json{{"wall_time_s", result.wall_time_s}};
  return j;
}

SynthesisResult synthesis_result_from_json(const json& j) {
  SynthesisResult r;
  r.method = synthesis_method_from_string(j.at("method").get<std::string>());
  const std::string status = j.at("status").get<std::string>();
  if (status == "feasible") {
    r.status = lmi::SolveStatus::Feasible;
  } else if (status == "infeasible") {
    r.status = lmi::SolveStatus::Infeasible;
  } else {
    r.status = lmi::SolveStatus::Inconclusive;
  }
  r.dims = dims_from_json(j.at("dims"));
  r.certified = j.at("certified").get<bool>();
  r.slack = j.value("slack", 0.0);
  r.diagnostics = j.value("diagnostics", "");
  if (j.contains("F")) {
    r.F = matrix_from_json(j.at("F"));
    r.G = matrix_from_json(j.at("G"));
    r.alpha = j.at("alpha").get<std::vector<double>>();
    r.beta = j.at("beta").get<std::vector<double>>();
    if (j.contains("xi")) {
      r.xi = matrix_from_json(j.at("xi"));
      r.epsilon = j.at("epsilon").get<double>();
    }
  }
  if (j.contains("timing")) r.wall_time_s = j.at("timing").value("wall_time_s", 0.0);
  return r;
}

json certification_to_json(const CertificationReport& report) {
  json j;
  j["pass"] = report.pass;
  j["tolerance"] = report.tol;
  j["n_systems"] = report.n_systems;
  j["n_p_samples"] = report.n_p_samples;
  j["checks"] = report.checks;
  j["min_margin"] = report.min_margin;
  if (report.witness) {
    std::vector<double> p(report.witness->p.data(),
                          report.witness->p.data() + report.witness->p.size());
    j["witness"] = json{{"system_index", report.witness->system_index},
                        {"p", p},
                        {"eigenvalue", report.witness->eigenvalue}};
  }
  return j;
}

json ensemble_summary_to_json(const MonteCarloEnsemble& ensemble) {
  json j;
  j["members"] = ensemble.stats.size();
  j["max_final_norm"] = ensemble.max_final_norm;
  j["total_decrease_violations"] = ensemble.total_decrease_violations;
  j["diverged_count"] = ensemble.diverged_count;
  json arr = json::array();
  for (const auto& s : ensemble.stats) {
    arr.push_back(json{{"plant", s.plant_index},
                       {"ic", s.ic_index},
                       {"final_norm", s.final_norm},
                       {"max_norm", s.max_norm},
                       {"decrease_violations", s.decrease_violations},
                       {"diverged", s.diverged}});
  }
  j["per_member"] = std::move(arr);
  return j;
}

json lmi_problem_summary(const lmi::LmiProblem& problem) {
  json vars = json::array();
  for (const auto& v : problem.variables()) {
    vars.push_back(json{{"name", v.name},
                        {"rows", v.rows},
                        {"cols", v.cols},
                        {"components", v.component_count()}});
  }
  json cons = json::array();
  for (const auto& c : problem.constraints()) {
    cons.push_back(json{{"name", c.name},
                        {"size", c.expr.size()},
                        {"margin", c.margin},
                        {"matrix_terms", c.expr.matrix_terms().size()},
                        {"scalar_terms", c.expr.scalar_terms().size()}});
  }
  return json{{"variables", std::move(vars)},
              {"constraints", std::move(cons)},
              {"components", problem.component_count()}};
}

json solve_outcome_to_json(const lmi::SolveOutcome& outcome) {
  return json{{"status", lmi::to_string(outcome.status)},
              {"slack", outcome.slack},
              {"newton_iterations", outcome.newton_iterations},
              {"diagnostics", outcome.diagnostics},
              {"margins", margins_to_json(outcome.verification.margins)}};
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
  traj.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trajectory_csv: cannot open " + path.string());
  out << std::setprecision(17);

  const int n_x = static_cast<int>(traj.x.rows());
  const int n_u = static_cast<int>(traj.u.rows());
  const int n_p = static_cast<int>(traj.p.rows());
  out << "k";
  for (int i = 1; i <= n_x; ++i) out << ",x" << i;
  for (int i = 1; i <= n_u; ++i) out << ",u" << i;
  for (int i = 1; i <= n_p; ++i) out << ",p" << i;
  for (int i = 1; i <= n_x; ++i) out << ",w" << i;
  out << "\n";

  for (int k = 0; k < traj.steps(); ++k) {
    out << k;
    for (int i = 0; i < n_x; ++i) out << "," << traj.x(i, k);
    for (int i = 0; i < n_u; ++i) out << "," << traj.u(i, k);
    for (int i = 0; i < n_p; ++i) out << "," << traj.p(i, k);
    for (int i = 0; i < n_x; ++i) out << "," << traj.w(i, k);
    out << "\n";
  }
  // Final row: only k and the terminal state.
  out << traj.steps();
  for (int i = 0; i < n_x; ++i) out << "," << traj.x(i, traj.steps());
  for (int i = 0; i < n_u + n_p + n_x; ++i) out << ",";
  out << "\n";
}

void write_json_file(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_json_file: cannot open " + path.string());
  out << j.dump(2) << "\n";
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_json_file: cannot open " + path.string());
  json j;
  in >> j;
  return j;
}

}  // namespace lpvsyn::io

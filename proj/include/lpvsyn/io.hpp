#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "lpvsyn/data.hpp"
#include "lpvsyn/lmi.hpp"
#include "lpvsyn/synthesis.hpp"
#include "lpvsyn/verify.hpp"

namespace lpvsyn::io {

using nlohmann::json;

/// Matrices serialize as {"rows": r, "cols": c, "data": [...]} with row-major
/// data.
json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);

json dims_to_json(const DataDims& dims);
DataDims dims_from_json(const json& j);

json dataset_to_json(const DataSet& ds);
DataSet dataset_from_json(const json& j);

json noise_record_to_json(const NoiseRecord& record);
NoiseRecord noise_record_from_json(const json& j);

json noise_model_to_json(const NoiseModel& model);
NoiseModel noise_model_from_json(const json& j);

json qmi_to_json(const Qmi& qmi);
json consistency_to_json(const ConsistencyQmi& c);
json ball_to_json(const MatrixBall& ball);

json audit_to_json(const TrajectoryAudit& audit);

json synthesis_result_to_json(const SynthesisResult& result);
SynthesisResult synthesis_result_from_json(const json& j);

json certification_to_json(const CertificationReport& report);

json ensemble_summary_to_json(const MonteCarloEnsemble& ensemble);

/// Debug summary of a feasibility problem: variable/constraint sizes and
/// coefficient counts.
json lmi_problem_summary(const lmi::LmiProblem& problem);
json solve_outcome_to_json(const lmi::SolveOutcome& outcome);

/// Header `k,x1..,u1..,p1..,w1..`; one row per step, final row carries only k
/// and the state.
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);

void write_json_file(const json& j, const std::filesystem::path& path);
json read_json_file(const std::filesystem::path& path);

}  // namespace lpvsyn::io

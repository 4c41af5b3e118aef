#pragma once

#include <string>

#include "json.hpp"
#include "trm/edie.hpp"
#include "trm/estimation.hpp"

namespace trm {

/// Shared command context: output directory, parallelism cap, verbosity.
struct RunContext {
    std::string out_dir = ".";
    int threads = 1;
    bool verbose = false;
};

/// Loads a JSON config file (empty object when path is empty) and overlays
/// flag overrides on top. Rejects unknown keys against the command's schema.
nlohmann::json load_config(const std::string& path, const nlohmann::json& overrides);

struct SynthOutcome {
    DensityMatrix density;       ///< normalized data matrix on the requested grid
    std::string density_csv, density_json, reference_csv;
};

/// Godunov ground truth on a fine padded grid, cropped and restricted to the
/// requested data grid. Writes reference_solution.csv, density_matrix.csv
/// and density_matrix.json.
SynthOutcome cmd_synth(const nlohmann::json& config, const RunContext& ctx);

struct EstimateOutcome {
    EstimationResult result;
    nlohmann::json result_json;
    std::string summary_line;
};

/// Fits parameters to a density matrix; writes result.json,
/// fitted_density.csv and fd_points.csv.
EstimateOutcome cmd_estimate(const nlohmann::json& config, const RunContext& ctx);

/// Runs the FP/BP/FD comparison lattice; writes gradcheck.json. Returns the
/// report; callers map report.pass onto the exit code.
GradCheckReport cmd_gradcheck(const nlohmann::json& config, const RunContext& ctx);

struct EdieOutcome {
    EdieMatrices matrices;
    double rho_max = 0.0;  ///< 0 when not estimated
    std::string density_csv, flow_csv, fd_csv, density_json;
};

/// Trajectory file -> Edie density/flow matrices and data fundamental-diagram
/// points; optionally estimates rho_max and writes a normalized density JSON
/// ready for cmd_estimate.
EdieOutcome cmd_edie(const nlohmann::json& config, const RunContext& ctx);

/// Reference synthetic initial profile used by cmd_synth: an off-center bump
/// with superposed decaying oscillations.
double synth_initial_profile(double x);

nlohmann::json gradcheck_report_json(const GradCheckReport& report);
nlohmann::json estimation_result_json(const EstimationResult& result);

}  // namespace trm

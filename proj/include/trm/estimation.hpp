#pragma once

#include <optional>

#include "trm/gradients.hpp"
#include "trm/io.hpp"
#include "trm/logit.hpp"

namespace trm {

struct OptimizerSettings {
    int max_iters = 500;
    double grad_tol = 1e-8;  ///< stop at |g|_inf <= grad_tol * (1 + |cost|)
    std::optional<std::vector<double>> initial_theta;
    /// Apply the raw conjugate direction without a line search (fidelity
    /// experiments only; not robust).
    bool bare_step = false;
    double armijo_c = 1e-4;
    int max_halvings = 50;
};

struct EstimationProblem {
    DensityMatrix data;   ///< normalized densities on the data grid
    double rho_max = 1.0; ///< 1/meter, used for fundamental-diagram output
    SchemeKind kind = SchemeKind::Trm;
    ControlMode mode = ControlMode::Constant;
    SubdivisionSpec spec;
    std::vector<int> observed_cols;      ///< subset of {1..n_x-2}
    std::vector<double> lambdas{0.0};    ///< single value or a candidate grid
    OptimizerSettings optimizer;
    int threads = 1;  ///< parallelism cap for the lambda grid
};

struct EstimationResult {
    std::vector<double> theta_star;
    ControlField c_star;
    SubdivisionSpec spec;
    /// v_m = (dx_hat/dt_hat) * C per stored coefficient [m/s].
    std::vector<double> v_m_star;
    DensityMatrix fitted_density;  ///< restricted rollout at C*, data grid
    double rmse_observed = 0.0;
    double rmse_full = 0.0;
    std::vector<double> cost_trace;  ///< accepted-cost history, non-increasing
    int iterations = 0;
    double lambda_used = 0.0;
    bool line_search_stalled = false;
};

/// Least-squares cost at unconstrained parameters theta (one per stored
/// coefficient of the problem's mode), including lambda * R(C) in varying
/// modes. Row 0 and the boundary columns never enter.
double cost(const EstimationProblem& problem, std::span<const double> theta);

/// Polak-Ribiere (PR+) conjugate gradient with Armijo backtracking.
/// Varying modes warm-start from a constant-mode fit unless initial_theta is
/// given. With several lambda candidates, each is fitted and the one with the
/// smallest rmse_full wins.
EstimationResult minimize(const EstimationProblem& problem);

/// Fundamental-diagram points of the fitted densities: flow_j^n =
/// rho * vbar * (1 - rho/rho_max) with vbar the mean of the two interface
/// speeds of cell j at time n. Raw data density/flow matrices pass through
/// as "data" points when supplied.
std::vector<FdPoint> fundamental_diagram(const EstimationResult& result, double rho_max,
                                         const Mat* data_density = nullptr,
                                         const Mat* data_flow = nullptr);

/// Expanded (n_x+1) x n_t field of speeds v_m = (dx_hat/dt_hat) * C.
Mat speed_field(const ControlField& control, const Grid& grid, const SubdivisionSpec& spec);

}  // namespace trm

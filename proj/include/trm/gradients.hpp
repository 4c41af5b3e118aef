#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "trm/rollout.hpp"

namespace trm {

/// Sparse Jacobians of one step of the map H. wrt-state is tridiagonal, wrt-
/// control has at most two entries per row (the interfaces j and j+1 feeding
/// cell j). Rows outside [lo, hi] are boundary rows and identically zero:
/// those cells are overwritten from data.
struct StepJacobians {
    int n = 0;
    int lo = 1;
    int hi = 0;
    std::vector<double> d_prev;  ///< dH_j/dU_{j-1}
    std::vector<double> d_self;  ///< dH_j/dU_j
    std::vector<double> d_next;  ///< dH_j/dU_{j+1}
    std::vector<double> c_self;  ///< dH_j/dC_j
    std::vector<double> c_next;  ///< dH_j/dC_{j+1}
};

/// Analytic Jacobians of step_interior for TRM and LxF (Godunov raises
/// UnsupportedScheme). `coeffs` are the interface coefficients already
/// resolved at the current step.
StepJacobians step_jacobians(SchemeKind kind, std::span<const double> state,
                             std::span<const double> coeffs, int interior_lo = 1,
                             int interior_hi = -1);

enum class GradMethod { ForwardProp, BackProp };

struct GradientRequest {
    RolloutPlan plan;
    ControlField control;
    std::vector<int> observed_cols;  ///< subset of interior columns; may be empty
    double lambda = 0.0;             ///< forced to 0 in Constant mode
    GradMethod method = GradMethod::BackProp;

    double effective_lambda() const {
        return control.mode() == ControlMode::Constant ? 0.0 : lambda;
    }
};

/// Least-square cost 1/2 sum over rows 1..n_t-1 and observed columns of the
/// restricted rollout residuals, plus lambda * R(C) in varying modes. This is
/// the scalar both gradient routes differentiate.
double lsq_cost(const GradientRequest& req);

/// Gradient of lsq_cost w.r.t. the unconstrained parameters theta
/// (one per stored control coefficient), by forward accumulation of the
/// Jacobian recurrence.
std::vector<double> grad_forward(const GradientRequest& req);

/// Same gradient by back-propagating residuals through transposed step
/// Jacobians; requires retaining the fine trajectory. Default method.
std::vector<double> grad_backward(const GradientRequest& req);

/// Central finite differences of lsq_cost in theta; the independent oracle.
std::vector<double> grad_finite_difference(const GradientRequest& req, double h = 1e-6);

/// Smoothness penalty on the full (n_x+1) x n_t coefficient field:
/// R(C) = 1/2 (sum of squared temporal diffs + sum of squared spatial diffs).
/// Returns the value and the gradient field (graph-Laplacian stencil with
/// truncated boundaries).
std::pair<double, Mat> regularizer(const Mat& c);

// --- gradcheck: FP vs BP vs finite differences across a config lattice ---

using JacobianMutator = std::function<void(StepJacobians&)>;

struct GradCheckConfig {
    std::vector<ControlMode> modes{ControlMode::Constant, ControlMode::TimeVarying,
                                   ControlMode::SpaceVarying, ControlMode::SpaceTimeVarying};
    std::vector<SchemeKind> kinds{SchemeKind::Trm, SchemeKind::LaxFriedrichs};
    std::vector<SubdivisionSpec> subdivisions{{1, 1}, {2, 3}};
    std::vector<std::string> observed_sets{"full", "half", "single"};
    int instances_per_case = 5;
    std::uint64_t seed = 20240531;
    double fd_step = 1e-6;
    double tol_fd = 1e-5;
    double tol_fp_bp = 1e-12;
};

struct GradCheckEntry {
    ControlMode mode;
    SchemeKind kind;
    SubdivisionSpec spec;
    std::string observed;
    int instances = 0;
    double max_rel_fp_fd = 0.0;
    double max_rel_bp_fd = 0.0;
    double max_fp_bp = 0.0;  ///< absolute, scaled by 1 + |g|_inf
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    double max_rel_fp_fd = 0.0;
    double max_rel_bp_fd = 0.0;
    double max_fp_bp = 0.0;
    int total_instances = 0;
    bool pass = false;
    GradCheckConfig config;
};

/// Runs the comparison lattice. `mutate` is a test seam that perturbs every
/// analytic step Jacobian before use; production callers leave it null.
GradCheckReport grad_check(const GradCheckConfig& config, const JacobianMutator* mutate = nullptr);

}  // namespace trm

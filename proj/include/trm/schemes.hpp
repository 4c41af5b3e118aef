#pragma once

#include <functional>
#include <span>
#include <vector>

#include "trm/grid.hpp"

namespace trm {

/// Numerical flux selection. Godunov is simulation-only: the estimation path
/// differentiates the step map, which the Godunov min/max does not admit.
enum class SchemeKind { Trm, Godunov, LaxFriedrichs };

enum class ControlMode { Constant, TimeVarying, SpaceVarying, SpaceTimeVarying };

const char* to_string(SchemeKind kind);
const char* to_string(ControlMode mode);

/// Interface-indexed scaling coefficients C_j^n in (0, 1/2). Interface j sits
/// between cells j-1 and j, so a grid with n_x cells has n_x+1 interfaces.
/// Depending on the mode the stored coefficients broadcast over the tied axes:
///   Constant          1 value
///   TimeVarying       n_t values (one per time step)
///   SpaceVarying      n_x+1 values (one per interface)
///   SpaceTimeVarying  (n_x+1) x n_t values, interface-major
class ControlField {
public:
    ControlField() = default;

    static ControlField constant(double c, int n_t, int n_x);
    static ControlField time_varying(std::vector<double> c, int n_t, int n_x);
    static ControlField space_varying(std::vector<double> c, int n_t, int n_x);
    static ControlField space_time(Mat c, int n_t, int n_x);  ///< c is (n_x+1) x n_t

    /// General constructor from a flat coefficient vector of the mode's size.
    static ControlField from_coeffs(ControlMode mode, std::vector<double> coeffs, int n_t, int n_x);

    ControlMode mode() const { return mode_; }
    int n_t() const { return n_t_; }
    int n_x() const { return n_x_; }

    /// Number of stored (free) coefficients for this mode.
    int param_count() const { return static_cast<int>(coeffs_.size()); }
    const std::vector<double>& coeffs() const { return coeffs_; }

    /// Resolve C_j^n for time step n in [0, n_t-1] and interface j in [0, n_x].
    double at(int n, int j) const;

    /// Expand to the full (n_x+1) x n_t interface-by-time field.
    Mat expanded() const;

    /// Throws CflViolation unless every coefficient lies in (0, 1/2).
    void validate() const;

    static int expected_size(ControlMode mode, int n_t, int n_x);

private:
    ControlMode mode_ = ControlMode::Constant;
    int n_t_ = 0;
    int n_x_ = 0;
    std::vector<double> coeffs_;
};

/// Normalized quadratic flux f(u; v_m) = u * v_m * (1 - u).
double flux(double u, double v_m);

/// Dimensionless two-point numerical flux F~(u,v):
///   Trm            u(1-v)
///   LaxFriedrichs  (u(1-u) + v(1-v))/2
///   Godunov        min/max of w(1-w) over the interval between u and v,
///                  evaluated in closed form from the concave parabola.
/// Inputs outside [0,1] by more than 1e-12 raise DomainError; smaller drift
/// is clamped silently.
double numerical_flux(SchemeKind kind, double u, double v);

/// One explicit step of the interior cells. `coeffs` holds the interface
/// coefficients (state.size()+1 of them); cells in [interior_lo, interior_hi]
/// are written into `next`, everything else is left untouched (the caller
/// injects boundary values). Defaults cover [1, n-2].
void step_interior(SchemeKind kind, std::span<const double> state, std::span<const double> coeffs,
                   std::span<double> next, int interior_lo = 1, int interior_hi = -1);

/// Godunov rollout of an initial profile with copy-ghost boundaries
/// (U_{-1} = U_0, U_{n_x} = U_{n_x-1}). Returns the full trajectory.
DensityMatrix reference_solve(std::span<const double> ic, double v_m, const Grid& fine_grid);

/// Streaming variant: invokes on_row(i, row) for every time row instead of
/// retaining the trajectory.
void reference_solve_stream(std::span<const double> ic, double v_m, const Grid& fine_grid,
                            const std::function<void(int, std::span<const double>)>& on_row);

/// Drop columns outside [first_col, first_col+count); used to discard the
/// padding cells around the region of interest before restriction.
DensityMatrix crop_space_cells(const DensityMatrix& m, int first_col, int count);

}  // namespace trm

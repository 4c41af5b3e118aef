#pragma once

#include <vector>

#include "trm/matrix.hpp"

namespace trm {

/// Uniform space-time grid. Rows carry time stamps t_i = t0 + i*dt, columns
/// carry cell centers x_j = x0 + j*dx.
struct Grid {
    int n_t = 0;       ///< number of time steps (rows)
    int n_x = 0;       ///< number of space cells (columns)
    double dt = 0.0;   ///< seconds per step
    double dx = 0.0;   ///< meters per cell
    double t0 = 0.0;   ///< time origin [s]
    double x0 = 0.0;   ///< center of cell 0 [m]

    Grid() = default;
    Grid(int n_t_, int n_x_, double dt_, double dx_, double t0_ = 0.0, double x0_ = 0.0);

    double time(int i) const { return t0 + i * dt; }
    double center(int j) const { return x0 + j * dx; }

    bool operator==(const Grid&) const = default;
};

/// Known road constants: maximal density and a reference speed used only to
/// size CFL-compatible subdivisions.
struct RoadParams {
    double rho_max = 1.0;  ///< 1/meter
    double v_ref = 1.0;    ///< meters/second

    RoadParams() = default;
    RoadParams(double rho_max_, double v_ref_);
};

/// Multilevel refinement linking the data grid to the scheme grid: each time
/// step splits into p_t substeps, each cell into p_x subcells.
struct SubdivisionSpec {
    int p_t = 1;
    int p_x = 1;

    SubdivisionSpec() = default;
    SubdivisionSpec(int p_t_, int p_x_);

    int fine_rows(int n_t) const { return p_t * (n_t - 1) + 1; }
    int fine_cols(int n_x) const { return p_x * n_x; }
    Grid fine_grid(const Grid& coarse) const;
};

/// Dimensionless normalized cell-average densities U_j^i on a uniform grid.
/// Entries lie in [0,1]; row 0 is the initial time.
struct DensityMatrix {
    Grid grid;
    Mat values;

    DensityMatrix() = default;
    DensityMatrix(Grid grid_, Mat values_);
};

struct NormalizeResult {
    Mat values;           ///< entries divided by rho_max, clamped into [0,1]
    int clamped = 0;      ///< count of raw entries that exceeded rho_max
    bool all_zero = false;
};

/// Divide raw densities [veh/m] by rho_max. Entries above rho_max are clamped
/// to 1 and tallied; an all-zero input is flagged (estimation would be
/// degenerate) but not rejected.
NormalizeResult normalize(const Mat& raw, double rho_max);

/// Coarse entry (i,j) = mean of fine entries (i*p_t, j*p_x .. j*p_x+p_x-1).
/// Time rows are sampled at the coarse knots, space cells are averaged.
Mat restrict_mean(const Mat& fine, const SubdivisionSpec& spec);

/// Inverse-direction embedding used by tests and initial conditions: replicate
/// each coarse value across its p_x subcells and interpolate linearly in time
/// between coarse knots. restrict_mean(prolong_linear(m)) == m exactly.
Mat prolong_linear(const Mat& coarse, const SubdivisionSpec& spec);

/// Largest admissible dt/dx for the explicit schemes: 1/(2*v_max).
double cfl_max_ratio(double v_max);

/// Smallest integer P_t with (dt/dx)*(p_x/P_t) <= 1/(2*v_max).
int minimal_p_t(const Grid& grid, int p_x, double v_max);

}  // namespace trm

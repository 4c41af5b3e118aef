#pragma once

#include "trm/schemes.hpp"

namespace trm {

/// How to iterate the step map against a data matrix: scheme, subdivision and
/// the matrix supplying initial and boundary values.
struct RolloutPlan {
    DensityMatrix data;  ///< boundary source on the data grid
    SubdivisionSpec spec;
    SchemeKind kind = SchemeKind::Trm;

    const Grid& data_grid() const { return data.grid; }
    Grid fine_grid() const { return spec.fine_grid(data.grid); }
    /// Fine cells driven by the step map: [p_x, (n_x-1)*p_x - 1].
    int interior_lo() const { return spec.p_x; }
    int interior_hi() const { return (data.grid.n_x - 1) * spec.p_x - 1; }
};

/// Coarse control coefficients interpolated onto the scheme grid. Fine
/// interface q + j*p_x at fine time l + n*p_t blends C_j^n, C_{j+1}^n,
/// C_j^{n+1}, C_{j+1}^{n+1} bilinearly.
class FineControl {
public:
    FineControl(const ControlField& coarse, const SubdivisionSpec& spec);

    /// Coefficient for fine interface k at fine time step m.
    double at(int m, int k) const;

    /// Anchor and fractional weights of the bilinear blend at (m, k):
    /// coarse indices (j, n) with weight (1-wx)(1-wt), (j+1, n) with
    /// wx*(1-wt), etc. When wx == 0 the j+1 column carries no weight (and may
    /// be out of range for the last interface).
    struct Blend {
        int j = 0;
        int n = 0;
        double wx = 0.0;
        double wt = 0.0;
    };
    Blend blend(int m, int k) const;

    const ControlField& coarse() const { return coarse_; }
    const SubdivisionSpec& spec() const { return spec_; }

private:
    ControlField coarse_;
    SubdivisionSpec spec_;
};

/// Iterate the step map on the subdivided grid. Row 0 replicates data row 0
/// per subcell; all subcells of boundary cells follow the linear-in-time
/// interpolation of the data boundary columns; the interior evolves by
/// step_interior with the interpolated control. Returns the full fine matrix.
Mat run(const RolloutPlan& plan, const ControlField& control);

/// Streaming rollout that returns only restrict_mean(fine): enough for cost
/// and RMSE evaluation, keeps two fine rows in memory.
Mat run_restricted(const RolloutPlan& plan, const ControlField& control);

/// Root-mean-square of restrict_mean(fine) - data over rows 1..n_t-1 and the
/// observed columns (subset of the interior columns 1..n_x-2).
double rmse(const Mat& fine, const DensityMatrix& data, const SubdivisionSpec& spec,
            const std::vector<int>& observed_cols);

/// All interior columns {1, ..., n_x-2}.
std::vector<int> all_interior_cols(int n_x);

}  // namespace trm

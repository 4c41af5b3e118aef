#include "trm/rollout.hpp"

#include <algorithm>
#include <cmath>

namespace trm {

FineControl::FineControl(const ControlField& coarse, const SubdivisionSpec& spec)
    : coarse_(coarse), spec_(spec) {}

FineControl::Blend FineControl::blend(int m, int k) const {
    Blend b;
    int n = m / spec_.p_t;
    // the last coarse interval also covers its right knot
    if (n > coarse_.n_t() - 2) n = coarse_.n_t() - 2;
    const int l = m - n * spec_.p_t;
    int j = k / spec_.p_x;
    const int q = k - j * spec_.p_x;
    b.j = j;
    b.n = n;
    b.wx = static_cast<double>(q) / spec_.p_x;
    b.wt = static_cast<double>(l) / spec_.p_t;
    return b;
}

double FineControl::at(int m, int k) const {
    const Blend b = blend(m, k);
    const double c00 = coarse_.at(b.n, b.j);
    const double c01 = coarse_.at(b.n + 1, b.j);
    if (b.wx == 0.0) return (1.0 - b.wt) * c00 + b.wt * c01;
    const double c10 = coarse_.at(b.n, b.j + 1);
    const double c11 = coarse_.at(b.n + 1, b.j + 1);
    return (1.0 - b.wt) * ((1.0 - b.wx) * c00 + b.wx * c10) +
           b.wt * ((1.0 - b.wx) * c01 + b.wx * c11);
}

namespace {

void check_plan(const RolloutPlan& plan, const ControlField& control) {
    const Grid& g = plan.data_grid();
    if (control.n_t() != g.n_t || control.n_x() != g.n_x)
        throw ShapeMismatch("rollout: control field defined on a different grid");
    control.validate();  // convex interpolation keeps fine coefficients in (0, 1/2)
}

/// Writes data-driven values of fine row m: every subcell of cell 0 and of
/// cell n_x-1 gets the time interpolation between the bracketing data rows.
void inject_boundary(std::span<double> row, const DensityMatrix& data, const SubdivisionSpec& spec,
                     int m) {
    const int n_t = data.grid.n_t;
    const int n_x = data.grid.n_x;
    int n = m / spec.p_t;
    if (n > n_t - 2) n = n_t - 2;
    const double w = static_cast<double>(m - n * spec.p_t) / spec.p_t;
    const double left = (1.0 - w) * data.values(n, 0) + w * data.values(n + 1, 0);
    const double right = (1.0 - w) * data.values(n, n_x - 1) + w * data.values(n + 1, n_x - 1);
    for (int k = 0; k < spec.p_x; ++k) {
        row[k] = left;
        row[(n_x - 1) * spec.p_x + k] = right;
    }
}

template <typename RowSink>
void run_impl(const RolloutPlan& plan, const ControlField& control, RowSink&& sink) {
    check_plan(plan, control);
    const Grid& g = plan.data_grid();
    const SubdivisionSpec& spec = plan.spec;
    const int fn_t = spec.fine_rows(g.n_t);
    const int fn_x = spec.fine_cols(g.n_x);
    const FineControl fine_ctrl(control, spec);

    std::vector<double> cur(fn_x), nxt(fn_x), coeffs(fn_x + 1);
    for (int j = 0; j < g.n_x; ++j)
        for (int k = 0; k < spec.p_x; ++k) cur[j * spec.p_x + k] = plan.data.values(0, j);
    sink(0, std::span<const double>(cur));

    const int lo = plan.interior_lo();
    const int hi = plan.interior_hi();
    for (int m = 1; m < fn_t; ++m) {
        for (int k = lo; k <= hi + 1; ++k) coeffs[k] = fine_ctrl.at(m - 1, k);
        step_interior(plan.kind, cur, coeffs, nxt, lo, hi);
        inject_boundary(nxt, plan.data, spec, m);
        cur.swap(nxt);
        sink(m, std::span<const double>(cur));
    }
}

}  // namespace

Mat run(const RolloutPlan& plan, const ControlField& control) {
    const int fn_t = plan.spec.fine_rows(plan.data_grid().n_t);
    const int fn_x = plan.spec.fine_cols(plan.data_grid().n_x);
    Mat fine(fn_t, fn_x);
    run_impl(plan, control, [&](int m, std::span<const double> row) {
        std::copy(row.begin(), row.end(), fine.row(m).begin());
    });
    return fine;
}

Mat run_restricted(const RolloutPlan& plan, const ControlField& control) {
    const Grid& g = plan.data_grid();
    Mat coarse(g.n_t, g.n_x);
    const int p_t = plan.spec.p_t;
    const int p_x = plan.spec.p_x;
    run_impl(plan, control, [&](int m, std::span<const double> row) {
        if (m % p_t != 0) return;
        const int i = m / p_t;
        for (int j = 0; j < g.n_x; ++j) {
            double sum = 0.0;
            for (int k = 0; k < p_x; ++k) sum += row[j * p_x + k];
            coarse(i, j) = sum / p_x;
        }
    });
    return coarse;
}

std::vector<int> all_interior_cols(int n_x) {
    std::vector<int> cols(static_cast<size_t>(n_x - 2));
    for (int j = 1; j <= n_x - 2; ++j) cols[j - 1] = j;
    return cols;
}

double rmse(const Mat& fine, const DensityMatrix& data, const SubdivisionSpec& spec,
            const std::vector<int>& observed_cols) {
    if (observed_cols.empty()) throw EmptyObservationSet("rmse: no observed columns");
    for (int j : observed_cols)
        if (j < 1 || j > data.grid.n_x - 2)
            throw InvalidArgument("rmse: observed column outside interior");
    const Mat coarse = restrict_mean(fine, spec);
    if (coarse.rows() != data.grid.n_t || coarse.cols() != data.grid.n_x)
        throw ShapeMismatch("rmse: restricted shape does not match data");
    double sum = 0.0;
    size_t count = 0;
    for (int i = 1; i < data.grid.n_t; ++i) {
        for (int j : observed_cols) {
            const double r = coarse(i, j) - data.values(i, j);
            sum += r * r;
            ++count;
        }
    }
    return std::sqrt(sum / count);
}

}  // namespace trm

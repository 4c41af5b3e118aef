#include "trm/grid.hpp"

#include <cmath>
#include <string>

namespace trm {

Grid::Grid(int n_t_, int n_x_, double dt_, double dx_, double t0_, double x0_)
    : n_t(n_t_), n_x(n_x_), dt(dt_), dx(dx_), t0(t0_), x0(x0_) {
    if (n_t < 2) throw InvalidArgument("Grid: n_t must be >= 2");
    if (n_x < 3) throw InvalidArgument("Grid: n_x must be >= 3 (one interior cell)");
    if (!(dt > 0.0)) throw InvalidArgument("Grid: dt must be > 0");
    if (!(dx > 0.0)) throw InvalidArgument("Grid: dx must be > 0");
}

RoadParams::RoadParams(double rho_max_, double v_ref_) : rho_max(rho_max_), v_ref(v_ref_) {
    if (!(rho_max > 0.0)) throw InvalidArgument("RoadParams: rho_max must be > 0");
    if (!(v_ref > 0.0)) throw InvalidArgument("RoadParams: v_ref must be > 0");
}

SubdivisionSpec::SubdivisionSpec(int p_t_, int p_x_) : p_t(p_t_), p_x(p_x_) {
    if (p_t < 1 || p_x < 1) throw InvalidArgument("SubdivisionSpec: p_t and p_x must be >= 1");
}

Grid SubdivisionSpec::fine_grid(const Grid& coarse) const {
    Grid g;
    g.n_t = fine_rows(coarse.n_t);
    g.n_x = fine_cols(coarse.n_x);
    g.dt = coarse.dt / p_t;
    g.dx = coarse.dx / p_x;
    g.t0 = coarse.t0;
    // coarse cell j spans [x_j - dx/2, x_j + dx/2]; the first subcell center
    // sits half a fine cell in from the left edge.
    g.x0 = coarse.x0 - coarse.dx / 2.0 + g.dx / 2.0;
    if (g.n_t < 2) throw InvalidArgument("fine_grid: n_t must be >= 2");
    return g;
}

DensityMatrix::DensityMatrix(Grid grid_, Mat values_) : grid(grid_), values(std::move(values_)) {
    if (values.rows() != grid.n_t || values.cols() != grid.n_x)
        throw ShapeMismatch("DensityMatrix: values shape does not match grid");
    constexpr double kDrift = 1e-12;
    for (double& v : values.data()) {
        if (v < -kDrift || v > 1.0 + kDrift)
            throw DomainError("DensityMatrix: entry outside [0,1]: " + std::to_string(v));
        if (v < 0.0) v = 0.0;
        if (v > 1.0) v = 1.0;
    }
}

NormalizeResult normalize(const Mat& raw, double rho_max) {
    if (!(rho_max > 0.0)) throw InvalidArgument("normalize: rho_max must be > 0");
    NormalizeResult out;
    out.values = raw;
    bool any_positive = false;
    for (double& v : out.values.data()) {
        if (v < 0.0) throw InvalidArgument("normalize: raw density must be >= 0");
        if (v > 0.0) any_positive = true;
        v /= rho_max;
        if (v > 1.0) {
            v = 1.0;
            ++out.clamped;
        }
    }
    out.all_zero = !any_positive;
    return out;
}

Mat restrict_mean(const Mat& fine, const SubdivisionSpec& spec) {
    if (fine.cols() % spec.p_x != 0)
        throw ShapeMismatch("restrict_mean: columns not divisible by p_x");
    if ((fine.rows() - 1) % spec.p_t != 0)
        throw ShapeMismatch("restrict_mean: rows-1 not divisible by p_t");
    const int n_t = (fine.rows() - 1) / spec.p_t + 1;
    const int n_x = fine.cols() / spec.p_x;
    Mat coarse(n_t, n_x);
    for (int i = 0; i < n_t; ++i) {
        const auto src = fine.row(i * spec.p_t);
        for (int j = 0; j < n_x; ++j) {
            double sum = 0.0;
            for (int k = 0; k < spec.p_x; ++k) sum += src[j * spec.p_x + k];
            coarse(i, j) = sum / spec.p_x;
        }
    }
    return coarse;
}

Mat prolong_linear(const Mat& coarse, const SubdivisionSpec& spec) {
    const int fn_t = spec.fine_rows(coarse.rows());
    const int fn_x = spec.fine_cols(coarse.cols());
    Mat fine(fn_t, fn_x);
    for (int m = 0; m < fn_t; ++m) {
        const int n = std::min(m / spec.p_t, coarse.rows() - 2);
        const int l = m - n * spec.p_t;
        const double w = static_cast<double>(l) / spec.p_t;
        for (int j = 0; j < coarse.cols(); ++j) {
            const double v = (1.0 - w) * coarse(n, j) + w * coarse(n + 1, j);
            for (int k = 0; k < spec.p_x; ++k) fine(m, j * spec.p_x + k) = v;
        }
    }
    return fine;
}

double cfl_max_ratio(double v_max) {
    if (!(v_max > 0.0)) throw InvalidArgument("cfl_max_ratio: v_max must be > 0");
    return 1.0 / (2.0 * v_max);
}

int minimal_p_t(const Grid& grid, int p_x, double v_max) {
    if (p_x < 1) throw InvalidArgument("minimal_p_t: p_x must be >= 1");
    const double bound = cfl_max_ratio(v_max);
    // smallest P_t with (dt/dx)*(p_x/P_t) <= bound
    const double exact = (grid.dt / grid.dx) * p_x / bound;
    int p_t = static_cast<int>(std::ceil(exact));
    if (p_t < 1) p_t = 1;
    // guard against ceil landing one too high on exact integer ratios
    while (p_t > 1 && (grid.dt / grid.dx) * p_x / (p_t - 1) <= bound) --p_t;
    return p_t;
}

}  // namespace trm

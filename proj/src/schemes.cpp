#include "trm/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace trm {

namespace {

constexpr double kDomainTol = 1e-12;

double clamp_unit(double u) {
    if (u < 0.0) {
        if (u < -kDomainTol) throw DomainError("density outside [0,1]: " + std::to_string(u));
        return 0.0;
    }
    if (u > 1.0) {
        if (u > 1.0 + kDomainTol) throw DomainError("density outside [0,1]: " + std::to_string(u));
        return 1.0;
    }
    return u;
}

double parabola(double w) { return w * (1.0 - w); }

}  // namespace

const char* to_string(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::Trm: return "trm";
        case SchemeKind::Godunov: return "godunov";
        case SchemeKind::LaxFriedrichs: return "lxf";
    }
    return "?";
}

const char* to_string(ControlMode mode) {
    switch (mode) {
        case ControlMode::Constant: return "constant";
        case ControlMode::TimeVarying: return "time";
        case ControlMode::SpaceVarying: return "space";
        case ControlMode::SpaceTimeVarying: return "spacetime";
    }
    return "?";
}

int ControlField::expected_size(ControlMode mode, int n_t, int n_x) {
    switch (mode) {
        case ControlMode::Constant: return 1;
        case ControlMode::TimeVarying: return n_t;
        case ControlMode::SpaceVarying: return n_x + 1;
        case ControlMode::SpaceTimeVarying: return (n_x + 1) * n_t;
    }
    return 0;
}

ControlField ControlField::from_coeffs(ControlMode mode, std::vector<double> coeffs, int n_t, int n_x) {
    if (n_t < 2 || n_x < 3) throw InvalidArgument("ControlField: grid too small");
    if (static_cast<int>(coeffs.size()) != expected_size(mode, n_t, n_x))
        throw ShapeMismatch("ControlField: coefficient count does not match mode");
    ControlField f;
    f.mode_ = mode;
    f.n_t_ = n_t;
    f.n_x_ = n_x;
    f.coeffs_ = std::move(coeffs);
    return f;
}

ControlField ControlField::constant(double c, int n_t, int n_x) {
    return from_coeffs(ControlMode::Constant, {c}, n_t, n_x);
}

ControlField ControlField::time_varying(std::vector<double> c, int n_t, int n_x) {
    return from_coeffs(ControlMode::TimeVarying, std::move(c), n_t, n_x);
}

ControlField ControlField::space_varying(std::vector<double> c, int n_t, int n_x) {
    return from_coeffs(ControlMode::SpaceVarying, std::move(c), n_t, n_x);
}

ControlField ControlField::space_time(Mat c, int n_t, int n_x) {
    if (c.rows() != n_x + 1 || c.cols() != n_t)
        throw ShapeMismatch("ControlField: spacetime field must be (n_x+1) x n_t");
    return from_coeffs(ControlMode::SpaceTimeVarying, std::move(c.data()), n_t, n_x);
}

double ControlField::at(int n, int j) const {
    switch (mode_) {
        case ControlMode::Constant: return coeffs_[0];
        case ControlMode::TimeVarying: return coeffs_[n];
        case ControlMode::SpaceVarying: return coeffs_[j];
        case ControlMode::SpaceTimeVarying: return coeffs_[static_cast<size_t>(j) * n_t_ + n];
    }
    return 0.0;
}

Mat ControlField::expanded() const {
    Mat out(n_x_ + 1, n_t_);
    for (int j = 0; j <= n_x_; ++j)
        for (int n = 0; n < n_t_; ++n) out(j, n) = at(n, j);
    return out;
}

void ControlField::validate() const {
    for (double c : coeffs_) {
        if (!(c > 0.0 && c < 0.5))
            throw CflViolation("coefficient outside (0, 1/2): " + std::to_string(c));
    }
}

double flux(double u, double v_m) { return u * v_m * (1.0 - u); }

double numerical_flux(SchemeKind kind, double u, double v) {
    u = clamp_unit(u);
    v = clamp_unit(v);
    switch (kind) {
        case SchemeKind::Trm:
            return u * (1.0 - v);
        case SchemeKind::LaxFriedrichs:
            return (parabola(u) + parabola(v)) / 2.0;
        case SchemeKind::Godunov:
            if (u <= v) return std::min(parabola(u), parabola(v));
            // max over [v,u] of the concave parabola
            if (v <= 0.5 && 0.5 <= u) return 0.25;
            return std::max(parabola(u), parabola(v));
    }
    return 0.0;
}

void step_interior(SchemeKind kind, std::span<const double> state, std::span<const double> coeffs,
                   std::span<double> next, int interior_lo, int interior_hi) {
    const int n = static_cast<int>(state.size());
    if (n < 3) throw InvalidArgument("step_interior: need at least 3 cells");
    if (static_cast<int>(coeffs.size()) != n + 1)
        throw ShapeMismatch("step_interior: need one coefficient per interface");
    if (static_cast<int>(next.size()) != n) throw ShapeMismatch("step_interior: output size mismatch");
    if (interior_hi < 0) interior_hi = n - 2;
    if (interior_lo < 1 || interior_hi > n - 2 || interior_lo > interior_hi)
        throw InvalidArgument("step_interior: bad interior range");
    for (int j = interior_lo; j <= interior_hi + 1; ++j) {
        const double c = coeffs[j];
        if (!(c > 0.0 && c < 0.5))
            throw CflViolation("coefficient outside (0, 1/2): " + std::to_string(c));
    }
    for (int j = interior_lo; j <= interior_hi; ++j) {
        const double in = coeffs[j] * numerical_flux(kind, state[j - 1], state[j]);
        const double out = coeffs[j + 1] * numerical_flux(kind, state[j], state[j + 1]);
        const double base = (kind == SchemeKind::LaxFriedrichs)
                                ? (state[j - 1] + state[j + 1]) / 2.0
                                : state[j];
        next[j] = base + in - out;
    }
}

void reference_solve_stream(std::span<const double> ic, double v_m, const Grid& fine_grid,
                            const std::function<void(int, std::span<const double>)>& on_row) {
    const int n = fine_grid.n_x;
    if (static_cast<int>(ic.size()) != n)
        throw ShapeMismatch("reference_solve: initial profile does not match grid");
    const double c = (fine_grid.dt / fine_grid.dx) * v_m;
    if (!(c > 0.0 && c < 0.5))
        throw CflViolation("reference_solve: dt/dx*v_m = " + std::to_string(c) +
                           " outside (0, 1/2)");
    std::vector<double> cur(ic.begin(), ic.end());
    std::vector<double> nxt(n);
    on_row(0, cur);
    for (int i = 1; i < fine_grid.n_t; ++i) {
        for (int j = 0; j < n; ++j) {
            const double ul = (j == 0) ? cur[0] : cur[j - 1];          // copy ghost
            const double ur = (j == n - 1) ? cur[n - 1] : cur[j + 1];  // copy ghost
            nxt[j] = cur[j] + c * (numerical_flux(SchemeKind::Godunov, ul, cur[j]) -
                                   numerical_flux(SchemeKind::Godunov, cur[j], ur));
        }
        cur.swap(nxt);
        on_row(i, cur);
    }
}

DensityMatrix reference_solve(std::span<const double> ic, double v_m, const Grid& fine_grid) {
    Mat traj(fine_grid.n_t, fine_grid.n_x);
    reference_solve_stream(ic, v_m, fine_grid, [&](int i, std::span<const double> row) {
        std::copy(row.begin(), row.end(), traj.row(i).begin());
    });
    return DensityMatrix(fine_grid, std::move(traj));
}

DensityMatrix crop_space_cells(const DensityMatrix& m, int first_col, int count) {
    if (first_col < 0 || count < 3 || first_col + count > m.grid.n_x)
        throw InvalidArgument("crop_space_cells: range outside matrix");
    Grid g = m.grid;
    g.n_x = count;
    g.x0 = m.grid.center(first_col);
    Mat values(m.grid.n_t, count);
    for (int i = 0; i < m.grid.n_t; ++i)
        for (int j = 0; j < count; ++j) values(i, j) = m.values(i, first_col + j);
    return DensityMatrix(g, std::move(values));
}

}  // namespace trm

#include "trm/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "trm/logit.hpp"

namespace trm {

StepJacobians step_jacobians(SchemeKind kind, std::span<const double> state,
                             std::span<const double> coeffs, int interior_lo, int interior_hi) {
    const int n = static_cast<int>(state.size());
    if (n < 3) throw InvalidArgument("step_jacobians: need at least 3 cells");
    if (static_cast<int>(coeffs.size()) != n + 1)
        throw ShapeMismatch("step_jacobians: need one coefficient per interface");
    if (interior_hi < 0) interior_hi = n - 2;
    if (interior_lo < 1 || interior_hi > n - 2 || interior_lo > interior_hi)
        throw InvalidArgument("step_jacobians: bad interior range");
    if (kind == SchemeKind::Godunov)
        throw UnsupportedScheme("step_jacobians: Godunov flux is not differentiable");

    StepJacobians jac;
    jac.n = n;
    jac.lo = interior_lo;
    jac.hi = interior_hi;
    jac.d_prev.assign(n, 0.0);
    jac.d_self.assign(n, 0.0);
    jac.d_next.assign(n, 0.0);
    jac.c_self.assign(n, 0.0);
    jac.c_next.assign(n, 0.0);

    for (int j = interior_lo; j <= interior_hi; ++j) {
        const double ul = state[j - 1];
        const double uc = state[j];
        const double ur = state[j + 1];
        const double cl = coeffs[j];
        const double cr = coeffs[j + 1];
        if (kind == SchemeKind::Trm) {
            jac.d_prev[j] = cl * (1.0 - uc);
            jac.d_self[j] = 1.0 - cl * ul - cr * (1.0 - ur);
            jac.d_next[j] = cr * uc;
            jac.c_self[j] = ul * (1.0 - uc);
            jac.c_next[j] = -uc * (1.0 - ur);
        } else {  // LaxFriedrichs
            jac.d_prev[j] = 0.5 + cl * (1.0 - 2.0 * ul) / 2.0;
            jac.d_self[j] = (cl - cr) * (1.0 - 2.0 * uc) / 2.0;
            jac.d_next[j] = 0.5 - cr * (1.0 - 2.0 * ur) / 2.0;
            jac.c_self[j] = (ul * (1.0 - ul) + uc * (1.0 - uc)) / 2.0;
            jac.c_next[j] = -(uc * (1.0 - uc) + ur * (1.0 - ur)) / 2.0;
        }
    }
    return jac;
}

std::pair<double, Mat> regularizer(const Mat& c) {
    double value = 0.0;
    Mat grad(c.rows(), c.cols());
    for (int j = 0; j < c.rows(); ++j) {
        for (int i = 0; i + 1 < c.cols(); ++i) {
            const double d = c(j, i) - c(j, i + 1);
            value += 0.5 * d * d;
            grad(j, i) += d;
            grad(j, i + 1) -= d;
        }
    }
    for (int i = 0; i < c.cols(); ++i) {
        for (int j = 0; j + 1 < c.rows(); ++j) {
            const double d = c(j, i) - c(j + 1, i);
            value += 0.5 * d * d;
            grad(j, i) += d;
            grad(j + 1, i) -= d;
        }
    }
    return {value, std::move(grad)};
}

namespace {

void check_request(const GradientRequest& req) {
    const Grid& g = req.plan.data_grid();
    if (req.control.n_t() != g.n_t || req.control.n_x() != g.n_x)
        throw ShapeMismatch("gradient: control field defined on a different grid");
    if (req.plan.kind == SchemeKind::Godunov)
        throw UnsupportedScheme("gradient: Godunov flux is not differentiable");
    for (int j : req.observed_cols)
        if (j < 1 || j > g.n_x - 2) throw InvalidArgument("gradient: observed column outside interior");
    if (req.lambda < 0.0) throw InvalidArgument("gradient: lambda must be >= 0");
    req.control.validate();
}

/// Collapses the full interface-by-time gradient onto the stored coefficients
/// of the parametrization (sum over the tied axes).
std::vector<double> tie_sum(const Mat& g_full, ControlMode mode, int n_t, int n_x) {
    switch (mode) {
        case ControlMode::Constant: {
            double s = 0.0;
            for (double v : g_full.data()) s += v;
            return {s};
        }
        case ControlMode::TimeVarying: {
            std::vector<double> g(n_t, 0.0);
            for (int j = 0; j <= n_x; ++j)
                for (int n = 0; n < n_t; ++n) g[n] += g_full(j, n);
            return g;
        }
        case ControlMode::SpaceVarying: {
            std::vector<double> g(n_x + 1, 0.0);
            for (int j = 0; j <= n_x; ++j)
                for (int n = 0; n < n_t; ++n) g[j] += g_full(j, n);
            return g;
        }
        case ControlMode::SpaceTimeVarying:
            return g_full.data();
    }
    return {};
}

struct GradWorkspace {
    const GradientRequest& req;
    const Grid& grid;
    SubdivisionSpec spec;
    int fn_t, fn_x, lo, hi;
    FineControl fine_ctrl;
    Mat g_full;  ///< gradient w.r.t. the full coarse interface-by-time field

    explicit GradWorkspace(const GradientRequest& r)
        : req(r),
          grid(r.plan.data_grid()),
          spec(r.plan.spec),
          fn_t(spec.fine_rows(grid.n_t)),
          fn_x(spec.fine_cols(grid.n_x)),
          lo(r.plan.interior_lo()),
          hi(r.plan.interior_hi()),
          fine_ctrl(r.control, spec),
          g_full(grid.n_x + 1, grid.n_t) {}

    void fill_coeffs(int m, std::vector<double>& coeffs) const {
        for (int k = lo; k <= hi + 1; ++k) coeffs[k] = fine_ctrl.at(m, k);
    }

    /// M~^T (M~ u - U^i): residuals of coarse row i spread evenly over the
    /// observed subcells; zero elsewhere.
    void inject_residual(int i, std::span<const double> fine_row, std::vector<double>& out) const {
        for (int j : req.observed_cols) {
            double mean = 0.0;
            for (int k = 0; k < spec.p_x; ++k) mean += fine_row[j * spec.p_x + k];
            mean /= spec.p_x;
            const double r = (mean - req.plan.data.values(i, j)) / spec.p_x;
            for (int k = 0; k < spec.p_x; ++k) out[j * spec.p_x + k] += r;
        }
    }

    /// Scatters a sensitivity at fine interface k, fine time m into the
    /// coarse field through the bilinear blend weights.
    void scatter(int m, int k, double value) {
        if (value == 0.0) return;
        const FineControl::Blend b = fine_ctrl.blend(m, k);
        g_full(b.j, b.n) += value * (1.0 - b.wx) * (1.0 - b.wt);
        g_full(b.j, b.n + 1) += value * (1.0 - b.wx) * b.wt;
        if (b.wx != 0.0) {
            g_full(b.j + 1, b.n) += value * b.wx * (1.0 - b.wt);
            g_full(b.j + 1, b.n + 1) += value * b.wx * b.wt;
        }
    }

    /// Adds Jac_{H^m}(C)^T delta to the coarse-field gradient.
    void accumulate_control(const StepJacobians& jac, int m, std::span<const double> delta) {
        for (int j = lo; j <= hi; ++j) {
            scatter(m, j, jac.c_self[j] * delta[j]);
            scatter(m, j + 1, jac.c_next[j] * delta[j]);
        }
    }

    /// Finishes: regularization term, tie-summing, chain through dC/dtheta.
    std::vector<double> finish() {
        const double lambda = req.effective_lambda();
        if (lambda > 0.0) {
            auto [value, reg_grad] = regularizer(req.control.expanded());
            (void)value;
            for (size_t idx = 0; idx < reg_grad.data().size(); ++idx)
                g_full.data()[idx] += lambda * reg_grad.data()[idx];
        }
        std::vector<double> g = tie_sum(g_full, req.control.mode(), grid.n_t, grid.n_x);
        const auto& c = req.control.coeffs();
        for (size_t p = 0; p < g.size(); ++p) g[p] *= logit_chain_from_c(c[p]);
        return g;
    }
};

std::vector<double> grad_backward_impl(const GradientRequest& req, const JacobianMutator* mutate) {
    check_request(req);
    GradWorkspace ws(req);
    const Mat fine = run(req.plan, req.control);
    const int fn_t = ws.fn_t;
    const int fn_x = ws.fn_x;

    std::vector<double> coeffs(fn_x + 1, 0.0);
    std::vector<double> delta(fn_x, 0.0), next_delta(fn_x);

    auto jac_at = [&](int m) {
        ws.fill_coeffs(m, coeffs);
        StepJacobians jac = step_jacobians(req.plan.kind, fine.row(m), coeffs, ws.lo, ws.hi);
        if (mutate && *mutate) (*mutate)(jac);
        return jac;
    };

    ws.inject_residual(ws.grid.n_t - 1, fine.row(fn_t - 1), delta);
    {
        const StepJacobians jac = jac_at(fn_t - 2);
        ws.accumulate_control(jac, fn_t - 2, delta);
    }
    for (int l = fn_t - 2; l >= 1; --l) {
        const StepJacobians jac = jac_at(l);
        for (int k = 0; k < fn_x; ++k) {
            double s = 0.0;
            if (k >= ws.lo && k <= ws.hi) s += jac.d_self[k] * delta[k];
            if (k + 1 >= ws.lo && k + 1 <= ws.hi) s += jac.d_prev[k + 1] * delta[k + 1];
            if (k - 1 >= ws.lo && k - 1 <= ws.hi) s += jac.d_next[k - 1] * delta[k - 1];
            next_delta[k] = s;
        }
        delta.swap(next_delta);
        if (l % ws.spec.p_t == 0) ws.inject_residual(l / ws.spec.p_t, fine.row(l), delta);
        const StepJacobians jac_prev = jac_at(l - 1);
        ws.accumulate_control(jac_prev, l - 1, delta);
    }
    return ws.finish();
}

std::vector<double> grad_forward_impl(const GradientRequest& req, const JacobianMutator* mutate) {
    check_request(req);
    GradWorkspace ws(req);
    const int fn_x = ws.fn_x;
    const int n_params = req.control.param_count();

    // dU^m/dtheta-free accumulation in coarse C space runs through the full
    // field for one code path; columns here are the stored coefficients.
    Mat big(fn_x, n_params), big_next(fn_x, n_params);

    // active-parameter scatter of a fine-interface sensitivity
    auto scatter_param = [&](std::span<double> row, int m, int k, double value) {
        if (value == 0.0) return;
        const FineControl::Blend b = ws.fine_ctrl.blend(m, k);
        auto add = [&](int j, int n, double w) {
            if (w == 0.0) return;
            switch (req.control.mode()) {
                case ControlMode::Constant: row[0] += value * w; break;
                case ControlMode::TimeVarying: row[n] += value * w; break;
                case ControlMode::SpaceVarying: row[j] += value * w; break;
                case ControlMode::SpaceTimeVarying:
                    row[static_cast<size_t>(j) * ws.grid.n_t + n] += value * w;
                    break;
            }
        };
        add(b.j, b.n, (1.0 - b.wx) * (1.0 - b.wt));
        add(b.j, b.n + 1, (1.0 - b.wx) * b.wt);
        if (b.wx != 0.0) {
            add(b.j + 1, b.n, b.wx * (1.0 - b.wt));
            add(b.j + 1, b.n + 1, b.wx * b.wt);
        }
    };

    std::vector<double> g_active(n_params, 0.0);
    std::vector<double> cur(fn_x), nxt(fn_x), coeffs(fn_x + 1, 0.0);
    for (int j = 0; j < ws.grid.n_x; ++j)
        for (int k = 0; k < ws.spec.p_x; ++k) cur[j * ws.spec.p_x + k] = req.plan.data.values(0, j);

    for (int m = 0; m < ws.fn_t - 1; ++m) {
        ws.fill_coeffs(m, coeffs);
        StepJacobians jac = step_jacobians(req.plan.kind, cur, coeffs, ws.lo, ws.hi);
        if (mutate && *mutate) (*mutate)(jac);

        // big <- Jac_H(U) * big + Jac_H(C); boundary rows stay zero
        for (int k = 0; k < fn_x; ++k) {
            auto dst = big_next.row(k);
            std::fill(dst.begin(), dst.end(), 0.0);
            if (k < ws.lo || k > ws.hi) continue;
            const auto left = big.row(k - 1);
            const auto self = big.row(k);
            const auto right = big.row(k + 1);
            const double a = jac.d_prev[k], b = jac.d_self[k], c = jac.d_next[k];
            for (int p = 0; p < n_params; ++p)
                dst[p] = a * left[p] + b * self[p] + c * right[p];
            scatter_param(dst, m, k, jac.c_self[k]);
            scatter_param(dst, m, k + 1, jac.c_next[k]);
        }
        std::swap(big, big_next);

        step_interior(req.plan.kind, cur, coeffs, nxt, ws.lo, ws.hi);
        // boundary subcells come from data, exactly as in the rollout
        {
            const int n_x = ws.grid.n_x;
            int n = (m + 1) / ws.spec.p_t;
            if (n > ws.grid.n_t - 2) n = ws.grid.n_t - 2;
            const double w = static_cast<double>((m + 1) - n * ws.spec.p_t) / ws.spec.p_t;
            const double left = (1.0 - w) * req.plan.data.values(n, 0) + w * req.plan.data.values(n + 1, 0);
            const double right =
                (1.0 - w) * req.plan.data.values(n, n_x - 1) + w * req.plan.data.values(n + 1, n_x - 1);
            for (int k = 0; k < ws.spec.p_x; ++k) {
                nxt[k] = left;
                nxt[(n_x - 1) * ws.spec.p_x + k] = right;
            }
        }
        cur.swap(nxt);

        if ((m + 1) % ws.spec.p_t == 0) {
            const int i = (m + 1) / ws.spec.p_t;
            for (int j : req.observed_cols) {
                double mean = 0.0;
                for (int k = 0; k < ws.spec.p_x; ++k) mean += cur[j * ws.spec.p_x + k];
                mean /= ws.spec.p_x;
                const double r = (mean - req.plan.data.values(i, j)) / ws.spec.p_x;
                for (int k = 0; k < ws.spec.p_x; ++k) {
                    const auto row = big.row(j * ws.spec.p_x + k);
                    for (int p = 0; p < n_params; ++p) g_active[p] += row[p] * r;
                }
            }
        }
    }

    // reuse the shared tail: move the active gradient into the full-field
    // slot expected by finish()
    const double lambda = req.effective_lambda();
    if (lambda > 0.0) {
        auto [value, reg_grad] = regularizer(req.control.expanded());
        (void)value;
        const auto reg_active = tie_sum(reg_grad, req.control.mode(), ws.grid.n_t, ws.grid.n_x);
        for (int p = 0; p < n_params; ++p) g_active[p] += lambda * reg_active[p];
    }
    const auto& c = req.control.coeffs();
    for (int p = 0; p < n_params; ++p) g_active[p] *= logit_chain_from_c(c[p]);
    return g_active;
}

}  // namespace

double lsq_cost(const GradientRequest& req) {
    check_request(req);
    const Mat coarse = run_restricted(req.plan, req.control);
    double cost = 0.0;
    for (int i = 1; i < req.plan.data_grid().n_t; ++i) {
        for (int j : req.observed_cols) {
            const double r = coarse(i, j) - req.plan.data.values(i, j);
            cost += 0.5 * r * r;
        }
    }
    const double lambda = req.effective_lambda();
    if (lambda > 0.0) cost += lambda * regularizer(req.control.expanded()).first;
    return cost;
}

std::vector<double> grad_forward(const GradientRequest& req) { return grad_forward_impl(req, nullptr); }

std::vector<double> grad_backward(const GradientRequest& req) { return grad_backward_impl(req, nullptr); }

std::vector<double> grad_finite_difference(const GradientRequest& req, double h) {
    check_request(req);
    const auto& coeffs = req.control.coeffs();
    std::vector<double> theta(coeffs.size());
    for (size_t p = 0; p < coeffs.size(); ++p) theta[p] = logit_c_inverse(coeffs[p]);

    auto cost_at = [&](const std::vector<double>& th) {
        std::vector<double> c(th.size());
        for (size_t p = 0; p < th.size(); ++p) c[p] = logit_c(th[p]).c;
        GradientRequest r = req;
        r.control = ControlField::from_coeffs(req.control.mode(), std::move(c),
                                              req.control.n_t(), req.control.n_x());
        return lsq_cost(r);
    };

    std::vector<double> g(theta.size());
    std::vector<double> th = theta;
    for (size_t p = 0; p < theta.size(); ++p) {
        th[p] = theta[p] + h;
        const double up = cost_at(th);
        th[p] = theta[p] - h;
        const double down = cost_at(th);
        th[p] = theta[p];
        g[p] = (up - down) / (2.0 * h);
    }
    return g;
}

namespace {

std::vector<int> observed_set(const std::string& name, int n_x) {
    if (name == "full") return all_interior_cols(n_x);
    if (name == "half") {
        std::vector<int> cols;
        for (int j = 1; j <= n_x - 2; j += 2) cols.push_back(j);
        return cols;
    }
    if (name == "single") return {(n_x - 1) / 2};
    if (name == "none") return {};
    throw InvalidArgument("unknown observed set: " + name);
}

}  // namespace

GradCheckReport grad_check(const GradCheckConfig& config, const JacobianMutator* mutate) {
    GradCheckReport report;
    report.config = config;
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> u_density(0.05, 0.95);
    std::uniform_real_distribution<double> u_theta(-1.5, 1.5);
    std::uniform_int_distribution<int> u_nt(3, 5);
    std::uniform_int_distribution<int> u_nx(4, 7);
    std::uniform_int_distribution<int> u_lambda(0, 1);

    for (ControlMode mode : config.modes) {
        for (SchemeKind kind : config.kinds) {
            for (const SubdivisionSpec& spec : config.subdivisions) {
                for (const std::string& obs : config.observed_sets) {
                    GradCheckEntry entry;
                    entry.mode = mode;
                    entry.kind = kind;
                    entry.spec = spec;
                    entry.observed = obs;
                    for (int inst = 0; inst < config.instances_per_case; ++inst) {
                        const int n_t = u_nt(rng);
                        const int n_x = u_nx(rng);
                        Mat data(n_t, n_x);
                        for (double& v : data.data()) v = u_density(rng);
                        Grid grid(n_t, n_x, 0.5, 1.0);
                        GradientRequest req;
                        req.plan = {DensityMatrix(grid, std::move(data)), spec, kind};
                        std::vector<double> coeffs(ControlField::expected_size(mode, n_t, n_x));
                        for (double& c : coeffs) c = logit_c(u_theta(rng)).c;
                        req.control = ControlField::from_coeffs(mode, std::move(coeffs), n_t, n_x);
                        req.observed_cols = observed_set(obs, n_x);
                        req.lambda =
                            (mode == ControlMode::Constant) ? 0.0 : (u_lambda(rng) ? 0.1 : 0.0);

                        const auto g_fp = grad_forward_impl(req, mutate);
                        const auto g_bp = grad_backward_impl(req, mutate);
                        const auto g_fd = grad_finite_difference(req, config.fd_step);

                        double g_inf = 0.0;
                        for (double v : g_bp) g_inf = std::max(g_inf, std::abs(v));
                        for (size_t p = 0; p < g_fd.size(); ++p) {
                            const double scale = 1.0 + std::abs(g_fd[p]);
                            entry.max_rel_fp_fd =
                                std::max(entry.max_rel_fp_fd, std::abs(g_fp[p] - g_fd[p]) / scale);
                            entry.max_rel_bp_fd =
                                std::max(entry.max_rel_bp_fd, std::abs(g_bp[p] - g_fd[p]) / scale);
                            entry.max_fp_bp = std::max(
                                entry.max_fp_bp, std::abs(g_fp[p] - g_bp[p]) / (1.0 + g_inf));
                        }
                        ++entry.instances;
                        ++report.total_instances;
                    }
                    report.max_rel_fp_fd = std::max(report.max_rel_fp_fd, entry.max_rel_fp_fd);
                    report.max_rel_bp_fd = std::max(report.max_rel_bp_fd, entry.max_rel_bp_fd);
                    report.max_fp_bp = std::max(report.max_fp_bp, entry.max_fp_bp);
                    report.entries.push_back(std::move(entry));
                }
            }
        }
    }
    report.pass = report.max_rel_fp_fd <= config.tol_fd && report.max_rel_bp_fd <= config.tol_fd &&
                  report.max_fp_bp <= config.tol_fp_bp;
    return report;
}

}  // namespace trm

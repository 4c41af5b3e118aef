#include "trm/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

namespace trm {

namespace {

ControlField control_from_theta(const EstimationProblem& p, std::span<const double> theta) {
    std::vector<double> coeffs(theta.size());
    for (size_t i = 0; i < theta.size(); ++i) coeffs[i] = logit_c(theta[i]).c;
    return ControlField::from_coeffs(p.mode, std::move(coeffs), p.data.grid.n_t, p.data.grid.n_x);
}

GradientRequest request_for(const EstimationProblem& p, const ControlField& control, double lambda) {
    GradientRequest req;
    req.plan = {p.data, p.spec, p.kind};
    req.control = control;
    req.observed_cols = p.observed_cols;
    req.lambda = lambda;
    return req;
}

void check_problem(const EstimationProblem& p) {
    if (p.kind == SchemeKind::Godunov)
        throw UnsupportedScheme("estimation: Godunov flux is not differentiable");
    if (p.observed_cols.empty()) throw EmptyObservationSet("estimation: no observed columns");
    for (int j : p.observed_cols)
        if (j < 1 || j > p.data.grid.n_x - 2)
            throw InvalidArgument("estimation: observed column outside interior");
    if (p.lambdas.empty()) throw InvalidArgument("estimation: empty lambda grid");
    for (double l : p.lambdas)
        if (l < 0.0) throw InvalidArgument("estimation: lambda must be >= 0");
}

struct CgOutcome {
    std::vector<double> theta;
    std::vector<double> trace;
    int iterations = 0;
    bool stalled = false;
};

CgOutcome cg_minimize(const EstimationProblem& p, double lambda, std::vector<double> theta) {
    const auto eval_cost = [&](const std::vector<double>& th) {
        return lsq_cost(request_for(p, control_from_theta(p, th), lambda));
    };
    const auto eval_grad = [&](const std::vector<double>& th) {
        return grad_backward(request_for(p, control_from_theta(p, th), lambda));
    };

    CgOutcome out;
    const size_t n = theta.size();
    double fx = eval_cost(theta);
    std::vector<double> g = eval_grad(theta);
    std::vector<double> d(n), g_new, trial(n);
    for (size_t i = 0; i < n; ++i) d[i] = -g[i];

    std::vector<double> best_theta = theta;
    double best_cost = fx;
    out.trace.push_back(fx);

    const auto inf_norm = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    };
    const auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    };

    double alpha_init = 1.0;
    for (int t = 0; t < p.optimizer.max_iters; ++t) {
        if (inf_norm(g) <= p.optimizer.grad_tol * (1.0 + std::abs(fx))) break;

        double slope = dot(g, d);
        if (!(slope < 0.0)) {  // not a descent direction: steepest-descent restart
            for (size_t i = 0; i < n; ++i) d[i] = -g[i];
            slope = dot(g, d);
            if (!(slope < 0.0)) break;  // gradient numerically zero
        }

        double alpha = alpha_init;
        double f_trial = 0.0;
        if (p.optimizer.bare_step) {
            for (size_t i = 0; i < n; ++i) theta[i] += d[i];
            fx = eval_cost(theta);
        } else {
            bool accepted = false;
            for (int h = 0; h < p.optimizer.max_halvings; ++h) {
                for (size_t i = 0; i < n; ++i) trial[i] = theta[i] + alpha * d[i];
                f_trial = eval_cost(trial);
                if (f_trial <= fx + p.optimizer.armijo_c * alpha * slope) {
                    accepted = true;
                    break;
                }
                alpha /= 2.0;
            }
            if (!accepted) {
                out.stalled = true;
                break;
            }
            theta = trial;
            fx = f_trial;
            // warm-start the next search from twice the accepted step
            alpha_init = std::min(2.0 * alpha, 1e6);
        }
        ++out.iterations;
        out.trace.push_back(fx);
        if (fx < best_cost) {
            best_cost = fx;
            best_theta = theta;
        }

        g_new = eval_grad(theta);
        const double denom = dot(g, g);
        double beta = denom > 0.0 ? dot(g_new, g_new) - dot(g_new, g) : 0.0;
        beta = denom > 0.0 ? std::max(0.0, beta / denom) : 0.0;  // PR+
        for (size_t i = 0; i < n; ++i) d[i] = -g_new[i] + beta * d[i];
        g.swap(g_new);
    }

    out.theta = std::move(best_theta);
    return out;
}

std::vector<double> initial_theta(const EstimationProblem& p) {
    const int n_params = ControlField::expected_size(p.mode, p.data.grid.n_t, p.data.grid.n_x);
    if (p.optimizer.initial_theta) {
        if (static_cast<int>(p.optimizer.initial_theta->size()) != n_params)
            throw ShapeMismatch("estimation: initial_theta size does not match mode");
        return *p.optimizer.initial_theta;
    }
    if (p.mode == ControlMode::Constant) return {0.0};  // C = 1/4, center of (0, 1/2)
    EstimationProblem base = p;
    base.mode = ControlMode::Constant;
    base.lambdas = {0.0};
    base.optimizer = OptimizerSettings{};  // the warm-start prefit runs on its own budget
    const EstimationResult constant_fit = minimize(base);
    return std::vector<double>(n_params, constant_fit.theta_star[0]);
}

EstimationResult assemble(const EstimationProblem& p, const CgOutcome& cg, double lambda) {
    EstimationResult res;
    res.theta_star = cg.theta;
    res.c_star = control_from_theta(p, cg.theta);
    res.spec = p.spec;
    res.cost_trace = cg.trace;
    res.iterations = cg.iterations;
    res.lambda_used = lambda;
    res.line_search_stalled = cg.stalled;

    const RolloutPlan plan{p.data, p.spec, p.kind};
    const Mat fine = run(plan, res.c_star);
    res.fitted_density = DensityMatrix(p.data.grid, restrict_mean(fine, p.spec));
    res.rmse_observed = rmse(fine, p.data, p.spec, p.observed_cols);
    res.rmse_full = rmse(fine, p.data, p.spec, all_interior_cols(p.data.grid.n_x));

    const double scale = (p.data.grid.dx / p.spec.p_x) / (p.data.grid.dt / p.spec.p_t);
    res.v_m_star.resize(res.c_star.coeffs().size());
    for (size_t i = 0; i < res.v_m_star.size(); ++i)
        res.v_m_star[i] = scale * res.c_star.coeffs()[i];
    return res;
}

}  // namespace

double cost(const EstimationProblem& problem, std::span<const double> theta) {
    check_problem(problem);
    const int n_params =
        ControlField::expected_size(problem.mode, problem.data.grid.n_t, problem.data.grid.n_x);
    if (static_cast<int>(theta.size()) != n_params)
        throw ShapeMismatch("cost: theta size does not match mode");
    return lsq_cost(request_for(problem, control_from_theta(problem, theta),
                                problem.lambdas.front()));
}

EstimationResult minimize(const EstimationProblem& problem) {
    check_problem(problem);
    std::vector<double> lambdas = problem.lambdas;
    if (problem.mode == ControlMode::Constant) lambdas = {0.0};  // nothing to regularize

    const std::vector<double> theta0 = initial_theta(problem);

    auto fit_one = [&](double lambda) {
        return assemble(problem, cg_minimize(problem, lambda, theta0), lambda);
    };

    if (lambdas.size() == 1) return fit_one(lambdas[0]);

    std::vector<EstimationResult> results(lambdas.size());
    const int threads = std::max(1, problem.threads);
    size_t next = 0;
    while (next < lambdas.size()) {
        const size_t batch = std::min<size_t>(threads, lambdas.size() - next);
        std::vector<std::future<EstimationResult>> futures;
        for (size_t b = 0; b < batch; ++b)
            futures.push_back(std::async(std::launch::async, fit_one, lambdas[next + b]));
        for (size_t b = 0; b < batch; ++b) results[next + b] = futures[b].get();
        next += batch;
    }
    size_t best = 0;
    for (size_t i = 1; i < results.size(); ++i)
        if (results[i].rmse_full < results[best].rmse_full) best = i;
    return results[best];
}

Mat speed_field(const ControlField& control, const Grid& grid, const SubdivisionSpec& spec) {
    const double scale = (grid.dx / spec.p_x) / (grid.dt / spec.p_t);
    Mat v = control.expanded();
    for (double& x : v.data()) x *= scale;
    return v;
}

std::vector<FdPoint> fundamental_diagram(const EstimationResult& result, double rho_max,
                                         const Mat* data_density, const Mat* data_flow) {
    const Grid& grid = result.fitted_density.grid;
    std::vector<FdPoint> points;
    points.reserve(static_cast<size_t>(grid.n_t) * grid.n_x * (data_flow ? 2 : 1));

    const Mat v = speed_field(result.c_star, grid, result.spec);

    for (int n = 0; n < grid.n_t; ++n) {
        for (int j = 0; j < grid.n_x; ++j) {
            const double vbar = (v(j, n) + v(j + 1, n)) / 2.0;
            const double u = result.fitted_density.values(n, j);
            points.push_back({u * rho_max, u * rho_max * vbar * (1.0 - u), "fit"});
        }
    }
    if (data_density && data_flow) {
        if (!data_density->same_shape(*data_flow))
            throw ShapeMismatch("fundamental_diagram: data matrices differ in shape");
        for (int n = 0; n < data_density->rows(); ++n)
            for (int j = 0; j < data_density->cols(); ++j)
                points.push_back({(*data_density)(n, j), (*data_flow)(n, j), "data"});
    }
    return points;
}

}  // namespace trm

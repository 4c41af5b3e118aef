#include "trm/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace trm {

namespace {

using nlohmann::json;

void check_keys(const json& cfg, const std::set<std::string>& allowed, const std::string& cmd) {
    if (!cfg.is_object()) throw ConfigError(cmd + ": config must be a JSON object");
    for (const auto& [key, value] : cfg.items()) {
        if (!allowed.count(key)) throw ConfigError(cmd + ": unknown config key '" + key + "'");
    }
}

template <typename T>
T get_or(const json& cfg, const std::string& key, T fallback) {
    if (!cfg.contains(key)) return fallback;
    try {
        return cfg.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

std::string require_string(const json& cfg, const std::string& key, const std::string& cmd) {
    if (!cfg.contains(key)) throw ConfigError(cmd + ": missing required key '" + key + "'");
    return get_or<std::string>(cfg, key, "");
}

SchemeKind parse_scheme(const std::string& s) {
    if (s == "trm") return SchemeKind::Trm;
    if (s == "godunov") return SchemeKind::Godunov;
    if (s == "lxf") return SchemeKind::LaxFriedrichs;
    throw ConfigError("unknown scheme '" + s + "' (expected trm|godunov|lxf)");
}

ControlMode parse_mode(const std::string& s) {
    if (s == "constant") return ControlMode::Constant;
    if (s == "time") return ControlMode::TimeVarying;
    if (s == "space") return ControlMode::SpaceVarying;
    if (s == "spacetime") return ControlMode::SpaceTimeVarying;
    throw ConfigError("unknown mode '" + s + "' (expected constant|time|space|spacetime)");
}

std::string out_path(const RunContext& ctx, const std::string& name) {
    std::filesystem::create_directories(ctx.out_dir);
    return (std::filesystem::path(ctx.out_dir) / name).string();
}

std::vector<int> parse_observed(const json& value, int n_x) {
    if (value.is_string()) {
        const std::string s = value.get<std::string>();
        if (s == "all") return all_interior_cols(n_x);
        if (s == "half") {
            std::vector<int> cols;
            for (int j = 2; j <= n_x - 2; j += 2) cols.push_back(j);
            return cols;
        }
        if (s == "center") return {(n_x - 1) / 2};
        throw ConfigError("observed: expected all|half|center or an index array");
    }
    if (value.is_array()) {
        std::vector<int> cols;
        for (const auto& v : value) cols.push_back(v.get<int>());
        std::sort(cols.begin(), cols.end());
        return cols;
    }
    throw ConfigError("observed: expected all|half|center or an index array");
}

json grid_json(const Grid& g) {
    return {{"n_t", g.n_t}, {"n_x", g.n_x}, {"dt", g.dt}, {"dx", g.dx}, {"t0", g.t0}, {"x0", g.x0}};
}

}  // namespace

nlohmann::json load_config(const std::string& path, const nlohmann::json& overrides) {
    json cfg = json::object();
    if (!path.empty()) {
        std::ifstream f(path);
        if (!f) throw ConfigError("cannot open config file: " + path);
        try {
            f >> cfg;
        } catch (const json::exception& e) {
            throw ConfigError(path + ": " + e.what());
        }
        if (!cfg.is_object()) throw ConfigError(path + ": config must be a JSON object");
    }
    for (const auto& [key, value] : overrides.items()) cfg[key] = value;
    return cfg;
}

double synth_initial_profile(double x) {
    return 0.5 * std::exp(-10.0 * x * x) +
           0.2 * (1.0 + std::cos(10.0 * M_PI * x) * std::exp(-(3.0 * x * x + x)));
}

SynthOutcome cmd_synth(const json& cfg, const RunContext& ctx) {
    check_keys(cfg,
               {"nt", "nx", "v_m", "dx_fine", "cfl_fraction", "t_end", "crop_lo", "crop_hi",
                "pad_fraction"},
               "synth");
    const int nt = get_or(cfg, "nt", 51);
    const int nx = get_or(cfg, "nx", 51);
    const double v_m = get_or(cfg, "v_m", 1.0);
    const double dx_fine = get_or(cfg, "dx_fine", 1e-3);
    const double cfl_fraction = get_or(cfg, "cfl_fraction", 0.25);
    const double t_end = get_or(cfg, "t_end", 1.0);
    const double crop_lo = get_or(cfg, "crop_lo", -1.0);
    const double crop_hi = get_or(cfg, "crop_hi", 1.0);
    const double pad_fraction = get_or(cfg, "pad_fraction", 0.25);
    if (nt < 2 || nx < 3) throw ConfigError("synth: need nt >= 2 and nx >= 3");
    if (!(v_m > 0.0)) throw ConfigError("synth: v_m must be > 0");
    if (!(dx_fine > 0.0)) throw ConfigError("synth: dx_fine must be > 0");
    if (!(cfl_fraction > 0.0 && cfl_fraction < 0.5))
        throw ConfigError("synth: cfl_fraction must lie in (0, 0.5)");
    if (!(crop_hi > crop_lo)) throw ConfigError("synth: crop_hi must exceed crop_lo");
    if (!(t_end > 0.0)) throw ConfigError("synth: t_end must be > 0");
    if (pad_fraction < 0.0) throw ConfigError("synth: pad_fraction must be >= 0");

    // fine grid sized so the crop restricts exactly onto the requested cells
    const double crop_len = crop_hi - crop_lo;
    const int p_x = std::max(1, static_cast<int>(std::lround(crop_len / (nx * dx_fine))));
    const int crop_cells = nx * p_x;
    const double dx = crop_len / crop_cells;
    const int pad = static_cast<int>(std::ceil(pad_fraction * crop_cells));
    const int domain_cells = crop_cells + 2 * pad;

    const double dt_target = cfl_fraction * dx / v_m;
    const int p_t = std::max(1, static_cast<int>(std::ceil(t_end / (dt_target * (nt - 1)))));
    const int steps = p_t * (nt - 1);
    const double dt = t_end / steps;

    const Grid fine(steps + 1, domain_cells, dt, dx, 0.0, crop_lo + dx / 2.0 - pad * dx);
    std::vector<double> ic(domain_cells);
    for (int j = 0; j < domain_cells; ++j) ic[j] = synth_initial_profile(fine.center(j));

    Mat density(nt, nx);
    Mat reference(nt, crop_cells);
    reference_solve_stream(ic, v_m, fine, [&](int m, std::span<const double> row) {
        if (m % p_t != 0) return;
        const int i = m / p_t;
        for (int k = 0; k < crop_cells; ++k) reference(i, k) = row[pad + k];
        for (int j = 0; j < nx; ++j) {
            double sum = 0.0;
            for (int k = 0; k < p_x; ++k) sum += row[pad + j * p_x + k];
            density(i, j) = sum / p_x;
        }
    });

    const double data_dx = crop_len / nx;
    SynthOutcome out;
    out.density = DensityMatrix(Grid(nt, nx, t_end / (nt - 1), data_dx, 0.0, crop_lo + data_dx / 2.0),
                                std::move(density));
    out.density_csv = out_path(ctx, "density_matrix.csv");
    out.density_json = out_path(ctx, "density_matrix.json");
    out.reference_csv = out_path(ctx, "reference_solution.csv");
    write_density_csv(out.density_csv, out.density);
    write_density_json(out.density_json, out.density);
    write_matrix_csv(out.reference_csv,
                     Grid(nt, crop_cells, t_end / (nt - 1), dx, 0.0, crop_lo + dx / 2.0), reference);
    if (ctx.verbose) {
        std::printf("synth: fine grid %d x %d (p_t=%d, p_x=%d), data grid %d x %d\n", fine.n_t,
                    fine.n_x, p_t, p_x, nt, nx);
    }
    return out;
}

nlohmann::json estimation_result_json(const EstimationResult& r) {
    json j;
    j["mode"] = to_string(r.c_star.mode());
    j["subdivision"] = {{"p_t", r.spec.p_t}, {"p_x", r.spec.p_x}};
    j["lambda"] = r.lambda_used;
    j["theta"] = r.theta_star;
    j["c"] = r.c_star.coeffs();
    j["v_m"] = r.v_m_star;
    j["rmse_observed"] = r.rmse_observed;
    j["rmse_full"] = r.rmse_full;
    j["iterations"] = r.iterations;
    j["cost_trace"] = r.cost_trace;
    j["line_search_stalled"] = r.line_search_stalled;
    j["grid"] = grid_json(r.fitted_density.grid);
    return j;
}

EstimateOutcome cmd_estimate(const json& cfg, const RunContext& ctx) {
    check_keys(cfg,
               {"input", "input_dx", "input_x0", "normalized", "rho_max", "scheme", "mode", "p_x",
                "p_t", "v_max", "observed", "lambda", "max_iters", "grad_tol", "bare_step",
                "flow_input"},
               "estimate");
    const std::string input = require_string(cfg, "input", "estimate");
    const bool normalized = get_or(cfg, "normalized", true);
    const double rho_max = get_or(cfg, "rho_max", 1.0);
    if (!(rho_max > 0.0)) throw ConfigError("estimate: rho_max must be > 0");

    DensityMatrix data;
    Mat raw_density;  // veh/m, for fundamental-diagram data points
    if (input.size() > 5 && input.substr(input.size() - 5) == ".json") {
        data = read_density_json(input);
        raw_density = data.values;
        for (double& v : raw_density.data()) v *= rho_max;
    } else {
        const double dx = get_or(cfg, "input_dx", 0.0);
        if (!(dx > 0.0)) throw ConfigError("estimate: input_dx must be > 0 for CSV input");
        if (normalized) {
            data = read_density_csv(input, dx, get_or(cfg, "input_x0", 0.0));
            raw_density = data.values;
            for (double& v : raw_density.data()) v *= rho_max;
        } else {
            CsvTable table = read_csv_table(input);
            if (table.values.rows() < 2) throw ConfigError("estimate: need at least 2 time rows");
            raw_density = table.values;
            const double dt = table.times[1] - table.times[0];
            const auto norm = normalize(table.values, rho_max);
            if (ctx.verbose && norm.clamped > 0)
                std::printf("estimate: clamped %d entries above rho_max\n", norm.clamped);
            data = DensityMatrix(Grid(table.values.rows(), table.values.cols(), dt, dx,
                                      table.times[0], get_or(cfg, "input_x0", 0.0)),
                                 norm.values);
        }
    }

    EstimationProblem problem;
    problem.data = data;
    problem.rho_max = rho_max;
    problem.kind = parse_scheme(get_or<std::string>(cfg, "scheme", "trm"));
    problem.mode = parse_mode(get_or<std::string>(cfg, "mode", "constant"));
    const int p_x = get_or(cfg, "p_x", 1);
    int p_t = get_or(cfg, "p_t", 0);
    if (p_t == 0) {
        const double v_max = get_or(cfg, "v_max", 0.0);
        if (!(v_max > 0.0)) throw ConfigError("estimate: p_t=0 (auto) requires v_max > 0");
        p_t = minimal_p_t(data.grid, p_x, v_max);
    }
    problem.spec = SubdivisionSpec(p_t, p_x);
    problem.observed_cols =
        parse_observed(cfg.contains("observed") ? cfg.at("observed") : json("all"), data.grid.n_x);
    problem.optimizer.max_iters = get_or(cfg, "max_iters", 500);
    problem.optimizer.grad_tol = get_or(cfg, "grad_tol", 1e-8);
    problem.optimizer.bare_step = get_or(cfg, "bare_step", false);
    problem.threads = ctx.threads;

    if (cfg.contains("lambda")) {
        const auto& l = cfg.at("lambda");
        if (l.is_number()) {
            problem.lambdas = {l.get<double>()};
        } else if (l.is_array()) {
            problem.lambdas = l.get<std::vector<double>>();
        } else if (l.is_string() && l.get<std::string>() == "auto") {
            // default candidate grid, scaled by observations per parameter
            const double n_obs =
                static_cast<double>(data.grid.n_t - 1) * problem.observed_cols.size();
            const double n_par = ControlField::expected_size(problem.mode, data.grid.n_t, data.grid.n_x);
            const double scale = n_obs / n_par;
            problem.lambdas.clear();
            for (int e = -4; e <= 1; ++e) problem.lambdas.push_back(std::pow(10.0, e) * scale);
        } else {
            throw ConfigError("estimate: lambda must be a number, an array or \"auto\"");
        }
    }

    EstimateOutcome out;
    out.result = minimize(problem);

    // artifacts
    json rj = estimation_result_json(out.result);
    rj["scheme"] = to_string(problem.kind);
    rj["observed_cols"] = problem.observed_cols;
    rj["rho_max"] = rho_max;
    rj["config"] = cfg;  // effective config for reproducibility
    out.result_json = rj;
    std::ofstream(out_path(ctx, "result.json")) << rj.dump(1) << "\n";
    write_density_csv(out_path(ctx, "fitted_density.csv"), out.result.fitted_density);

    std::vector<FdPoint> fd;
    if (cfg.contains("flow_input")) {
        const CsvTable flow = read_csv_table(get_or<std::string>(cfg, "flow_input", ""));
        fd = fundamental_diagram(out.result, rho_max, &raw_density, &flow.values);
    } else {
        fd = fundamental_diagram(out.result, rho_max);
    }
    write_fd_points_csv(out_path(ctx, "fd_points.csv"), fd);

    std::ostringstream s;
    s << "estimate: scheme=" << to_string(problem.kind) << " mode=" << to_string(problem.mode);
    const auto& v = out.result.v_m_star;
    if (problem.mode == ControlMode::Constant) {
        s << " v_m*=" << v[0] << " m/s";
    } else {
        const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= v.size();
        s << " v_m*[min/mean/max]=" << *mn << "/" << mean << "/" << *mx << " m/s lambda="
          << out.result.lambda_used;
    }
    s << " rmse_obs=" << out.result.rmse_observed << " rmse_full=" << out.result.rmse_full
      << " iters=" << out.result.iterations;
    out.summary_line = s.str();
    return out;
}

nlohmann::json gradcheck_report_json(const GradCheckReport& r) {
    json j;
    j["tolerance_fd"] = r.config.tol_fd;
    j["tolerance_fp_bp"] = r.config.tol_fp_bp;
    j["seed"] = r.config.seed;
    j["fd_step"] = r.config.fd_step;
    j["total_instances"] = r.total_instances;
    j["pass"] = r.pass;
    j["max_rel_fp_fd"] = r.max_rel_fp_fd;
    j["max_rel_bp_fd"] = r.max_rel_bp_fd;
    j["max_fp_bp"] = r.max_fp_bp;
    auto& entries = j["entries"] = json::array();
    for (const auto& e : r.entries) {
        entries.push_back({{"mode", to_string(e.mode)},
                           {"scheme", to_string(e.kind)},
                           {"subdivision", {{"p_t", e.spec.p_t}, {"p_x", e.spec.p_x}}},
                           {"observed", e.observed},
                           {"instances", e.instances},
                           {"max_rel_fp_fd", e.max_rel_fp_fd},
                           {"max_rel_bp_fd", e.max_rel_bp_fd},
                           {"max_fp_bp", e.max_fp_bp}});
    }
    return j;
}

GradCheckReport cmd_gradcheck(const json& cfg, const RunContext& ctx) {
    check_keys(cfg,
               {"instances", "seed", "modes", "kinds", "subdivisions", "observed", "fd_step",
                "tol_fd", "tol_fp_bp"},
               "gradcheck");
    GradCheckConfig config;
    config.instances_per_case = get_or(cfg, "instances", 5);
    config.seed = get_or<std::uint64_t>(cfg, "seed", config.seed);
    config.fd_step = get_or(cfg, "fd_step", 1e-6);
    config.tol_fd = get_or(cfg, "tol_fd", 1e-5);
    config.tol_fp_bp = get_or(cfg, "tol_fp_bp", 1e-12);
    if (cfg.contains("modes")) {
        config.modes.clear();
        for (const auto& m : cfg.at("modes")) config.modes.push_back(parse_mode(m.get<std::string>()));
    }
    if (cfg.contains("kinds")) {
        config.kinds.clear();
        for (const auto& k : cfg.at("kinds")) {
            const SchemeKind kind = parse_scheme(k.get<std::string>());
            if (kind == SchemeKind::Godunov)
                throw UnsupportedScheme("gradcheck: the Godunov flux has no Jacobians to check");
            config.kinds.push_back(kind);
        }
    }
    if (cfg.contains("subdivisions")) {
        config.subdivisions.clear();
        for (const auto& s : cfg.at("subdivisions"))
            config.subdivisions.emplace_back(s.at(0).get<int>(), s.at(1).get<int>());
    }
    if (cfg.contains("observed")) {
        config.observed_sets = cfg.at("observed").get<std::vector<std::string>>();
    }

    const GradCheckReport report = grad_check(config);
    std::ofstream(out_path(ctx, "gradcheck.json")) << gradcheck_report_json(report).dump(1) << "\n";
    if (ctx.verbose || !report.pass) {
        std::printf("gradcheck: %d instances, max FP-FD %.3e, BP-FD %.3e, FP-BP %.3e -> %s\n",
                    report.total_instances, report.max_rel_fp_fd, report.max_rel_bp_fd,
                    report.max_fp_bp, report.pass ? "pass" : "FAIL");
    }
    return report;
}

EdieOutcome cmd_edie(const json& cfg, const RunContext& ctx) {
    check_keys(cfg,
               {"trajectories", "id_col", "t_col", "x_col", "length_col", "time_unit",
                "position_unit", "nt", "nx", "dt", "dx", "road_length", "t_start", "x_start",
                "lanes"},
               "edie");
    const std::string path = require_string(cfg, "trajectories", "edie");

    ColumnMapping mapping;
    mapping.id_col = get_or<std::string>(cfg, "id_col", "id");
    mapping.t_col = get_or<std::string>(cfg, "t_col", "t");
    mapping.x_col = get_or<std::string>(cfg, "x_col", "x");
    mapping.length_col = get_or<std::string>(cfg, "length_col", "length");
    auto unit_scale = [&](const char* key, double fallback,
                          const std::initializer_list<std::pair<const char*, double>>& names) {
        if (!cfg.contains(key)) return fallback;
        const auto& v = cfg.at(key);
        if (v.is_number()) return v.get<double>();
        if (v.is_string()) {
            for (const auto& [name, scale] : names)
                if (v.get<std::string>() == name) return scale;
        }
        throw ConfigError(std::string("edie: bad unit for ") + key);
    };
    mapping.time_scale = unit_scale("time_unit", 1.0, {{"s", 1.0}, {"ms", 1e-3}});
    mapping.position_scale = unit_scale("position_unit", 1.0, {{"m", 1.0}, {"km", 1e3}});

    const int nt = get_or(cfg, "nt", 0);
    const int nx = get_or(cfg, "nx", 0);
    const double dt = get_or(cfg, "dt", 0.0);
    if (nt < 2 || nx < 3) throw ConfigError("edie: need nt >= 2 and nx >= 3");
    if (!(dt > 0.0)) throw ConfigError("edie: dt must be > 0");
    double dx = get_or(cfg, "dx", 0.0);
    if (cfg.contains("road_length")) {
        if (cfg.contains("dx")) throw ConfigError("edie: give either dx or road_length, not both");
        dx = get_or(cfg, "road_length", 0.0) / nx;
    }
    if (!(dx > 0.0)) throw ConfigError("edie: dx or road_length must be > 0");
    const double t_start = get_or(cfg, "t_start", 0.0);
    const double x_start = get_or(cfg, "x_start", 0.0);  // left edge of cell 0

    const int lanes = get_or(cfg, "lanes", 0);
    if (lanes > 0 && mapping.length_col.empty())
        throw MissingColumn("edie: estimating rho_max requires a length column");

    const TrajectorySet trajectories = parse_trajectories(path, mapping);
    if (ctx.verbose) {
        std::printf("edie: %zu vehicles (%d dropped with < 2 samples)\n",
                    trajectories.vehicles.size(), trajectories.dropped_short);
    }

    const Grid grid(nt, nx, dt, dx, t_start, x_start + dx / 2.0);
    EdieOutcome out;
    out.matrices = edie_matrices(trajectories, grid);
    out.density_csv = out_path(ctx, "density.csv");
    out.flow_csv = out_path(ctx, "flow.csv");
    out.fd_csv = out_path(ctx, "fd_points.csv");
    write_matrix_csv(out.density_csv, grid, out.matrices.density);
    write_matrix_csv(out.flow_csv, grid, out.matrices.flow);

    std::vector<FdPoint> fd;
    fd.reserve(static_cast<size_t>(nt) * nx);
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < nx; ++j)
            fd.push_back({out.matrices.density(i, j), out.matrices.flow(i, j), "data"});
    write_fd_points_csv(out.fd_csv, fd);

    if (lanes > 0) {
        out.rho_max = estimate_rho_max(trajectories, lanes);
        const auto norm = normalize(out.matrices.density, out.rho_max);
        if (ctx.verbose && norm.clamped > 0)
            std::printf("edie: clamped %d entries above rho_max\n", norm.clamped);
        out.density_json = out_path(ctx, "density_normalized.json");
        write_density_json(out.density_json, DensityMatrix(grid, norm.values));
        if (ctx.verbose) std::printf("edie: rho_max = %.6f veh/m\n", out.rho_max);
    }
    return out;
}

}  // namespace trm

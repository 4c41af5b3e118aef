#include <cstdio>
#include <exception>

#include "CLI11.hpp"
#include "trm/commands.hpp"

namespace {

// exit codes: 0 ok, 1 check failure, 2 usage/config error, 3 runtime error
constexpr int kOk = 0;
constexpr int kCheckFailure = 1;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct CommonFlags {
    std::string config_path;
    trm::RunContext ctx;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file");
    cmd->add_option("--out", flags.ctx.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--threads", flags.ctx.threads, "parallelism cap")->capture_default_str();
    cmd->add_flag("--verbose", flags.ctx.verbose, "verbose progress output");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LWR traffic density discretization and parameter estimation"};
    app.require_subcommand(1);

    CommonFlags synth_flags, estimate_flags, gradcheck_flags, edie_flags;
    nlohmann::json synth_over = nlohmann::json::object();
    nlohmann::json estimate_over = nlohmann::json::object();
    nlohmann::json gradcheck_over = nlohmann::json::object();
    nlohmann::json edie_over = nlohmann::json::object();

    auto* synth = app.add_subcommand("synth", "generate a synthetic ground-truth density matrix");
    add_common(synth, synth_flags);
    int synth_nt = 0, synth_nx = 0;
    double synth_vm = 0.0;
    synth->add_option("--nt", synth_nt, "data grid time steps");
    synth->add_option("--nx", synth_nx, "data grid cells");
    synth->add_option("--v-m", synth_vm, "true maximal speed");

    auto* estimate = app.add_subcommand("estimate", "fit parameters to a density matrix");
    add_common(estimate, estimate_flags);
    std::string est_input, est_scheme, est_mode, est_observed;
    int est_px = 0, est_pt = -1;
    double est_vmax = 0.0;
    estimate->add_option("--input", est_input, "density matrix (.json or .csv)");
    estimate->add_option("--scheme", est_scheme, "trm|lxf");
    estimate->add_option("--mode", est_mode, "constant|time|space|spacetime");
    estimate->add_option("--p-x", est_px, "space subdivisions");
    estimate->add_option("--p-t", est_pt, "time subdivisions (0 = minimal per CFL)");
    estimate->add_option("--v-max", est_vmax, "speed bound for the automatic p_t");
    estimate->add_option("--observed", est_observed, "all|half|center");

    auto* gradcheck = app.add_subcommand("gradcheck", "compare FP/BP gradients to finite differences");
    add_common(gradcheck, gradcheck_flags);
    int gc_instances = 0;
    gradcheck->add_option("--instances", gc_instances, "instances per lattice case");

    auto* edie = app.add_subcommand("edie", "compute Edie density/flow matrices from trajectories");
    add_common(edie, edie_flags);
    std::string edie_traj;
    int edie_lanes = -1;
    edie->add_option("--trajectories", edie_traj, "trajectory CSV file");
    edie->add_option("--lanes", edie_lanes, "lane count for the rho_max estimate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kConfigError;
    }

    try {
        if (synth->parsed()) {
            if (synth->count("--nt")) synth_over["nt"] = synth_nt;
            if (synth->count("--nx")) synth_over["nx"] = synth_nx;
            if (synth->count("--v-m")) synth_over["v_m"] = synth_vm;
            const auto cfg = trm::load_config(synth_flags.config_path, synth_over);
            const auto out = trm::cmd_synth(cfg, synth_flags.ctx);
            std::printf("synth: wrote %s (%d x %d) and %s\n", out.density_csv.c_str(),
                        out.density.grid.n_t, out.density.grid.n_x, out.reference_csv.c_str());
            return kOk;
        }
        if (estimate->parsed()) {
            if (estimate->count("--input")) estimate_over["input"] = est_input;
            if (estimate->count("--scheme")) estimate_over["scheme"] = est_scheme;
            if (estimate->count("--mode")) estimate_over["mode"] = est_mode;
            if (estimate->count("--p-x")) estimate_over["p_x"] = est_px;
            if (estimate->count("--p-t")) estimate_over["p_t"] = est_pt;
            if (estimate->count("--v-max")) estimate_over["v_max"] = est_vmax;
            if (estimate->count("--observed")) estimate_over["observed"] = est_observed;
            const auto cfg = trm::load_config(estimate_flags.config_path, estimate_over);
            const auto out = trm::cmd_estimate(cfg, estimate_flags.ctx);
            std::printf("%s\n", out.summary_line.c_str());
            return kOk;
        }
        if (gradcheck->parsed()) {
            if (gradcheck->count("--instances")) gradcheck_over["instances"] = gc_instances;
            const auto cfg = trm::load_config(gradcheck_flags.config_path, gradcheck_over);
            const auto report = trm::cmd_gradcheck(cfg, gradcheck_flags.ctx);
            return report.pass ? kOk : kCheckFailure;
        }
        if (edie->parsed()) {
            if (edie->count("--trajectories")) edie_over["trajectories"] = edie_traj;
            if (edie->count("--lanes")) edie_over["lanes"] = edie_lanes;
            const auto cfg = trm::load_config(edie_flags.config_path, edie_over);
            const auto out = trm::cmd_edie(cfg, edie_flags.ctx);
            std::printf("edie: wrote %s and %s (%d x %d)%s\n", out.density_csv.c_str(),
                        out.flow_csv.c_str(), out.matrices.grid.n_t, out.matrices.grid.n_x,
                        out.rho_max > 0.0
                            ? (" rho_max=" + trm::format_double(out.rho_max) + " veh/m").c_str()
                            : "");
            return kOk;
        }
    } catch (const trm::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    } catch (const trm::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kRuntimeError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kRuntimeError;
    }
    return kConfigError;
}

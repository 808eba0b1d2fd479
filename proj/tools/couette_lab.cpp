#include "couette/harness.hpp"
#include "couette/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace couette;
using nlohmann::json;

namespace {

enum Exit { kPass = 0, kCheckFailure = 1, kConfigError = 2, kNumericalAbort = 3 };

struct GridOpts {
    int nx;
    int ny;
    double ly;
};

void add_grid(CLI::App* app, GridOpts& g)
{
    app->add_option("--nx", g.nx, "x resolution")->capture_default_str();
    app->add_option("--ny", g.ny, "y resolution")->capture_default_str();
    app->add_option("--ly", g.ly, "periodic box length in y")->capture_default_str();
}

void add_params(CLI::App* app, PhysParams& p)
{
    app->add_option("--nu", p.nu, "viscosity")->capture_default_str();
    app->add_option("--mu", p.mu, "resistivity")->capture_default_str();
    app->add_option("--eta", p.eta, "thermal diffusivity")->capture_default_str();
    app->add_option("--b", p.b, "Sobolev index of the weighted norms")->capture_default_str();
}

void emit(const std::string& path, const json& j)
{
    if (path == "-") {
        std::cout << j.dump(1) << "\n";
        return;
    }
    write_json_file(path, j);
    std::cout << "wrote " << path << "\n";
}

// CLI11 reads config files only at the top level; accept --config after the
// subcommand name as well.
std::vector<std::string> hoist_config(int argc, char** argv)
{
    std::vector<std::string> rest, config;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) {
            config = {a, argv[++i]};
        } else if (a.rfind("--config=", 0) == 0) {
            config = {a};
        } else {
            rest.push_back(a);
        }
    }
    config.insert(config.end(), rest.begin(), rest.end());
    std::reverse(config.begin(), config.end());  // App::parse(vector) consumes from the back
    return config;
}

int verdict(bool pass)
{
    std::cout << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? kPass : kCheckFailure;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spectral stability lab for Boussinesq-MHD near Couette flow"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML/INI config file, one [subcommand] section each");

    // certify
    CertifyConfig cert;
    std::string cert_out = "certify_report.json";
    auto* c_cmd = app.add_subcommand("certify", "Certify the multiplier inequalities on a (nu, k, xi) scan");
    c_cmd->add_option("--nu", cert.nus, "viscosities")->capture_default_str();
    c_cmd->add_option("--k", cert.ks, "x-wavenumbers")->capture_default_str();
    c_cmd->add_option("--family", cert.family, "linear, nonlinear or both")->capture_default_str();
    c_cmd->add_option("--depth", cert.depth, "bisection refinement depth")->capture_default_str();
    c_cmd->add_option("--half_width", cert.half_width, "scan half-width (default max(10 xi0, 50) per k)");
    c_cmd->add_flag("--drop-m3,--drop_m3", cert.drop_m3, "negative control: remove the third multiplier piece");
    c_cmd->add_option("--out", cert_out, "report path ('-' for stdout)")->capture_default_str();

    // linear
    LinearSuiteConfig lin;
    GridOpts lgrid{lin.grid.nx, lin.grid.ny, lin.grid.ly};
    std::string lin_data = "all", lin_out = "linear_report.json", lin_csv = "linear_timeseries.csv", lin_traj;
    auto* l_cmd = app.add_subcommand("linear", "Per-mode linear evolution with decay and space-time checks");
    add_grid(l_cmd, lgrid);
    add_params(l_cmd, lin.params);
    l_cmd->add_option("--data", lin_data, "theta, w, j, wj, all or random")->capture_default_str();
    l_cmd->add_option("--k", lin.ks, "x-wavenumbers checked")->capture_default_str();
    l_cmd->add_option("--t_max", lin.t_max, "final time")->capture_default_str();
    l_cmd->add_option("--dt", lin.dt, "sampling interval")->capture_default_str();
    l_cmd->add_option("--derivative", lin.derivative, "highest D_y order checked (0-2)")->capture_default_str();
    l_cmd->add_option("--seed", lin.seed, "RNG seed")->capture_default_str();
    l_cmd->add_flag("--oracle", lin.oracle, "also compare against the dense matrix-exponential oracle");
    l_cmd->add_option("--oracle_samples", lin.oracle_samples, "random initial states for the oracle")
        ->capture_default_str();
    l_cmd->add_option("--oracle_times", lin.oracle_times, "comparison times")->capture_default_str();
    l_cmd->add_option("--out", lin_out, "report path ('-' for stdout)")->capture_default_str();
    l_cmd->add_option("--csv", lin_csv, "time-series CSV path")->capture_default_str();
    l_cmd->add_option("--trajectory", lin_traj, "write the sampled states as a JSON trajectory");

    // nonlinear
    BootstrapConfig boot;
    GridOpts ngrid{boot.run.grid.nx, boot.run.grid.ny, boot.run.grid.ly};
    double nonlin_nu = boot.run.params.nu;
    bool no_nonlinear = false, sweep = false;
    double sweep_factor = 0.1;
    int sweep_tries = 6;
    std::string nl_out = "nonlinear_report.json";
    boot.ledger_path = "ledger.csv";
    boot.run.checkpoint_path = "checkpoint.json";
    boot.run.dump_path = "abort_dump.json";
    auto* n_cmd = app.add_subcommand("nonlinear", "Monitored nonlinear run against the bootstrap envelopes");
    add_grid(n_cmd, ngrid);
    n_cmd->add_option("--nu", nonlin_nu, "nu = mu = eta")->capture_default_str();
    n_cmd->add_option("--b", boot.run.params.b, "Sobolev index")->capture_default_str();
    n_cmd->add_option("--eps", boot.run.init.eps, "initial size (start value in sweep mode)")->capture_default_str();
    n_cmd->add_option("--alpha", boot.run.init.alpha, "theta exponent")->capture_default_str();
    n_cmd->add_option("--beta", boot.run.init.beta, "(w, j) exponent")->capture_default_str();
    n_cmd->add_option("--delta", boot.run.init.delta, "|Dx|^{1/3} theta exponent")->capture_default_str();
    n_cmd->add_option("--seed", boot.run.init.seed, "RNG seed")->capture_default_str();
    n_cmd->add_option("--init_kmax", boot.run.init.kmax, "largest |k| in the initial packets")->capture_default_str();
    n_cmd->add_option("--t_max", boot.run.t_max, "final time")->capture_default_str();
    n_cmd->add_option("--dt_max", boot.run.dt_max, "largest step")->capture_default_str();
    n_cmd->add_option("--cfl", boot.run.cfl_safety, "CFL safety factor")->capture_default_str();
    n_cmd->add_option("--sample_every", boot.run.sample_every, "steps between monitored samples")
        ->capture_default_str();
    n_cmd->add_option("--Ctilde", boot.Ctilde, "envelope constant for the |Dx|^{1/3} theta display")
        ->capture_default_str();
    n_cmd->add_option("--C2", boot.C2, "I-term constant (default: calibrated)");
    n_cmd->add_option("--calibration_t", boot.calibration_t, "length of the C2 calibration run")
        ->capture_default_str();
    n_cmd->add_flag("--linear-only", no_nonlinear, "drop the quadratic terms");
    n_cmd->add_flag("--sweep", sweep, "sweep eps downward from --eps and report the largest passing value");
    n_cmd->add_option("--sweep_factor", sweep_factor, "eps ratio between sweep runs")->capture_default_str();
    n_cmd->add_option("--sweep_tries", sweep_tries, "maximum number of sweep runs")->capture_default_str();
    n_cmd->add_option("--out", nl_out, "report path ('-' for stdout)")->capture_default_str();
    n_cmd->add_option("--ledger", boot.ledger_path, "ledger CSV path")->capture_default_str();
    n_cmd->add_option("--checkpoint", boot.run.checkpoint_path, "final-state checkpoint path")->capture_default_str();
    n_cmd->add_option("--dump", boot.run.dump_path, "state dump path on numerical abort")->capture_default_str();
    n_cmd->add_option("--trajectory", boot.trajectory_path, "write sampled states as a JSON trajectory");
    n_cmd->add_option("--trajectory_stride", boot.trajectory_stride, "samples between stored states")
        ->capture_default_str();

    // budget
    BudgetConfig bud;
    std::string bud_in, bud_out = "budget_report.json";
    int bud_k = 0;
    auto* b_cmd = app.add_subcommand("budget", "Energy-identity residual over an existing trajectory");
    b_cmd->add_option("--trajectory", bud_in, "trajectory JSON")->required();
    b_cmd->add_option("--field", bud.field, "theta, w or j")->capture_default_str();
    b_cmd->add_option("--form", bud.form, "plain or multiplier")->capture_default_str();
    b_cmd->add_flag("--nonlinear", bud.nonlinear, "include the quadratic terms in the balance");
    b_cmd->add_option("--stencil", bud.stencil, "3 or 5 point time derivative")->capture_default_str();
    auto* bk = b_cmd->add_option("--k", bud_k, "restrict to one x-wavenumber");
    b_cmd->add_option("--tol", bud.tol, "relative residual tolerance")->capture_default_str();
    b_cmd->add_option("--out", bud_out, "report path ('-' for stdout)")->capture_default_str();

    // fit
    std::string fit_in, fit_out = "fit_report.json";
    auto* f_cmd = app.add_subcommand("fit", "Re-fit decay rates from a time-series CSV");
    f_cmd->add_option("--csv", fit_in, "time-series CSV")->required();
    f_cmd->add_option("--out", fit_out, "report path ('-' for stdout)")->capture_default_str();

    try {
        app.parse(hoist_config(argc, argv));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (*c_cmd) {
            const CertifyOutcome o = run_certify(cert);
            json reports = json::array();
            for (const auto& r : o.reports) {
                reports.push_back(to_json(r));
                for (const auto& q : r.results)
                    std::printf("%-9s nu=%-6g %-28s min_margin=%-12.6g %s\n", r.family.c_str(), r.nu, q.name.c_str(),
                                q.min_margin, q.pass ? "ok" : "FAIL");
            }
            emit(cert_out, {{"schema_version", kSchemaVersion},
                            {"kind", "certify_report"},
                            {"config", to_json(cert)},
                            {"reports", reports},
                            {"pass", o.pass}});
            return verdict(o.pass);
        }
        if (*l_cmd) {
            lin.grid.nx = lgrid.nx;
            lin.grid.ny = lgrid.ny;
            lin.grid.ly = lgrid.ly;
            lin.data = parse_linear_data(lin_data);
            const LinearOutcome o = run_linear_suite(lin);
            for (const auto& f : o.fits)
                std::printf("k=%-3d %-10s rate=%-12.6g floor=%-12.6g %s\n", f.k, f.kind.c_str(), f.rate, f.floor,
                            f.pass ? "ok" : "FAIL");
            std::printf("space-time constant C=%.6g\n", o.spacetime.measured_C);
            if (o.oracle) std::printf("oracle max discrepancy=%.3g\n", o.oracle->max_discrepancy);
            if (!lin_csv.empty()) write_linear_csv(lin_csv, lin, o);
            if (!lin_traj.empty()) write_json_file(lin_traj, trajectory_to_json(o.series, to_json(lin)));
            emit(lin_out, linear_report(lin, o));
            return verdict(o.pass);
        }
        if (*n_cmd) {
            boot.run.grid.nx = ngrid.nx;
            boot.run.grid.ny = ngrid.ny;
            boot.run.grid.ly = ngrid.ly;
            boot.run.params.nu = boot.run.params.mu = boot.run.params.eta = nonlin_nu;
            boot.run.nonlinear = !no_nonlinear;
            if (sweep) {
                boot.validate();
                const SweepResult r = sweep_eps(boot, boot.run.init.eps, sweep_factor, sweep_tries);
                for (std::size_t i = 0; i < r.tried.size(); ++i)
                    std::printf("eps=%-10g %s\n", r.tried[i], r.passed[i] ? "pass" : "fail");
                if (r.largest_pass) std::printf("largest passing eps=%g\n", *r.largest_pass);
                emit(nl_out, {{"schema_version", kSchemaVersion},
                              {"kind", "eps_sweep"},
                              {"config", to_json(boot)},
                              {"sweep", {{"start", boot.run.init.eps}, {"factor", sweep_factor}, {"tries", sweep_tries}}},
                              {"tried", r.tried},
                              {"passed", r.passed},
                              {"largest_passing_eps", r.largest_pass ? json(*r.largest_pass) : json(nullptr)},
                              {"runs", r.reports}});
                return verdict(r.largest_pass.has_value());
            }
            const BootstrapOutcome o = run_bootstrap(boot);
            std::printf("C2=%.6g C=%.6g max improvement factor=%.6g worst identity %s=%.3g\n", o.C2_calibrated,
                        o.envelope.C, o.max_factor, o.worst_identity_name.c_str(), o.worst_identity);
            emit(nl_out, bootstrap_report(boot, o));
            return verdict(o.pass);
        }
        if (*b_cmd) {
            if (bk->count() > 0) bud.k = bud_k;
            bool pass = false;
            const json rep = run_budget(trajectory_from_json(read_json_file(bud_in)), bud, &pass);
            std::printf("max relative residual=%.3g\n", rep["max_relative"].get<double>());
            emit(bud_out, rep);
            return verdict(pass);
        }
        if (*f_cmd) {
            emit(fit_out, refit_csv(read_csv(fit_in)));
            return kPass;
        }
    } catch (const NumericalAbort& e) {
        std::fprintf(stderr, "numerical abort: %s\n", e.what());
        if (!e.dump_path.empty()) std::fprintf(stderr, "state dump: %s\n", e.dump_path.c_str());
        return kNumericalAbort;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    } catch (const json::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    }
    return kConfigError;
}

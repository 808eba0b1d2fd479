#include "couette/harness.hpp"

#include "couette/initial.hpp"
#include "couette/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace couette {

using nlohmann::json;

namespace {

json finite_or_null(double v)
{
    if (std::isfinite(v)) return v;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return nullptr;
}

}  // namespace

// ---------------------------------------------------------------------------
// certify

void CertifyConfig::validate() const
{
    if (ks.empty()) throw std::invalid_argument("certify: k list is empty");
    if (nus.empty()) throw std::invalid_argument("certify: nu list is empty");
    for (int k : ks)
        if (k == 0) throw std::invalid_argument("certify: k = 0 is not a certified wavenumber");
    for (double nu : nus)
        if (!(nu > 0.0 && nu <= 1.0)) throw std::invalid_argument("certify: nu must lie in (0,1]");
    if (family != "linear" && family != "nonlinear" && family != "both")
        throw std::invalid_argument("certify: family must be linear, nonlinear or both");
    if (depth < 0) throw std::invalid_argument("certify: depth must be >= 0");
    if (half_width && !(*half_width > 0.0)) throw std::invalid_argument("certify: half width must be positive");
}

json to_json(const CertifyConfig& c)
{
    json j{{"nu", c.nus}, {"k", c.ks}, {"family", c.family}, {"depth", c.depth}, {"drop_m3", c.drop_m3}};
    j["half_width"] = c.half_width ? json(*c.half_width) : json("max(10 xi0, 50)");
    return j;
}

json to_json(const CertificationReport& r)
{
    json res = json::array();
    for (const auto& q : r.results)
        res.push_back({{"name", q.name},
                       {"min_margin", q.min_margin},
                       {"min_margin_raw", q.min_margin_raw},
                       {"at_k", q.at_k},
                       {"at_xi", q.at_xi},
                       {"cells", q.cells},
                       {"certified_cells", q.certified_cells},
                       {"unresolved_cells", q.unresolved_cells},
                       {"pass", q.pass}});
    return {{"family", r.family},
            {"nu", r.nu},
            {"k", r.ks},
            {"half_widths", r.half_widths},
            {"depth", r.depth},
            {"results", res},
            {"notes", r.notes},
            {"max_symbol_scaled", r.max_symbol_scaled},
            {"max_phik_slope_scaled", r.max_phik_slope_scaled},
            {"measured_C", r.measured_C},
            {"applicable", r.applicable},
            {"pass", r.pass}};
}

CertifyOutcome run_certify(const CertifyConfig& c)
{
    c.validate();
    CertifyOptions opt;
    opt.depth = c.depth;
    opt.half_width = c.half_width;
    opt.drop_m3 = c.drop_m3;
    CertifyOutcome out;
    for (double nu : c.nus) {
        if (c.family != "nonlinear") out.reports.push_back(certify_linear_inequalities(nu, c.ks, opt));
        if (c.family != "linear") out.reports.push_back(certify_nonlinear_inequalities(nu, c.ks, opt));
    }
    for (const auto& r : out.reports) out.pass = out.pass && r.pass;
    return out;
}

// ---------------------------------------------------------------------------
// linear

LinearData parse_linear_data(const std::string& s)
{
    if (s == "theta") return LinearData::Theta;
    if (s == "w") return LinearData::W;
    if (s == "j") return LinearData::J;
    if (s == "wj") return LinearData::WJ;
    if (s == "all") return LinearData::All;
    if (s == "random") return LinearData::Random;
    throw std::invalid_argument("linear: data must be one of theta, w, j, wj, all, random");
}

std::string to_string(LinearData d)
{
    switch (d) {
    case LinearData::Theta: return "theta";
    case LinearData::W: return "w";
    case LinearData::J: return "j";
    case LinearData::WJ: return "wj";
    case LinearData::All: return "all";
    case LinearData::Random: return "random";
    }
    return "?";
}

namespace {

/// t * ly / (2 pi) must be an integer for the lab comparison to need no rounding.
bool lab_aligned(const GridSpec& g, double t)
{
    const double shift = t / g.dxi();
    return std::abs(shift - std::round(shift)) <= 1e-9 * std::max(1.0, shift);
}

}  // namespace

void LinearSuiteConfig::validate() const
{
    grid.validate();
    params.validate_linear();
    if (ks.empty()) throw std::invalid_argument("linear: k list is empty");
    for (int k : ks)
        if (std::abs(k) > grid.kmax_dealiased())
            throw std::invalid_argument("linear: |k| = " + std::to_string(std::abs(k)) +
                                        " exceeds the dealiased band of nx = " + std::to_string(grid.nx));
    if (!(t_max > 0.0)) throw std::invalid_argument("linear: t_max must be positive");
    if (!(dt > 0.0) || dt > t_max) throw std::invalid_argument("linear: dt must lie in (0, t_max]");
    if (derivative < 0 || derivative > 2) throw std::invalid_argument("linear: derivative order must be 0, 1 or 2");
    if (oracle) {
        if (grid.ny > DenseOracle::kMaxNy) throw std::invalid_argument("linear: oracle requires ny <= 256");
        if (oracle_samples < 1) throw std::invalid_argument("linear: oracle samples must be >= 1");
        for (double t : oracle_times) {
            if (!(t > 0.0) || t > 10.0) throw std::invalid_argument("linear: oracle times must lie in (0, 10]");
            if (!lab_aligned(grid, t))
                throw std::invalid_argument("linear: oracle time t must make t*ly/(2 pi) an integer");
        }
    }
}

json to_json(const LinearSuiteConfig& c)
{
    json j{{"grid", grid_to_json(c.grid)},
           {"params", params_to_json(c.params)},
           {"data", to_string(c.data)},
           {"k", c.ks},
           {"t_max", c.t_max},
           {"dt", c.dt},
           {"derivative", c.derivative},
           {"seed", c.seed},
           {"oracle", c.oracle}};
    if (c.oracle) {
        j["oracle_samples"] = c.oracle_samples;
        j["oracle_times"] = c.oracle_times;
    }
    return j;
}

json to_json(const DecayFit& f)
{
    return {{"k", f.k},
            {"kind", f.kind},
            {"rate", finite_or_null(f.rate)},
            {"prefactor", finite_or_null(f.prefactor)},
            {"floor", f.floor},
            {"fit_t0", f.fit_t0},
            {"fit_t1", f.fit_t1},
            {"bound_checked", f.bound_checked},
            {"bound_violation", f.bound_violation},
            {"bracket_ratio", f.bracket_ratio},
            {"pass", f.pass},
            {"note", f.note}};
}

json to_json(const SpacetimeReport& r)
{
    return {{"b", r.b},
            {"wj_sup", r.wj_sup},
            {"wj_grad", r.wj_grad},
            {"wj_enh", r.wj_enh},
            {"theta_sup", r.theta_sup},
            {"theta_grad", r.theta_grad},
            {"theta_enh", r.theta_enh},
            {"theta_weight", r.theta_weight},
            {"lhs", r.lhs},
            {"rhs_bracket", r.rhs_bracket},
            {"measured_C", r.measured_C}};
}

SystemState linear_initial_data(const LinearSuiteConfig& c, std::mt19937_64& rng)
{
    SystemState s(c.grid, c.params, 0.0);
    if (c.data == LinearData::Random) {
        const int kmax = c.grid.kmax_dealiased();
        s.theta = random_packet_field(c.grid, rng, kmax);
        s.w = random_packet_field(c.grid, rng, kmax);
        s.j = random_packet_field(c.grid, rng, kmax);
        return s;
    }
    std::vector<int> ks = c.ks;
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end(), [](int a, int b) { return std::abs(a) == std::abs(b); }), ks.end());
    for (int& k : ks) k = std::abs(k);
    const SpectralField g = gaussian_field(c.grid, ks);
    const bool th = c.data == LinearData::Theta || c.data == LinearData::All;
    const bool w = c.data == LinearData::W || c.data == LinearData::WJ || c.data == LinearData::All;
    const bool j = c.data == LinearData::J || c.data == LinearData::WJ || c.data == LinearData::All;
    if (th) s.theta = g;
    if (w) s.w = g;
    if (j) s.j = g;
    return s;
}

OracleComparison compare_with_oracle(const GridSpec& g, const PhysParams& p, int samples,
                                     const std::vector<double>& times, std::mt19937_64& rng, double tol)
{
    if (g.ny > DenseOracle::kMaxNy) throw std::invalid_argument("oracle: ny must be <= 256");
    for (double t : times)
        if (!lab_aligned(g, t)) throw std::invalid_argument("oracle: t*ly/(2 pi) must be an integer");
    OracleComparison out;
    out.times = times;
    const DenseOracle oracle(g, p);
    const int kmax = g.kmax_dealiased();
    for (int n = 0; n < samples; ++n) {
        SystemState init(g, p, 0.0);
        init.theta = random_packet_field(g, rng, kmax);
        init.w = random_packet_field(g, rng, kmax);
        init.j = random_packet_field(g, rng, kmax);
        for (double t : times) {
            const SystemState evolved = integrate_spectrum(init, t, t).back();
            const double d = relative_state_distance(evolved, oracle.propagate(init, t));
            out.discrepancy.push_back(d);
            out.max_discrepancy = std::max(out.max_discrepancy, d);
        }
    }
    out.pass = out.max_discrepancy <= tol;
    return out;
}

LinearOutcome run_linear_suite(const LinearSuiteConfig& c)
{
    c.validate();
    std::mt19937_64 rng(c.seed);
    LinearOutcome o;
    const SystemState init = linear_initial_data(c, rng);
    o.series = integrate_spectrum(init, c.t_max, c.dt);
    for (int k : c.ks) {
        const auto base = check_derivative_norms(o.series, k, 0);
        o.fits.insert(o.fits.end(), base.begin(), base.end());
        for (int N = 1; N <= c.derivative; ++N) {
            const auto d = check_derivative_norms(o.series, k, N);
            o.fits.insert(o.fits.end(), d.begin(), d.end());
        }
    }
    o.spacetime = spacetime_norms(o.series, c.params.b);
    if (c.oracle) o.oracle = compare_with_oracle(c.grid, c.params, c.oracle_samples, c.oracle_times, rng);
    for (const auto& f : o.fits) o.pass = o.pass && f.pass;
    if (!std::isfinite(o.spacetime.measured_C)) o.pass = false;
    if (o.oracle) o.pass = o.pass && o.oracle->pass;
    return o;
}

json linear_report(const LinearSuiteConfig& c, const LinearOutcome& o)
{
    json fits = json::array();
    for (const auto& f : o.fits) fits.push_back(to_json(f));
    json j{{"schema_version", kSchemaVersion},
           {"kind", "linear_report"},
           {"config", to_json(c)},
           {"fits", fits},
           {"spacetime", to_json(o.spacetime)},
           {"pass", o.pass}};
    if (o.oracle)
        j["oracle"] = {{"times", o.oracle->times},
                       {"discrepancy", o.oracle->discrepancy},
                       {"max_discrepancy", o.oracle->max_discrepancy},
                       {"pass", o.oracle->pass}};
    return j;
}

void write_linear_csv(const std::string& path, const LinearSuiteConfig& c, const LinearOutcome& o)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "# " << json{{"schema_version", kSchemaVersion}, {"config", to_json(c)}}.dump() << "\n";
    out << "t";
    for (int k : c.ks) out << ",theta_k" << k << ",wj_k" << k << ",dy_theta_k" << k << ",dy_wj_k" << k;
    out << "\n";
    out << std::setprecision(17);
    for (const auto& s : o.series) {
        out << s.t;
        for (int k : c.ks) {
            out << "," << row_norm(s.theta, k) << "," << std::hypot(row_norm(s.w, k), row_norm(s.j, k)) << ","
                << row_norm(s.theta, k, 1) << "," << std::hypot(row_norm(s.w, k, 1), row_norm(s.j, k, 1));
        }
        out << "\n";
    }
    for (const auto& f : o.fits) out << "# fit " << to_json(f).dump() << "\n";
}

CsvTable read_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read " + path);
    CsvTable tab;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            tab.comments.push_back(line.substr(std::min<std::size_t>(2, line.size())));
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (tab.columns.empty()) {
            tab.columns = cells;
            continue;
        }
        if (cells.size() != tab.columns.size())
            throw std::invalid_argument("csv: row width does not match the header in " + path);
        std::vector<double> row;
        for (const auto& c : cells) row.push_back(std::stod(c));
        tab.rows.push_back(std::move(row));
    }
    if (tab.columns.empty() || tab.columns.front() != "t")
        throw std::invalid_argument("csv: first column must be t in " + path);
    return tab;
}

json refit_csv(const CsvTable& table)
{
    std::vector<double> t;
    for (const auto& r : table.rows) t.push_back(r[0]);
    json fits = json::array();
    for (std::size_t c = 1; c < table.columns.size(); ++c) {
        std::vector<double> v;
        for (const auto& r : table.rows) v.push_back(r[c]);
        const DecayFit f = fit_decay(t, v);
        fits.push_back({{"column", table.columns[c]},
                        {"rate", finite_or_null(f.rate)},
                        {"prefactor", finite_or_null(f.prefactor)},
                        {"fit_t0", f.fit_t0},
                        {"fit_t1", f.fit_t1},
                        {"note", f.note}});
    }
    json source = nullptr;
    for (const auto& c : table.comments) {
        auto parsed = json::parse(c, nullptr, false);
        if (!parsed.is_discarded() && parsed.contains("config")) source = parsed;
    }
    return {{"schema_version", kSchemaVersion}, {"kind", "fit_report"}, {"source", source}, {"fits", fits}};
}

// ---------------------------------------------------------------------------
// trajectories and budget

json trajectory_to_json(const std::vector<SystemState>& series, const json& config)
{
    json states = json::array();
    for (const auto& s : series) states.push_back(state_to_json(s));
    return {{"schema_version", kSchemaVersion}, {"kind", "trajectory"}, {"config", config}, {"states", states}};
}

std::vector<SystemState> trajectory_from_json(const json& j)
{
    if (j.value("kind", "") != "trajectory") throw std::invalid_argument("trajectory: kind must be \"trajectory\"");
    if (j.value("schema_version", 0) != kSchemaVersion) throw std::invalid_argument("trajectory: unsupported schema");
    std::vector<SystemState> out;
    for (const auto& s : j.at("states")) out.push_back(state_from_json(s));
    if (out.size() < 3) throw std::invalid_argument("trajectory: at least three states are needed");
    return out;
}

void BudgetConfig::validate() const
{
    if (field != "theta" && field != "w" && field != "j")
        throw std::invalid_argument("budget: field must be theta, w or j");
    if (form != "plain" && form != "multiplier") throw std::invalid_argument("budget: form must be plain or multiplier");
    if (stencil != 3 && stencil != 5) throw std::invalid_argument("budget: stencil must be 3 or 5");
    if (!(tol > 0.0)) throw std::invalid_argument("budget: tolerance must be positive");
}

json to_json(const BudgetConfig& c)
{
    return {{"field", c.field},     {"form", c.form},
            {"nonlinear", c.nonlinear}, {"stencil", c.stencil},
            {"k", c.k ? json(*c.k) : json(nullptr)}, {"tol", c.tol}};
}

json run_budget(const std::vector<SystemState>& series, const BudgetConfig& c, bool* pass)
{
    c.validate();
    const BalanceField f = c.field == "theta" ? BalanceField::Theta : c.field == "w" ? BalanceField::W : BalanceField::J;
    const BalanceForm form = c.form == "plain" ? BalanceForm::Plain : BalanceForm::Multiplier;
    const PhysParams& p = series.front().params;
    const MultiplierSymbol M = build_symbol(SymbolKind::Full, p);
    const BalanceResult r = energy_balance_residual(series, f, form, M, p.b, c.nonlinear, c.k, c.stencil);
    const bool ok = r.max_relative <= c.tol;
    if (pass) *pass = ok;
    return {{"schema_version", kSchemaVersion},
            {"kind", "budget_report"},
            {"config", to_json(c)},
            {"params", params_to_json(p)},
            {"t", r.t},
            {"residual", r.residual},
            {"max_relative", r.max_relative},
            {"pass", ok}};
}

// ---------------------------------------------------------------------------
// nonlinear bootstrap

void BootstrapConfig::validate() const
{
    run.grid.validate();
    run.params.validate_nonlinear();
    if (!(run.t_max > 0.0)) throw std::invalid_argument("nonlinear: t_max must be positive");
    if (!(run.dt_max > 0.0)) throw std::invalid_argument("nonlinear: dt_max must be positive");
    if (!(run.cfl_safety > 0.0 && run.cfl_safety <= 1.0))
        throw std::invalid_argument("nonlinear: CFL safety must lie in (0,1]");
    if (run.sample_every < 1) throw std::invalid_argument("nonlinear: sample_every must be >= 1");
    if (trajectory_stride < 1) throw std::invalid_argument("nonlinear: trajectory stride must be >= 1");
    if (!(calibration_t > 0.0)) throw std::invalid_argument("nonlinear: calibration time must be positive");
    if (C2 && !(*C2 >= 0.0)) throw std::invalid_argument("nonlinear: C2 must be >= 0");
    BootstrapEnvelope env;
    env.eps = run.init.eps;
    env.alpha = run.init.alpha;
    env.beta = run.init.beta;
    env.delta = run.init.delta;
    env.Ctilde = Ctilde;
    env.C2 = C2.value_or(0.0);
    env.C = closing_constant(env.C2, Ctilde);
    env.validate();
    if (run.init.kmax > run.grid.kmax_dealiased())
        throw std::invalid_argument("nonlinear: initial kmax exceeds the dealiased band");
}

json to_json(const BootstrapConfig& c)
{
    const auto& r = c.run;
    return {{"grid", grid_to_json(r.grid)},
            {"params", params_to_json(r.params)},
            {"eps", r.init.eps},
            {"alpha", r.init.alpha},
            {"beta", r.init.beta},
            {"delta", r.init.delta},
            {"seed", r.init.seed},
            {"init_kmax", r.init.kmax},
            {"init_packets", r.init.packets},
            {"t_max", r.t_max},
            {"dt_policy", {{"dt_max", r.dt_max}, {"cfl_safety", r.cfl_safety}}},
            {"sample_every", r.sample_every},
            {"nonlinear", r.nonlinear},
            {"Ctilde", c.Ctilde},
            {"C2", c.C2 ? json(*c.C2) : json("calibrated")},
            {"calibration_t", c.calibration_t},
            {"trajectory_stride", c.trajectory_stride},
            {"identity_tol", c.identity_tol},
            {"quadrature_tol", c.quadrature_tol}};
}

namespace {

BootstrapEnvelope envelope_for(const BootstrapConfig& c, double C2)
{
    BootstrapEnvelope env;
    env.eps = c.run.init.eps;
    env.alpha = c.run.init.alpha;
    env.beta = c.run.init.beta;
    env.delta = c.run.init.delta;
    env.Ctilde = c.Ctilde;
    env.C2 = C2;
    env.C = closing_constant(C2, c.Ctilde);
    return env;
}

double mean_defect(const SpectralField& f, cplx mean0, double scale)
{
    const cplx m = f.at(0, 0);
    if (scale == 0.0) return std::abs(m - mean0);
    return std::abs(m - mean0) / scale;
}

}  // namespace

BootstrapOutcome run_bootstrap(const BootstrapConfig& c)
{
    c.validate();
    BootstrapOutcome o;
    const SystemState init = make_initial_data(c.run.grid, c.run.params, c.run.init);

    if (c.C2) {
        o.C2_calibrated = *c.C2;
    } else {
        BootstrapMonitor cal(envelope_for(c, 0.0), c.run.params);
        RunConfig rc = c.run;
        rc.t_max = std::min(c.calibration_t, c.run.t_max);
        rc.checkpoint_path.clear();
        run(init, rc, [&](const SystemState& s, const StepStats&) { cal.add(s, true); });
        o.C2_calibrated = cal.C2();
    }
    o.envelope = envelope_for(c, o.C2_calibrated);

    BootstrapMonitor mon(o.envelope, c.run.params);
    BootstrapMonitor coarse(o.envelope, c.run.params);
    const MultiplierSymbol M = build_symbol(SymbolKind::Full, c.run.params);
    const cplx mean_w = init.w.at(0, 0), mean_j = init.j.at(0, 0), mean_th = init.theta.at(0, 0);
    std::size_t sample = 0;
    std::vector<SystemState> kept;
    auto note = [&](const std::string& name, double v) {
        if (v > o.worst_identity || o.worst_identity_name.empty()) {
            o.worst_identity = std::max(o.worst_identity, v);
            o.worst_identity_name = name;
        }
    };
    auto observe = [&](const SystemState& s, const StepStats&) {
        mon.add(s, true);
        if (sample % 2 == 0) coarse.add(s, false);
        if (!c.trajectory_path.empty() && sample % static_cast<std::size_t>(c.trajectory_stride) == 0) kept.push_back(s);
        ++sample;
        for (const auto& chk : cancellation_checks(s, M, c.run.params.b, c.identity_tol).checks)
            note(chk.name, chk.relative);
        for (const auto& chk : structural_checks(s, c.identity_tol).checks) note(chk.name, chk.relative);
        note("mean_w", mean_defect(s.w, mean_w, s.w.max_abs()));
        note("mean_j", mean_defect(s.j, mean_j, s.j.max_abs()));
        note("mean_theta", mean_defect(s.theta, mean_th, s.theta.max_abs()));
    };
    o.run = run(init, c.run, observe);

    const json header{{"schema_version", kSchemaVersion}, {"config", to_json(c)}};
    if (!c.ledger_path.empty()) mon.write_csv(c.ledger_path, header.dump());
    if (!c.trajectory_path.empty()) write_json_file(c.trajectory_path, trajectory_to_json(kept, to_json(c)));
    o.monitor = mon.summary();
    o.max_factor = mon.max_factor();
    o.C2_trajectory = mon.C2();
    o.closing_holds = o.envelope.C >= 40.0 * std::sqrt(o.C2_trajectory) * o.envelope.Ctilde * (1.0 - 1e-12);
    o.identities_pass = o.worst_identity <= c.identity_tol;
    {
        // Richardson for the trapezoid rule: I* = I_h + (I_h - I_2h)/3; compare L2_t norms.
        const auto fine = mon.time_integrals();
        const auto crude = coarse.time_integrals();
        for (std::size_t i = 0; i < fine.size(); ++i) {
            if (!(fine[i] > 0.0)) continue;
            const double extrap = std::max(0.0, fine[i] + (fine[i] - crude[i]) / 3.0);
            o.quadrature_change = std::max(o.quadrature_change, std::abs(std::sqrt(extrap) / std::sqrt(fine[i]) - 1.0));
        }
    }
    o.quadrature_pass = o.quadrature_change <= c.quadrature_tol;
    o.pass = o.max_factor <= 0.5 && o.closing_holds && o.identities_pass && o.quadrature_pass;
    return o;
}

json bootstrap_report(const BootstrapConfig& c, const BootstrapOutcome& o)
{
    return {{"schema_version", kSchemaVersion},
            {"kind", "bootstrap_report"},
            {"config", to_json(c)},
            {"C2_calibrated", o.C2_calibrated},
            {"C2_trajectory", o.C2_trajectory},
            {"C", o.envelope.C},
            {"closing_condition_holds", o.closing_holds},
            {"monitor", o.monitor},
            {"max_improvement_factor", o.max_factor},
            {"worst_identity", {{"name", o.worst_identity_name}, {"relative", o.worst_identity}, {"pass", o.identities_pass}}},
            {"quadrature_change", o.quadrature_change},
            {"quadrature_pass", o.quadrature_pass},
            {"run",
             {{"steps", o.run.steps},
              {"t_final", o.run.t_final},
              {"max_cfl", o.run.max_cfl},
              {"max_dealias_removed", o.run.max_dealias_removed},
              {"max_wrap_fraction", o.run.max_wrap_fraction}}},
            {"pass", o.pass}};
}

SweepResult sweep_eps(const BootstrapConfig& base, double start, double factor, int max_tries)
{
    if (!(start > 0.0)) throw std::invalid_argument("sweep: start eps must be positive");
    if (!(factor > 0.0 && factor < 1.0)) throw std::invalid_argument("sweep: factor must lie in (0,1)");
    if (max_tries < 1) throw std::invalid_argument("sweep: max tries must be >= 1");
    SweepResult out;
    double eps = start;
    for (int i = 0; i < max_tries; ++i, eps *= factor) {
        BootstrapConfig c = base;
        c.run.init.eps = eps;
        out.tried.push_back(eps);
        bool ok = false;
        try {
            const BootstrapOutcome o = run_bootstrap(c);
            ok = o.pass;
            out.reports.push_back(bootstrap_report(c, o));
        } catch (const NumericalAbort& e) {
            out.reports.push_back({{"eps", eps}, {"aborted", e.what()}, {"dump", e.dump_path}, {"pass", false}});
        }
        out.passed.push_back(ok);
        if (ok) {
            out.largest_pass = eps;
            break;
        }
    }
    return out;
}

bool zero_data_stationary(const RunConfig& cfg, std::size_t* steps)
{
    SystemState s(cfg.grid, cfg.params, 0.0);
    bool stationary = true;
    const RunSummary sum = run(s, cfg, [&](const SystemState& x, const StepStats&) {
        stationary = stationary && x.w.max_abs() == 0.0 && x.j.max_abs() == 0.0 && x.theta.max_abs() == 0.0;
    });
    if (steps) *steps = sum.steps;
    return stationary;
}

}  // namespace couette

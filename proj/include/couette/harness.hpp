#pragma once

#include "couette/energy.hpp"
#include "couette/linear.hpp"
#include "couette/multipliers.hpp"
#include "couette/nonlinear.hpp"

#include <json.hpp>

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace couette {

// ---------------------------------------------------------------------------
// certify

struct CertifyConfig {
    std::vector<double> nus{1.0, 0.5, 0.1};
    std::vector<int> ks{-8, -7, -6, -5, -4, -3, -2, -1, 1, 2, 3, 4, 5, 6, 7, 8};
    std::string family = "both";  // linear, nonlinear or both
    int depth = 12;
    std::optional<double> half_width;
    bool drop_m3 = false;

    void validate() const;
};

nlohmann::json to_json(const CertifyConfig& c);
nlohmann::json to_json(const CertificationReport& r);

struct CertifyOutcome {
    std::vector<CertificationReport> reports;
    bool pass = true;
};

CertifyOutcome run_certify(const CertifyConfig& c);

// ---------------------------------------------------------------------------
// linear

enum class LinearData { Theta, W, J, WJ, All, Random };
LinearData parse_linear_data(const std::string& s);
std::string to_string(LinearData d);

struct LinearSuiteConfig {
    GridSpec grid{12, 256, 16.0 * kPi, true};
    PhysParams params{1.0, 1.0, 1.0, 1.1};
    LinearData data = LinearData::All;
    std::vector<int> ks{0, 1, 2, 3};
    double t_max = 30.0;
    double dt = 0.05;
    /// Derivative orders checked in addition to the base norms (0, 1 or 2).
    int derivative = 1;
    unsigned long long seed = 1;
    bool oracle = false;
    int oracle_samples = 1;
    std::vector<double> oracle_times{5.0};

    void validate() const;
};

nlohmann::json to_json(const LinearSuiteConfig& c);
nlohmann::json to_json(const DecayFit& f);
nlohmann::json to_json(const SpacetimeReport& r);

/// Initial data for the linear suite; Random draws band-limited packets from rng.
SystemState linear_initial_data(const LinearSuiteConfig& c, std::mt19937_64& rng);

struct OracleComparison {
    std::vector<double> times;
    std::vector<double> discrepancy;  // one entry per (sample, time)
    double max_discrepancy = 0.0;
    bool pass = true;
};

/// Characteristic solver vs dense oracle on `samples` random lab-frame initial
/// states; every time must map labels onto the lab grid without rounding.
OracleComparison compare_with_oracle(const GridSpec& g, const PhysParams& p, int samples,
                                     const std::vector<double>& times, std::mt19937_64& rng, double tol = 1e-6);

struct LinearOutcome {
    std::vector<SystemState> series;
    std::vector<DecayFit> fits;
    SpacetimeReport spacetime;
    std::optional<OracleComparison> oracle;
    bool pass = true;
};

LinearOutcome run_linear_suite(const LinearSuiteConfig& c);
nlohmann::json linear_report(const LinearSuiteConfig& c, const LinearOutcome& o);

/// Time series with columns t, per-k norms and D_y norms; preceded by a
/// comment line holding the schema version and resolved config, followed by
/// one comment line per fit.
void write_linear_csv(const std::string& path, const LinearSuiteConfig& c, const LinearOutcome& o);

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> comments;
};

CsvTable read_csv(const std::string& path);

/// Refit every norm column of a time-series table over [t_end/2, t_end].
nlohmann::json refit_csv(const CsvTable& table);

// ---------------------------------------------------------------------------
// trajectories and budget

nlohmann::json trajectory_to_json(const std::vector<SystemState>& series, const nlohmann::json& config);
std::vector<SystemState> trajectory_from_json(const nlohmann::json& j);

struct BudgetConfig {
    std::string field = "theta";  // theta, w or j
    std::string form = "plain";   // plain or multiplier
    bool nonlinear = false;
    int stencil = 5;
    std::optional<int> k;
    double tol = 1e-6;

    void validate() const;
};

nlohmann::json to_json(const BudgetConfig& c);
nlohmann::json run_budget(const std::vector<SystemState>& series, const BudgetConfig& c, bool* pass);

// ---------------------------------------------------------------------------
// nonlinear bootstrap

struct BootstrapConfig {
    RunConfig run;
    double Ctilde = 32.0;
    /// Overrides the calibrated I-term constant.
    std::optional<double> C2;
    double calibration_t = 5.0;
    std::string ledger_path;      // CSV, empty: not written
    std::string trajectory_path;  // JSON states every trajectory_stride samples, empty: not written
    int trajectory_stride = 10;
    double identity_tol = 1e-10;
    double quadrature_tol = 0.01;

    void validate() const;
};

nlohmann::json to_json(const BootstrapConfig& c);

struct BootstrapOutcome {
    double C2_calibrated = 0.0;
    double C2_trajectory = 0.0;
    BootstrapEnvelope envelope;
    RunSummary run;
    nlohmann::json monitor;
    double max_factor = 0.0;
    double worst_identity = 0.0;  // largest relative defect over cancellations, divergence, means
    std::string worst_identity_name;
    double quadrature_change = 0.0;  // Richardson: halving the sampling rate
    bool closing_holds = true;
    bool identities_pass = true;
    bool quadrature_pass = true;
    bool pass = true;
};

/// Calibration run for C2 (unless overridden), then the monitored run on
/// [0, t_max] with identity checks on every sampled state.
BootstrapOutcome run_bootstrap(const BootstrapConfig& c);
nlohmann::json bootstrap_report(const BootstrapConfig& c, const BootstrapOutcome& o);

struct SweepResult {
    std::vector<double> tried;
    std::vector<bool> passed;
    std::optional<double> largest_pass;
    std::vector<nlohmann::json> reports;
};

/// eps = start, start*factor, ... until the first pass or max_tries runs.
SweepResult sweep_eps(const BootstrapConfig& base, double start, double factor, int max_tries);

/// eps = 0 run: true iff every coefficient stays exactly zero.
bool zero_data_stationary(const RunConfig& cfg, std::size_t* steps = nullptr);

}  // namespace couette

#pragma once

#include "couette/multipliers.hpp"
#include "couette/state.hpp"

#include <json.hpp>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace couette {

/// sum of M(k,xi) |k|^{2 xpow} Lambda_t^{2b} |f|^2 * cell_measure, xi the lab frequency.
double m_weighted_energy(const MultiplierSymbol& M, const SpectralField& f, double t, double b, double xpow = 0.0);

/// Real parts of the ten inner products, index 0 holding I1. Terms with a
/// quadratic factor are set to zero when include_nonlinear is false.
std::array<double, 10> compute_I_terms(const SystemState& s, const MultiplierSymbol& M, double b,
                                       bool include_nonlinear = true);

struct IdentityCheck {
    std::string name;
    double value = 0.0;
    double scale = 0.0;     // product of the factor norms
    double relative = 0.0;  // |value| / scale (0 when scale is 0)
    bool pass = true;
};

struct CancellationReport {
    std::vector<IdentityCheck> checks;
    bool pass = true;
};

/// The three zero-mode cancellations plus I5 + I8 = 0.
CancellationReport cancellation_checks(const SystemState& s, const MultiplierSymbol& M, double b, double tol = 1e-10);

/// Structural checks that hold on every state: divergence-free u and b.
CancellationReport structural_checks(const SystemState& s, double tol = 1e-10);

enum class BalanceField { Theta, W, J };
enum class BalanceForm {
    Plain,      // M = 1, b = 0: the per-mode L2 identity
    Multiplier  // M-weighted Lambda_t^b identity
};

struct BalanceResult {
    std::vector<double> t;
    std::vector<double> residual;  // relative, at interior samples
    double max_relative = 0.0;
};

/// Exact energy identity evaluated along a sampled trajectory with centered
/// differences for d/dt; samples without a full stencil are not reported.
/// stencil 3 is second order (any increasing times), stencil 5 fourth order
/// (uniform sampling). k_only restricts every sum to one x-wavenumber.
BalanceResult energy_balance_residual(const std::vector<SystemState>& series, BalanceField which, BalanceForm form,
                                      const MultiplierSymbol& M, double b, bool include_nonlinear,
                                      std::optional<int> k_only = std::nullopt, int stencil = 3);

struct BootstrapEnvelope {
    double eps = 0.0;
    double alpha = 9.0;
    double beta = 5.5;
    double delta = 59.0 / 6.0;
    double C = 80.0;
    double Ctilde = 32.0;
    double C2 = 0.0;  // I-term constant estimate entering C >= 40 sqrt(C2) Ctilde

    /// Throws std::invalid_argument naming the first violated condition.
    void validate() const;

    double bound_theta(double nu) const;
    double bound_wj(double nu) const;
    double bound_theta13(double nu) const;
};

/// Smallest C satisfying C >= 80 and C >= 40 sqrt(C2) Ctilde.
double closing_constant(double C2, double Ctilde);

/// Norms entering the ansatz displays and the I-term brackets at one state.
struct StateNorms {
    double t = 0.0;
    // per field, index 0 theta, 1 w, 2 j
    std::array<double, 3> lam{};        // ||Lambda f||
    std::array<double, 3> grad{};       // ||grad Lambda f||
    std::array<double, 3> dx13{};       // || |Dx|^{1/3} Lambda f ||
    std::array<double, 3> dx23{};       // || |Dx|^{2/3} Lambda f ||
    std::array<double, 3> invlap_nz{};  // ||(-Lap)^{-1/2} Lambda f_nz||
    std::array<double, 3> zero{};       // ||Lambda f_0||
    std::array<double, 3> nonzero{};    // ||Lambda f_nz||
    double theta_grad_dx13 = 0.0;       // ||grad |Dx|^{1/3} Lambda theta||
    double theta_invlap_dx13_nz = 0.0;  // ||(-Lap)^{-1/2} |Dx|^{1/3} Lambda theta_nz||
};

StateNorms state_norms(const SystemState& s, double b);

/// Bracket expressions bounding |I_m| up to a constant; index order
/// I1, I2, I3+I7, I4, I6, I9, I10.
std::array<double, 7> I_brackets(const StateNorms& n, double nu);
inline const std::array<const char*, 7> kBracketNames{"I1", "I2", "I3+I7", "I4", "I6", "I9", "I10"};

struct LedgerRow {
    double t = 0.0;
    double E_theta = 0.0;
    double E_w = 0.0;
    double E_j = 0.0;
    double E_theta13 = 0.0;
    std::array<double, 10> I{};
    std::array<double, 7> bracket_ratio{};
    double A_theta = 0.0;
    double A_wj = 0.0;
    double A_theta13 = 0.0;
    double margin_theta = 0.0;
    double margin_wj = 0.0;
    double margin_theta13 = 0.0;
    double factor = 0.0;  // max of measured/bound over the three displays
};

/// Accumulates the ansatz left-hand sides (sup norms and trapezoid L2-in-time
/// integrals) over a trajectory and records one ledger row per sample.
class BootstrapMonitor {
public:
    BootstrapMonitor(const BootstrapEnvelope& env, const PhysParams& p);

    void add(const SystemState& s, bool with_I_terms = true);

    const std::vector<LedgerRow>& rows() const { return rows_; }
    double max_factor() const { return max_factor_; }
    double min_margin() const;
    /// Largest measured |I|/bracket per bracket over the trajectory.
    const std::array<double, 7>& max_bracket_ratio() const { return max_ratio_; }
    double C1() const { return max_ratio_[0]; }
    double C2() const;
    double C3() const { return max_ratio_[6]; }
    const BootstrapEnvelope& envelope() const { return env_; }
    /// Accumulated time integrals of squared norms, in the order grad, |Dx|^{1/3},
    /// (-Lap)^{-1/2} for theta, w, j, then the three |Dx|^{1/3} theta integrals.
    std::array<double, 12> time_integrals() const;

    /// header, when given, is written first as a '#' comment line.
    void write_csv(const std::string& path, const std::string& header = {}) const;
    nlohmann::json summary() const;

private:
    BootstrapEnvelope env_;
    PhysParams params_;
    MultiplierSymbol M_;
    std::vector<LedgerRow> rows_;
    bool have_prev_ = false;
    StateNorms prev_{};
    // sup terms
    std::array<double, 3> sup_lam_{};
    double sup_theta13_ = 0.0;
    // running integrals of squared norms
    std::array<double, 3> int_grad_{};
    std::array<double, 3> int_dx13_{};
    std::array<double, 3> int_invlap_{};
    double int_theta_grad13_ = 0.0;
    double int_theta_dx23_ = 0.0;
    double int_theta_invlap13_ = 0.0;
    double max_factor_ = 0.0;
    std::array<double, 7> max_ratio_{};
};

}  // namespace couette

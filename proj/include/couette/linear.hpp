#pragma once

#include "couette/state.hpp"

#include <array>
#include <string>
#include <vector>

namespace couette {

/// Component order along a characteristic: (theta, w, j).
using Mode3 = std::array<cplx, 3>;

struct ModeCharacteristic {
    int k = 0;
    double xi_init = 0.0;
    Mode3 state{};
    double t = 0.0;

    double xi() const { return xi_init - k * t; }
};

/// Time derivative of (theta, w, j) at instantaneous frequency xi.
/// The (0,0) mode is held constant (zero derivative).
Mode3 mode_rhs(double nu, double mu, double eta, int k, double xi, const Mode3& s);

/// Exponents of the exact diagonal propagator between times a and b for the
/// characteristic starting at xi_init: dissipation for all three components
/// plus the b^1 closure term for j.
std::array<double, 3> diagonal_exponent(const PhysParams& p, int k, double xi_init, double a, double b);

struct CharacteristicOptions {
    double rtol = 1e-11;
    int max_halvings = 30;
    /// Upper bound on the internal step; 0 selects the spec default policy.
    double max_step = 0.0;
};

struct CharacteristicStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
};

/// Advance one characteristic to t_end with Lawson RK4 and step-doubling control.
void advance_characteristic(ModeCharacteristic& mc, const PhysParams& p, double t_end, double h_max,
                            const CharacteristicOptions& opt, CharacteristicStats* stats = nullptr);

/// Default internal step: min(0.01, 0.1/(nu*xi_max^2)) * safety.
double default_linear_dt(const GridSpec& g, const PhysParams& p, double safety = 1.0);

/// Sample times 0, dt, 2dt, ..., t_max; every label evolves independently.
/// Returned states are in the frame sheared by their time.
std::vector<SystemState> integrate_spectrum(const SystemState& init, double t_max, double dt,
                                            const CharacteristicOptions& opt = {},
                                            CharacteristicStats* stats = nullptr);

/// Brute-force reference: per x-wavenumber, the lab-frame generator on the
/// physical y grid (multiplication by y, dense Fourier blocks for dissipation
/// and the b^1 closure) exponentiated by Padé-13 scaling and squaring.
class DenseOracle {
public:
    static constexpr int kMaxNy = 256;

    DenseOracle(const GridSpec& g, const PhysParams& p);

    /// init must be a lab-frame state (shear 0). Output is lab-frame at time t.
    SystemState propagate(const SystemState& init, double t) const;

private:
    GridSpec grid_;
    PhysParams params_;
};

SystemState dense_oracle(const SystemState& init, double t);

/// Relative L2 distance between two states after mapping both to the lab grid.
double relative_state_distance(const SystemState& a, const SystemState& b);

struct DecayFit {
    int k = 0;
    std::string kind;
    double rate = 0.0;
    double prefactor = 0.0;
    double floor = 0.0;
    double fit_t0 = 0.0;
    double fit_t1 = 0.0;
    double bound_violation = 0.0;  // max relative excess over the explicit bound, if any
    double bracket_ratio = 0.0;    // measured prefactor over the theorem's bracket
    bool bound_checked = false;
    bool pass = true;
    std::string note;
};

/// Per-k L2_y norm of row k.
double row_norm(const SpectralField& f, int k, int dpow = 0);

DecayFit check_theta_decay(const std::vector<SystemState>& series, int k);
DecayFit check_wj_decay(const std::vector<SystemState>& series, int k, double theta0_norm);
std::vector<DecayFit> check_derivative_norms(const std::vector<SystemState>& series, int k, int N);

/// Log-linear least squares of norms against time over [t_end/2, t_end].
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& norm);

struct SpacetimeReport {
    double b = 0.0;
    double wj_sup = 0.0;
    double wj_grad = 0.0;
    double wj_enh = 0.0;
    double theta_sup = 0.0;
    double theta_grad = 0.0;
    double theta_enh = 0.0;
    double theta_weight = 0.0;
    double lhs = 0.0;
    double rhs_bracket = 0.0;
    double measured_C = 0.0;
};

SpacetimeReport spacetime_norms(const std::vector<SystemState>& series, double b);

/// Trapezoid-rule L2-in-time norm of samples v(t_i).
double l2_time(const std::vector<double>& t, const std::vector<double>& v);

}  // namespace couette

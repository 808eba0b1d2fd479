#pragma once

#include "couette/state.hpp"

#include <functional>
#include <stdexcept>
#include <string>

namespace couette {

/// Q(grad u, grad b) = 2 dx b1 (dx u2 + dy u1) - 2 dx u1 (dx b2 + dy b1).
SpectralField compute_Q(const SpectralField& u1, const SpectralField& u2, const SpectralField& b1,
                        const SpectralField& b2);

/// Every quadratic term of the system, each formed in physical space and dealiased.
struct NonlinearPieces {
    SpectralField u_grad_theta;
    SpectralField u_grad_w;
    SpectralField u_grad_j;
    SpectralField b_grad_w;
    SpectralField b_grad_j;
    SpectralField Q;
    /// L2 energy of the summed products outside the retained band, before truncation.
    double dealias_removed = 0.0;
};

NonlinearPieces nonlinear_pieces(const SystemState& s);

struct FieldTriple {
    SpectralField w;
    SpectralField j;
    SpectralField theta;
};

/// Time derivative of the moving-frame coefficients. Couette transport is
/// absorbed by the frame, so what remains is dissipation, the dx couplings,
/// the -2 dx b1 closure and (optionally) the quadratic terms.
FieldTriple rhs(const SystemState& s, bool nonlinear = true, double* dealias_removed = nullptr);

/// The linear part alone, built per label from the characteristic right-hand side.
FieldTriple linear_rhs(const SystemState& s);

struct StepStats {
    double dt = 0.0;
    double cfl = 0.0;
    double dealias_removed = 0.0;
    double max_amplitude = 0.0;
};

struct StepOptions {
    bool nonlinear = true;
    /// Abort when the largest coefficient grows by more than this factor in one step.
    double growth_limit = 10.0;
};

class NumericalAbort : public std::runtime_error {
public:
    NumericalAbort(const std::string& what, std::string dump = {})
        : std::runtime_error(what), dump_path(std::move(dump))
    {
    }
    std::string dump_path;
};

/// One Lawson RK4 step: exact shear and integrating-factor dissipation, explicit
/// fourth order for couplings and quadratic terms. Throws NumericalAbort.
SystemState step(const SystemState& s, double dt, const StepOptions& opt = {}, StepStats* stats = nullptr);

/// Largest dt with advective CFL number <= safety, capped by dt_max.
double cfl_dt(const SystemState& s, double safety, double dt_max);

struct InitialDataSpec {
    double eps = 1e-3;
    double alpha = 9.0;
    double beta = 5.5;
    double delta = 59.0 / 6.0;
    unsigned long long seed = 1;
    int kmax = 3;
    int packets = 3;
};

/// Random y-localized band-limited data scaled to the three initial-norm conditions:
/// ||theta||_{H^b} <= eps nu^alpha, ||(w,j)||_{H^b} <= eps nu^beta, || |Dx|^{1/3} theta ||_{H^b} <= eps nu^delta.
SystemState make_initial_data(const GridSpec& g, const PhysParams& p, const InitialDataSpec& spec);

/// Fraction of L2 energy in |y| > 0.4 ly, summed over the three fields.
double wrap_fraction(const SystemState& s);

struct RunConfig {
    GridSpec grid{64, 256, 16.0 * kPi, true};
    PhysParams params{0.5, 0.5, 0.5, 1.1};
    InitialDataSpec init;
    double t_max = 50.0;
    double dt_max = 0.05;
    double cfl_safety = 0.5;
    int sample_every = 1;
    bool nonlinear = true;
    std::string checkpoint_path;  // empty: no checkpoint written
    std::string dump_path;        // state dump written on abort
};

struct RunSummary {
    std::size_t steps = 0;
    double t_final = 0.0;
    double max_cfl = 0.0;
    double max_dealias_removed = 0.0;
    double max_wrap_fraction = 0.0;
    bool aborted = false;
    std::string abort_reason;
    std::string dump_path;
};

using Observer = std::function<void(const SystemState&, const StepStats&)>;

/// Integrates from the given state to cfg.t_max, calling observe on the initial
/// state and every cfg.sample_every steps (and at the final time).
RunSummary run(SystemState s, const RunConfig& cfg, const Observer& observe);

}  // namespace couette

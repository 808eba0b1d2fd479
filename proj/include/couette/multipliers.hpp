#pragma once

#include "couette/spectral.hpp"

#include <optional>
#include <string>
#include <vector>

namespace couette {

struct ValueSlope {
    double value;
    double slope;
};

/// C1 profile with phi' = 1/4 on [-1,1] and exponential saturation outside.
ValueSlope phi_profile(double x);

struct XiZero {
    double nu;
    int k;
    double xi0;
    double residual;  // relative residual of nu*xi0*(k^2+xi0^2) - 96|k|
    int iterations;
};

XiZero solve_xi0(double nu, int k);

ValueSlope phi_k(const XiZero& z, double xi);
ValueSlope phi_k(double nu, int k, double xi);

enum class SymbolKind {
    ThetaM,        // M_k, built from eta
    LinearMprime,  // M'_k
    M1,
    M2,
    M3,
    Full,          // 1 + M1 + M2 + M3
    FullWithoutM3  // negative control only
};

std::string to_string(SymbolKind kind);

/// Pointwise symbol m(k, xi) with its analytic xi-derivative.
class MultiplierSymbol {
public:
    MultiplierSymbol(SymbolKind kind, const PhysParams& params);

    SymbolKind kind() const { return kind_; }
    const PhysParams& params() const { return params_; }

    ValueSlope eval(int k, double xi) const;
    double value(int k, double xi) const { return eval(k, xi).value; }
    double dxi(int k, double xi) const { return eval(k, xi).slope; }

    const XiZero& xi0(int k) const;

private:
    SymbolKind kind_;
    PhysParams params_;
    std::vector<XiZero> table_;  // indexed by |k| - 1
    mutable std::vector<XiZero> overflow_;
};

MultiplierSymbol build_symbol(SymbolKind kind, const PhysParams& params);

/// sup over xi of M'_k (attained as xi -> sgn(k)*infinity).
double max_mprime(double nu, int k);

struct InequalityResult {
    std::string name;
    double min_margin = 0.0;      // rounding-adjusted (raw + allowance)
    double min_margin_raw = 0.0;  // plain floating-point evaluation
    int at_k = 0;
    double at_xi = 0.0;
    std::size_t cells = 0;
    std::size_t certified_cells = 0;
    std::size_t unresolved_cells = 0;
    bool pass = true;
};

struct CertificationReport {
    std::string family;  // "linear" or "nonlinear"
    double nu = 0.0;
    std::vector<int> ks;
    std::vector<double> half_widths;  // per k
    int depth = 0;
    std::vector<InequalityResult> results;
    std::vector<std::string> notes;
    double max_symbol_scaled = 0.0;  // max 𝓜 nu^4 (nonlinear) or max M' (linear)
    double max_phik_slope_scaled = 0.0;  // max phi_k' |k| nu^3
    double measured_C = 0.0;         // max 𝓜 nu^4 - 6
    bool applicable = true;
    bool pass = true;
};

struct CertifyOptions {
    /// Half-width of the scanned interval; defaults to max(10 xi0, 50) per k.
    std::optional<double> half_width;
    int depth = 12;
    int base_cells = 256;
    bool drop_m3 = false;
};

CertificationReport certify_linear_inequalities(double nu, const std::vector<int>& kset,
                                                const CertifyOptions& opt = {});
CertificationReport certify_nonlinear_inequalities(double nu, const std::vector<int>& kset,
                                                   const CertifyOptions& opt = {});

/// Raw margin of a named inequality at one point; used by the refinement check.
double inequality_margin(const std::string& name, double nu, int k, double xi, bool drop_m3 = false);

double required_half_width(double nu, int k);

}  // namespace couette

#include "couette/multipliers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace couette {

namespace {

constexpr int kSymbolTableSize = 1024;
constexpr double kTwoPlusPi = 2.0 + kPi;
constexpr double kFourMinusPi = 4.0 - kPi;

double sgn(int k) { return k > 0 ? 1.0 : -1.0; }

}  // namespace

ValueSlope phi_profile(double x)
{
    const double ax = std::abs(x);
    if (ax <= 1.0) return {0.5 + 0.25 * x, 0.25};
    const double e = std::exp(1.0 - ax);
    const double g = std::copysign(2.0 - e, x);
    return {0.5 + 0.25 * g, 0.25 * e};
}

XiZero solve_xi0(double nu, int k)
{
    if (!(nu > 0.0)) throw std::invalid_argument("solve_xi0: nu must be > 0");
    if (k == 0) throw std::invalid_argument("solve_xi0: k must be nonzero");
    const double ak = std::abs(static_cast<double>(k));
    const double k2 = ak * ak;
    const double target = 96.0 * ak;
    auto f = [&](double x) { return nu * x * (k2 + x * x) - target; };
    auto fp = [&](double x) { return nu * (k2 + 3.0 * x * x); };

    double lo = 0.0;
    double hi = 96.0 / (nu * ak);
    double x = std::min(hi, std::cbrt(target / nu));
    int it = 0;
    for (; it < 200; ++it) {
        const double fx = f(x);
        if (fx == 0.0) break;
        if (fx < 0.0) lo = x; else hi = x;
        double next = x - fx / fp(x);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * x) {
            x = next;
            ++it;
            break;
        }
        x = next;
    }
    return {nu, k, x, std::abs(f(x)) / target, it};
}

ValueSlope phi_k(const XiZero& z, double xi)
{
    const double k2 = static_cast<double>(z.k) * z.k;
    const double x0 = z.xi0;
    const double a = (k2 + x0 * x0) * (k2 + x0 * x0);
    if (xi > 0.0) return {6.0 * a / (k2 * k2) - kTwoPlusPi, 0.0};
    if (xi >= -x0) {
        const double d = k2 + xi * xi;
        return {6.0 * a / (d * d) - kTwoPlusPi, -24.0 * xi * a / (d * d * d)};
    }
    const double rate = 24.0 * x0 / (kFourMinusPi * (k2 + x0 * x0));
    const double v = kFourMinusPi * std::exp(rate * (xi + x0));
    return {v, rate * v};
}

ValueSlope phi_k(double nu, int k, double xi) { return phi_k(solve_xi0(nu, k), xi); }

std::string to_string(SymbolKind kind)
{
    switch (kind) {
    case SymbolKind::ThetaM: return "M_theta";
    case SymbolKind::LinearMprime: return "M_prime";
    case SymbolKind::M1: return "M1";
    case SymbolKind::M2: return "M2";
    case SymbolKind::M3: return "M3";
    case SymbolKind::Full: return "M";
    case SymbolKind::FullWithoutM3: return "M_without_M3";
    }
    return "unknown";
}

MultiplierSymbol::MultiplierSymbol(SymbolKind kind, const PhysParams& params) : kind_(kind), params_(params)
{
    const double nu = kind == SymbolKind::ThetaM ? params.eta : params.nu;
    if (!(nu > 0.0)) throw std::invalid_argument("build_symbol: diffusivity must be > 0");
    if (kind != SymbolKind::ThetaM && kind != SymbolKind::M1 && kind != SymbolKind::M3) {
        table_.reserve(kSymbolTableSize);
        for (int k = 1; k <= kSymbolTableSize; ++k) table_.push_back(solve_xi0(nu, k));
    }
}

const XiZero& MultiplierSymbol::xi0(int k) const
{
    const int ak = std::abs(k);
    if (ak == 0) throw std::invalid_argument("xi0 requested for k = 0");
    if (ak <= static_cast<int>(table_.size())) return table_[ak - 1];
    for (const auto& z : overflow_)
        if (z.k == ak) return z;
    overflow_.push_back(solve_xi0(kind_ == SymbolKind::ThetaM ? params_.eta : params_.nu, ak));
    return overflow_.back();
}

ValueSlope MultiplierSymbol::eval(int k, double xi) const
{
    if (k == 0) {
        const bool has_one = kind_ == SymbolKind::Full || kind_ == SymbolKind::FullWithoutM3;
        return {has_one ? 1.0 : 0.0, 0.0};
    }
    const double s = sgn(k);
    const double ak = std::abs(static_cast<double>(k));
    const double nu = kind_ == SymbolKind::ThetaM ? params_.eta : params_.nu;
    const double scale = std::cbrt(nu / ak);

    auto m1 = [&] {
        const ValueSlope p = phi_profile(scale * s * xi);
        return ValueSlope{p.value, s * scale * p.slope};
    };
    auto m2 = [&] {
        const ValueSlope p = phi_k(xi0(k), s * xi);
        return ValueSlope{p.value, s * p.slope};
    };
    auto m3 = [&] {
        const double kk = static_cast<double>(k);
        return ValueSlope{(std::atan(xi / kk) + 0.5 * kPi) / (kk * kk), 1.0 / (kk * (kk * kk + xi * xi))};
    };

    switch (kind_) {
    case SymbolKind::ThetaM:
    case SymbolKind::M1: return m1();
    case SymbolKind::M2: return m2();
    case SymbolKind::M3: return m3();
    case SymbolKind::LinearMprime: {
        const auto a = m1();
        const auto b = m2();
        return {a.value + b.value, a.slope + b.slope};
    }
    case SymbolKind::Full: {
        const auto a = m1();
        const auto b = m2();
        const auto c = m3();
        return {1.0 + a.value + b.value + c.value, a.slope + b.slope + c.slope};
    }
    case SymbolKind::FullWithoutM3: {
        const auto a = m1();
        const auto b = m2();
        return {1.0 + a.value + b.value, a.slope + b.slope};
    }
    }
    return {0.0, 0.0};
}

MultiplierSymbol build_symbol(SymbolKind kind, const PhysParams& params) { return MultiplierSymbol(kind, params); }

double max_mprime(double nu, int k)
{
    if (k == 0) return 0.0;
    return 1.0 + phi_k(nu, k, 1.0).value;
}

double required_half_width(double nu, int k) { return std::max(10.0 * solve_xi0(nu, k).xi0, 50.0); }

// ---------------------------------------------------------------------------
// Certification

namespace {

struct Margin {
    double value;
    double scale;  // sum of magnitudes of the terms, for the rounding allowance
};

struct Inequality {
    std::string name;
    // Applicability window in s = sgn(k) xi; infinite bounds allowed.
    std::function<std::pair<double, double>(double xi0)> window;
    std::function<Margin(int k, double xi)> margin;
    // Lower bound of the margin for |xi| >= X outside the window ends, or NaN when the
    // window is bounded on that side.
    std::function<double(int k, double X, double xi0)> tail_bound;
};

constexpr double kRoundingUlps = 64.0;
constexpr double kOpenEndOffset = 1e-9;

double allowance(const Margin& m) { return kRoundingUlps * std::numeric_limits<double>::epsilon() * m.scale; }

struct SymbolSet {
    PhysParams p;
    MultiplierSymbol mprime;
    MultiplierSymbol full;
    MultiplierSymbol m1;
    MultiplierSymbol m2;
    MultiplierSymbol m3;

    explicit SymbolSet(double nu, bool drop_m3)
        : p{nu, nu, nu, 0.0},
          mprime(SymbolKind::LinearMprime, p),
          full(drop_m3 ? SymbolKind::FullWithoutM3 : SymbolKind::Full, p),
          m1(SymbolKind::M1, p),
          m2(SymbolKind::M2, p),
          m3(SymbolKind::M3, p)
    {
    }
};

std::vector<Inequality> make_inequalities(const SymbolSet& S, bool nonlinear)
{
    const double nu = S.p.nu;
    const double inf = std::numeric_limits<double>::infinity();
    auto everywhere = [inf](double) { return std::pair<double, double>{-inf, inf}; };
    auto enh = [nu](int k) { return 0.25 * std::cbrt(nu) * std::pow(std::abs(static_cast<double>(k)), 2.0 / 3.0); };
    // bound on the multiplier on the far negative side, where phi_k <= 4 - pi
    const double m3_sup_factor = kPi;
    std::vector<Inequality> out;

    if (!nonlinear) {
        auto base = [&S, nu, enh](int k, double xi, bool coupled) {
            const double kk = static_cast<double>(k);
            const double K = kk * kk + xi * xi;
            const auto m = S.mprime.eval(k, xi);
            const double diss = nu * K * (1.0 + 2.0 * m.value);
            const double tr = kk * m.slope;
            const double rhs = enh(k);
            double v = diss + tr - rhs;
            double sc = std::abs(diss) + std::abs(tr) + rhs;
            if (coupled) {
                const double c = (1.0 + m.value) * 4.0 * kk * xi / K;
                v += c;
                sc += std::abs(c);
            }
            return Margin{v, sc};
        };
        out.push_back({"linear_1", everywhere, [base](int k, double xi) { return base(k, xi, false); },
                       [nu, enh](int k, double X, double) { return nu * X * X - enh(k); }});
        out.push_back({"linear_2", everywhere, [base](int k, double xi) { return base(k, xi, true); },
                       [nu, enh](int k, double X, double) {
                           const double ak = std::abs(static_cast<double>(k));
                           return nu * X * X - enh(k) - (2.0 + kFourMinusPi) * 4.0 * ak / X;
                       }});
        return out;
    }

    const bool drop = S.full.kind() == SymbolKind::FullWithoutM3;
    auto base = [&S, nu, enh](int k, double xi, bool coupled) {
        const double kk = static_cast<double>(k);
        const double K = kk * kk + xi * xi;
        const auto m = S.full.eval(k, xi);
        const double diss = 2.0 * nu * K * m.value;
        const double tr = kk * m.slope;
        const double rhs = nu * K + enh(k) + 1.0 / K;
        double v = diss + tr - rhs;
        double sc = std::abs(diss) + std::abs(tr) + rhs;
        if (coupled) {
            const double c = m.value * 4.0 * kk * xi / K;
            v += c;
            sc += std::abs(c);
        }
        return Margin{v, sc};
    };
    auto tail1 = [nu, enh](int k, double X, double) { return nu * X * X - enh(k) - 1.0 / (X * X); };
    auto tail2 = [nu, enh, drop, m3_sup_factor](int k, double X, double) {
        const double ak = std::abs(static_cast<double>(k));
        const double msup = 2.0 + kFourMinusPi + (drop ? 0.0 : m3_sup_factor / (ak * ak));
        return nu * X * X - enh(k) - 1.0 / (X * X) - msup * 4.0 * ak / X;
    };
    out.push_back({"nonlinear_1", everywhere, [base](int k, double xi) { return base(k, xi, false); }, tail1});
    out.push_back({"nonlinear_2", everywhere, [base](int k, double xi) { return base(k, xi, true); }, tail2});

    out.push_back({"lemma_middle", [](double x0) { return std::pair<double, double>{-x0, 0.0}; },
                   [&S](int k, double xi) {
                       const double kk = static_cast<double>(k);
                       const double K = kk * kk + xi * xi;
                       const auto m2 = S.m2.eval(k, xi);
                       const double a = kk * m2.slope;
                       const double c = (kTwoPlusPi + m2.value) * 4.0 * kk * xi / K;
                       return Margin{a + c, std::abs(a) + std::abs(c)};
                   },
                   nullptr});
    out.push_back({"lemma_tail", [inf](double x0) { return std::pair<double, double>{-inf, -x0}; },
                   [&S, nu](int k, double xi) {
                       const double kk = static_cast<double>(k);
                       const double K = kk * kk + xi * xi;
                       const auto m2 = S.m2.eval(k, xi);
                       const double a = 0.25 * nu * xi * xi;
                       const double c = (kTwoPlusPi + m2.value) * 4.0 * kk * xi / K;
                       return Margin{a + c, std::abs(a) + std::abs(c)};
                   },
                   [nu](int k, double X, double) {
                       const double ak = std::abs(static_cast<double>(k));
                       return 0.25 * nu * X * X - (kTwoPlusPi + kFourMinusPi) * 4.0 * ak / X;
                   }});
    out.push_back({"lemma_combined", everywhere,
                   [&S, nu](int k, double xi) {
                       const double kk = static_cast<double>(k);
                       const double K = kk * kk + xi * xi;
                       const auto m1 = S.m1.eval(k, xi);
                       const auto m2 = S.m2.eval(k, xi);
                       const auto m3 = S.m3.eval(k, xi);
                       const double a = 0.25 * nu * xi * xi;
                       const double d = kk * m2.slope;
                       const double c = (1.0 + m1.value + m2.value + m3.value) * 4.0 * kk * xi / K;
                       return Margin{a + d + c, std::abs(a) + std::abs(d) + std::abs(c)};
                   },
                   [nu](int k, double X, double) {
                       const double ak = std::abs(static_cast<double>(k));
                       return 0.25 * nu * X * X - (2.0 + kFourMinusPi + kPi / (ak * ak)) * 4.0 * ak / X;
                   }});
    return out;
}

struct CellScan {
    double min_adj = std::numeric_limits<double>::infinity();
    double min_raw = std::numeric_limits<double>::infinity();
    double at_xi = 0.0;
    std::size_t cells = 0;
    std::size_t certified = 0;
    std::size_t unresolved = 0;
    bool negative = false;
};

void note_sample(CellScan& scan, const Margin& m, double xi)
{
    const double adj = m.value + allowance(m);
    if (adj < scan.min_adj) {
        scan.min_adj = adj;
        scan.at_xi = xi;
    }
    scan.min_raw = std::min(scan.min_raw, m.value);
    if (adj < 0.0) scan.negative = true;
}

// Refine [a,b] until the sampled minimum minus a secant-slope bound is nonnegative.
void scan_cell(const std::function<Margin(double)>& f, double a, double b, Margin fa, Margin fb, int depth,
               int max_depth, CellScan& scan)
{
    const double mid = 0.5 * (a + b);
    const Margin fm = f(mid);
    note_sample(scan, fm, mid);
    const double h = b - a;
    const double slope = 2.0 * std::max(std::abs(fm.value - fa.value), std::abs(fb.value - fm.value)) / (0.5 * h);
    const double lo = std::min({fa.value + allowance(fa), fm.value + allowance(fm), fb.value + allowance(fb)});
    const double lower_bound = lo - slope * h / 4.0;
    if (lower_bound >= 0.0) {
        ++scan.cells;
        ++scan.certified;
        return;
    }
    if (depth >= max_depth) {
        ++scan.cells;
        ++scan.unresolved;
        return;
    }
    scan_cell(f, a, mid, fa, fm, depth + 1, max_depth, scan);
    scan_cell(f, mid, b, fm, fb, depth + 1, max_depth, scan);
}

void scan_interval(const std::function<Margin(double)>& f, double a, double b, int cells, int max_depth,
                   CellScan& scan)
{
    if (!(b > a)) return;
    Margin fa = f(a);
    note_sample(scan, fa, a);
    for (int i = 0; i < cells; ++i) {
        const double x0 = a + (b - a) * i / cells;
        const double x1 = i + 1 == cells ? b : a + (b - a) * (i + 1) / cells;
        const Margin fb = f(x1);
        note_sample(scan, fb, x1);
        scan_cell(f, x0, x1, fa, fb, 0, max_depth, scan);
        fa = fb;
    }
}

CertificationReport certify(double nu, const std::vector<int>& kset, const CertifyOptions& opt, bool nonlinear)
{
    if (!(nu > 0.0)) throw std::invalid_argument("certify: nu must be > 0");
    if (kset.empty()) throw std::invalid_argument("certify: empty k list");
    if (opt.depth < 0) throw std::invalid_argument("certify: depth must be >= 0");

    CertificationReport rep;
    rep.family = nonlinear ? "nonlinear" : "linear";
    rep.nu = nu;
    rep.ks = kset;
    rep.depth = opt.depth;

    SymbolSet S(nu, opt.drop_m3);
    const auto ineqs = make_inequalities(S, nonlinear);
    for (const auto& q : ineqs) {
        InequalityResult r;
        r.name = q.name;
        r.min_margin = std::numeric_limits<double>::infinity();
        r.min_margin_raw = std::numeric_limits<double>::infinity();
        rep.results.push_back(r);
    }

    bool any_applicable = false;
    for (int k : kset) {
        if (k == 0) {
            rep.notes.push_back("k=0: not applicable, M'_0 = 0 and the multiplier reduces to 1");
            rep.half_widths.push_back(0.0);
            continue;
        }
        any_applicable = true;
        const double x0 = S.m2.xi0(k).xi0;
        const double need = required_half_width(nu, k);
        const double X = opt.half_width.value_or(need);
        if (X < need)
            throw std::invalid_argument("certify: xi range half-width " + std::to_string(X) +
                                        " below required " + std::to_string(need) + " for k=" + std::to_string(k));
        rep.half_widths.push_back(X);
        const double s = sgn(k);
        const double kink = std::cbrt(std::abs(static_cast<double>(k)) / nu);

        // breakpoints in s, mapped to xi = s * sgn(k)
        std::vector<double> bps = {-X, X, 0.0, -x0, -kink, kink};

        for (std::size_t qi = 0; qi < ineqs.size(); ++qi) {
            const auto& q = ineqs[qi];
            auto [wlo, whi] = q.window(x0);
            const double slo = std::max(wlo, -X);
            const double shi = std::min(whi, X);
            std::vector<double> pts;
            for (double b : bps)
                if (b >= slo && b <= shi) pts.push_back(b);
            pts.push_back(slo);
            pts.push_back(shi);
            std::sort(pts.begin(), pts.end());
            pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

            // Open windows exclude their endpoints.
            const bool open_lo = q.name == "lemma_middle";
            auto f = [&](double sv) { return q.margin(k, s * sv); };
            CellScan scan;
            for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
                double a = pts[i];
                double b = pts[i + 1];
                if (open_lo && i == 0) a += kOpenEndOffset * x0;
                if (open_lo && i + 2 == pts.size()) b -= kOpenEndOffset * x0;
                scan_interval(f, a, b, opt.base_cells, opt.depth, scan);
            }

            auto& r = rep.results[qi];
            r.cells += scan.cells;
            r.certified_cells += scan.certified;
            r.unresolved_cells += scan.unresolved;
            if (scan.min_adj < r.min_margin) {
                r.min_margin = scan.min_adj;
                r.at_k = k;
                r.at_xi = s * scan.at_xi;
            }
            r.min_margin_raw = std::min(r.min_margin_raw, scan.min_raw);
            if (scan.negative) r.pass = false;

            if (q.tail_bound) {
                const double tb = q.tail_bound(k, X, x0);
                const bool unbounded = !std::isfinite(whi) || !std::isfinite(wlo);
                if (unbounded) {
                    if (tb < 0.0) {
                        r.pass = false;
                        rep.notes.push_back(q.name + " k=" + std::to_string(k) +
                                            ": tail bound negative at |xi|=" + std::to_string(X));
                    }
                }
            }
        }

        for (double sv = -X; sv <= X; sv += X / 2048.0) {
            const double xi = s * sv;
            if (nonlinear) rep.max_symbol_scaled = std::max(rep.max_symbol_scaled, S.full.value(k, xi) * std::pow(nu, 4));
            else rep.max_symbol_scaled = std::max(rep.max_symbol_scaled, S.mprime.value(k, xi));
            rep.max_phik_slope_scaled = std::max(
                rep.max_phik_slope_scaled, phi_k(S.m2.xi0(k), sv).slope * std::abs(k) * std::pow(nu, 3));
        }
    }

    rep.applicable = any_applicable;
    if (any_applicable) {
        rep.notes.push_back("tail |xi| > X: nu xi^2 domination lower bound evaluated at |xi| = X and increasing beyond");
        rep.notes.push_back("margins include a rounding allowance of 64 ulp of the summed term magnitudes");
    }
    if (nonlinear) rep.measured_C = rep.max_symbol_scaled - 6.0;
    rep.pass = any_applicable;
    for (auto& r : rep.results) {
        if (!std::isfinite(r.min_margin)) {
            r.min_margin = 0.0;
            r.min_margin_raw = 0.0;
        }
        rep.pass = rep.pass && r.pass;
    }
    return rep;
}

}  // namespace

CertificationReport certify_linear_inequalities(double nu, const std::vector<int>& kset, const CertifyOptions& opt)
{
    return certify(nu, kset, opt, false);
}

CertificationReport certify_nonlinear_inequalities(double nu, const std::vector<int>& kset,
                                                   const CertifyOptions& opt)
{
    return certify(nu, kset, opt, true);
}

double inequality_margin(const std::string& name, double nu, int k, double xi, bool drop_m3)
{
    SymbolSet S(nu, drop_m3);
    const bool nonlinear = name.rfind("linear", 0) != 0;
    for (const auto& q : make_inequalities(S, nonlinear))
        if (q.name == name) return q.margin(k, xi).value;
    throw std::invalid_argument("unknown inequality: " + name);
}

}  // namespace couette

#include "couette/energy.hpp"

#include "couette/nonlinear.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace couette {

namespace {

using Weight = std::function<double(int, double)>;

// Re sum weight(k, lab xi) f conj(g) * cell_measure, optionally over one row.
double pair(const SpectralField& f, const SpectralField& g, const Weight& w, std::optional<int> k_only = std::nullopt)
{
    const auto& gr = f.grid;
    double acc = 0.0;
    for (int ik = 0; ik < gr.nx; ++ik) {
        const int k = gr.kx(ik);
        if (k_only && *k_only != k) continue;
        for (int iy = 0; iy < gr.ny; ++iy) {
            const cplx a = f(ik, iy);
            const cplx c = g(ik, iy);
            if (a == 0.0 || c == 0.0) continue;
            acc += w(k, f.lab_xi(ik, iy)) * (a * std::conj(c)).real();
        }
    }
    return acc * gr.cell_measure();
}

std::array<double, 10> I_terms_weighted(const SystemState& s, const Weight& W, bool include_nonlinear,
                                        std::optional<int> k_only)
{
    std::array<double, 10> I{};
    const SpectralField tx = dx(s.theta);
    const SpectralField wx = dx(s.w);
    const SpectralField jx = dx(s.j);
    I[3] = pair(tx, s.w, W, k_only);
    I[4] = pair(jx, s.w, W, k_only);
    I[7] = pair(wx, s.j, W, k_only);
    if (include_nonlinear) {
        const NonlinearPieces np = nonlinear_pieces(s);
        const Weight W13 = [&](int k, double xi) { return std::pow(std::abs(static_cast<double>(k)), 2.0 / 3.0) * W(k, xi); };
        I[0] = pair(np.u_grad_theta, s.theta, W, k_only);
        I[1] = pair(np.u_grad_w, s.w, W, k_only);
        I[2] = pair(np.b_grad_j, s.w, W, k_only);
        I[5] = pair(np.u_grad_j, s.j, W, k_only);
        I[6] = pair(np.b_grad_w, s.j, W, k_only);
        I[8] = pair(np.Q, s.j, W, k_only);
        I[9] = pair(np.u_grad_theta, s.theta, W13, k_only);
    }
    return I;
}

Weight multiplier_weight(const MultiplierSymbol& M, double t, double b)
{
    return [&M, t, b](int k, double xi) { return M.value(k, xi) * lambda_symbol(t, 2.0 * b, k, xi); };
}

double sup_physical(const SpectralField& f)
{
    double m = 0.0;
    for (const cplx& v : to_physical(f)) m = std::max(m, std::abs(v));
    return m;
}

double l2(const SpectralField& f) { return std::sqrt(weighted_sum(f, [](int, double) { return 1.0; })); }

IdentityCheck make_check(const std::string& name, double value, double scale, double tol)
{
    IdentityCheck c;
    c.name = name;
    c.value = value;
    c.scale = scale;
    c.relative = scale > 0.0 ? std::abs(value) / scale : std::abs(value);
    c.pass = std::isfinite(value) && c.relative <= tol;
    return c;
}

}  // namespace

double m_weighted_energy(const MultiplierSymbol& M, const SpectralField& f, double t, double b, double xpow)
{
    return weighted_sum(f, [&](int k, double xi) {
        const double kx = xpow == 0.0 ? 1.0 : std::pow(std::abs(static_cast<double>(k)), 2.0 * xpow);
        return kx * M.value(k, xi) * lambda_symbol(t, 2.0 * b, k, xi);
    });
}

std::array<double, 10> compute_I_terms(const SystemState& s, const MultiplierSymbol& M, double b, bool include_nonlinear)
{
    return I_terms_weighted(s, multiplier_weight(M, s.t, b), include_nonlinear, std::nullopt);
}

CancellationReport cancellation_checks(const SystemState& s, const MultiplierSymbol& M, double b, double tol)
{
    CancellationReport rep;
    const double t = s.t;
    const auto Mtb = [&](int k, double xi) { return std::sqrt(M.value(k, xi)) * lambda_symbol(t, b, k, xi); };

    const VectorField u = biot_savart(s.w);
    const VectorField bf = biot_savart(s.j);
    const SpectralField u0 = project_zero(u.c1);
    const SpectralField b0 = project_zero(bf.c1);
    const double u0_sup = sup_physical(u0);
    const double b0_sup = sup_physical(b0);
    const Weight one = [](int, double) { return 1.0; };

    // <M(u0 dx theta_nz), M theta_0>
    {
        const SpectralField th_nz = project_nonzero(s.theta);
        const SpectralField prod = apply_real_symbol(product(u0, dx(th_nz)), Mtb);
        const SpectralField rhs = apply_real_symbol(project_zero(s.theta), Mtb);
        const double v = pair(prod, rhs, one);
        rep.checks.push_back(make_check("u0_dx_theta_nz_vs_theta0", v, l2(prod) * l2(rhs), tol));
    }
    // <u0 dx(M theta_nz), M theta_nz>
    {
        const SpectralField g = apply_real_symbol(project_nonzero(s.theta), Mtb);
        const SpectralField gx = dx(g);
        const double v = pair(product(u0, gx), g, one);
        rep.checks.push_back(make_check("u0_dx_theta_nz_skew", v, u0_sup * l2(gx) * l2(g), tol));
    }
    // <b0 dx(M w_nz), M j_nz> + <b0 dx(M j_nz), M w_nz>
    {
        const SpectralField gw = apply_real_symbol(project_nonzero(s.w), Mtb);
        const SpectralField gj = apply_real_symbol(project_nonzero(s.j), Mtb);
        const double v = pair(product(b0, dx(gw)), gj, one) + pair(product(b0, dx(gj)), gw, one);
        rep.checks.push_back(make_check("b0_wj_pair", v, b0_sup * (l2(dx(gw)) * l2(gj) + l2(dx(gj)) * l2(gw)), tol));
    }
    // I5 + I8
    {
        const Weight W = multiplier_weight(M, t, b);
        const SpectralField jx = dx(s.j);
        const SpectralField wx = dx(s.w);
        const double i5 = pair(jx, s.w, W);
        const double i8 = pair(wx, s.j, W);
        const Weight absW = [&](int k, double xi) { return std::abs(W(k, xi)); };
        const double scale = std::sqrt(weighted_sum(jx, absW) * weighted_sum(s.w, absW)) +
                             std::sqrt(weighted_sum(wx, absW) * weighted_sum(s.j, absW));
        rep.checks.push_back(make_check("I5_plus_I8", i5 + i8, scale, tol));
    }
    rep.pass = std::all_of(rep.checks.begin(), rep.checks.end(), [](const IdentityCheck& c) { return c.pass; });
    return rep;
}

CancellationReport structural_checks(const SystemState& s, double tol)
{
    CancellationReport rep;
    auto divergence = [&](const char* name, const SpectralField& src) {
        const VectorField v = biot_savart(src);
        double m = 0.0;
        for (int ik = 0; ik < src.grid.nx; ++ik)
            for (int iy = 0; iy < src.grid.ny; ++iy) {
                const cplx d = cplx{0.0, static_cast<double>(src.grid.kx(ik))} * v.c1(ik, iy) +
                               cplx{0.0, src.lab_xi(ik, iy)} * v.c2(ik, iy);
                m = std::max(m, std::abs(d));
            }
        rep.checks.push_back(make_check(name, m, src.max_abs(), tol));
    };
    divergence("div_u", s.w);
    divergence("div_b", s.j);
    rep.pass = std::all_of(rep.checks.begin(), rep.checks.end(), [](const IdentityCheck& c) { return c.pass; });
    return rep;
}

BalanceResult energy_balance_residual(const std::vector<SystemState>& series, BalanceField which, BalanceForm form,
                                      const MultiplierSymbol& M, double b, bool include_nonlinear,
                                      std::optional<int> k_only, int stencil)
{
    if (stencil != 3 && stencil != 5) throw std::invalid_argument("energy_balance_residual: stencil must be 3 or 5");
    BalanceResult res;
    const std::size_t n = series.size();
    const std::size_t half = static_cast<std::size_t>(stencil / 2);
    if (n < static_cast<std::size_t>(stencil)) return res;

    auto field_of = [&](const SystemState& s) -> const SpectralField& {
        switch (which) {
        case BalanceField::Theta: return s.theta;
        case BalanceField::W: return s.w;
        default: return s.j;
        }
    };
    const PhysParams& p = series.front().params;
    const double kappa = which == BalanceField::Theta ? p.eta : (which == BalanceField::W ? p.nu : p.mu);
    const bool plain = form == BalanceForm::Plain;

    auto weight_at = [&](double t) -> Weight {
        if (plain) return [](int, double) { return 1.0; };
        return multiplier_weight(M, t, b);
    };
    auto row_sum = [&](const SpectralField& f, const Weight& w) {
        return weighted_sum(f, [&](int k, double xi) { return k_only && *k_only != k ? 0.0 : w(k, xi); });
    };

    std::vector<double> E(n);
    for (std::size_t i = 0; i < n; ++i) E[i] = row_sum(field_of(series[i]), weight_at(series[i].t));

    for (std::size_t i = 1; i < n; ++i)
        if (!(series[i].t > series[i - 1].t)) throw std::invalid_argument("energy_balance_residual: times must increase");
    for (std::size_t i = half; i + half < n; ++i) {
        const SystemState& s = series[i];
        const double t = s.t;
        const double h1 = t - series[i - 1].t;
        const double h2 = series[i + 1].t - t;
        double dE = 0.0;
        if (stencil == 3) {
            dE = -h2 / (h1 * (h1 + h2)) * E[i - 1] + (h2 - h1) / (h1 * h2) * E[i] + h1 / (h2 * (h1 + h2)) * E[i + 1];
        } else {
            const double h0 = series[i - 1].t - series[i - 2].t;
            const double h3 = series[i + 2].t - series[i + 1].t;
            const double hmax = std::max({h0, h1, h2, h3});
            if (std::max({h0, h1, h2, h3}) - std::min({h0, h1, h2, h3}) > 1e-9 * hmax)
                throw std::invalid_argument("energy_balance_residual: the five-point stencil needs uniform sampling");
            const double h = 0.25 * (series[i + 2].t - series[i - 2].t);
            dE = (E[i - 2] - 8.0 * E[i - 1] + 8.0 * E[i + 1] - E[i + 2]) / (12.0 * h);
        }

        const Weight W = weight_at(t);
        const SpectralField& f = field_of(s);
        double transport = 0.0;
        if (!plain)
            transport = row_sum(f, [&](int k, double xi) { return k * M.dxi(k, xi) * lambda_symbol(t, 2.0 * b, k, xi); });
        const double diss = 2.0 * kappa * row_sum(f, [&](int k, double xi) { return (k * k + xi * xi) * W(k, xi); });
        double closure = 0.0;
        if (which == BalanceField::J)
            closure = row_sum(f, [&](int k, double xi) {
                const double K = k * k + xi * xi;
                return k == 0 || K == 0.0 ? 0.0 : W(k, xi) * 4.0 * k * xi / K;
            });

        const auto I = I_terms_weighted(s, W, include_nonlinear, k_only);
        double rhs = 0.0;
        double rhs_abs = 0.0;
        auto add = [&](double c, double v) {
            rhs += c * v;
            rhs_abs += std::abs(c * v);
        };
        switch (which) {
        case BalanceField::Theta: add(-2.0, I[0]); break;
        case BalanceField::W:
            add(-2.0, I[1]);
            add(2.0, I[2]);
            add(2.0, I[3]);
            add(2.0, I[4]);
            break;
        case BalanceField::J:
            add(-2.0, I[5]);
            add(2.0, I[6]);
            add(2.0, I[7]);
            add(2.0, I[8]);
            break;
        }
        const double lhs = dE + transport + diss + closure;
        const double scale = std::abs(dE) + std::abs(transport) + std::abs(diss) + std::abs(closure) + rhs_abs;
        const double r = scale > 0.0 ? std::abs(lhs - rhs) / scale : 0.0;
        res.t.push_back(t);
        res.residual.push_back(r);
        res.max_relative = std::max(res.max_relative, r);
    }
    return res;
}

void BootstrapEnvelope::validate() const
{
    constexpr double slack = 1e-12;
    if (!(eps >= 0.0)) throw std::invalid_argument("envelope: eps must be >= 0");
    if (beta < 5.5 - slack) throw std::invalid_argument("envelope: beta >= 11/2 violated");
    if (delta < beta + 13.0 / 3.0 - slack) throw std::invalid_argument("envelope: delta >= beta + 13/3 violated");
    if (alpha < delta - beta + 14.0 / 3.0 - slack)
        throw std::invalid_argument("envelope: alpha >= delta - beta + 14/3 violated");
    if (Ctilde < 32.0) throw std::invalid_argument("envelope: Ctilde >= 32 violated");
    if (C < 80.0) throw std::invalid_argument("envelope: C >= 80 violated");
    if (C2 < 0.0) throw std::invalid_argument("envelope: C2 must be >= 0");
    if (C < 40.0 * std::sqrt(C2) * Ctilde * (1.0 - slack))
        throw std::invalid_argument("envelope: C >= 40 sqrt(C2) Ctilde violated");
}

double BootstrapEnvelope::bound_theta(double nu) const { return C * eps * std::pow(nu, alpha); }
double BootstrapEnvelope::bound_wj(double nu) const { return C * eps * std::pow(nu, beta); }
double BootstrapEnvelope::bound_theta13(double nu) const { return Ctilde * eps * std::pow(nu, delta); }

double closing_constant(double C2, double Ctilde) { return std::max(80.0, 40.0 * std::sqrt(C2) * Ctilde); }

StateNorms state_norms(const SystemState& s, double b)
{
    StateNorms n;
    n.t = s.t;
    const double t = s.t;
    auto lam2 = [&](int k, double xi) { return lambda_symbol(t, 2.0 * b, k, xi); };
    auto kp = [](int k, double p) { return std::pow(std::abs(static_cast<double>(k)), p); };
    const SpectralField* fs[3] = {&s.theta, &s.w, &s.j};
    for (int c = 0; c < 3; ++c) {
        const SpectralField& f = *fs[c];
        n.lam[c] = std::sqrt(weighted_sum(f, lam2));
        n.grad[c] = std::sqrt(weighted_sum(f, [&](int k, double xi) { return (k * k + xi * xi) * lam2(k, xi); }));
        n.dx13[c] = std::sqrt(weighted_sum(f, [&](int k, double xi) { return kp(k, 2.0 / 3.0) * lam2(k, xi); }));
        n.dx23[c] = std::sqrt(weighted_sum(f, [&](int k, double xi) { return kp(k, 4.0 / 3.0) * lam2(k, xi); }));
        n.invlap_nz[c] = std::sqrt(weighted_sum(f, [&](int k, double xi) {
            return k == 0 ? 0.0 : lam2(k, xi) / (k * k + xi * xi);
        }));
        n.zero[c] = std::sqrt(weighted_sum(f, [&](int k, double xi) { return k == 0 ? lam2(k, xi) : 0.0; }));
        n.nonzero[c] = std::sqrt(weighted_sum(f, [&](int k, double xi) { return k == 0 ? 0.0 : lam2(k, xi); }));
    }
    n.theta_grad_dx13 = std::sqrt(weighted_sum(s.theta, [&](int k, double xi) {
        return (k * k + xi * xi) * kp(k, 2.0 / 3.0) * lam2(k, xi);
    }));
    n.theta_invlap_dx13_nz = std::sqrt(weighted_sum(s.theta, [&](int k, double xi) {
        return k == 0 ? 0.0 : kp(k, 2.0 / 3.0) * lam2(k, xi) / (k * k + xi * xi);
    }));
    return n;
}

std::array<double, 7> I_brackets(const StateNorms& n, double nu)
{
    const double a4 = std::pow(nu, -4.0);
    const double a5 = std::pow(nu, -5.0);
    const double a53 = std::pow(nu, -5.0 / 3.0);
    enum { T = 0, W = 1, J = 2 };
    auto advect = [&](int f) {
        return a4 * n.invlap_nz[W] * n.grad[f] * n.lam[f] + a53 * n.zero[W] * n.dx13[f] * n.dx13[f] +
               a5 * n.zero[W] * n.nonzero[f] * n.nonzero[f];
    };
    std::array<double, 7> br{};
    br[0] = advect(T);
    br[1] = advect(W);
    br[2] = a4 * n.invlap_nz[J] * (n.grad[J] * n.lam[W] + n.grad[W] * n.lam[J]) +
            2.0 * a5 * n.zero[J] * n.nonzero[J] * n.nonzero[W] + 2.0 * a53 * n.zero[J] * n.dx13[J] * n.dx13[W];
    br[3] = a4 * n.dx23[T] * n.dx13[W];
    br[4] = advect(J);
    br[5] = a4 * std::sqrt(n.invlap_nz[J] * n.grad[J] * n.invlap_nz[W] * n.grad[W]) * n.lam[J] +
            a4 * n.zero[W] * n.invlap_nz[J] * n.grad[J];
    br[6] = a4 * n.invlap_nz[W] * n.theta_grad_dx13 * n.dx13[T] + a5 * n.zero[W] * n.theta_invlap_dx13_nz * n.theta_grad_dx13 +
            a4 * n.dx13[W] * n.grad[T] * n.dx13[T] + a53 * n.zero[W] * n.dx23[T] * n.dx23[T];
    return br;
}

BootstrapMonitor::BootstrapMonitor(const BootstrapEnvelope& env, const PhysParams& p)
    : env_(env), params_(p), M_(SymbolKind::Full, p)
{
    env_.validate();
    params_.validate_nonlinear();
}

void BootstrapMonitor::add(const SystemState& s, bool with_I_terms)
{
    const double b = params_.b;
    const double nu = params_.nu;
    const StateNorms n = state_norms(s, b);

    for (int c = 0; c < 3; ++c) sup_lam_[c] = std::max(sup_lam_[c], n.lam[c]);
    sup_theta13_ = std::max(sup_theta13_, n.dx13[0]);
    if (have_prev_) {
        const double h = n.t - prev_.t;
        auto trap = [h](double a, double c) { return 0.5 * h * (a * a + c * c); };
        for (int c = 0; c < 3; ++c) {
            int_grad_[c] += trap(prev_.grad[c], n.grad[c]);
            int_dx13_[c] += trap(prev_.dx13[c], n.dx13[c]);
            int_invlap_[c] += trap(prev_.invlap_nz[c], n.invlap_nz[c]);
        }
        int_theta_grad13_ += trap(prev_.theta_grad_dx13, n.theta_grad_dx13);
        int_theta_dx23_ += trap(prev_.dx23[0], n.dx23[0]);
        int_theta_invlap13_ += trap(prev_.theta_invlap_dx13_nz, n.theta_invlap_dx13_nz);
    }
    prev_ = n;
    have_prev_ = true;

    const double sn = std::sqrt(nu);
    const double s6 = std::pow(nu, 1.0 / 6.0);
    LedgerRow row;
    row.t = s.t;
    row.A_theta = sup_lam_[0] + sn * std::sqrt(int_grad_[0]) + s6 * std::sqrt(int_dx13_[0]) + std::sqrt(int_invlap_[0]);
    row.A_wj = std::sqrt(int_invlap_[1]) + std::sqrt(int_invlap_[2]);
    for (int c = 1; c < 3; ++c) row.A_wj += sup_lam_[c] + sn * std::sqrt(int_grad_[c]) + s6 * std::sqrt(int_dx13_[c]);
    row.A_theta13 = sup_theta13_ + sn * std::sqrt(int_theta_grad13_) + s6 * std::sqrt(int_theta_dx23_) +
                    std::sqrt(int_theta_invlap13_);

    const double B1 = env_.bound_theta(nu);
    const double B2 = env_.bound_wj(nu);
    const double B3 = env_.bound_theta13(nu);
    row.margin_theta = B1 - row.A_theta;
    row.margin_wj = B2 - row.A_wj;
    row.margin_theta13 = B3 - row.A_theta13;
    auto ratio = [](double a, double bound) {
        if (bound > 0.0) return a / bound;
        return a > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    };
    row.factor = std::max({ratio(row.A_theta, B1), ratio(row.A_wj, B2), ratio(row.A_theta13, B3)});
    max_factor_ = std::max(max_factor_, row.factor);

    row.E_theta = m_weighted_energy(M_, s.theta, s.t, b);
    row.E_w = m_weighted_energy(M_, s.w, s.t, b);
    row.E_j = m_weighted_energy(M_, s.j, s.t, b);
    row.E_theta13 = m_weighted_energy(M_, s.theta, s.t, b, 1.0 / 3.0);
    if (with_I_terms) {
        row.I = compute_I_terms(s, M_, b, true);
        const auto br = I_brackets(n, nu);
        const std::array<double, 7> val{std::abs(row.I[0]), std::abs(row.I[1]), std::abs(row.I[2] + row.I[6]),
                                        std::abs(row.I[3]), std::abs(row.I[5]), std::abs(row.I[8]),
                                        std::abs(row.I[9])};
        for (int m = 0; m < 7; ++m) {
            row.bracket_ratio[m] = br[m] > 0.0 ? val[m] / br[m] : 0.0;
            max_ratio_[m] = std::max(max_ratio_[m], row.bracket_ratio[m]);
        }
    }
    rows_.push_back(row);
}

double BootstrapMonitor::min_margin() const
{
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : rows_) m = std::min({m, r.margin_theta, r.margin_wj, r.margin_theta13});
    return rows_.empty() ? 0.0 : m;
}

double BootstrapMonitor::C2() const { return *std::max_element(max_ratio_.begin() + 1, max_ratio_.begin() + 6); }

std::array<double, 12> BootstrapMonitor::time_integrals() const
{
    std::array<double, 12> out{};
    for (int c = 0; c < 3; ++c) {
        out[3 * c] = int_grad_[c];
        out[3 * c + 1] = int_dx13_[c];
        out[3 * c + 2] = int_invlap_[c];
    }
    out[9] = int_theta_grad13_;
    out[10] = int_theta_dx23_;
    out[11] = int_theta_invlap13_;
    return out;
}

void BootstrapMonitor::write_csv(const std::string& path, const std::string& header) const
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.precision(17);
    if (!header.empty()) out << "# " << header << '\n';
    out << "t,E_theta,E_w,E_j,E_theta13";
    for (int m = 1; m <= 10; ++m) out << ",I" << m;
    for (const char* nm : kBracketNames) out << ",ratio_" << nm;
    out << ",A_theta,A_wj,A_theta13,margin_theta,margin_wj,margin_theta13,factor\n";
    for (const auto& r : rows_) {
        out << r.t << ',' << r.E_theta << ',' << r.E_w << ',' << r.E_j << ',' << r.E_theta13;
        for (double v : r.I) out << ',' << v;
        for (double v : r.bracket_ratio) out << ',' << v;
        out << ',' << r.A_theta << ',' << r.A_wj << ',' << r.A_theta13 << ',' << r.margin_theta << ',' << r.margin_wj
            << ',' << r.margin_theta13 << ',' << r.factor << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

nlohmann::json BootstrapMonitor::summary() const
{
    nlohmann::json j;
    const double nu = params_.nu;
    j["envelope"] = {{"eps", env_.eps},   {"alpha", env_.alpha}, {"beta", env_.beta}, {"delta", env_.delta},
                     {"C", env_.C},       {"Ctilde", env_.Ctilde}, {"C2", env_.C2}};
    j["bounds"] = {{"theta", env_.bound_theta(nu)}, {"wj", env_.bound_wj(nu)}, {"theta13", env_.bound_theta13(nu)}};
    if (!rows_.empty()) {
        const auto& r = rows_.back();
        j["final"] = {{"t", r.t}, {"A_theta", r.A_theta}, {"A_wj", r.A_wj}, {"A_theta13", r.A_theta13}};
    }
    j["samples"] = rows_.size();
    j["max_improvement_factor"] = max_factor_;
    j["min_margin"] = min_margin();
    nlohmann::json ratios;
    for (int m = 0; m < 7; ++m) ratios[kBracketNames[m]] = max_ratio_[m];
    j["max_bracket_ratio"] = ratios;
    j["measured_C1"] = C1();
    j["measured_C2"] = C2();
    j["measured_C3"] = C3();
    j["pass"] = max_factor_ <= 0.5;
    return j;
}

}  // namespace couette

#include "couette/nonlinear.hpp"

#include "couette/initial.hpp"
#include "couette/io.hpp"
#include "couette/linear.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace couette {

namespace {

constexpr double kFlushFloor = 1e-280;

void require_frame(const SystemState& s)
{
    for (const SpectralField* f : {&s.w, &s.j, &s.theta})
        if (f->shear != s.t) throw std::invalid_argument("state fields must be in the frame sheared by the state time");
}

// Forward transform of a physical sum, returning the truncated field and the removed energy.
SpectralField truncate(const GridSpec& g, const std::vector<cplx>& phys, double shear, double& removed)
{
    SpectralField out = from_physical(g, phys, shear);
    if (g.dealias) {
        double acc = 0.0;
        for (int ik = 0; ik < g.nx; ++ik)
            for (int iy = 0; iy < g.ny; ++iy)
                if (!g.retained(ik, iy)) {
                    acc += std::norm(out(ik, iy));
                    out(ik, iy) = 0.0;
                }
        removed += acc * g.cell_measure();
    }
    return out;
}

template <class F>
std::vector<cplx> combine(std::size_t n, F&& f)
{
    std::vector<cplx> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
}

}  // namespace

SpectralField compute_Q(const SpectralField& u1, const SpectralField& u2, const SpectralField& b1,
                        const SpectralField& b2)
{
    const auto p_bx1 = to_physical(dx(b1));
    const auto p_ustrain = to_physical(dx(u2) + dy(u1));
    const auto p_ux1 = to_physical(dx(u1));
    const auto p_bstrain = to_physical(dx(b2) + dy(b1));
    const auto q = combine(p_bx1.size(), [&](std::size_t i) {
        return 2.0 * p_bx1[i] * p_ustrain[i] - 2.0 * p_ux1[i] * p_bstrain[i];
    });
    double removed = 0.0;
    return truncate(u1.grid, q, u1.shear, removed);
}

NonlinearPieces nonlinear_pieces(const SystemState& s)
{
    const auto& g = s.grid();
    const double sh = s.t;
    const VectorField u = biot_savart(s.w);
    const VectorField b = biot_savart(s.j);

    const auto u1 = to_physical(u.c1), u2 = to_physical(u.c2);
    const auto b1 = to_physical(b.c1), b2 = to_physical(b.c2);
    const auto wx = to_physical(dx(s.w)), wy = to_physical(dy(s.w));
    const auto jx = to_physical(dx(s.j)), jy = to_physical(dy(s.j));
    const auto tx = to_physical(dx(s.theta)), ty = to_physical(dy(s.theta));
    const std::size_t n = g.size();

    NonlinearPieces out;
    double removed = 0.0;
    auto adv = [&](const std::vector<cplx>& a1, const std::vector<cplx>& a2, const std::vector<cplx>& fx,
                   const std::vector<cplx>& fy) {
        double r = 0.0;
        auto res = truncate(g, combine(n, [&](std::size_t i) { return a1[i] * fx[i] + a2[i] * fy[i]; }), sh, r);
        removed = std::max(removed, r);
        return res;
    };
    out.u_grad_theta = adv(u1, u2, tx, ty);
    out.u_grad_w = adv(u1, u2, wx, wy);
    out.u_grad_j = adv(u1, u2, jx, jy);
    out.b_grad_w = adv(b1, b2, wx, wy);
    out.b_grad_j = adv(b1, b2, jx, jy);
    out.Q = compute_Q(u.c1, u.c2, b.c1, b.c2);
    out.dealias_removed = removed;
    return out;
}

FieldTriple linear_rhs(const SystemState& s)
{
    const auto& g = s.grid();
    const auto& p = s.params;
    FieldTriple d{SpectralField(g, s.w.shear), SpectralField(g, s.w.shear), SpectralField(g, s.w.shear)};
    for (int ik = 0; ik < g.nx; ++ik)
        for (int iy = 0; iy < g.ny; ++iy) {
            const Mode3 m = mode_rhs(p.nu, p.mu, p.eta, g.kx(ik), s.w.lab_xi(ik, iy),
                                     Mode3{s.theta(ik, iy), s.w(ik, iy), s.j(ik, iy)});
            d.theta(ik, iy) = m[0];
            d.w(ik, iy) = m[1];
            d.j(ik, iy) = m[2];
        }
    return d;
}

namespace {

// Coupling terms plus (optionally) the quadratic terms: the explicit part of the Lawson scheme.
FieldTriple explicit_part(const SystemState& s, bool nonlinear, double* removed)
{
    const auto& g = s.grid();
    FieldTriple d{SpectralField(g, s.t), SpectralField(g, s.t), SpectralField(g, s.t)};
    for (int ik = 0; ik < g.nx; ++ik) {
        const cplx ikx{0.0, static_cast<double>(g.kx(ik))};
        for (int iy = 0; iy < g.ny; ++iy) {
            d.w(ik, iy) = ikx * (s.theta(ik, iy) + s.j(ik, iy));
            d.j(ik, iy) = ikx * s.w(ik, iy);
        }
    }
    if (nonlinear) {
        const NonlinearPieces np = nonlinear_pieces(s);
        d.w -= np.u_grad_w;
        d.w += np.b_grad_j;
        d.j -= np.u_grad_j;
        d.j += np.b_grad_w;
        d.j += np.Q;
        d.theta -= np.u_grad_theta;
        if (removed) *removed = std::max(*removed, np.dealias_removed);
    }
    return d;
}

// Diagonal integrating factors for every label over [a,b], component order (theta, w, j).
std::array<std::vector<double>, 3> factors(const GridSpec& g, const PhysParams& p, double a, double b)
{
    std::array<std::vector<double>, 3> e;
    for (auto& v : e) v.resize(g.size());
    for (int ik = 0; ik < g.nx; ++ik)
        for (int iy = 0; iy < g.ny; ++iy) {
            const auto d = diagonal_exponent(p, g.kx(ik), g.xi(iy), a, b);
            const std::size_t i = static_cast<std::size_t>(ik) * g.ny + iy;
            for (int c = 0; c < 3; ++c) e[c][i] = std::exp(d[c]);
        }
    return e;
}

void scale(SpectralField& f, const std::vector<double>& e)
{
    for (std::size_t i = 0; i < f.coef.size(); ++i) f.coef[i] *= e[i];
}

FieldTriple apply(const std::array<std::vector<double>, 3>& e, FieldTriple x, double shear)
{
    scale(x.theta, e[0]);
    scale(x.w, e[1]);
    scale(x.j, e[2]);
    x.theta.shear = x.w.shear = x.j.shear = shear;
    return x;
}

SystemState make_state(const SystemState& like, double t, FieldTriple f)
{
    SystemState s;
    s.params = like.params;
    s.t = t;
    s.w = std::move(f.w);
    s.j = std::move(f.j);
    s.theta = std::move(f.theta);
    s.w.shear = s.j.shear = s.theta.shear = t;
    return s;
}

// a + h*b for each field; shear taken from a
FieldTriple axpy(const FieldTriple& a, double h, const FieldTriple& b)
{
    FieldTriple out = a;
    for (std::size_t i = 0; i < out.w.coef.size(); ++i) {
        out.w.coef[i] += h * b.w.coef[i];
        out.j.coef[i] += h * b.j.coef[i];
        out.theta.coef[i] += h * b.theta.coef[i];
    }
    return out;
}

double max_amp(const SystemState& s) { return std::max({s.w.max_abs(), s.j.max_abs(), s.theta.max_abs()}); }

void flush(SpectralField& f)
{
    for (auto& c : f.coef)
        if (std::abs(c) < kFlushFloor) c = 0.0;
}

}  // namespace

FieldTriple rhs(const SystemState& s, bool nonlinear, double* dealias_removed)
{
    require_frame(s);
    FieldTriple d = linear_rhs(s);
    if (nonlinear) {
        const NonlinearPieces np = nonlinear_pieces(s);
        d.w -= np.u_grad_w;
        d.w += np.b_grad_j;
        d.j -= np.u_grad_j;
        d.j += np.b_grad_w;
        d.j += np.Q;
        d.theta -= np.u_grad_theta;
        if (dealias_removed) *dealias_removed = np.dealias_removed;
    }
    return d;
}

SystemState step(const SystemState& s, double h, const StepOptions& opt, StepStats* stats)
{
    if (!(h > 0.0)) throw std::invalid_argument("step: dt must be positive");
    require_frame(s);
    const auto& g = s.grid();
    const double t = s.t;
    const double tm = t + 0.5 * h;
    const double te = t + h;
    const auto e_am = factors(g, s.params, t, tm);
    const auto e_me = factors(g, s.params, tm, te);
    auto e_ae = e_am;
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < e_ae[c].size(); ++i) e_ae[c][i] *= e_me[c][i];

    double removed = 0.0;
    const FieldTriple u{s.w, s.j, s.theta};
    const FieldTriple k1 = explicit_part(s, opt.nonlinear, &removed);
    const FieldTriple k2 = explicit_part(make_state(s, tm, apply(e_am, axpy(u, 0.5 * h, k1), tm)), opt.nonlinear, &removed);
    const FieldTriple k3 = explicit_part(make_state(s, tm, axpy(apply(e_am, u, tm), 0.5 * h, k2)), opt.nonlinear, &removed);
    const FieldTriple k4 = explicit_part(make_state(s, te, axpy(apply(e_ae, u, te), h, apply(e_me, k3, te))),
                                         opt.nonlinear, &removed);

    FieldTriple mid = axpy(k2, 1.0, k3);
    FieldTriple acc = apply(e_ae, k1, te);
    acc = axpy(acc, 2.0, apply(e_me, mid, te));
    acc = axpy(acc, 1.0, k4);
    SystemState out = make_state(s, te, axpy(apply(e_ae, u, te), h / 6.0, acc));

    for (SpectralField* f : {&out.w, &out.j, &out.theta}) {
        apply_dealias(*f);
        enforce_reality(*f);
        flush(*f);
    }
    const double before = max_amp(s);
    const double after = max_amp(out);
    if (!out.w.finite() || !out.j.finite() || !out.theta.finite())
        throw NumericalAbort("non-finite coefficients after step at t=" + std::to_string(t));
    if (before > 0.0 && after > opt.growth_limit * before)
        throw NumericalAbort("instability guard: max amplitude grew by factor " + std::to_string(after / before) +
                             " in one step at t=" + std::to_string(t));
    if (stats) {
        stats->dt = h;
        stats->dealias_removed = removed;
        stats->max_amplitude = after;
        const double unit = cfl_dt(s, 1.0, 1e300);
        stats->cfl = h / unit;
    }
    return out;
}

double cfl_dt(const SystemState& s, double safety, double dt_max)
{
    const auto& g = s.grid();
    const VectorField u = biot_savart(s.w);
    const VectorField b = biot_savart(s.j);
    const auto u1 = to_physical(u.c1), u2 = to_physical(u.c2);
    const auto b1 = to_physical(b.c1), b2 = to_physical(b.c2);
    const double hx = 2.0 * kPi / g.nx;
    const double hy = g.ly / g.ny;
    double rate = 0.0;
    for (std::size_t i = 0; i < u1.size(); ++i) {
        // Alfvén-type transport by b enters like advection
        const double a1 = std::max(std::abs(u1[i].real()), std::abs(b1[i].real()));
        const double a2 = std::max(std::abs(u2[i].real()), std::abs(b2[i].real()));
        rate = std::max(rate, a1 / hx + a2 / hy);
    }
    if (rate == 0.0) return dt_max;
    return std::min(dt_max, safety / rate);
}

SystemState make_initial_data(const GridSpec& g, const PhysParams& p, const InitialDataSpec& spec)
{
    g.validate();
    if (spec.eps < 0.0) throw std::invalid_argument("initial data: eps must be >= 0");
    if (spec.kmax < 1 || spec.kmax > g.kmax_dealiased())
        throw std::invalid_argument("initial data: kmax must lie in [1, dealiased kmax]");
    SystemState s(g, p, 0.0);
    std::mt19937_64 rng(spec.seed);
    auto packet_field = [&]() { return random_packet_field(g, rng, spec.kmax, spec.packets); };

    s.w = packet_field();
    s.j = packet_field();
    s.theta = packet_field();
    // vorticity and current of localized fields carry no mean
    s.w(0, 0) = 0.0;
    s.j(0, 0) = 0.0;

    const double b = p.b;
    const double nu = p.nu;
    const double wj = std::hypot(weighted_norm(s.w, 0.0, b, 0.0), weighted_norm(s.j, 0.0, b, 0.0));
    const double wj_target = spec.eps * std::pow(nu, spec.beta);
    if (wj > 0.0) {
        s.w *= wj_target / wj;
        s.j *= wj_target / wj;
    }
    SpectralField th0 = project_zero(s.theta);
    SpectralField thn = project_nonzero(s.theta);
    const double n0 = weighted_norm(th0, 0.0, b, 0.0);
    const double th_target = spec.eps * std::pow(nu, spec.alpha) / std::sqrt(2.0);
    if (n0 > 0.0) th0 *= th_target / n0;
    const double nd = weighted_norm(thn, 0.0, b, 1.0 / 3.0);
    const double nh = weighted_norm(thn, 0.0, b, 0.0);
    if (nd > 0.0) {
        double c = spec.eps * std::pow(nu, spec.delta) / nd;
        c = std::min(c, th_target / nh);
        thn *= c;
    }
    s.theta = th0 + thn;
    return s;
}

double wrap_fraction(const SystemState& s)
{
    const auto& g = s.grid();
    double outer = 0.0;
    double total = 0.0;
    for (const SpectralField* f : {&s.w, &s.j, &s.theta}) {
        const auto phys = to_physical(*f);
        for (int ix = 0; ix < g.nx; ++ix)
            for (int iy = 0; iy < g.ny; ++iy) {
                const double v = std::norm(phys[static_cast<std::size_t>(ix) * g.ny + iy]);
                total += v;
                if (std::abs(g.y(iy)) > 0.4 * g.ly) outer += v;
            }
    }
    return total > 0.0 ? outer / total : 0.0;
}

RunSummary run(SystemState s, const RunConfig& cfg, const Observer& observe)
{
    cfg.grid.validate();
    s.params.validate_nonlinear();
    if (!(cfg.t_max >= s.t)) throw std::invalid_argument("run: t_max precedes the initial time");
    if (!(cfg.dt_max > 0.0)) throw std::invalid_argument("run: dt_max must be positive");
    if (cfg.sample_every < 1) throw std::invalid_argument("run: sample_every must be >= 1");

    RunSummary sum;
    StepOptions opt;
    opt.nonlinear = cfg.nonlinear;
    StepStats st;
    st.max_amplitude = max_amp(s);
    if (observe) observe(s, st);
    sum.max_wrap_fraction = wrap_fraction(s);
    bool observed_last = true;
    const double tol = 1e-12 * std::max(1.0, cfg.t_max);
    while (s.t < cfg.t_max - tol) {
        double dt = cfl_dt(s, cfg.cfl_safety, cfg.dt_max);
        if (s.t + dt > cfg.t_max - tol) dt = cfg.t_max - s.t;
        try {
            SystemState next = step(s, dt, opt, &st);
            s = std::move(next);
        } catch (NumericalAbort& e) {
            sum.aborted = true;
            sum.abort_reason = e.what();
            if (!cfg.dump_path.empty()) {
                write_json_file(cfg.dump_path, state_to_json(s));
                e.dump_path = cfg.dump_path;
            }
            throw;
        }
        ++sum.steps;
        sum.max_cfl = std::max(sum.max_cfl, st.cfl);
        sum.max_dealias_removed = std::max(sum.max_dealias_removed, st.dealias_removed);
        observed_last = false;
        if (sum.steps % static_cast<std::size_t>(cfg.sample_every) == 0) {
            if (observe) observe(s, st);
            sum.max_wrap_fraction = std::max(sum.max_wrap_fraction, wrap_fraction(s));
            observed_last = true;
        }
    }
    if (!observed_last && observe) observe(s, st);
    sum.t_final = s.t;
    if (!cfg.checkpoint_path.empty()) write_json_file(cfg.checkpoint_path, state_to_json(s));
    return sum;
}

}  // namespace couette

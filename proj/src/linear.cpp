#include "couette/linear.hpp"

#include "couette/expm.hpp"
#include "couette/multipliers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>

namespace couette {

namespace {

constexpr double kNormFloor = 1e-250;
// below this a characteristic has decayed past anything a norm can report
constexpr double kFlushFloor = 1e-280;

Mode3 coupling(int k, const Mode3& u)
{
    const cplx ik{0.0, static_cast<double>(k)};
    return {cplx{0.0, 0.0}, ik * (u[0] + u[2]), ik * u[1]};
}

Mode3 scale_diag(const std::array<double, 3>& e, const Mode3& u)
{
    return {e[0] * u[0], e[1] * u[1], e[2] * u[2]};
}

Mode3 axpy(const Mode3& x, double a, const Mode3& y)
{
    return {x[0] + a * y[0], x[1] + a * y[1], x[2] + a * y[2]};
}

std::array<double, 3> exp3(const std::array<double, 3>& d)
{
    return {std::exp(d[0]), std::exp(d[1]), std::exp(d[2])};
}

// One Lawson RK4 step for the characteristic with label xi_init from t to t+h.
Mode3 lawson_step(const PhysParams& p, int k, double xi_init, double t, double h, const Mode3& u)
{
    const auto d_am = diagonal_exponent(p, k, xi_init, t, t + 0.5 * h);
    const auto d_me = diagonal_exponent(p, k, xi_init, t + 0.5 * h, t + h);
    const std::array<double, 3> d_ae{d_am[0] + d_me[0], d_am[1] + d_me[1], d_am[2] + d_me[2]};
    const auto e_am = exp3(d_am);
    const auto e_me = exp3(d_me);
    const auto e_ae = exp3(d_ae);

    const Mode3 k1 = coupling(k, u);
    const Mode3 k2 = coupling(k, scale_diag(e_am, axpy(u, 0.5 * h, k1)));
    const Mode3 k3 = coupling(k, axpy(scale_diag(e_am, u), 0.5 * h, k2));
    const Mode3 k4 = coupling(k, axpy(scale_diag(e_ae, u), h, scale_diag(e_me, k3)));

    Mode3 out = scale_diag(e_ae, u);
    const Mode3 a = scale_diag(e_ae, k1);
    const Mode3 m = scale_diag(e_me, Mode3{k2[0] + k3[0], k2[1] + k3[1], k2[2] + k3[2]});
    for (int c = 0; c < 3; ++c) out[c] += h / 6.0 * (a[c] + 2.0 * m[c] + k4[c]);
    return out;
}

double max_abs3(const Mode3& u) { return std::max({std::abs(u[0]), std::abs(u[1]), std::abs(u[2])}); }

}  // namespace

Mode3 mode_rhs(double nu, double mu, double eta, int k, double xi, const Mode3& s)
{
    if (k == 0 && xi == 0.0) return {cplx{0.0, 0.0}, cplx{0.0, 0.0}, cplx{0.0, 0.0}};
    const double kk = static_cast<double>(k);
    const double K = kk * kk + xi * xi;
    const cplx ik{0.0, kk};
    return {-eta * K * s[0], -nu * K * s[1] + ik * s[2] + ik * s[0],
            -mu * K * s[2] + ik * s[1] - (2.0 * kk * xi / K) * s[2]};
}

std::array<double, 3> diagonal_exponent(const PhysParams& p, int k, double xi_init, double a, double b)
{
    const double kk = static_cast<double>(k);
    const double h = b - a;
    const double xa = xi_init - kk * a;
    const double xb = xi_init - kk * b;
    // integral of (k^2 + xi(s)^2) over [a,b]; exact for the linear characteristic
    const double quad = kk * kk * h + h * (xa * xa + xa * xb + xb * xb) / 3.0;
    double closure = 0.0;
    if (k != 0) closure = std::log((kk * kk + xb * xb) / (kk * kk + xa * xa));
    return {-p.eta * quad, -p.nu * quad, -p.mu * quad + closure};
}

void advance_characteristic(ModeCharacteristic& mc, const PhysParams& p, double t_end, double h_max,
                            const CharacteristicOptions& opt, CharacteristicStats* stats)
{
    if (!(h_max > 0.0)) throw std::invalid_argument("advance_characteristic: step must be positive");
    double h = h_max;
    int halvings = 0;
    if (max_abs3(mc.state) == 0.0) {
        mc.t = std::max(mc.t, t_end);
        return;
    }
    const double t_start = mc.t;
    const cplx theta_start = mc.state[0];
    while (mc.t < t_end) {
        const bool last = mc.t + h >= t_end;
        const double step = last ? t_end - mc.t : h;
        const Mode3 full = lawson_step(p, mc.k, mc.xi_init, mc.t, step, mc.state);
        const Mode3 half1 = lawson_step(p, mc.k, mc.xi_init, mc.t, 0.5 * step, mc.state);
        const Mode3 half = lawson_step(p, mc.k, mc.xi_init, mc.t + 0.5 * step, 0.5 * step, half1);
        const double scale = std::max(max_abs3(half), max_abs3(mc.state));
        double err = 0.0;
        if (scale > 0.0) {
            Mode3 d{full[0] - half[0], full[1] - half[1], full[2] - half[2]};
            err = max_abs3(d) / (opt.rtol * scale);
        }
        if (err > 1.0 && halvings < opt.max_halvings) {
            h = 0.5 * step;
            ++halvings;
            if (stats) ++stats->rejected;
            continue;
        }
        mc.state = half;
        mc.t = last ? t_end : mc.t + step;
        if (stats) ++stats->accepted;
        if (max_abs3(mc.state) < kFlushFloor) {
            mc.state = {};
            mc.t = t_end;
            break;
        }
        halvings = 0;
        const double grow = err > 0.0 ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 2.0) : 2.0;
        h = std::min(h_max, step * grow);
    }
    // theta is uncoupled: closed form, so it cannot depend on the step sequence
    if (t_end > t_start)
        mc.state[0] = theta_start * std::exp(diagonal_exponent(p, mc.k, mc.xi_init, t_start, t_end)[0]);
}

double default_linear_dt(const GridSpec& g, const PhysParams& p, double safety)
{
    const double xi_max = g.dxi() * g.ny / 2;
    const double d = std::max({p.nu, p.mu, p.eta});
    return std::min(0.01, 0.1 / (d * xi_max * xi_max)) * safety;
}

std::vector<SystemState> integrate_spectrum(const SystemState& init, double t_max, double dt,
                                            const CharacteristicOptions& opt, CharacteristicStats* stats)
{
    if (!(dt > 0.0)) throw std::invalid_argument("integrate_spectrum: dt must be positive");
    if (t_max < 0.0) throw std::invalid_argument("integrate_spectrum: t_max must be >= 0");
    const auto& g = init.grid();
    for (const SpectralField* f : {&init.w, &init.j, &init.theta})
        if (f->shear != init.t) throw std::invalid_argument("integrate_spectrum: fields must be in the frame of init.t");

    const long n = static_cast<long>(std::floor(t_max / dt + 1e-9));
    std::vector<double> times(n + 1);
    for (long i = 0; i <= n; ++i) times[i] = init.t + dt * i;
    if (init.t + dt * n < init.t + t_max - 1e-12 * std::max(1.0, t_max)) times.push_back(init.t + t_max);

    std::vector<SystemState> out;
    out.reserve(times.size());
    for (double t : times) out.emplace_back(g, init.params, t);

    const double h_max = opt.max_step > 0.0 ? std::min(opt.max_step, dt) : dt;
    for (int ik = 0; ik < g.nx; ++ik) {
        const int k = g.kx(ik);
        for (int iy = 0; iy < g.ny; ++iy) {
            ModeCharacteristic mc;
            mc.k = k;
            mc.t = init.t;
            mc.xi_init = init.theta.lab_xi(ik, iy) + k * init.t;
            mc.state = {init.theta(ik, iy), init.w(ik, iy), init.j(ik, iy)};
            if (max_abs3(mc.state) == 0.0) continue;
            for (std::size_t s = 0; s < times.size(); ++s) {
                if (s > 0) advance_characteristic(mc, init.params, times[s], h_max, opt, stats);
                out[s].theta(ik, iy) = mc.state[0];
                out[s].w(ik, iy) = mc.state[1];
                out[s].j(ik, iy) = mc.state[2];
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dense oracle

namespace {

struct OracleCache {
    std::mutex mtx;
    std::map<std::tuple<int, int, double, double, double, double, double, int>, Eigen::MatrixXcd> props;
};

OracleCache& oracle_cache()
{
    static OracleCache c;
    return c;
}

Eigen::MatrixXcd build_generator(const GridSpec& g, const PhysParams& p, int k)
{
    const int n = g.ny;
    Eigen::MatrixXcd F(n, n);
    const double inv = 1.0 / std::sqrt(static_cast<double>(n));
    for (int iy = 0; iy < n; ++iy)
        for (int j = 0; j < n; ++j) F(iy, j) = std::polar(inv, -g.xi(iy) * g.y(j));
    const Eigen::MatrixXcd Finv = F.adjoint();

    const double kk = static_cast<double>(k);
    Eigen::VectorXd lap(n);
    Eigen::VectorXd closure(n);
    for (int iy = 0; iy < n; ++iy) {
        const double xi = g.xi(iy);
        lap(iy) = kk * kk + xi * xi;
        const double xo = g.my(iy) == n / 2 ? 0.0 : xi;
        const double K = kk * kk + xo * xo;
        closure(iy) = K > 0.0 ? 2.0 * kk * xo / K : 0.0;
    }
    const Eigen::MatrixXcd Lap = Finv * lap.cast<cplx>().asDiagonal() * F;
    const Eigen::MatrixXcd Clo = Finv * closure.cast<cplx>().asDiagonal() * F;

    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(3 * n, 3 * n);
    const cplx ik{0.0, kk};
    for (int j = 0; j < n; ++j) {
        const cplx shear{0.0, -kk * g.y(j)};
        for (int c = 0; c < 3; ++c) G(c * n + j, c * n + j) += shear;
    }
    G.block(0, 0, n, n) -= p.eta * Lap;
    G.block(n, n, n, n) -= p.nu * Lap;
    G.block(2 * n, 2 * n, n, n) -= p.mu * Lap + Clo;
    for (int j = 0; j < n; ++j) {
        G(n + j, j) += ik;          // w <- ik theta
        G(n + j, 2 * n + j) += ik;  // w <- ik j
        G(2 * n + j, n + j) += ik;  // j <- ik w
    }
    // map label coefficients -> y samples -> evolve -> label coefficients
    Eigen::MatrixXcd Fb = Eigen::MatrixXcd::Zero(3 * n, 3 * n);
    Eigen::MatrixXcd Fib = Eigen::MatrixXcd::Zero(3 * n, 3 * n);
    for (int c = 0; c < 3; ++c) {
        Fb.block(c * n, c * n, n, n) = F;
        Fib.block(c * n, c * n, n, n) = Finv;
    }
    G = Fb * G * Fib;
    return G;
}

}  // namespace

DenseOracle::DenseOracle(const GridSpec& g, const PhysParams& p) : grid_(g), params_(p)
{
    g.validate();
    if (g.ny > kMaxNy) throw std::invalid_argument("dense oracle: ny exceeds the size cap of 256");
}

SystemState DenseOracle::propagate(const SystemState& init, double t) const
{
    if (!(init.grid() == grid_)) throw std::invalid_argument("dense oracle: grid mismatch");
    for (const SpectralField* f : {&init.w, &init.j, &init.theta})
        if (f->shear != 0.0) throw std::invalid_argument("dense oracle: initial data must be lab-frame");
    const int n = grid_.ny;
    SystemState out(grid_, params_, init.t + t);
    for (auto* f : {&out.w, &out.j, &out.theta}) f->shear = 0.0;

    for (int ik = 0; ik < grid_.nx; ++ik) {
        Eigen::VectorXcd v(3 * n);
        bool any = false;
        for (int iy = 0; iy < n; ++iy) {
            v(iy) = init.theta(ik, iy);
            v(n + iy) = init.w(ik, iy);
            v(2 * n + iy) = init.j(ik, iy);
            any = any || v(iy) != 0.0 || v(n + iy) != 0.0 || v(2 * n + iy) != 0.0;
        }
        if (!any) continue;
        const int k = grid_.kx(ik);
        const auto key = std::make_tuple(k, grid_.ny, grid_.ly, params_.nu, params_.mu, params_.eta, t, grid_.nx);
        Eigen::MatrixXcd E;
        {
            auto& cache = oracle_cache();
            std::lock_guard<std::mutex> lock(cache.mtx);
            auto it = cache.props.find(key);
            if (it != cache.props.end()) E = it->second;
        }
        if (E.size() == 0) {
            E = t == 0.0 ? Eigen::MatrixXcd::Identity(3 * n, 3 * n)
                         : expm_pade13(t * build_generator(grid_, params_, k));
            auto& cache = oracle_cache();
            std::lock_guard<std::mutex> lock(cache.mtx);
            cache.props.emplace(key, E);
        }
        const Eigen::VectorXcd r = E * v;
        for (int iy = 0; iy < n; ++iy) {
            out.theta(ik, iy) = r(iy);
            out.w(ik, iy) = r(n + iy);
            out.j(ik, iy) = r(2 * n + iy);
        }
    }
    return out;
}

SystemState dense_oracle(const SystemState& init, double t)
{
    return DenseOracle(init.grid(), init.params).propagate(init, t);
}

double relative_state_distance(const SystemState& a, const SystemState& b)
{
    double num = 0.0;
    double den = 0.0;
    const SpectralField* fa[] = {&a.theta, &a.w, &a.j};
    const SpectralField* fb[] = {&b.theta, &b.w, &b.j};
    for (int c = 0; c < 3; ++c) {
        const SpectralField la = to_lab_frame(*fa[c]);
        const SpectralField lb = to_lab_frame(*fb[c]);
        for (std::size_t i = 0; i < la.coef.size(); ++i) {
            num += std::norm(la.coef[i] - lb.coef[i]);
            den += std::norm(lb.coef[i]);
        }
    }
    if (den == 0.0) return std::sqrt(num);
    return std::sqrt(num / den);
}

// ---------------------------------------------------------------------------
// Decay checks

double row_norm(const SpectralField& f, int k, int dpow)
{
    const int ik = f.grid.index_of_k(k);
    if (ik < 0) return 0.0;
    double acc = 0.0;
    for (int iy = 0; iy < f.grid.ny; ++iy) {
        const double a = std::norm(f(ik, iy));
        if (a == 0.0) continue;
        acc += (dpow == 0 ? 1.0 : std::pow(f.lab_xi(ik, iy), 2 * dpow)) * a;
    }
    return std::sqrt(acc * f.grid.cell_measure());
}

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& norm)
{
    DecayFit fit;
    if (t.size() != norm.size() || t.empty()) throw std::invalid_argument("fit_decay: bad series");
    long last = -1;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (std::isfinite(norm[i]) && norm[i] > kNormFloor) last = static_cast<long>(i);
    if (last < 0) {
        fit.rate = std::numeric_limits<double>::infinity();
        fit.note = "identically zero";
        return fit;
    }
    const double t1 = t[last];
    const double t0 = 0.5 * (t.front() + t1);
    if (last + 1 < static_cast<long>(t.size())) fit.note = "norm below representable floor after t=" + std::to_string(t1);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (long i = 0; i <= last; ++i) {
        if (t[i] < t0 || !(norm[i] > kNormFloor)) continue;
        const double y = std::log(norm[i]);
        sx += t[i];
        sy += y;
        sxx += t[i] * t[i];
        sxy += t[i] * y;
        ++n;
    }
    fit.fit_t0 = t0;
    fit.fit_t1 = t1;
    if (n < 3) {
        fit.rate = std::numeric_limits<double>::quiet_NaN();
        fit.note = "fewer than three samples in fit window";
        fit.pass = false;
        return fit;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / n;
    fit.rate = -slope;
    fit.prefactor = std::exp(icpt);
    return fit;
}

namespace {

std::vector<double> series_times(const std::vector<SystemState>& s)
{
    std::vector<double> t;
    t.reserve(s.size());
    for (const auto& x : s) t.push_back(x.t);
    return t;
}

double kpow23(int k) { return std::pow(std::abs(static_cast<double>(k)), 2.0 / 3.0); }

}  // namespace

DecayFit check_theta_decay(const std::vector<SystemState>& series, int k)
{
    if (series.empty()) throw std::invalid_argument("check_theta_decay: empty series");
    const auto& p = series.front().params;
    const auto t = series_times(series);
    std::vector<double> n;
    for (const auto& s : series) n.push_back(row_norm(s.theta, k));

    DecayFit fit = fit_decay(t, n);
    fit.k = k;
    fit.kind = "theta";
    if (n.front() == 0.0) {
        fit.pass = true;
        fit.note = "zero data";
        return fit;
    }
    if (k == 0) {
        fit.floor = 0.0;
        for (std::size_t i = 1; i < n.size(); ++i)
            if (n[i] > n[i - 1] * (1.0 + 1e-12)) {
                fit.pass = false;
                fit.bound_violation = std::max(fit.bound_violation, n[i] / n[i - 1] - 1.0);
            }
        fit.bound_checked = true;
        return fit;
    }
    fit.floor = std::cbrt(p.eta) * kpow23(k) / 16.0;
    fit.bound_checked = true;
    for (std::size_t i = 0; i < n.size(); ++i) {
        const double bound = std::sqrt(2.0) * n.front() * std::exp(-fit.floor * (t[i] - t.front()));
        if (bound > 0.0 && n[i] > bound) fit.bound_violation = std::max(fit.bound_violation, n[i] / bound - 1.0);
    }
    const bool bound_ok = fit.bound_violation <= 1e-9;
    const bool rate_ok = std::isinf(fit.rate) || (std::isfinite(fit.rate) && fit.rate >= fit.floor);
    fit.pass = bound_ok && rate_ok;
    return fit;
}

DecayFit check_wj_decay(const std::vector<SystemState>& series, int k, double theta0_norm)
{
    if (series.empty()) throw std::invalid_argument("check_wj_decay: empty series");
    const auto& p = series.front().params;
    const auto t = series_times(series);
    std::vector<double> n;
    for (const auto& s : series) n.push_back(std::hypot(row_norm(s.w, k), row_norm(s.j, k)));
    DecayFit fit = fit_decay(t, n);
    fit.k = k;
    fit.kind = "wj";
    if (k == 0) {
        fit.note = "k=0: heat flow only, no enhanced rate";
        fit.pass = true;
        return fit;
    }
    fit.floor = std::cbrt(p.nu) * kpow23(k) / (8.0 * (1.0 + max_mprime(p.nu, k)));
    const double allzero = *std::max_element(n.begin(), n.end());
    if (allzero == 0.0) {
        fit.pass = true;
        fit.note = "zero data";
        return fit;
    }
    double sup = 0.0;
    for (std::size_t i = 0; i < n.size(); ++i) sup = std::max(sup, n[i] * std::exp(fit.floor * (t[i] - t.front())));
    const double bracket = std::pow(p.nu, -2.0) * n.front() +
                           std::pow(p.nu, -6.0) * std::cbrt(std::abs(k) / p.nu) * theta0_norm;
    fit.bracket_ratio = bracket > 0.0 ? sup / bracket : 0.0;
    fit.pass = std::isinf(fit.rate) || (std::isfinite(fit.rate) && fit.rate >= fit.floor);
    return fit;
}

std::vector<DecayFit> check_derivative_norms(const std::vector<SystemState>& series, int k, int N)
{
    if (N < 0 || N > 2) throw std::invalid_argument("check_derivative_norms: N must be 0, 1 or 2");
    if (N == 0) {
        std::vector<DecayFit> out{check_theta_decay(series, k)};
        const double th0 = row_norm(series.front().theta, k);
        out.push_back(check_wj_decay(series, k, th0));
        return out;
    }
    const auto& p = series.front().params;
    const auto t = series_times(series);
    const double div = std::ldexp(1.0, N);
    std::vector<double> nt, nwj;
    for (const auto& s : series) {
        nt.push_back(row_norm(s.theta, k, N));
        nwj.push_back(std::hypot(row_norm(s.w, k, N), row_norm(s.j, k, N)));
    }
    const double th0 = row_norm(series.front().theta, k);
    const double wj0 = std::hypot(row_norm(series.front().w, k), row_norm(series.front().j, k));

    std::vector<DecayFit> out;
    {
        DecayFit f = fit_decay(t, nt);
        f.k = k;
        f.kind = "theta_D" + std::to_string(N);
        f.floor = k == 0 ? 0.0 : std::cbrt(p.eta) * kpow23(k) / (16.0 * div);
        const double bracket = nt.front() + std::pow(std::abs(k) / p.eta, N / 3.0) * th0;
        double sup = 0.0;
        for (std::size_t i = 0; i < nt.size(); ++i) sup = std::max(sup, nt[i] * std::exp(f.floor * (t[i] - t.front())));
        f.bracket_ratio = bracket > 0.0 ? sup / bracket : 0.0;
        f.pass = nt.front() == 0.0 && th0 == 0.0 ? true
                 : std::isinf(f.rate) || (std::isfinite(f.rate) && f.rate >= f.floor);
        out.push_back(f);
    }
    {
        DecayFit f = fit_decay(t, nwj);
        f.k = k;
        f.kind = "wj_D" + std::to_string(N);
        f.floor = k == 0 ? 0.0 : std::cbrt(p.nu) * kpow23(k) / (8.0 * (1.0 + max_mprime(p.nu, k)) * div);
        const double bracket = std::pow(p.nu, -2.0) * nwj.front() +
                               std::pow(p.nu, -6.0 * N) * std::pow(std::abs(k) / p.nu, N / 3.0) * (wj0 + th0);
        double sup = 0.0;
        for (std::size_t i = 0; i < nwj.size(); ++i)
            sup = std::max(sup, nwj[i] * std::exp(f.floor * (t[i] - t.front())));
        f.bracket_ratio = bracket > 0.0 ? sup / bracket : 0.0;
        const double maxn = *std::max_element(nwj.begin(), nwj.end());
        f.pass = maxn == 0.0 ? true : std::isinf(f.rate) || (std::isfinite(f.rate) && f.rate >= f.floor);
        out.push_back(f);
    }
    return out;
}

double l2_time(const std::vector<double>& t, const std::vector<double>& v)
{
    double acc = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) acc += 0.5 * (t[i] - t[i - 1]) * (v[i] * v[i] + v[i - 1] * v[i - 1]);
    return std::sqrt(acc);
}

SpacetimeReport spacetime_norms(const std::vector<SystemState>& series, double b)
{
    SpacetimeReport r;
    r.b = b;
    if (series.empty()) return r;
    const auto& p = series.front().params;
    const auto t = series_times(series);

    std::vector<double> wj_grad, wj_enh, th_grad, th_enh;
    for (const auto& s : series) {
        const double tt = s.t;
        auto lam2 = [&](int k, double xi) { return lambda_symbol(tt, 2.0 * b, k, xi); };
        auto grad2 = [&](int k, double xi) { return (k * k + xi * xi) * lam2(k, xi); };
        auto dx23 = [&](int k, double xi) { return std::pow(std::abs(static_cast<double>(k)), 2.0 / 3.0) * lam2(k, xi); };
        auto dx43 = [&](int k, double xi) { return std::pow(std::abs(static_cast<double>(k)), 4.0 / 3.0) * lam2(k, xi); };
        auto grad_dx23 = [&](int k, double xi) { return (k * k + xi * xi) * dx23(k, xi); };

        r.wj_sup = std::max(r.wj_sup, std::sqrt(weighted_sum(s.w, lam2) + weighted_sum(s.j, lam2)));
        wj_grad.push_back(std::sqrt(weighted_sum(s.w, grad2) + weighted_sum(s.j, grad2)));
        wj_enh.push_back(std::sqrt(weighted_sum(s.w, dx23) + weighted_sum(s.j, dx23)));
        r.theta_sup = std::max(r.theta_sup, std::sqrt(weighted_sum(s.theta, dx23)));
        th_grad.push_back(std::sqrt(weighted_sum(s.theta, grad_dx23)));
        th_enh.push_back(std::sqrt(weighted_sum(s.theta, dx43)));
    }
    r.wj_grad = std::sqrt(p.nu) * l2_time(t, wj_grad);
    r.wj_enh = std::pow(p.nu, 1.0 / 6.0) * l2_time(t, wj_enh);
    r.theta_grad = std::sqrt(p.eta) * l2_time(t, th_grad);
    r.theta_enh = std::pow(p.eta, 1.0 / 6.0) * l2_time(t, th_enh);
    r.theta_weight = std::pow(p.nu, -4.0) * std::pow(p.nu * p.eta, -1.0 / 6.0);
    r.lhs = r.wj_sup + r.wj_grad + r.wj_enh + r.theta_weight * (r.theta_sup + r.theta_grad + r.theta_enh);

    const auto& s0 = series.front();
    const double t0 = s0.t;
    auto hb = [&](int k, double xi) { return lambda_symbol(t0, 2.0 * b, k, xi); };
    auto hb13 = [&](int k, double xi) { return std::pow(std::abs(static_cast<double>(k)), 2.0 / 3.0) * hb(k, xi); };
    const double wj0 = std::sqrt(weighted_sum(s0.w, hb) + weighted_sum(s0.j, hb));
    const double th0 = std::sqrt(weighted_sum(s0.theta, hb13));
    r.rhs_bracket = std::pow(p.nu, -2.0) * wj0 + r.theta_weight * th0;
    r.measured_C = r.rhs_bracket > 0.0 ? r.lhs / r.rhs_bracket : 0.0;
    return r;
}

}  // namespace couette

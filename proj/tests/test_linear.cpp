#include "couette/energy.hpp"
#include "couette/initial.hpp"
#include "couette/linear.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace couette;

namespace {

SystemState theta_only(const GridSpec& g, const PhysParams& p, std::vector<int> ks = {1, 2, 3})
{
    SystemState s(g, p);
    s.theta = gaussian_field(g, ks);
    return s;
}

SystemState random_state(const GridSpec& g, const PhysParams& p, unsigned seed)
{
    std::mt19937_64 rng(seed);
    SystemState s(g, p);
    s.theta = random_packet_field(g, rng, g.kmax_dealiased());
    s.w = random_packet_field(g, rng, g.kmax_dealiased());
    s.j = random_packet_field(g, rng, g.kmax_dealiased());
    return s;
}

const GridSpec kDecayGrid{12, 256, 16.0 * kPi, true};

}  // namespace

TEST_CASE("mode rhs vanishes on the zero state")
{
    const Mode3 z{};
    const Mode3 r = mode_rhs(1.0, 1.0, 1.0, 2, 0.7, z);
    for (const auto& v : r) CHECK(v == cplx(0.0));
}

TEST_CASE("theta along a characteristic picks up the exact dissipation factor")
{
    const PhysParams p{1.0, 1.0, 1.0, 1.1};
    ModeCharacteristic mc;
    mc.k = 1;
    mc.xi_init = 1.0;  // xi(s) = 1 - s sweeps [1, 0] on [0, 1]
    mc.state = {cplx(1.0), cplx(0.0), cplx(0.0)};
    advance_characteristic(mc, p, 1.0, 0.01, {});
    CHECK(std::abs(mc.state[0]) == doctest::Approx(std::exp(-4.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("pure transport is unitary when all diffusivities vanish")
{
    const PhysParams p{0.0, 0.0, 0.0, 1.1};
    ModeCharacteristic mc;
    mc.k = 2;
    mc.xi_init = 3.0;
    mc.state = {cplx(0.3, -0.4), cplx(0.0), cplx(0.0)};
    advance_characteristic(mc, p, 5.0, 0.05, {});
    CHECK(std::abs(mc.state[0]) == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("k = 0 data follows the heat flow")
{
    const GridSpec g{8, 128, 16.0 * kPi, true};
    const PhysParams p{0.5, 0.5, 0.8, 1.1};
    SystemState s(g, p);
    s.theta = gaussian_field(g, {0});
    s.w = gaussian_field(g, {0});
    s.j = gaussian_field(g, {0});
    const double T = 3.0;
    const auto series = integrate_spectrum(s, T, 0.1);
    const SystemState& e = series.back();
    double err = 0.0, ref = 0.0;
    for (int iy = 0; iy < g.ny; ++iy) {
        const double xi = g.xi(iy);
        const cplx th = s.theta.at(0, g.my(iy)) * std::exp(-p.eta * xi * xi * T);
        const cplx w = s.w.at(0, g.my(iy)) * std::exp(-p.nu * xi * xi * T);
        const cplx j = s.j.at(0, g.my(iy)) * std::exp(-p.mu * xi * xi * T);
        err = std::max({err, std::abs(e.theta.at(0, g.my(iy)) - th), std::abs(e.w.at(0, g.my(iy)) - w),
                        std::abs(e.j.at(0, g.my(iy)) - j)});
        ref = std::max(ref, std::abs(s.theta.at(0, g.my(iy))));
    }
    CHECK(err <= 1e-8 * ref);
}

TEST_CASE("theta never reads (w, j)")
{
    const GridSpec g{8, 64, 16.0 * kPi, true};
    const PhysParams p{0.5, 0.5, 1.0, 1.1};
    SystemState a = random_state(g, p, 1);
    SystemState b = a;
    b.w *= 3.0;
    b.j = SpectralField(g);
    const auto sa = integrate_spectrum(a, 2.0, 0.5);
    const auto sb = integrate_spectrum(b, 2.0, 0.5);
    for (std::size_t i = 0; i < sa.size(); ++i) CHECK(sa[i].theta.coef == sb[i].theta.coef);
}

TEST_CASE("dense oracle: identity at t = 0 and semigroup property")
{
    const GridSpec g{4, 64, 16.0 * kPi, true};
    const PhysParams p{0.5, 0.5, 1.0, 1.1};
    const SystemState s = random_state(g, p, 3);
    const DenseOracle oracle(g, p);
    CHECK(relative_state_distance(oracle.propagate(s, 0.0), s) == 0.0);
    const SystemState once = oracle.propagate(oracle.propagate(s, 0.5), 0.5);
    const SystemState twice = oracle.propagate(s, 1.0);
    CHECK(relative_state_distance(once, twice) <= 1e-8);
}

TEST_CASE("characteristic solver matches the dense oracle at k = 1")
{
    const GridSpec g{4, 128, 16.0 * kPi, true};
    const PhysParams p{1.0, 1.0, 1.0, 1.1};
    const SystemState s = random_state(g, p, 8);
    const double t = 2.0;  // t ly / (2 pi) = 16 labels
    const SystemState fast = integrate_spectrum(s, t, t).back();
    const SystemState ref = DenseOracle(g, p).propagate(s, t);
    CHECK(relative_state_distance(fast, ref) <= 1e-6);
}

TEST_CASE("theta decay bound and rate floor")
{
    const PhysParams p{1.0, 1.0, 1.0, 1.1};
    const auto series = integrate_spectrum(theta_only(kDecayGrid, p), 30.0, 0.05);
    for (int k : {0, 1, 2, 3}) {
        const DecayFit f = check_theta_decay(series, k);
        CHECK(f.pass);
        CHECK(f.bound_checked);
    }
    // at t = 16 the explicit bound reads sqrt(2) e^{-1}
    const auto it = std::find_if(series.begin(), series.end(), [](const SystemState& s) { return std::abs(s.t - 16.0) < 1e-9; });
    REQUIRE(it != series.end());
    CHECK(row_norm(it->theta, 1) / row_norm(series.front().theta, 1) <= std::sqrt(2.0) * std::exp(-1.0));
}

TEST_CASE("theta rate floor halves when eta drops by 8")
{
    const PhysParams a{1.0, 1.0, 1.0, 1.1};
    const PhysParams b{0.125, 0.125, 0.125, 1.1};
    const auto sa = integrate_spectrum(theta_only(kDecayGrid, a, {1}), 30.0, 0.05);
    const auto sb = integrate_spectrum(theta_only(kDecayGrid, b, {1}), 30.0, 0.05);
    const DecayFit fa = check_theta_decay(sa, 1);
    const DecayFit fb = check_theta_decay(sb, 1);
    CHECK(fa.pass);
    CHECK(fb.pass);
    CHECK(fb.floor == doctest::Approx(0.5 * fa.floor).epsilon(1e-14));
    // the bracket (|k|/eta)^{1/3} doubles and the derivative fits still pass
    const auto da = check_derivative_norms(sa, 1, 1);
    const auto db = check_derivative_norms(sb, 1, 1);
    CHECK(da[0].pass);
    CHECK(db[0].pass);
}

TEST_CASE("(w, j) decay floors")
{
    const PhysParams p{1.0, 1.0, 1.0, 1.1};
    SystemState wj(kDecayGrid, p);
    wj.w = gaussian_field(kDecayGrid, {1, 2});
    wj.j = gaussian_field(kDecayGrid, {1, 2});
    const auto s1 = integrate_spectrum(wj, 30.0, 0.05);
    for (int k : {1, 2}) {
        const DecayFit f = check_wj_decay(s1, k, 0.0);
        CHECK(f.pass);
        CHECK(f.floor == doctest::Approx(std::pow(std::abs(k), 2.0 / 3.0) / (8.0 * (1.0 + max_mprime(1.0, k)))));
    }
    // theta-only data excites w through the ik theta coupling
    const auto s2 = integrate_spectrum(theta_only(kDecayGrid, p, {1}), 30.0, 0.05);
    double peak = 0.0;
    for (const auto& s : s2) peak = std::max(peak, row_norm(s.w, 1));
    CHECK(peak > 0.0);
    CHECK(check_wj_decay(s2, 1, row_norm(s2.front().theta, 1)).pass);
    // zero data
    const auto s3 = integrate_spectrum(SystemState(kDecayGrid, p), 5.0, 0.5);
    CHECK(check_wj_decay(s3, 1, 0.0).pass);
    CHECK(check_theta_decay(s3, 1).pass);
}

TEST_CASE("derivative checks: N = 0 reduces to the base checks")
{
    const PhysParams p{1.0, 1.0, 1.0, 1.1};
    const auto s = integrate_spectrum(theta_only(kDecayGrid, p, {1}), 30.0, 0.05);
    const auto d0 = check_derivative_norms(s, 1, 0);
    const DecayFit th = check_theta_decay(s, 1);
    CHECK(d0[0].rate == th.rate);
    CHECK(d0[0].floor == th.floor);
    const auto d1 = check_derivative_norms(s, 1, 1);
    CHECK(d1[0].floor == doctest::Approx(1.0 / 32.0));
    CHECK(d1[0].pass);
    CHECK_THROWS_AS(check_derivative_norms(s, 1, 3), std::invalid_argument);
}

TEST_CASE("space-time norms: zero data and homogeneity")
{
    const GridSpec g{8, 128, 16.0 * kPi, true};
    const PhysParams p{1.0, 1.0, 1.0, 1.1};
    const SpacetimeReport z = spacetime_norms(integrate_spectrum(SystemState(g, p), 2.0, 0.1), 1.1);
    CHECK(z.lhs == 0.0);
    CHECK(z.rhs_bracket == 0.0);

    const SystemState s = random_state(g, p, 12);
    SystemState s2 = s;
    s2.theta *= 2.0;
    s2.w *= 2.0;
    s2.j *= 2.0;
    const SpacetimeReport a = spacetime_norms(integrate_spectrum(s, 4.0, 0.05), 1.1);
    const SpacetimeReport b = spacetime_norms(integrate_spectrum(s2, 4.0, 0.05), 1.1);
    CHECK(b.wj_sup == doctest::Approx(2.0 * a.wj_sup).epsilon(1e-10));
    CHECK(b.wj_grad == doctest::Approx(2.0 * a.wj_grad).epsilon(1e-10));
    CHECK(b.wj_enh == doctest::Approx(2.0 * a.wj_enh).epsilon(1e-10));
    CHECK(b.theta_sup == doctest::Approx(2.0 * a.theta_sup).epsilon(1e-10));
    CHECK(b.theta_grad == doctest::Approx(2.0 * a.theta_grad).epsilon(1e-10));
    CHECK(b.theta_enh == doctest::Approx(2.0 * a.theta_enh).epsilon(1e-10));
    CHECK(b.measured_C == doctest::Approx(a.measured_C).epsilon(1e-10));
}

TEST_CASE("trapezoid L2-in-time norm")
{
    std::vector<double> t, v;
    for (int i = 0; i <= 1000; ++i) {
        t.push_back(i * 1e-3);
        v.push_back(1.0);
    }
    CHECK(l2_time(t, v) == doctest::Approx(1.0));
}

TEST_CASE("per-mode theta energy identity holds to 1e-8 per step")
{
    const GridSpec g{8, 128, 16.0 * kPi, true};
    const PhysParams p{1.0, 1.0, 1.0, 1.1};
    const auto series = integrate_spectrum(random_state(g, p, 5), 0.3, 0.0025);
    const MultiplierSymbol M = build_symbol(SymbolKind::Full, p);
    for (int k : {0, 1, 2}) {
        const BalanceResult r = energy_balance_residual(series, BalanceField::Theta, BalanceForm::Plain, M, 0.0, false, k, 5);
        CHECK(r.max_relative <= 1e-8);
    }
}

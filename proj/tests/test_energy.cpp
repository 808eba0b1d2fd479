#include "couette/energy.hpp"
#include "couette/initial.hpp"
#include "couette/linear.hpp"
#include "couette/nonlinear.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace couette;

namespace {

const PhysParams kP{0.5, 0.5, 0.5, 1.1};
const GridSpec kG{16, 64, 16.0 * kPi, true};

SystemState random_state(unsigned seed, double shear = 0.0)
{
    std::mt19937_64 rng(seed);
    SystemState s(kG, kP);
    s.theta = random_packet_field(kG, rng, 4);
    s.w = random_packet_field(kG, rng, 4);
    s.j = random_packet_field(kG, rng, 4);
    if (shear != 0.0) {
        s.theta = transport(s.theta, shear);
        s.w = transport(s.w, shear);
        s.j = transport(s.j, shear);
        s.t = shear;
    }
    return s;
}

}  // namespace

TEST_CASE("multiplier-weighted energy")
{
    const MultiplierSymbol M = build_symbol(SymbolKind::Full, kP);
    const SpectralField zero(kG);
    CHECK(m_weighted_energy(M, zero, 0.0, 1.1) == 0.0);

    const SystemState s = random_state(1);
    const SpectralField z = project_zero(s.w);
    const double wn = weighted_norm(z, 0.0, 1.1, 0.0);
    CHECK(m_weighted_energy(M, z, 0.0, 1.1) == doctest::Approx(wn * wn).epsilon(1e-13));

    const double n = weighted_norm(s.w, 0.0, 1.1, 0.0);
    const double e = m_weighted_energy(M, s.w, 0.0, 1.1);
    double maxM = 0.0;
    for (int ik = 0; ik < kG.nx; ++ik)
        for (int iy = 0; iy < kG.ny; ++iy) maxM = std::max(maxM, M.value(kG.kx(ik), s.w.lab_xi(ik, iy)));
    CHECK(e >= n * n);
    CHECK(e <= maxM * n * n);
}

TEST_CASE("I terms: zero state, vanishing b, and I5 + I8 = 0")
{
    const MultiplierSymbol M = build_symbol(SymbolKind::Full, kP);
    const auto z = compute_I_terms(SystemState(kG, kP), M, 1.1);
    for (double v : z) CHECK(v == 0.0);

    SystemState s = random_state(2, 0.75);
    const auto I = compute_I_terms(s, M, 1.1);
    CHECK(std::abs(I[4] + I[7]) <= 1e-12 * (std::abs(I[4]) + std::abs(I[7])));

    s.j = SpectralField(kG, s.t);
    const auto J = compute_I_terms(s, M, 1.1);
    CHECK(J[2] == 0.0);
    CHECK(J[6] == 0.0);
    CHECK(J[8] == 0.0);
}

TEST_CASE("cancellation identities on random states")
{
    const MultiplierSymbol M = build_symbol(SymbolKind::Full, kP);
    for (unsigned seed : {3u, 4u, 5u}) {
        const SystemState s = random_state(seed, 0.25 * seed);
        const CancellationReport r = cancellation_checks(s, M, 1.1);
        CHECK(r.pass);
        CHECK(r.checks.size() == 4);
        for (const auto& c : r.checks) CHECK(c.relative <= 1e-10);
        CHECK(structural_checks(s).pass);
    }
}

TEST_CASE("cancellations are trivially zero without zero or nonzero modes")
{
    const MultiplierSymbol M = build_symbol(SymbolKind::Full, kP);
    SystemState s = random_state(6);
    SystemState nz = s;
    nz.w = project_nonzero(nz.w);
    nz.j = project_nonzero(nz.j);
    nz.theta = project_nonzero(nz.theta);
    SystemState zo = s;
    zo.w = project_zero(zo.w);
    zo.j = project_zero(zo.j);
    zo.theta = project_zero(zo.theta);
    for (const SystemState* x : {&nz, &zo}) {
        const CancellationReport r = cancellation_checks(*x, M, 1.1);
        for (const auto& c : r.checks) CHECK(std::abs(c.value) <= 1e-13 * std::max(1.0, c.scale));
    }
}

TEST_CASE("velocity of the nonzero modes is bounded by the inverse-Laplacian vorticity norm")
{
    for (unsigned seed : {7u, 8u}) {
        const SystemState s = random_state(seed, 0.5);
        const VectorField u = biot_savart(project_nonzero(s.w));
        const double lu = std::hypot(weighted_norm(u.c1, s.t, 1.1, 0.0), weighted_norm(u.c2, s.t, 1.1, 0.0));
        const StateNorms n = state_norms(s, 1.1);
        CHECK(lu <= n.invlap_nz[1] * (1.0 + 1e-12));
    }
}

TEST_CASE("envelope constant conditions")
{
    BootstrapEnvelope e;
    e.eps = 1e-3;
    e.C2 = 1.0;
    e.C = closing_constant(e.C2, e.Ctilde);
    CHECK(e.C == doctest::Approx(40.0 * 32.0));
    CHECK_NOTHROW(e.validate());
    CHECK(closing_constant(0.0, 32.0) == 80.0);

    BootstrapEnvelope bad = e;
    bad.Ctilde = 31.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = e;
    bad.C = 79.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = e;
    bad.C = 100.0;  // below 40 sqrt(C2) Ctilde
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = e;
    bad.beta = 5.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = e;
    bad.delta = bad.beta + 4.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = e;
    bad.alpha = 8.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("energy balance: zero trajectory and linear runs")
{
    const MultiplierSymbol M = build_symbol(SymbolKind::Full, kP);
    std::vector<SystemState> zero;
    for (int i = 0; i < 6; ++i) zero.emplace_back(kG, kP, 0.1 * i);
    for (auto& s : zero) s.w.shear = s.j.shear = s.theta.shear = s.t;
    CHECK(energy_balance_residual(zero, BalanceField::Theta, BalanceForm::Plain, M, 0.0, false).max_relative == 0.0);

    const auto series = integrate_spectrum(random_state(9), 0.2, 0.0025);
    for (BalanceField f : {BalanceField::Theta, BalanceField::W, BalanceField::J}) {
        CHECK(energy_balance_residual(series, f, BalanceForm::Plain, M, 0.0, false, std::nullopt, 5).max_relative <= 1e-7);
        CHECK(energy_balance_residual(series, f, BalanceForm::Multiplier, M, 1.1, false, std::nullopt, 5).max_relative <= 1e-3);
    }
}

TEST_CASE("plain balance converges at fourth order under dt halving")
{
    const MultiplierSymbol M = build_symbol(SymbolKind::Full, kP);
    const SystemState s0 = random_state(10);
    double prev = 0.0;
    for (double dt : {0.01, 0.005}) {
        const auto series = integrate_spectrum(s0, 0.2, dt);
        const double r = energy_balance_residual(series, BalanceField::Theta, BalanceForm::Plain, M, 0.0, false,
                                                 std::nullopt, 5)
                             .max_relative;
        if (prev > 0.0) CHECK(std::log2(prev / r) >= 3.5);
        prev = r;
    }
}

TEST_CASE("monitor: zero data keeps the full bounds as margins")
{
    BootstrapEnvelope e;
    e.eps = 1e-2;
    BootstrapMonitor mon(e, kP);
    for (int i = 0; i < 4; ++i) {
        SystemState s(kG, kP, 0.1 * i);
        mon.add(s);
    }
    const LedgerRow& r = mon.rows().back();
    CHECK(r.margin_theta == e.bound_theta(kP.nu));
    CHECK(r.margin_wj == e.bound_wj(kP.nu));
    CHECK(r.margin_theta13 == e.bound_theta13(kP.nu));
    CHECK(mon.max_factor() == 0.0);
}

TEST_CASE("monitor rejects parameters outside the nonlinear regime")
{
    BootstrapEnvelope e;
    CHECK_THROWS_AS(BootstrapMonitor(e, PhysParams{0.5, 0.5, 1.0, 1.1}), std::invalid_argument);
}

#include "couette/expm.hpp"
#include "couette/multipliers.hpp"

#include <doctest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <random>

using namespace couette;

namespace {

// reference root of nu x (k^2 + x^2) = 96|k| by plain bisection
double bisect_xi0(double nu, int k)
{
    const double k2 = static_cast<double>(k) * k;
    double lo = 0.0, hi = 1.0;
    while (nu * hi * (k2 + hi * hi) < 96.0 * std::abs(k)) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (nu * mid * (k2 + mid * mid) < 96.0 * std::abs(k) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("phi profile anchor values")
{
    CHECK(phi_profile(0.0).value == doctest::Approx(0.5));
    CHECK(phi_profile(0.0).slope == doctest::Approx(0.25));
    CHECK(phi_profile(1.0).value == doctest::Approx(0.75));
    CHECK(phi_profile(1.0).slope == doctest::Approx(0.25));
    CHECK(phi_profile(60.0).value == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(phi_profile(60.0).slope < 1e-20);
    // C1 across |x| = 1
    const double h = 1e-9;
    CHECK(std::abs(phi_profile(1.0 + h).value - phi_profile(1.0 - h).value) < 1e-8);
    CHECK(std::abs(phi_profile(1.0 + h).slope - phi_profile(1.0 - h).slope) < 1e-8);
    CHECK(std::abs(phi_profile(-1.0 - h).slope - phi_profile(-1.0 + h).slope) < 1e-8);
}

TEST_CASE("xi0 solver against bisection")
{
    const XiZero z = solve_xi0(1.0, 1);
    CHECK(z.xi0 == doctest::Approx(4.5060).epsilon(1e-4));
    CHECK(z.xi0 == doctest::Approx(bisect_xi0(1.0, 1)).epsilon(1e-13));
    CHECK(z.residual <= 1e-12);

    const XiZero big = solve_xi0(96.0, 1);
    CHECK(big.xi0 == doctest::Approx(0.6823).epsilon(1e-4));
    CHECK(big.xi0 * (1.0 + big.xi0 * big.xi0) == doctest::Approx(1.0).epsilon(1e-12));

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> lognu(std::log(1e-4), 0.0);
    std::uniform_int_distribution<int> kd(-12, 12);
    for (int i = 0; i < 200; ++i) {
        const double nu = std::exp(lognu(rng));
        int k = kd(rng);
        if (k == 0) k = 1;
        const XiZero r = solve_xi0(nu, k);
        CHECK(r.residual <= 1e-12);
        CHECK(r.xi0 == doctest::Approx(bisect_xi0(nu, k)).epsilon(1e-12));
    }
}

TEST_CASE("xi0 cubic-root scaling")
{
    const double ratio = solve_xi0(1e-4 / 8.0, 1).xi0 / solve_xi0(1e-4, 1).xi0;
    CHECK(std::abs(ratio - 2.0) <= 0.04);
}

TEST_CASE("xi0 rejects degenerate input")
{
    CHECK_THROWS_AS(solve_xi0(0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(solve_xi0(1.0, 0), std::invalid_argument);
}

TEST_CASE("phi_k gluing values and slopes")
{
    for (double nu : {1.0, 0.5, 0.1}) {
        for (int k : {1, 2, 5}) {
            const XiZero z = solve_xi0(nu, k);
            const double x0 = z.xi0;
            const double k2 = static_cast<double>(k) * k;
            CHECK(phi_k(z, -x0).value == doctest::Approx(4.0 - kPi).epsilon(1e-12));
            const double at0 = 6.0 * (k2 + x0 * x0) * (k2 + x0 * x0) / (k2 * k2) - (2.0 + kPi);
            const double h = 1e-9 * x0;
            CHECK(phi_k(z, -h).value == doctest::Approx(at0).epsilon(1e-8));
            CHECK(phi_k(z, h).value == doctest::Approx(at0).epsilon(1e-8));
            CHECK(std::abs(phi_k(z, h).slope) < 1e-6 * at0);
            CHECK(std::abs(phi_k(z, -h).slope) < 1e-6 * at0);
            const double expect = 24.0 * x0 / (k2 + x0 * x0);
            CHECK(phi_k(z, -x0 - h).slope == doctest::Approx(expect).epsilon(1e-7));
            CHECK(phi_k(z, -x0 + h).slope == doctest::Approx(expect).epsilon(1e-7));
        }
    }
}

TEST_CASE("phi_k is positive and nondecreasing")
{
    for (double nu : {1.0, 0.5, 0.1, 0.05}) {
        for (int k : {1, 3, 8}) {
            const XiZero z = solve_xi0(nu, k);
            const double X = required_half_width(nu, k);
            for (int i = 0; i <= 10000; ++i) {
                const double xi = -X + 2.0 * X * i / 10000.0;
                const ValueSlope v = phi_k(z, xi);
                REQUIRE(v.value > 0.0);
                REQUIRE(v.slope >= 0.0);
            }
        }
    }
}

TEST_CASE("multiplier pieces at anchor points")
{
    const PhysParams p{1.0, 1.0, 1.0, 1.1};
    const MultiplierSymbol m3 = build_symbol(SymbolKind::M3, p);
    CHECK(m3.value(1, 0.0) == doctest::Approx(kPi / 2.0));
    CHECK(2.0 * m3.dxi(2, 0.0) == doctest::Approx(0.25));
    const MultiplierSymbol full = build_symbol(SymbolKind::Full, p);
    for (double xi : {-30.0, -1.0, 0.0, 2.5, 40.0}) CHECK(full.value(0, xi) == 1.0);
}

TEST_CASE("symbols depend on sgn(k) xi and |k| only")
{
    const PhysParams p{0.5, 0.5, 0.5, 1.1};
    const MultiplierSymbol full = build_symbol(SymbolKind::Full, p);
    for (int k : {1, 2, 7})
        for (double xi : {-20.0, -3.3, 0.4, 11.0}) {
            CHECK(full.value(k, xi) == doctest::Approx(full.value(-k, -xi)).epsilon(1e-14));
            CHECK(k * full.dxi(k, xi) == doctest::Approx(-k * full.dxi(-k, -xi)).epsilon(1e-14));
        }
}

TEST_CASE("analytic slopes agree with finite differences")
{
    const PhysParams p{0.5, 0.5, 0.5, 1.1};
    for (SymbolKind kind : {SymbolKind::M1, SymbolKind::M2, SymbolKind::M3, SymbolKind::LinearMprime, SymbolKind::Full}) {
        const MultiplierSymbol m = build_symbol(kind, p);
        for (int k : {-3, 1, 4})
            for (double xi : {-37.3, -7.1, -0.37, 0.53, 2.9, 23.0}) {
                const double h = 1e-5;
                const double fd = (m.value(k, xi + h) - m.value(k, xi - h)) / (2.0 * h);
                CHECK(m.dxi(k, xi) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
            }
    }
}

TEST_CASE("linear certification at nu = 1")
{
    const CertificationReport r = certify_linear_inequalities(1.0, {-2, -1, 1, 2});
    CHECK(r.pass);
    for (const auto& q : r.results) CHECK(q.min_margin >= 0.0);
    const CertificationReport z = certify_linear_inequalities(1.0, {0});
    CHECK_FALSE(z.applicable);
}

TEST_CASE("certification margins are symmetric in k")
{
    const CertificationReport pos = certify_nonlinear_inequalities(0.5, {3});
    const CertificationReport neg = certify_nonlinear_inequalities(0.5, {-3});
    REQUIRE(pos.results.size() == neg.results.size());
    for (std::size_t i = 0; i < pos.results.size(); ++i)
        CHECK(pos.results[i].min_margin_raw == doctest::Approx(neg.results[i].min_margin_raw).epsilon(1e-9).scale(1.0));
}

TEST_CASE("scaled multiplier bounds do not grow as nu decreases")
{
    const std::vector<int> ks{-8, -4, -1, 1, 4, 8};
    std::vector<double> sym, slope;
    for (double nu : {1.0, 0.5, 0.1, 0.05}) {
        const CertificationReport r = certify_nonlinear_inequalities(nu, ks);
        CHECK(r.pass);
        sym.push_back(r.max_symbol_scaled);
        slope.push_back(r.max_phik_slope_scaled);
    }
    // the value at nu = 1 is a single constant for M nu^4 and phi_k' |k| nu^3 over the sweep
    for (std::size_t i = 0; i < sym.size(); ++i) {
        CHECK(std::isfinite(sym[i]));
        CHECK(sym[i] <= sym.front());
        CHECK(slope[i] <= slope.front());
    }
}

TEST_CASE("Pade-13 exponential agrees with Eigen's matrix function")
{
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n;
    for (double scale : {0.01, 1.0, 30.0}) {
        Eigen::MatrixXcd A(12, 12);
        for (int i = 0; i < 12; ++i)
            for (int j = 0; j < 12; ++j) A(i, j) = scale * cplx(n(rng), n(rng)) / 12.0;
        const Eigen::MatrixXcd E = expm_pade13(A);
        const Eigen::MatrixXcd R = A.exp();
        CHECK((E - R).norm() <= 1e-11 * R.norm());
    }
    const Eigen::MatrixXcd Z = Eigen::MatrixXcd::Zero(5, 5);
    CHECK((expm_pade13(Z) - Eigen::MatrixXcd::Identity(5, 5)).norm() <= 1e-15);
}

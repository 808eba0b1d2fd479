#include "couette/initial.hpp"
#include "couette/spectral.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace couette;

namespace {

GridSpec small_grid() { return GridSpec{12, 64, 16.0 * kPi, true}; }

SpectralField random_field(const GridSpec& g, unsigned seed)
{
    std::mt19937_64 rng(seed);
    return random_packet_field(g, rng, g.kmax_dealiased());
}

double max_diff(const SpectralField& a, const SpectralField& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.coef.size(); ++i) m = std::max(m, std::abs(a.coef[i] - b.coef[i]));
    return m;
}

}  // namespace

TEST_CASE("lambda symbol values")
{
    CHECK(lambda_symbol(7.3, 0.0, 3, -1.2) == doctest::Approx(1.0));
    CHECK(lambda_symbol(3.0, 2.0, 1, -3.0) == doctest::Approx(2.0));
    CHECK(lambda_symbol(0.0, 1.0, 2, 2.0) == doctest::Approx(3.0));
}

TEST_CASE("grid validation names the constraint")
{
    GridSpec g{0, 64, 10.0, true};
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    GridSpec h{8, 64, -1.0, true};
    CHECK_THROWS_AS(h.validate(), std::invalid_argument);
}

TEST_CASE("physical round trip")
{
    const GridSpec g = small_grid();
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    std::vector<cplx> phys(g.size());
    for (auto& v : phys) v = n(rng);
    for (double shear : {0.0, 0.7}) {
        const SpectralField f = from_physical(g, phys, shear);
        const auto back = to_physical(f);
        double err = 0.0, ref = 0.0;
        for (std::size_t i = 0; i < phys.size(); ++i) {
            err = std::max(err, std::abs(back[i] - phys[i]));
            ref = std::max(ref, std::abs(phys[i]));
        }
        CHECK(err / ref <= 1e-12);
    }
}

TEST_CASE("Biot-Savart single modes")
{
    const GridSpec g = small_grid();
    SpectralField w(g);
    w.set(1, 0, 1.0);
    VectorField u = biot_savart(w);
    CHECK(std::abs(u.c1.at(1, 0)) < 1e-15);
    CHECK(std::abs(u.c2.at(1, 0) - cplx(0.0, -1.0)) < 1e-15);

    SpectralField v(g);
    v.set(0, 1, 1.0);
    u = biot_savart(v);
    CHECK(std::abs(u.c1.at(0, 1) - cplx(0.0, 1.0 / g.dxi())) < 1e-12);
    CHECK(std::abs(u.c2.at(0, 1)) < 1e-15);

    const VectorField z = biot_savart(SpectralField(g));
    CHECK(z.c1.max_abs() == 0.0);
    CHECK(z.c2.max_abs() == 0.0);
}

TEST_CASE("zero-mode velocity matches the projected Biot-Savart field")
{
    const GridSpec g = small_grid();
    const SpectralField w = random_field(g, 11);
    const auto u0 = zero_mode_velocity(w);
    const SpectralField ref = project_zero(biot_savart(w).c1);
    const int ik0 = g.index_of_k(0);
    for (int iy = 0; iy < g.ny; ++iy) CHECK(std::abs(u0[iy] - ref(ik0, iy)) < 1e-14);

    SpectralField single(g);
    single.set(0, 1, 1.0);
    const auto s = zero_mode_velocity(single);
    CHECK(std::abs(s[g.index_of_m(1)] - cplx(0.0, g.ly / (2.0 * kPi))) < 1e-12);
}

TEST_CASE("zero and nonzero projections partition the modes")
{
    const GridSpec g = small_grid();
    const SpectralField f = random_field(g, 5);
    CHECK(max_diff(project_zero(f) + project_nonzero(f), f) == 0.0);
    CHECK(project_nonzero(project_zero(f)).max_abs() == 0.0);
    CHECK(project_zero(project_nonzero(f)).max_abs() == 0.0);
}

TEST_CASE("weighted norm examples")
{
    const GridSpec g = small_grid();
    SpectralField f(g);
    CHECK(weighted_norm(f, 0.0, 1.1, 0.0) == 0.0);
    f.set(1, 0, 1.0);
    CHECK(weighted_norm(f, 0.0, 1.0, 0.0) == doctest::Approx(std::sqrt(2.0) * std::sqrt(g.cell_measure())));

    // b = 0, xpow = 0 is the physical L2 norm by Parseval
    const SpectralField r = random_field(g, 9);
    const auto phys = to_physical(r);
    double l2 = 0.0;
    for (const auto& v : phys) l2 += std::norm(v);
    l2 = std::sqrt(l2 * g.cell_measure());
    CHECK(weighted_norm(r, 0.0, 0.0, 0.0) == doctest::Approx(l2).epsilon(1e-12));
}

TEST_CASE("dealiased product of two modes matches the convolution")
{
    const GridSpec g{16, 64, 16.0 * kPi, true};
    SpectralField a(g), b(g);
    // real fields cos(x + m1 dxi y) and cos(2x + m2 dxi y)
    a.set(1, 3, 0.5);
    a.set(-1, -3, 0.5);
    b.set(2, -5, 0.5);
    b.set(-2, 5, 0.5);
    const SpectralField p = product(a, b);
    // coefficients scale by 1/sqrt(N) under the unitary transform
    const double s = 1.0 / std::sqrt(static_cast<double>(g.size()));
    CHECK(std::abs(p.at(3, -2) - 0.25 * s) < 1e-14);
    CHECK(std::abs(p.at(-1, 8) - 0.25 * s) < 1e-14);
    CHECK(std::abs(p.at(-3, 2) - 0.25 * s) < 1e-14);
    CHECK(std::abs(p.at(1, -8) - 0.25 * s) < 1e-14);
    double rest = 0.0;
    for (std::size_t i = 0; i < p.coef.size(); ++i) rest += std::norm(p.coef[i]);
    CHECK(rest == doctest::Approx(4.0 * 0.0625 * s * s));
}

TEST_CASE("dealiasing removes modes outside the two-thirds band")
{
    const GridSpec g{12, 48, 16.0 * kPi, true};
    SpectralField f(g);
    f.set(g.kmax_dealiased() + 1, 0, 1.0);
    f.set(0, g.mmax_dealiased() + 1, 1.0);
    f.set(1, 1, 1.0);
    apply_dealias(f);
    CHECK(f.at(g.kmax_dealiased() + 1, 0) == cplx(0.0));
    CHECK(f.at(0, g.mmax_dealiased() + 1) == cplx(0.0));
    CHECK(f.at(1, 1) == cplx(1.0));
}

TEST_CASE("transport relabels and the lab map shifts by k t / dxi")
{
    const GridSpec g = small_grid();
    SpectralField f(g);
    f.set(1, 0, 1.0);
    const double dt = 2.0 * g.dxi();  // shift of two labels at k = 1
    const SpectralField s = transport(f, dt);
    CHECK(s.at(1, 0) == cplx(1.0));
    CHECK(s.lab_xi(g.index_of_k(1), 0) == doctest::Approx(-2.0 * g.dxi()));
    double rounding = 1.0;
    const SpectralField lab = to_lab_frame(s, &rounding);
    CHECK(rounding < 1e-12);
    CHECK(lab.at(1, -2) == cplx(1.0));
}

TEST_CASE("sheared products equal lab products")
{
    const GridSpec g{12, 256, 16.0 * kPi, true};
    const SpectralField a = random_field(g, 21);
    const SpectralField b = random_field(g, 22);
    const double t = 4.0 * g.dxi();
    const SpectralField sheared = to_lab_frame(product(transport(a, t), transport(b, t)));
    const SpectralField lab = product(to_lab_frame(transport(a, t)), to_lab_frame(transport(b, t)));
    // labels shifted past the band are lost on the lab grid, so only compare the retained core
    double err = 0.0, ref = 0.0;
    for (int k = -2; k <= 2; ++k)
        for (int m = -10; m <= 10; ++m) {
            err = std::max(err, std::abs(sheared.at(k, m) - lab.at(k, m)));
            ref = std::max(ref, std::abs(lab.at(k, m)));
        }
    CHECK(err <= 1e-6 * ref);
}

TEST_CASE("reality enforcement")
{
    const GridSpec g = small_grid();
    SpectralField f = random_field(g, 4);
    CHECK(reality_defect(f) < 1e-15);
    f.set(1, 2, f.at(1, 2) + cplx(0.1, 0.2));
    CHECK(reality_defect(f) > 0.01);
    enforce_reality(f);
    CHECK(reality_defect(f) < 1e-15);
}

TEST_CASE("derivatives act on lab frequencies")
{
    const GridSpec g = small_grid();
    SpectralField f(g, 0.5);
    f.set(2, 3, 1.0);
    const double xi = f.lab_xi(g.index_of_k(2), g.index_of_m(3));
    CHECK(std::abs(dx(f).at(2, 3) - cplx(0.0, 2.0)) < 1e-15);
    CHECK(std::abs(dy(f).at(2, 3) - cplx(0.0, xi)) < 1e-15);
}

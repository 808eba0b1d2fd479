#include "couette/initial.hpp"
#include "couette/io.hpp"
#include "couette/linear.hpp"
#include "couette/nonlinear.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

using namespace couette;

namespace {

const PhysParams kNl{0.5, 0.5, 0.5, 1.1};

SystemState small_random(const GridSpec& g, const PhysParams& p, unsigned seed, double amp)
{
    std::mt19937_64 rng(seed);
    SystemState s(g, p);
    s.theta = amp * random_packet_field(g, rng, 2);
    s.w = amp * random_packet_field(g, rng, 2);
    s.j = amp * random_packet_field(g, rng, 2);
    return s;
}

double field_diff(const SystemState& a, const SystemState& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.w.coef.size(); ++i)
        m = std::max({m, std::abs(a.w.coef[i] - b.w.coef[i]), std::abs(a.j.coef[i] - b.j.coef[i]),
                      std::abs(a.theta.coef[i] - b.theta.coef[i])});
    return m;
}

}  // namespace

TEST_CASE("Q vanishes when either field vanishes")
{
    const GridSpec g{16, 64, 16.0 * kPi, true};
    const SystemState s = small_random(g, kNl, 1, 1.0);
    const VectorField u = biot_savart(s.w);
    const SpectralField zero(g);
    CHECK(compute_Q(u.c1, u.c2, zero, zero).max_abs() == 0.0);
    CHECK(compute_Q(zero, zero, u.c1, u.c2).max_abs() == 0.0);
}

TEST_CASE("Q matches a hand-expanded single-mode pair")
{
    const GridSpec g{16, 64, 16.0 * kPi, true};
    const double a = 3.0 * g.dxi();
    const double c = 2.0 * g.dxi();
    std::vector<cplx> U1(g.size()), U2(g.size()), B1(g.size()), B2(g.size()), Qp(g.size());
    for (int ix = 0; ix < g.nx; ++ix)
        for (int iy = 0; iy < g.ny; ++iy) {
            const double x = g.x(ix), y = g.y(iy);
            const std::size_t i = static_cast<std::size_t>(ix) * g.ny + iy;
            U1[i] = std::cos(x + a * y);
            U2[i] = std::sin(2.0 * x);
            B1[i] = std::cos(x);
            B2[i] = std::sin(x + c * y);
            const double dx_u1 = -std::sin(x + a * y), dy_u1 = -a * std::sin(x + a * y);
            const double dx_u2 = 2.0 * std::cos(2.0 * x);
            const double dx_b1 = -std::sin(x), dy_b1 = 0.0;
            const double dx_b2 = std::cos(x + c * y);
            Qp[i] = 2.0 * dx_b1 * (dx_u2 + dy_u1) - 2.0 * dx_u1 * (dx_b2 + dy_b1);
        }
    const SpectralField Q = compute_Q(from_physical(g, U1), from_physical(g, U2), from_physical(g, B1),
                                      from_physical(g, B2));
    const SpectralField ref = from_physical(g, Qp);
    double err = 0.0;
    for (std::size_t i = 0; i < ref.coef.size(); ++i) err = std::max(err, std::abs(Q.coef[i] - ref.coef[i]));
    CHECK(err <= 1e-12 * ref.max_abs());
}

TEST_CASE("zero state has zero right-hand side and stays zero")
{
    const GridSpec g{16, 64, 16.0 * kPi, true};
    SystemState s(g, kNl);
    const FieldTriple r = rhs(s);
    CHECK(r.w.max_abs() == 0.0);
    CHECK(r.j.max_abs() == 0.0);
    CHECK(r.theta.max_abs() == 0.0);
    for (int i = 0; i < 5; ++i) s = step(s, 0.05);
    CHECK(s.w.max_abs() + s.j.max_abs() + s.theta.max_abs() == 0.0);
}

TEST_CASE("right-hand side is linear plus an exactly quadratic remainder")
{
    const GridSpec g{16, 64, 16.0 * kPi, true};
    const SystemState f = small_random(g, kNl, 4, 1.0);
    auto quotient = [&](double amp) {
        SystemState s = f;
        s.w *= amp;
        s.j *= amp;
        s.theta *= amp;
        const FieldTriple full = rhs(s);
        const FieldTriple lin = linear_rhs(f);
        SpectralField q = full.w;
        q -= amp * lin.w;
        q *= 1.0 / (amp * amp);
        return q;
    };
    const SpectralField q1 = quotient(1e-2);
    const SpectralField q2 = quotient(1e-3);
    CHECK(q1.max_abs() > 0.0);
    double d = 0.0;
    for (std::size_t i = 0; i < q1.coef.size(); ++i) d = std::max(d, std::abs(q1.coef[i] - q2.coef[i]));
    CHECK(d <= 1e-6 * q1.max_abs());
}

TEST_CASE("theta advection is skew")
{
    const GridSpec g{16, 64, 16.0 * kPi, true};
    SystemState s = small_random(g, kNl, 6, 1.0);
    s.w = transport(s.w, 0.0);
    const NonlinearPieces n = nonlinear_pieces(s);
    const double scale = std::sqrt(std::abs(inner(n.u_grad_theta, n.u_grad_theta)) * std::abs(inner(s.theta, s.theta)));
    CHECK(std::abs(inner(n.u_grad_theta, s.theta).real()) <= 1e-10 * scale);
}

TEST_CASE("linear-only stepping matches the characteristic solver")
{
    const GridSpec g{16, 128, 16.0 * kPi, true};
    const SystemState s0 = small_random(g, kNl, 7, 1.0);
    SystemState s = s0;
    StepOptions opt;
    opt.nonlinear = false;
    while (s.t < 5.0 - 1e-12) s = step(s, 0.05, opt);
    const SystemState ref = integrate_spectrum(s0, 5.0, 5.0).back();
    CHECK(relative_state_distance(s, ref) <= 1e-6);
}

TEST_CASE("time stepping converges at fourth order")
{
    const GridSpec g{16, 64, 16.0 * kPi, true};
    const SystemState s0 = small_random(g, kNl, 9, 0.5);
    auto run_to = [&](double dt) {
        SystemState s = s0;
        const int n = static_cast<int>(std::lround(1.0 / dt));
        for (int i = 0; i < n; ++i) s = step(s, dt);
        return s;
    };
    const SystemState ref = run_to(0.0125);
    const double e1 = field_diff(run_to(0.1), ref);
    const double e2 = field_diff(run_to(0.05), ref);
    const double e3 = field_diff(run_to(0.025), ref);
    CHECK(std::log2(e1 / e2) >= 3.7);
    CHECK(std::log2(e2 / e3) >= 3.7);
}

TEST_CASE("means are conserved")
{
    const GridSpec g{16, 64, 16.0 * kPi, true};
    SystemState s = small_random(g, kNl, 10, 1.0);
    const cplx th0 = s.theta.at(0, 0), w0 = s.w.at(0, 0), j0 = s.j.at(0, 0);
    for (int i = 0; i < 20; ++i) s = step(s, 0.05);
    CHECK(std::abs(s.theta.at(0, 0) - th0) <= 1e-14 * s.theta.max_abs());
    CHECK(std::abs(s.w.at(0, 0) - w0) <= 1e-14 * s.w.max_abs());
    CHECK(std::abs(s.j.at(0, 0) - j0) <= 1e-14 * s.j.max_abs());
}

TEST_CASE("initial data meets the three size conditions")
{
    const GridSpec g{32, 128, 16.0 * kPi, true};
    InitialDataSpec spec;
    spec.eps = 0.1;
    const SystemState s = make_initial_data(g, kNl, spec);
    const double b = kNl.b;
    const double nwj = std::hypot(weighted_norm(s.w, 0.0, b, 0.0), weighted_norm(s.j, 0.0, b, 0.0));
    CHECK(nwj == doctest::Approx(spec.eps * std::pow(kNl.nu, spec.beta)).epsilon(1e-12));
    CHECK(weighted_norm(s.theta, 0.0, b, 0.0) <= spec.eps * std::pow(kNl.nu, spec.alpha) * (1.0 + 1e-12));
    CHECK(weighted_norm(s.theta, 0.0, b, 1.0 / 3.0) <= spec.eps * std::pow(kNl.nu, spec.delta) * (1.0 + 1e-12));
    CHECK(s.w.at(0, 0) == cplx(0.0));
    CHECK(s.j.at(0, 0) == cplx(0.0));
    const SystemState again = make_initial_data(g, kNl, spec);
    CHECK(again.w.coef == s.w.coef);
    CHECK(again.theta.coef == s.theta.coef);
}

TEST_CASE("run rejects a parameter set outside nu = mu = eta")
{
    RunConfig cfg;
    cfg.grid = GridSpec{16, 64, 16.0 * kPi, true};
    cfg.t_max = 0.1;
    const SystemState s(cfg.grid, PhysParams{0.5, 0.5, 0.7, 1.1});
    CHECK_THROWS_AS(run(s, cfg, {}), std::invalid_argument);
}

TEST_CASE("run keeps the CFL number under the safety factor")
{
    RunConfig cfg;
    cfg.grid = GridSpec{16, 64, 16.0 * kPi, true};
    cfg.params = kNl;
    cfg.t_max = 1.0;
    cfg.cfl_safety = 0.3;
    const SystemState s = small_random(cfg.grid, kNl, 12, 30.0);
    const RunSummary sum = run(s, cfg, {});
    CHECK(sum.max_cfl <= 0.3 + 1e-12);
    CHECK(sum.t_final == doctest::Approx(1.0));
}

TEST_CASE("numerical abort writes a dump")
{
    const auto dump = std::filesystem::temp_directory_path() / "couette_abort_test.json";
    std::filesystem::remove(dump);
    RunConfig cfg;
    cfg.grid = GridSpec{16, 64, 16.0 * kPi, true};
    cfg.params = kNl;
    cfg.t_max = 1.0;
    cfg.dump_path = dump.string();
    SystemState s = small_random(cfg.grid, kNl, 13, 1.0);
    s.w.set(1, 1, cplx(std::numeric_limits<double>::quiet_NaN(), 0.0));
    s.w.set(-1, -1, cplx(std::numeric_limits<double>::quiet_NaN(), 0.0));
    try {
        run(s, cfg, {});
        FAIL("expected NumericalAbort");
    } catch (const NumericalAbort& e) {
        CHECK(e.dump_path == dump.string());
        CHECK(std::filesystem::exists(dump));
    }
    std::filesystem::remove(dump);
}

TEST_CASE("checkpoint round trip")
{
    const GridSpec g{16, 64, 16.0 * kPi, true};
    SystemState s = small_random(g, kNl, 14, 1.0);
    s = step(s, 0.05);
    const SystemState r = state_from_json(nlohmann::json::parse(state_to_json(s).dump()));
    CHECK(r.grid() == g);
    CHECK(r.t == s.t);
    CHECK(r.w.shear == s.w.shear);
    CHECK(r.w.coef == s.w.coef);
    CHECK(r.j.coef == s.j.coef);
    CHECK(r.theta.coef == s.theta.coef);
    CHECK(r.params.nu == s.params.nu);
}

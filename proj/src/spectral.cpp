#include "couette/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>

namespace couette {

void GridSpec::validate() const
{
    if (nx < 4 || nx % 2 != 0)
        throw std::invalid_argument("grid: nx must be even and >= 4 (got " + std::to_string(nx) + ")");
    if (ny < 4 || ny % 2 != 0)
        throw std::invalid_argument("grid: ny must be even and >= 4 (got " + std::to_string(ny) + ")");
    if (!(ly > 0.0) || !std::isfinite(ly))
        throw std::invalid_argument("grid: ly must be positive and finite");
}

int GridSpec::index_of_k(int k) const
{
    if (k > nx / 2 || k <= -nx / 2) return -1;
    return k >= 0 ? k : k + nx;
}

int GridSpec::index_of_m(int m) const
{
    if (m > ny / 2 || m <= -ny / 2) return -1;
    return m >= 0 ? m : m + ny;
}

bool GridSpec::retained(int ik, int iy) const
{
    if (!dealias) return true;
    return std::abs(kx(ik)) <= kmax_dealiased() && std::abs(my(iy)) <= mmax_dealiased();
}

void PhysParams::validate_linear() const
{
    if (!(nu > 0.0)) throw std::invalid_argument("params: nu must be > 0");
    if (mu != nu) throw std::invalid_argument("params: linear regime requires mu == nu");
    if (eta < nu) throw std::invalid_argument("params: linear regime requires nu <= eta");
    if (eta > 1.0) throw std::invalid_argument("params: linear regime requires eta <= 1");
}

void PhysParams::validate_nonlinear() const
{
    if (!(nu > 0.0) || nu > 1.0) throw std::invalid_argument("params: nu must lie in (0,1]");
    if (mu != nu || eta != nu) throw std::invalid_argument("params: nonlinear regime requires nu == mu == eta");
}

SpectralField::SpectralField(const GridSpec& g, double shear_time)
    : grid(g), shear(shear_time), coef(g.size(), cplx{0.0, 0.0})
{
}

cplx SpectralField::at(int k, int m) const
{
    const int ik = grid.index_of_k(k);
    const int iy = grid.index_of_m(m);
    if (ik < 0 || iy < 0) return {0.0, 0.0};
    return (*this)(ik, iy);
}

void SpectralField::set(int k, int m, cplx v)
{
    const int ik = grid.index_of_k(k);
    const int iy = grid.index_of_m(m);
    if (ik < 0 || iy < 0) throw std::out_of_range("SpectralField::set: mode outside grid");
    (*this)(ik, iy) = v;
}

static void require_compatible(const SpectralField& a, const SpectralField& b)
{
    if (!(a.grid == b.grid)) throw std::invalid_argument("fields live on different grids");
    if (a.shear != b.shear) throw std::invalid_argument("fields live in different sheared frames");
}

SpectralField& SpectralField::operator+=(const SpectralField& o)
{
    require_compatible(*this, o);
    for (std::size_t i = 0; i < coef.size(); ++i) coef[i] += o.coef[i];
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o)
{
    require_compatible(*this, o);
    for (std::size_t i = 0; i < coef.size(); ++i) coef[i] -= o.coef[i];
    return *this;
}

SpectralField& SpectralField::operator*=(double s)
{
    for (auto& c : coef) c *= s;
    return *this;
}

SpectralField& SpectralField::operator*=(cplx s)
{
    for (auto& c : coef) c *= s;
    return *this;
}

bool SpectralField::finite() const
{
    return std::all_of(coef.begin(), coef.end(),
                       [](const cplx& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
}

double SpectralField::max_abs() const
{
    double m = 0.0;
    for (const auto& c : coef) m = std::max(m, std::abs(c));
    return m;
}

void SpectralField::set_zero()
{
    std::fill(coef.begin(), coef.end(), cplx{0.0, 0.0});
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

double lambda_symbol(double t, double b, int k, double xi)
{
    const double s = xi + t * k;
    return std::pow(1.0 + static_cast<double>(k) * k + s * s, 0.5 * b);
}

VectorField biot_savart(const SpectralField& w)
{
    VectorField u{SpectralField(w.grid, w.shear), SpectralField(w.grid, w.shear)};
    const auto& g = w.grid;
    for (int ik = 0; ik < g.nx; ++ik) {
        const double k = g.kx(ik);
        for (int iy = 0; iy < g.ny; ++iy) {
            const double xi = w.lab_xi(ik, iy);
            const double k2 = k * k + xi * xi;
            if (k2 == 0.0) continue;
            const cplx c = w(ik, iy) / k2;
            u.c1(ik, iy) = cplx{0.0, xi} * c;
            u.c2(ik, iy) = cplx{0.0, -k} * c;
        }
    }
    return u;
}

SpectralField project_zero(const SpectralField& f)
{
    SpectralField out(f.grid, f.shear);
    for (int iy = 0; iy < f.grid.ny; ++iy) out(0, iy) = f(0, iy);
    return out;
}

SpectralField project_nonzero(const SpectralField& f)
{
    SpectralField out = f;
    for (int iy = 0; iy < f.grid.ny; ++iy) out(0, iy) = 0.0;
    return out;
}

std::vector<cplx> zero_mode_velocity(const SpectralField& w)
{
    std::vector<cplx> u0(w.grid.ny, cplx{0.0, 0.0});
    for (int iy = 0; iy < w.grid.ny; ++iy) {
        const double xi = w.grid.xi(iy);
        if (xi != 0.0) u0[iy] = cplx{0.0, 1.0} / xi * w(0, iy);
    }
    return u0;
}

double weighted_norm(const SpectralField& f, double t, double b, double xpow)
{
    if (xpow < 0.0) throw std::invalid_argument("weighted_norm: xpow must be >= 0");
    const auto& g = f.grid;
    double acc = 0.0;
    for (int ik = 0; ik < g.nx; ++ik) {
        const int k = g.kx(ik);
        if (xpow > 0.0 && k == 0) continue;
        const double kw = xpow > 0.0 ? std::pow(std::abs(static_cast<double>(k)), 2.0 * xpow) : 1.0;
        for (int iy = 0; iy < g.ny; ++iy) {
            const double lam = lambda_symbol(t, 2.0 * b, k, f.lab_xi(ik, iy));
            acc += kw * lam * std::norm(f(ik, iy));
        }
    }
    return std::sqrt(acc * g.cell_measure());
}

double weighted_sum(const SpectralField& f, const std::function<double(int, double)>& weight2)
{
    const auto& g = f.grid;
    double acc = 0.0;
    for (int ik = 0; ik < g.nx; ++ik) {
        const int k = g.kx(ik);
        for (int iy = 0; iy < g.ny; ++iy) {
            const double a = std::norm(f(ik, iy));
            if (a != 0.0) acc += weight2(k, f.lab_xi(ik, iy)) * a;
        }
    }
    return acc * g.cell_measure();
}

cplx inner(const SpectralField& f, const SpectralField& g)
{
    require_compatible(f, g);
    cplx acc{0.0, 0.0};
    for (std::size_t i = 0; i < f.coef.size(); ++i) acc += f.coef[i] * std::conj(g.coef[i]);
    return acc * f.grid.cell_measure();
}

SpectralField apply_symbol(const SpectralField& f, const std::function<cplx(int, double)>& sym)
{
    SpectralField out(f.grid, f.shear);
    for (int ik = 0; ik < f.grid.nx; ++ik) {
        const int k = f.grid.kx(ik);
        for (int iy = 0; iy < f.grid.ny; ++iy) out(ik, iy) = sym(k, f.lab_xi(ik, iy)) * f(ik, iy);
    }
    return out;
}

SpectralField apply_real_symbol(const SpectralField& f, const std::function<double(int, double)>& sym)
{
    return apply_symbol(f, [&](int k, double xi) { return cplx{sym(k, xi), 0.0}; });
}

SpectralField dx(const SpectralField& f)
{
    SpectralField out(f.grid, f.shear);
    const auto& g = f.grid;
    for (int ik = 0; ik < g.nx; ++ik) {
        const int k = g.kx(ik);
        if (k == g.nx / 2) continue;
        for (int iy = 0; iy < g.ny; ++iy) out(ik, iy) = cplx{0.0, static_cast<double>(k)} * f(ik, iy);
    }
    return out;
}

SpectralField dy(const SpectralField& f)
{
    SpectralField out(f.grid, f.shear);
    const auto& g = f.grid;
    for (int ik = 0; ik < g.nx; ++ik) {
        for (int iy = 0; iy < g.ny; ++iy) {
            if (g.my(iy) == g.ny / 2) continue;
            out(ik, iy) = cplx{0.0, f.lab_xi(ik, iy)} * f(ik, iy);
        }
    }
    return out;
}

SpectralField transport(const SpectralField& f, double dt)
{
    SpectralField out = f;
    out.shear += dt;
    return out;
}

SpectralField to_lab_frame(const SpectralField& f, double* max_rounding)
{
    const auto& g = f.grid;
    SpectralField out(g, 0.0);
    double worst = 0.0;
    for (int ik = 0; ik < g.nx; ++ik) {
        const int k = g.kx(ik);
        // label eta = xi + k*shear, so lab index m reads label m + s
        const double exact = k * f.shear / g.dxi();
        const long s = std::lround(exact);
        worst = std::max(worst, std::abs(exact - static_cast<double>(s)));
        for (int iy = 0; iy < g.ny; ++iy) {
            const long src = g.my(iy) + s;
            if (src > g.ny / 2 || src <= -g.ny / 2) continue;
            out(ik, iy) = f.at(k, static_cast<int>(src));
        }
    }
    if (max_rounding) *max_rounding = worst;
    return out;
}

namespace {

struct FftPlans {
    int nx, ny;
    fftw_complex* buf;
    fftw_plan fwd;
    fftw_plan bwd;

    FftPlans(int nx_, int ny_) : nx(nx_), ny(ny_)
    {
        buf = fftw_alloc_complex(static_cast<std::size_t>(nx) * ny);
        fwd = fftw_plan_dft_2d(nx, ny, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_2d(nx, ny, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~FftPlans()
    {
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(buf);
    }
    FftPlans(const FftPlans&) = delete;
    FftPlans& operator=(const FftPlans&) = delete;
};

// FFTW planning is not thread-safe; plans are built once per shape and
// executed on per-call buffers through the new-array interface.
std::mutex g_plan_mutex;

const FftPlans& plans_for(int nx, int ny)
{
    static std::map<std::pair<int, int>, std::unique_ptr<FftPlans>> cache;
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    auto& slot = cache[{nx, ny}];
    if (!slot) slot = std::make_unique<FftPlans>(nx, ny);
    return *slot;
}

struct FftwBuffer {
    fftw_complex* p;
    explicit FftwBuffer(std::size_t n) : p(fftw_alloc_complex(n)) {}
    ~FftwBuffer() { fftw_free(p); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
};

}  // namespace

// Physical row iy sits at y = -ly/2 + iy*dy, which puts a (-1)^m phase on label m.
std::vector<cplx> to_physical(const SpectralField& f)
{
    const auto& g = f.grid;
    const auto& pl = plans_for(g.nx, g.ny);
    FftwBuffer tmp(g.size());
    const double scale = 1.0 / std::sqrt(static_cast<double>(g.size()));
    for (int ik = 0; ik < g.nx; ++ik)
        for (int iy = 0; iy < g.ny; ++iy) {
            const double sgn = (g.my(iy) & 1) ? -scale : scale;
            const cplx c = f(ik, iy) * sgn;
            tmp.p[ik * g.ny + iy][0] = c.real();
            tmp.p[ik * g.ny + iy][1] = c.imag();
        }
    fftw_execute_dft(pl.bwd, tmp.p, tmp.p);
    std::vector<cplx> out(g.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = {tmp.p[i][0], tmp.p[i][1]};
    return out;
}

SpectralField from_physical(const GridSpec& g, const std::vector<cplx>& samples, double shear)
{
    if (samples.size() != g.size()) throw std::invalid_argument("from_physical: sample count mismatch");
    const auto& pl = plans_for(g.nx, g.ny);
    FftwBuffer tmp(g.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        tmp.p[i][0] = samples[i].real();
        tmp.p[i][1] = samples[i].imag();
    }
    fftw_execute_dft(pl.fwd, tmp.p, tmp.p);
    SpectralField out(g, shear);
    const double scale = 1.0 / std::sqrt(static_cast<double>(g.size()));
    for (int ik = 0; ik < g.nx; ++ik)
        for (int iy = 0; iy < g.ny; ++iy) {
            const double sgn = (g.my(iy) & 1) ? -scale : scale;
            out(ik, iy) = cplx{tmp.p[ik * g.ny + iy][0], tmp.p[ik * g.ny + iy][1]} * sgn;
        }
    return out;
}

void apply_dealias(SpectralField& f)
{
    const auto& g = f.grid;
    if (!g.dealias) return;
    for (int ik = 0; ik < g.nx; ++ik)
        for (int iy = 0; iy < g.ny; ++iy)
            if (!g.retained(ik, iy)) f(ik, iy) = 0.0;
}

void enforce_reality(SpectralField& f)
{
    const auto& g = f.grid;
    for (int ik = 0; ik < g.nx; ++ik) {
        const int k = g.kx(ik);
        for (int iy = 0; iy < g.ny; ++iy) {
            const int m = g.my(iy);
            if (k == g.nx / 2 || m == g.ny / 2) {
                f(ik, iy) = 0.0;
                continue;
            }
            const int jk = g.index_of_k(-k);
            const int jy = g.index_of_m(-m);
            if (jk * g.ny + jy < ik * g.ny + iy) continue;
            const cplx avg = 0.5 * (f(ik, iy) + std::conj(f(jk, jy)));
            f(ik, iy) = avg;
            f(jk, jy) = std::conj(avg);
        }
    }
}

double reality_defect(const SpectralField& f)
{
    const auto& g = f.grid;
    double worst = 0.0;
    for (int ik = 0; ik < g.nx; ++ik) {
        const int k = g.kx(ik);
        if (k == g.nx / 2) continue;
        for (int iy = 0; iy < g.ny; ++iy) {
            const int m = g.my(iy);
            if (m == g.ny / 2) continue;
            worst = std::max(worst, std::abs(f(ik, iy) - std::conj(f.at(-k, -m))));
        }
    }
    return worst;
}

SpectralField product(const SpectralField& f, const SpectralField& g)
{
    require_compatible(f, g);
    auto pf = to_physical(f);
    const auto pg = to_physical(g);
    for (std::size_t i = 0; i < pf.size(); ++i) pf[i] *= pg[i];
    SpectralField out = from_physical(f.grid, pf, f.shear);
    apply_dealias(out);
    return out;
}

}  // namespace couette

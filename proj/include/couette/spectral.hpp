#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

namespace couette {

using cplx = std::complex<double>;
inline constexpr double kPi = std::numbers::pi;

/// Periodic grid on [0,2π) x [-ly/2, ly/2).
struct GridSpec {
    int nx = 32;
    int ny = 128;
    double ly = 16.0 * kPi;
    bool dealias = true;

    /// Throws std::invalid_argument naming the violated constraint.
    void validate() const;

    double dxi() const { return 2.0 * kPi / ly; }
    std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    double cell_measure() const { return (2.0 * kPi / nx) * (ly / ny); }

    int kx(int ik) const { return ik <= nx / 2 ? ik : ik - nx; }
    int my(int iy) const { return iy <= ny / 2 ? iy : iy - ny; }
    double xi(int iy) const { return my(iy) * dxi(); }

    /// Storage index of wavenumber k (or label m), -1 when not representable.
    int index_of_k(int k) const;
    int index_of_m(int m) const;

    double x(int ix) const { return 2.0 * kPi * ix / nx; }
    double y(int iy) const { return -0.5 * ly + ly * iy / ny; }

    int kmax_dealiased() const { return (nx - 1) / 3; }
    int mmax_dealiased() const { return (ny - 1) / 3; }
    bool retained(int ik, int iy) const;

    bool operator==(const GridSpec&) const = default;
};

struct PhysParams {
    double nu = 1.0;
    double mu = 1.0;
    double eta = 1.0;
    double b = 1.1;

    /// Linear regime: 0 < nu = mu <= eta <= 1.
    void validate_linear() const;
    /// Nonlinear regime: nu = mu = eta in (0,1].
    void validate_nonlinear() const;
};

/// Fourier coefficients on the (k, label) grid.
///
/// `shear` is the time of the sheared frame the labels refer to: the
/// coefficient stored at label index m describes the lab frequency
/// xi = m*dxi - k*shear. A field with shear = 0 is an ordinary lab-frame field.
/// Coefficients use the unitary DFT normalization so that
/// sum |c|^2 * cell_measure approximates the continuum L2 norm squared.
struct SpectralField {
    GridSpec grid;
    double shear = 0.0;
    std::vector<cplx> coef;

    SpectralField() = default;
    explicit SpectralField(const GridSpec& g, double shear_time = 0.0);

    cplx& operator()(int ik, int iy) { return coef[static_cast<std::size_t>(ik) * grid.ny + iy]; }
    const cplx& operator()(int ik, int iy) const { return coef[static_cast<std::size_t>(ik) * grid.ny + iy]; }

    double lab_xi(int ik, int iy) const { return grid.xi(iy) - grid.kx(ik) * shear; }

    /// Coefficient at wavenumber k and label m; zero when outside the grid.
    cplx at(int k, int m) const;
    void set(int k, int m, cplx v);

    SpectralField& operator+=(const SpectralField& o);
    SpectralField& operator-=(const SpectralField& o);
    SpectralField& operator*=(double s);
    SpectralField& operator*=(cplx s);

    bool finite() const;
    double max_abs() const;
    void set_zero();
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

double lambda_symbol(double t, double b, int k, double xi);

struct VectorField {
    SpectralField c1;
    SpectralField c2;
};

/// u = -grad^perp (-Lap)^{-1} w, evaluated at the lab frequency of each label.
VectorField biot_savart(const SpectralField& w);

SpectralField project_zero(const SpectralField& f);
SpectralField project_nonzero(const SpectralField& f);

/// First velocity component of the x-average, indexed by label like the grid.
std::vector<cplx> zero_mode_velocity(const SpectralField& w);

/// || |D_x|^xpow Lambda_t^b f ||_{L2}
double weighted_norm(const SpectralField& f, double t, double b, double xpow);

/// sum over modes of weight2(k, lab xi) * |f|^2 * cell_measure
double weighted_sum(const SpectralField& f, const std::function<double(int, double)>& weight2);

/// Continuum-normalized L2 inner product, sum f conj(g) * cell_measure.
cplx inner(const SpectralField& f, const SpectralField& g);

/// Multiply every coefficient by sym(k, lab xi).
SpectralField apply_symbol(const SpectralField& f, const std::function<cplx(int, double)>& sym);
SpectralField apply_real_symbol(const SpectralField& f, const std::function<double(int, double)>& sym);

SpectralField dx(const SpectralField& f);
SpectralField dy(const SpectralField& f);

/// Exact Couette transport over dt: relabels the frame, coefficients untouched.
SpectralField transport(const SpectralField& f, double dt);

/// Re-express a sheared field on the lab grid by integer label shifts.
/// Shifts are rounded to the nearest label; `max_rounding` receives the
/// largest fractional offset encountered.
SpectralField to_lab_frame(const SpectralField& f, double* max_rounding = nullptr);

/// Samples at (x_i, y_j) of the sheared coordinates; row-major (ix, iy).
std::vector<cplx> to_physical(const SpectralField& f);
SpectralField from_physical(const GridSpec& g, const std::vector<cplx>& samples, double shear = 0.0);

/// Zero every mode outside the 2/3 band (no-op when grid.dealias is false).
void apply_dealias(SpectralField& f);
/// Average conjugate pairs so the field is exactly real; clears Nyquist rows.
void enforce_reality(SpectralField& f);
double reality_defect(const SpectralField& f);

/// Pointwise product formed in physical space, result dealiased.
SpectralField product(const SpectralField& f, const SpectralField& g);

}  // namespace couette

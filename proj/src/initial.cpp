#include "couette/initial.hpp"

#include <cmath>

namespace couette {

SpectralField gaussian_field(const GridSpec& g, const std::vector<int>& ks, double y0, double sigma)
{
    std::vector<cplx> phys(g.size(), cplx{0.0, 0.0});
    for (int ix = 0; ix < g.nx; ++ix)
        for (int iy = 0; iy < g.ny; ++iy) {
            const double y = g.y(iy) - y0;
            const double env = std::exp(-0.5 * y * y / (sigma * sigma));
            double v = 0.0;
            for (int k : ks) v += k == 0 ? 1.0 : std::cos(k * g.x(ix)) + std::sin(k * g.x(ix));
            phys[static_cast<std::size_t>(ix) * g.ny + iy] = v * env;
        }
    SpectralField f = from_physical(g, phys, 0.0);
    apply_dealias(f);
    enforce_reality(f);
    return f;
}

SpectralField random_packet_field(const GridSpec& g, std::mt19937_64& rng, int kmax, int packets, double spread)
{
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<cplx> phys(g.size(), cplx{0.0, 0.0});
    for (int q = 0; q < packets; ++q) {
        const double y0 = spread * g.ly * unit(rng);
        const double sigma = 1.0 + 0.5 * std::abs(unit(rng));
        std::vector<double> amp(kmax + 1), phase(kmax + 1);
        for (int k = 0; k <= kmax; ++k) {
            amp[k] = unit(rng);
            phase[k] = kPi * unit(rng);
        }
        for (int ix = 0; ix < g.nx; ++ix)
            for (int iy = 0; iy < g.ny; ++iy) {
                const double y = g.y(iy) - y0;
                double v = 0.0;
                for (int k = 0; k <= kmax; ++k) v += amp[k] * std::cos(k * g.x(ix) + phase[k]);
                phys[static_cast<std::size_t>(ix) * g.ny + iy] += v * std::exp(-0.5 * y * y / (sigma * sigma));
            }
    }
    SpectralField f = from_physical(g, phys, 0.0);
    apply_dealias(f);
    enforce_reality(f);
    return f;
}

}  // namespace couette

#pragma once

#include "couette/spectral.hpp"

#include <random>
#include <vector>

namespace couette {

/// sum over k in ks of (cos(kx) + sin(kx)) exp(-(y-y0)^2 / (2 sigma^2)), dealiased.
SpectralField gaussian_field(const GridSpec& g, const std::vector<int>& ks, double y0 = 0.0, double sigma = 1.0);

/// A few Gaussian packets with random centers |y0| <= spread*ly, widths in [1, 1.5]
/// and random amplitudes and phases for every k in [0, kmax]; real and dealiased.
SpectralField random_packet_field(const GridSpec& g, std::mt19937_64& rng, int kmax, int packets = 3,
                                  double spread = 0.1);

}  // namespace couette

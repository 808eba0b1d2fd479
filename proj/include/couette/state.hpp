#pragma once

#include "couette/spectral.hpp"

namespace couette {

/// (w, j, theta) at time t. Solver states keep every field in the frame
/// sheared by t, so labels are the moving-frame frequencies.
struct SystemState {
    SpectralField w;
    SpectralField j;
    SpectralField theta;
    double t = 0.0;
    PhysParams params;

    SystemState() = default;
    SystemState(const GridSpec& g, const PhysParams& p, double time = 0.0)
        : w(g, time), j(g, time), theta(g, time), t(time), params(p)
    {
    }

    const GridSpec& grid() const { return w.grid; }
};

}  // namespace couette

#pragma once
#include <array>
#include <vector>

#include "noisegen/image.hpp"

namespace noisegen {

constexpr int kOrientations = 4;  // 0, 45, 90, 135 degrees

// Oriented multi-scale decomposition with a disjoint frequency partition:
// at every scale the annulus pi/2 <= |w| is split into four orientation
// wedges, the disk |w| < pi/2 is carried to the next (half-size) scale.
// A tight frame, so reconstruction is exact and energy is preserved.
struct PyramidCoeffs {
    std::vector<std::array<Plane, kOrientations>> bands;  // bands[scale][orientation]
    Plane lowpass;

    int scales() const { return static_cast<int>(bands.size()); }
};

// Largest usable depth for a side length, or 0 if none.
int max_pyramid_scales(int width, int height);
void check_pyramid_size(int width, int height, int scales);

PyramidCoeffs pyramid_decompose(const Plane& image, int scales);
Plane pyramid_reconstruct(const PyramidCoeffs& coeffs);

double orientation_angle(int o);  // radians

}  // namespace noisegen

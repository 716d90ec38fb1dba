#pragma once
#include "noisegen/fft.hpp"
#include "noisegen/image.hpp"
#include "noisegen/sampling.hpp"

namespace noisegen {

// Keeps the Fourier phase of `input` and replaces its magnitude with `target`
// (unshifted FFT layout, same size). Bins where the input has zero magnitude
// get phase 0. Returns the real part of the inverse transform.
Plane impose_spectrum(const Plane& input, const Plane& target_magnitude);

// 1 / (|fx|^a + |fy|^b) with fx, fy integer cycles per image; DC is 0.
Plane power_law_magnitude(int width, int height, double a, double b);

// 1 / |f|^alpha, DC is 0.
Plane radial_power_law_magnitude(int width, int height, double alpha);

// Zero-mean, unit-std noise with a 1/|f|^alpha amplitude spectrum.
Plane power_law_noise(int width, int height, double alpha, Rng& rng);

Plane gaussian_noise(int width, int height, Rng& rng);

}  // namespace noisegen

#pragma once
#include "noisegen/image.hpp"

namespace noisegen {

// Axis-aligned source window in pixel units (may be fractional).
struct Window {
    double x0 = 0, y0 = 0, width = 0, height = 0;
};

// Keys bicubic (a = -0.5), clamp-to-edge, pixel-center aligned, separable.
Plane resample_bicubic(const Plane& src, const Window& win, int out_w, int out_h);
Plane resize_bicubic(const Plane& src, int out_w, int out_h);
Image resample_bicubic(const Image& src, const Window& win, int out_w, int out_h);
Image resize_bicubic(const Image& src, int out_w, int out_h);

// Raw single-channel float buffers, used for feature maps.
void resize_bicubic(const float* src, int sw, int sh, float* dst, int dw, int dh);
void resize_bicubic(const double* src, int sw, int sh, double* dst, int dw, int dh);

}  // namespace noisegen

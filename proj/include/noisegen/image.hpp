#pragma once
#include <array>
#include <cstddef>
#include <vector>

namespace noisegen {

enum class ColorSpace { Rgb, Lab };

// Interleaved H x W x 3 float image. RGB values are sRGB-encoded in [0, 1].
struct Image {
    int width = 0;
    int height = 0;
    ColorSpace space = ColorSpace::Rgb;
    std::vector<float> data;

    Image() = default;
    Image(int w, int h, ColorSpace cs = ColorSpace::Rgb)
        : width(w), height(h), space(cs), data(static_cast<std::size_t>(w) * h * 3, 0.0f) {}

    float& at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
    float at(int x, int y, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
    std::size_t pixels() const { return static_cast<std::size_t>(width) * height; }
    bool empty() const { return data.empty(); }
};

// Single-channel double grid, row-major.
struct Plane {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    Plane() = default;
    Plane(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    std::size_t size() const { return data.size(); }
};

Plane extract_channel(const Image& img, int c);
void insert_channel(Image& img, const Plane& p, int c);
Plane luminance(const Image& img);  // Rec. 709 weights on the stored values

double mean(const Plane& p);
double stddev(const Plane& p);

// Joint 1st-99th percentile rescale over all channels, then clamp to [0, 1].
// A constant image becomes mid-gray.
void robust_rescale(Image& img, double lo_pct = 0.01, double hi_pct = 0.99);
void clamp01(Image& img);

Image hflip(const Image& img);
Image to_grayscale(const Image& img);

}  // namespace noisegen

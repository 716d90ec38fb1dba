#include "noisegen/image.hpp"

#include <algorithm>
#include <cmath>

#include "noisegen/sampling.hpp"

namespace noisegen {

Plane extract_channel(const Image& img, int c) {
    Plane p(img.width, img.height);
    const std::size_t n = img.pixels();
    for (std::size_t i = 0; i < n; ++i) p.data[i] = img.data[i * 3 + c];
    return p;
}

void insert_channel(Image& img, const Plane& p, int c) {
    if (p.width != img.width || p.height != img.height)
        throw ParameterError("insert_channel: plane and image sizes differ");
    const std::size_t n = img.pixels();
    for (std::size_t i = 0; i < n; ++i) img.data[i * 3 + c] = static_cast<float>(p.data[i]);
}

Plane luminance(const Image& img) {
    Plane p(img.width, img.height);
    const std::size_t n = img.pixels();
    for (std::size_t i = 0; i < n; ++i) {
        const float* px = &img.data[i * 3];
        p.data[i] = 0.2126 * px[0] + 0.7152 * px[1] + 0.0722 * px[2];
    }
    return p;
}

double mean(const Plane& p) {
    double s = 0.0;
    for (double v : p.data) s += v;
    return p.data.empty() ? 0.0 : s / static_cast<double>(p.data.size());
}

double stddev(const Plane& p) {
    const double m = mean(p);
    double s = 0.0;
    for (double v : p.data) s += (v - m) * (v - m);
    return p.data.empty() ? 0.0 : std::sqrt(s / static_cast<double>(p.data.size()));
}

namespace {
float quantile_inplace(std::vector<float>& v, double q) {
    const auto k = static_cast<std::size_t>(std::floor(q * static_cast<double>(v.size() - 1) + 0.5));
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
    return v[k];
}
}  // namespace

void robust_rescale(Image& img, double lo_pct, double hi_pct) {
    if (img.data.empty()) return;
    std::vector<float> tmp(img.data);
    const float lo = quantile_inplace(tmp, lo_pct);
    const float hi = quantile_inplace(tmp, hi_pct);
    if (!(hi - lo > 1e-12f) || !std::isfinite(hi - lo)) {
        std::fill(img.data.begin(), img.data.end(), 0.5f);
        return;
    }
    const float inv = 1.0f / (hi - lo);
    for (float& v : img.data) v = std::clamp((v - lo) * inv, 0.0f, 1.0f);
}

void clamp01(Image& img) {
    for (float& v : img.data) v = std::isfinite(v) ? std::clamp(v, 0.0f, 1.0f) : 0.0f;
}

Image hflip(const Image& img) {
    Image out(img.width, img.height, img.space);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) out.at(img.width - 1 - x, y, c) = img.at(x, y, c);
    return out;
}

Image to_grayscale(const Image& img) {
    Image out(img.width, img.height, img.space);
    const std::size_t n = img.pixels();
    for (std::size_t i = 0; i < n; ++i) {
        const float* px = &img.data[i * 3];
        const float g = 0.299f * px[0] + 0.587f * px[1] + 0.114f * px[2];
        out.data[i * 3] = out.data[i * 3 + 1] = out.data[i * 3 + 2] = g;
    }
    return out;
}

}  // namespace noisegen

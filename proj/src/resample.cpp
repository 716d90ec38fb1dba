#include "noisegen/resample.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "noisegen/sampling.hpp"

namespace noisegen {

namespace {

double keys(double t) {
    constexpr double a = -0.5;
    t = std::abs(t);
    if (t < 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
    if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
    return 0.0;
}

struct Taps {
    std::vector<std::array<int, 4>> idx;
    std::vector<std::array<double, 4>> w;
};

Taps make_taps(int src_len, double start, double extent, int out_len) {
    Taps t;
    t.idx.resize(out_len);
    t.w.resize(out_len);
    const double step = extent / out_len;
    for (int i = 0; i < out_len; ++i) {
        const double s = start + (i + 0.5) * step - 0.5;
        const double f = std::floor(s);
        const double frac = s - f;
        for (int k = 0; k < 4; ++k) {
            const int j = static_cast<int>(f) - 1 + k;
            t.idx[i][k] = std::clamp(j, 0, src_len - 1);
            t.w[i][k] = keys(frac - (k - 1));
        }
    }
    return t;
}

template <typename T, typename Get, typename Put>
void separable(int sw, int sh, const Window& win, int dw, int dh, Get get, Put put) {
    const Taps tx = make_taps(sw, win.x0, win.width, dw);
    const Taps ty = make_taps(sh, win.y0, win.height, dh);
    std::vector<double> rows(static_cast<std::size_t>(sh) * dw);
    for (int y = 0; y < sh; ++y)
        for (int x = 0; x < dw; ++x) {
            double acc = 0.0;
            for (int k = 0; k < 4; ++k) acc += tx.w[x][k] * get(tx.idx[x][k], y);
            rows[static_cast<std::size_t>(y) * dw + x] = acc;
        }
    for (int y = 0; y < dh; ++y)
        for (int x = 0; x < dw; ++x) {
            double acc = 0.0;
            for (int k = 0; k < 4; ++k) acc += ty.w[y][k] * rows[static_cast<std::size_t>(ty.idx[y][k]) * dw + x];
            put(x, y, static_cast<T>(acc));
        }
}

void check(int sw, int sh, const Window& win, int dw, int dh) {
    if (sw <= 0 || sh <= 0) throw ParameterError("resample: empty source");
    if (dw <= 0 || dh <= 0) throw ParameterError("resample: output size must be positive");
    if (!(win.width > 0) || !(win.height > 0)) throw ParameterError("resample: window must have positive extent");
}

}  // namespace

Plane resample_bicubic(const Plane& src, const Window& win, int out_w, int out_h) {
    check(src.width, src.height, win, out_w, out_h);
    Plane out(out_w, out_h);
    separable<double>(
        src.width, src.height, win, out_w, out_h, [&](int x, int y) { return src.at(x, y); },
        [&](int x, int y, double v) { out.at(x, y) = v; });
    return out;
}

Plane resize_bicubic(const Plane& src, int out_w, int out_h) {
    return resample_bicubic(src, Window{0, 0, double(src.width), double(src.height)}, out_w, out_h);
}

Image resample_bicubic(const Image& src, const Window& win, int out_w, int out_h) {
    check(src.width, src.height, win, out_w, out_h);
    Image out(out_w, out_h, src.space);
    for (int c = 0; c < 3; ++c)
        separable<float>(
            src.width, src.height, win, out_w, out_h, [&](int x, int y) { return double(src.at(x, y, c)); },
            [&](int x, int y, float v) { out.at(x, y, c) = v; });
    return out;
}

Image resize_bicubic(const Image& src, int out_w, int out_h) {
    return resample_bicubic(src, Window{0, 0, double(src.width), double(src.height)}, out_w, out_h);
}

void resize_bicubic(const float* src, int sw, int sh, float* dst, int dw, int dh) {
    const Window win{0, 0, double(sw), double(sh)};
    check(sw, sh, win, dw, dh);
    separable<float>(
        sw, sh, win, dw, dh, [&](int x, int y) { return double(src[static_cast<std::size_t>(y) * sw + x]); },
        [&](int x, int y, float v) { dst[static_cast<std::size_t>(y) * dw + x] = v; });
}

void resize_bicubic(const double* src, int sw, int sh, double* dst, int dw, int dh) {
    const Window win{0, 0, double(sw), double(sh)};
    check(sw, sh, win, dw, dh);
    separable<double>(
        sw, sh, win, dw, dh, [&](int x, int y) { return src[static_cast<std::size_t>(y) * sw + x]; },
        [&](int x, int y, double v) { dst[static_cast<std::size_t>(y) * dw + x] = v; });
}

}  // namespace noisegen

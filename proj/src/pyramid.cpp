#include "noisegen/pyramid.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "noisegen/fft.hpp"
#include "noisegen/sampling.hpp"

namespace noisegen {

namespace {

struct LevelFilters {
    int w = 0, h = 0;
    std::vector<std::uint8_t> low;                      // 1 inside the disk
    std::array<std::vector<double>, kOrientations> band;  // wedge amplitude, 0 on the disk
};

int nearest_orientation(double wx, double wy) {
    double th = std::atan2(wy, wx);
    if (th < 0) th += std::numbers::pi;
    if (th >= std::numbers::pi) th -= std::numbers::pi;
    return static_cast<int>(std::floor(th / (std::numbers::pi / 4) + 0.5)) % kOrientations;
}

std::shared_ptr<const LevelFilters> build(int w, int h) {
    auto f = std::make_shared<LevelFilters>();
    f->w = w;
    f->h = h;
    const std::size_t n = static_cast<std::size_t>(w) * h;
    f->low.assign(n, 0);
    for (auto& b : f->band) b.assign(n, 0.0);
    auto omega = [](int k, int len) { return 2.0 * std::numbers::pi * signed_freq(k, len) / len; };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const double wx = omega(x, w), wy = omega(y, h);
            if (std::hypot(wx, wy) < std::numbers::pi / 2) {
                f->low[i] = 1;
                continue;
            }
            // The discrete mirror of a Nyquist-row bin is not its geometric
            // opposite; splitting the squared weight between both
            // orientations keeps each wedge Hermitian-even.
            const int mx = (w - x) % w, my = (h - y) % h;
            const int o1 = nearest_orientation(wx, wy);
            const int o2 = nearest_orientation(-omega(mx, w), -omega(my, h));
            if (o1 == o2) {
                f->band[o1][i] = 1.0;
            } else {
                f->band[o1][i] = std::sqrt(0.5);
                f->band[o2][i] = std::sqrt(0.5);
            }
        }
    }
    return f;
}

std::shared_ptr<const LevelFilters> filters_for(int w, int h) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::shared_ptr<const LevelFilters>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{w, h}];
    if (!slot) slot = build(w, h);
    return slot;
}

// Bin index in the full grid of a bin in the half-size grid.
inline int up_index(int s, int small_len) { return s < small_len / 2 ? s : s + small_len; }

}  // namespace

int max_pyramid_scales(int width, int height) {
    int n = 0;
    while (true) {
        const int k = n + 1;
        const int div = 1 << (k + 1);
        if (width % div != 0 || height % div != 0) break;
        if (std::min(width, height) < (1 << k) * 8) break;
        n = k;
    }
    return n;
}

void check_pyramid_size(int width, int height, int scales) {
    if (scales < 1) throw ParameterError("pyramid: need at least one scale, got " + std::to_string(scales));
    const int min_side = (1 << scales) * 8;
    if (std::min(width, height) < min_side)
        throw ParameterError("pyramid: image " + std::to_string(width) + "x" + std::to_string(height) +
                             " is too small for " + std::to_string(scales) + " scales (need >= " +
                             std::to_string(min_side) + ")");
    const int div = 1 << (scales + 1);
    if (width % div != 0 || height % div != 0)
        throw ParameterError("pyramid: dimensions must be divisible by " + std::to_string(div) + " for " +
                             std::to_string(scales) + " scales");
}

double orientation_angle(int o) { return o * std::numbers::pi / 4; }

PyramidCoeffs pyramid_decompose(const Plane& image, int scales) {
    check_pyramid_size(image.width, image.height, scales);
    for (double v : image.data)
        if (!std::isfinite(v)) throw ParameterError("pyramid_decompose: non-finite input");

    PyramidCoeffs out;
    out.bands.resize(scales);
    ComplexGrid X = fft2(image);
    for (int s = 0; s < scales; ++s) {
        const int w = X.width(), h = X.height();
        auto f = filters_for(w, h);
        for (int o = 0; o < kOrientations; ++o) {
            ComplexGrid B(w, h);
            const auto& a = f->band[o];
            for (std::size_t i = 0; i < B.size(); ++i) B[i] = X[i] * a[i];
            out.bands[s][o] = ifft2_real(std::move(B));
        }
        const int sw = w / 2, sh = h / 2;
        ComplexGrid S(sw, sh);
        for (int y = 0; y < sh; ++y) {
            const int by = up_index(y, sh);
            for (int x = 0; x < sw; ++x) {
                const int bx = up_index(x, sw);
                const std::size_t bi = static_cast<std::size_t>(by) * w + bx;
                S.at(x, y) = f->low[bi] ? X[bi] * 0.25 : cdouble(0.0, 0.0);
            }
        }
        X = std::move(S);
    }
    out.lowpass = ifft2_real(X);
    return out;
}

Plane pyramid_reconstruct(const PyramidCoeffs& coeffs) {
    if (coeffs.bands.empty()) throw ParameterError("pyramid_reconstruct: no bands");
    ComplexGrid X = fft2(coeffs.lowpass);
    for (int s = coeffs.scales() - 1; s >= 0; --s) {
        const auto& band = coeffs.bands[s];
        const int w = band[0].width, h = band[0].height;
        if (w != 2 * X.width() || h != 2 * X.height())
            throw ParameterError("pyramid_reconstruct: inconsistent band sizes at scale " + std::to_string(s));
        auto f = filters_for(w, h);
        ComplexGrid Y(w, h);
        for (int y = 0; y < X.height(); ++y) {
            const int by = up_index(y, X.height());
            for (int x = 0; x < X.width(); ++x) {
                const int bx = up_index(x, X.width());
                const std::size_t bi = static_cast<std::size_t>(by) * w + bx;
                if (f->low[bi]) Y[bi] = X.at(x, y) * 4.0;
            }
        }
        for (int o = 0; o < kOrientations; ++o) {
            if (band[o].width != w || band[o].height != h)
                throw ParameterError("pyramid_reconstruct: band size mismatch at scale " + std::to_string(s));
            ComplexGrid B = fft2(band[o]);
            const auto& a = f->band[o];
            for (std::size_t i = 0; i < B.size(); ++i) Y[i] += B[i] * a[i];
        }
        X = std::move(Y);
    }
    return ifft2_real(std::move(X));
}

}  // namespace noisegen

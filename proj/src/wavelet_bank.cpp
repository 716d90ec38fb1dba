#include "noisegen/wavelet_bank.hpp"

#include <cmath>
#include <numbers>

namespace noisegen {

std::string Wavelet::id() const {
    const char* k = kind == WaveletKind::Bar ? "bar" : kind == WaveletKind::Edge ? "edge" : "center-surround";
    if (kind == WaveletKind::CenterSurround) return k;
    return std::string(k) + "-" + std::to_string(static_cast<int>(orientation_deg));
}

namespace {

void normalize(std::array<double, 9>& t) {
    double mean = 0.0;
    for (double v : t) mean += v / 9.0;
    double ss = 0.0;
    for (double& v : t) {
        v -= mean;
        ss += v * v;
    }
    const double inv = 1.0 / std::sqrt(ss);
    for (double& v : t) v *= inv;
}

Wavelet oriented(WaveletKind kind, double deg) {
    Wavelet w;
    w.kind = kind;
    w.orientation_deg = deg;
    const double th = deg * std::numbers::pi / 180.0;
    // signed distance from the line through the center with direction th
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            const double u = -dx * std::sin(th) + dy * std::cos(th);
            double v;
            if (kind == WaveletKind::Bar) v = std::abs(u) < 0.5 ? 2.0 : -1.0;
            else v = std::abs(u) < 1e-9 ? 0.0 : (u > 0 ? 1.0 : -1.0);
            w.taps[(dy + 1) * 3 + (dx + 1)] = v;
        }
    }
    normalize(w.taps);
    return w;
}

}  // namespace

WaveletBank make_wavelet_bank(std::uint64_t) {
    WaveletBank bank;
    for (double deg : {0.0, 45.0, 90.0, 135.0}) bank.filters.push_back(oriented(WaveletKind::Bar, deg));
    for (double deg : {0.0, 45.0, 90.0, 135.0}) bank.filters.push_back(oriented(WaveletKind::Edge, deg));
    Wavelet cs;
    cs.kind = WaveletKind::CenterSurround;
    cs.taps = {-1, -1, -1, -1, 8, -1, -1, -1, -1};
    normalize(cs.taps);
    bank.filters.push_back(cs);
    return bank;
}

}  // namespace noisegen

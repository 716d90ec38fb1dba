#pragma once
#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace noisegen {

enum class WaveletKind { Bar, Edge, CenterSurround };

// 3x3 kernel, row-major taps[dy + 1][dx + 1], zero-mean and unit L2 norm.
struct Wavelet {
    WaveletKind kind = WaveletKind::Bar;
    double orientation_deg = 0.0;  // direction of the structure it responds to
    std::array<double, 9> taps{};
    std::string id() const;
};

struct WaveletBank {
    std::vector<Wavelet> filters;
    std::size_t size() const { return filters.size(); }
    const Wavelet& operator[](std::size_t i) const { return filters[i]; }
};

// Bar and edge detectors at 0/45/90/135 degrees plus a center-surround blob.
// The bank is fixed; the seed argument only exists for interface symmetry.
WaveletBank make_wavelet_bank(std::uint64_t seed = 0);

}  // namespace noisegen

#pragma once
#include <array>
#include <optional>
#include <vector>

#include "noisegen/histogram.hpp"
#include "noisegen/image.hpp"
#include "noisegen/sampling.hpp"

namespace noisegen {

using Mat3 = std::array<std::array<double, 3>, 3>;
using Rgb = std::array<float, 3>;

struct SpectrumParams {
    double a = 1.0, b = 1.0;
    Mat3 color_basis{};  // columns are orthonormal color directions

    void validate() const;
};

struct ColorPalette {
    std::vector<Rgb> colors;
    std::vector<double> weights;  // sums to 1

    double entropy() const;
    const Rgb& pick(double u) const;  // color whose cumulative weight interval holds u
};

struct WmmParams {
    int scales = 3;
    std::vector<double> alpha;               // per scale, finest first
    std::array<std::vector<double>, 3> beta;  // per channel, per scale
    int iterations = 20;
    std::size_t target_samples = 100000;

    void validate() const;
};

// One sorted target sample set per scale for a channel.
using WmmTargets = std::vector<EmpiricalCdf>;

struct StatModelSet {
    bool spectrum = false;
    bool color = false;
    bool wmm = false;

    bool empty() const { return !spectrum && !color && !wmm; }
};

struct ComposeOptions {
    int iterations = 10;
    int wmm_iterations = 20;  // used when WMM is the only constraint
    std::size_t wmm_target_samples = 100000;
    std::optional<SpectrumParams> spectrum;  // fixed instead of sampled
};

Mat3 random_orthonormal(Rng& rng);

SpectrumParams sample_spectrum_params(const SeedTree& seed);
Image generate_spectrum_image(const SpectrumParams& p, int size, const SeedTree& seed);

ColorPalette sample_color_palette(const SeedTree& seed);
// Rank-based projection onto the palette: pixels sorted by luminance take the
// luminance-sorted palette colors in proportion to their weights.
void match_palette(Image& img, const ColorPalette& palette);

int wmm_scales_for(int size);
std::vector<double> wmm_alphas(int scales);
WmmParams sample_wmm_params(int size, const SeedTree& seed);
WmmTargets wmm_targets(const WmmParams& p, int channel, const SeedTree& seed);
// Variance of an image whose bands follow the targets exactly.
double wmm_reference_variance(const WmmTargets& targets);
// decompose, match every band to its scale's target, reconstruct
Plane wmm_project(const Plane& x, const WmmTargets& targets);
// Raw (unnormalized) synthesis of one channel.
Plane synthesize_wmm_channel(const WmmParams& p, int size, const WmmTargets& targets, const SeedTree& seed);
Image generate_wmm_texture(const WmmParams& p, int size, const SeedTree& seed);
// W1 of each band to its target, [scale][orientation]
std::vector<std::array<double, 4>> wmm_band_distances(const Plane& x, const WmmTargets& targets);

struct ComposedResult {
    Image image;
    SpectrumParams spectrum;
    ColorPalette palette;
    WmmParams wmm;
};

ComposedResult generate_composed_detailed(const StatModelSet& models, int size, const SeedTree& seed,
                                          const ComposeOptions& opts = {});
Image generate_composed(const StatModelSet& models, int size, const SeedTree& seed, const ComposeOptions& opts = {});

}  // namespace noisegen

#pragma once
#include "noisegen/image.hpp"
#include "noisegen/resample.hpp"
#include "noisegen/sampling.hpp"

namespace noisegen {

struct AugmentConfig {
    int out_size = 64;
    double grayscale_prob = 0.2;
    double jitter_lo = 0.6, jitter_hi = 1.4;  // brightness, contrast, saturation factors
    double flip_prob = 0.5;
    double aspect_lo = 0.75, aspect_hi = 1.33;
    double area_lo = 0.08, area_hi = 1.0;

    void validate() const;
};

struct AugmentedView {
    Image image;
    bool grayscale = false;
    bool flipped = false;
    double brightness = 1.0, contrast = 1.0, saturation = 1.0;
    Window crop;
};

// Random square-output crop window with area fraction and aspect drawn from
// the config ranges, clamped to lie inside the image.
Window sample_crop(int width, int height, const AugmentConfig& cfg, Rng& rng);

// Grayscale, color jitter, horizontal flip, random resized crop, in that order.
AugmentedView augment_view(const Image& img, const AugmentConfig& cfg, const SeedTree& seed);

}  // namespace noisegen

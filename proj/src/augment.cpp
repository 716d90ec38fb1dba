#include "noisegen/augment.hpp"

#include <algorithm>
#include <cmath>

namespace noisegen {

void AugmentConfig::validate() const {
    auto prob = [](double p, const char* what) {
        if (!(p >= 0.0 && p <= 1.0)) throw ParameterError(std::string(what) + " must lie in [0, 1]");
    };
    if (out_size <= 0) throw ParameterError("augment: out_size must be positive");
    prob(grayscale_prob, "augment: grayscale_prob");
    prob(flip_prob, "augment: flip_prob");
    if (!(jitter_lo > 0.0 && jitter_lo <= jitter_hi)) throw ParameterError("augment: need 0 < jitter_lo <= jitter_hi");
    if (!(aspect_lo > 0.0 && aspect_lo <= aspect_hi)) throw ParameterError("augment: need 0 < aspect_lo <= aspect_hi");
    if (!(area_lo > 0.0 && area_lo <= area_hi && area_hi <= 1.0))
        throw ParameterError("augment: need 0 < area_lo <= area_hi <= 1");
}

Window sample_crop(int width, int height, const AugmentConfig& cfg, Rng& rng) {
    const double area = rng.uniform(cfg.area_lo, cfg.area_hi) * width * height;
    // aspect drawn log-uniformly, as in the usual random-resized-crop
    const double aspect = std::exp(rng.uniform(std::log(cfg.aspect_lo), std::log(cfg.aspect_hi)));
    double cw = std::sqrt(area * aspect);
    double ch = std::sqrt(area / aspect);
    cw = std::min(cw, double(width));
    ch = std::min(ch, double(height));
    const double x0 = rng.uniform() * (width - cw);
    const double y0 = rng.uniform() * (height - ch);
    return Window{x0, y0, cw, ch};
}

namespace {

void jitter_brightness(Image& img, double f) {
    for (float& v : img.data) v = std::clamp(static_cast<float>(v * f), 0.0f, 1.0f);
}

void jitter_contrast(Image& img, double f) {
    const Plane g = luminance(img);
    const double m = mean(g);
    for (float& v : img.data) v = std::clamp(static_cast<float>((v - m) * f + m), 0.0f, 1.0f);
}

void jitter_saturation(Image& img, double f) {
    const std::size_t n = img.pixels();
    for (std::size_t i = 0; i < n; ++i) {
        float* px = &img.data[i * 3];
        const double g = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
        for (int c = 0; c < 3; ++c) px[c] = std::clamp(static_cast<float>((px[c] - g) * f + g), 0.0f, 1.0f);
    }
}

}  // namespace

AugmentedView augment_view(const Image& img, const AugmentConfig& cfg, const SeedTree& seed) {
    cfg.validate();
    if (img.empty()) throw ParameterError("augment_view: empty image");
    if (img.space != ColorSpace::Rgb) throw ParameterError("augment_view: expects an RGB image");
    Rng rng(seed);
    AugmentedView out;
    Image work = img;

    out.grayscale = rng.bernoulli(cfg.grayscale_prob);
    if (out.grayscale) work = to_grayscale(work);

    out.brightness = rng.uniform(cfg.jitter_lo, cfg.jitter_hi);
    out.contrast = rng.uniform(cfg.jitter_lo, cfg.jitter_hi);
    out.saturation = rng.uniform(cfg.jitter_lo, cfg.jitter_hi);
    if (out.brightness != 1.0) jitter_brightness(work, out.brightness);
    if (out.contrast != 1.0) jitter_contrast(work, out.contrast);
    if (out.saturation != 1.0) jitter_saturation(work, out.saturation);

    out.flipped = rng.bernoulli(cfg.flip_prob);
    if (out.flipped) work = hflip(work);

    out.crop = sample_crop(work.width, work.height, cfg, rng);
    out.image = resample_bicubic(work, out.crop, cfg.out_size, cfg.out_size);
    clamp01(out.image);
    return out;
}

}  // namespace noisegen

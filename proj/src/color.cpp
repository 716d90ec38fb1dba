#include "noisegen/color.hpp"

#include <cmath>

#include "noisegen/sampling.hpp"

namespace noisegen {

namespace {

constexpr double kXn = 0.95047, kYn = 1.0, kZn = 1.08883;
constexpr double kEps = 216.0 / 24389.0;
constexpr double kKappa = 24389.0 / 27.0;

double decode(double v) { return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4); }
double encode(double v) { return v <= 0.0031308 ? 12.92 * v : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055; }

double f(double t) { return t > kEps ? std::cbrt(t) : (kKappa * t + 16.0) / 116.0; }
double finv(double t) {
    const double t3 = t * t * t;
    return t3 > kEps ? t3 : (116.0 * t - 16.0) / kKappa;
}

}  // namespace

Vec3 srgb_to_lab(const Vec3& rgb) {
    const double r = decode(rgb[0]), g = decode(rgb[1]), b = decode(rgb[2]);
    const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
    const double fx = f(x / kXn), fy = f(y / kYn), fz = f(z / kZn);
    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

Vec3 lab_to_srgb(const Vec3& lab) {
    const double fy = (lab[0] + 16.0) / 116.0;
    const double fx = fy + lab[1] / 500.0;
    const double fz = fy - lab[2] / 200.0;
    const double x = kXn * finv(fx), y = kYn * finv(fy), z = kZn * finv(fz);
    const double r = 3.2404542 * x - 1.5371385 * y - 0.4985314 * z;
    const double g = -0.9692660 * x + 1.8760108 * y + 0.0415560 * z;
    const double b = 0.0556434 * x - 0.2040259 * y + 1.0572252 * z;
    return {encode(r), encode(g), encode(b)};
}

namespace {
Image convert(const Image& in, ColorSpace from, ColorSpace to, Vec3 (*fn)(const Vec3&)) {
    if (in.space != from) throw ParameterError("color conversion: image is tagged with the wrong color space");
    Image out(in.width, in.height, to);
    const std::size_t n = in.pixels();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 v{in.data[i * 3], in.data[i * 3 + 1], in.data[i * 3 + 2]};
        if (!std::isfinite(v[0]) || !std::isfinite(v[1]) || !std::isfinite(v[2]))
            throw ParameterError("color conversion: non-finite pixel at index " + std::to_string(i));
        const Vec3 o = fn(v);
        for (int c = 0; c < 3; ++c) out.data[i * 3 + c] = static_cast<float>(o[c]);
    }
    return out;
}
}  // namespace

Image rgb_to_lab(const Image& rgb) { return convert(rgb, ColorSpace::Rgb, ColorSpace::Lab, srgb_to_lab); }
Image lab_to_rgb(const Image& lab) { return convert(lab, ColorSpace::Lab, ColorSpace::Rgb, lab_to_srgb); }

}  // namespace noisegen

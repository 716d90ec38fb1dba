#pragma once
#include <array>

#include "noisegen/image.hpp"

namespace noisegen {

using Vec3 = std::array<double, 3>;

// sRGB (D65) <-> CIE L*a*b*.
Vec3 srgb_to_lab(const Vec3& rgb);
Vec3 lab_to_srgb(const Vec3& lab);

Image rgb_to_lab(const Image& rgb);
Image lab_to_rgb(const Image& lab);

}  // namespace noisegen

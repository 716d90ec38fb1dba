#include "noisegen/spectrum.hpp"

#include <cmath>
#include <string>

namespace noisegen {

Plane impose_spectrum(const Plane& input, const Plane& target) {
    if (input.width != target.width || input.height != target.height)
        throw ParameterError("impose_spectrum: target magnitude is " + std::to_string(target.width) + "x" +
                             std::to_string(target.height) + ", image is " + std::to_string(input.width) + "x" +
                             std::to_string(input.height));
    for (std::size_t i = 0; i < target.size(); ++i) {
        const double m = target.data[i];
        if (!std::isfinite(m) || m < 0.0)
            throw ParameterError("impose_spectrum: target magnitude must be finite and non-negative (bin " +
                                 std::to_string(i) + ")");
    }
    for (double v : input.data)
        if (!std::isfinite(v)) throw ParameterError("impose_spectrum: input contains non-finite values");

    ComplexGrid g = fft2(input);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double mag = std::abs(g[i]);
        g[i] = mag > 0.0 ? g[i] * (target.data[i] / mag) : cdouble(target.data[i], 0.0);
    }
    return ifft2_real(std::move(g));
}

Plane power_law_magnitude(int width, int height, double a, double b) {
    if (width <= 0 || height <= 0) throw ParameterError("power_law_magnitude: size must be positive");
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
        throw ParameterError("power_law_magnitude: exponents must be finite and > 0");
    Plane m(width, height);
    for (int y = 0; y < height; ++y) {
        const double fy = std::abs(signed_freq(y, height));
        const double py = fy > 0 ? std::pow(fy, b) : 0.0;
        for (int x = 0; x < width; ++x) {
            const double fx = std::abs(signed_freq(x, width));
            const double px = fx > 0 ? std::pow(fx, a) : 0.0;
            m.at(x, y) = (x == 0 && y == 0) ? 0.0 : 1.0 / (px + py);
        }
    }
    return m;
}

Plane radial_power_law_magnitude(int width, int height, double alpha) {
    if (width <= 0 || height <= 0) throw ParameterError("radial_power_law_magnitude: size must be positive");
    Plane m(width, height);
    for (int y = 0; y < height; ++y) {
        const double fy = signed_freq(y, height);
        for (int x = 0; x < width; ++x) {
            const double fx = signed_freq(x, width);
            const double r = std::sqrt(fx * fx + fy * fy);
            m.at(x, y) = r > 0 ? std::pow(r, -alpha) : 0.0;
        }
    }
    return m;
}

Plane gaussian_noise(int width, int height, Rng& rng) {
    Plane p(width, height);
    for (double& v : p.data) v = rng.gaussian();
    return p;
}

Plane power_law_noise(int width, int height, double alpha, Rng& rng) {
    Plane p = impose_spectrum(gaussian_noise(width, height, rng), radial_power_law_magnitude(width, height, alpha));
    const double m = mean(p), s = stddev(p);
    const double inv = s > 0 ? 1.0 / s : 0.0;
    for (double& v : p.data) v = (v - m) * inv;
    return p;
}

}  // namespace noisegen

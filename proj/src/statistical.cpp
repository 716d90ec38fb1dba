#include "noisegen/statistical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "noisegen/fft.hpp"
#include "noisegen/pyramid.hpp"
#include "noisegen/spectrum.hpp"

namespace noisegen {

// ---- spectrum ----

void SpectrumParams::validate() const {
    for (double e : {a, b})
        if (!std::isfinite(e) || e <= 0.0) throw ParameterError("spectrum exponents must be finite and > 0");
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double dot = 0;
            for (int k = 0; k < 3; ++k) dot += color_basis[k][i] * color_basis[k][j];
            if (std::abs(dot - (i == j ? 1.0 : 0.0)) > 1e-6)
                throw ParameterError("spectrum color basis is not orthonormal");
        }
}

Mat3 random_orthonormal(Rng& rng) {
    // Gram-Schmidt on Gaussian columns gives a Haar-distributed rotation
    std::array<std::array<double, 3>, 3> col{};
    for (int j = 0; j < 3; ++j) {
        for (;;) {
            for (int k = 0; k < 3; ++k) col[j][k] = rng.gaussian();
            for (int i = 0; i < j; ++i) {
                double d = 0;
                for (int k = 0; k < 3; ++k) d += col[i][k] * col[j][k];
                for (int k = 0; k < 3; ++k) col[j][k] -= d * col[i][k];
            }
            double n = 0;
            for (int k = 0; k < 3; ++k) n += col[j][k] * col[j][k];
            n = std::sqrt(n);
            if (n > 1e-6) {
                for (int k = 0; k < 3; ++k) col[j][k] /= n;
                break;
            }
        }
    }
    Mat3 m{};
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m[r][c] = col[c][r];
    return m;
}

SpectrumParams sample_spectrum_params(const SeedTree& seed) {
    Rng rng(seed);
    SpectrumParams p;
    p.a = rng.uniform(0.5, 3.5);
    p.b = rng.uniform(0.5, 3.5);
    p.color_basis = random_orthonormal(rng);
    return p;
}

namespace {

void check_size(int size, const char* who) {
    if (size < 8) throw ParameterError(std::string(who) + ": size must be at least 8");
}

// basis coordinates -> RGB planes
std::array<Plane, 3> rotate(const std::array<Plane, 3>& u, const Mat3& m) {
    std::array<Plane, 3> out;
    for (int r = 0; r < 3; ++r) {
        out[r] = Plane(u[0].width, u[0].height);
        for (std::size_t i = 0; i < out[r].size(); ++i)
            out[r].data[i] = m[r][0] * u[0].data[i] + m[r][1] * u[1].data[i] + m[r][2] * u[2].data[i];
    }
    return out;
}

std::array<Plane, 3> rotate_transposed(const std::array<Plane, 3>& x, const Mat3& m) {
    Mat3 t{};
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) t[r][c] = m[c][r];
    return rotate(x, t);
}

std::array<Plane, 3> split(const Image& img) {
    return {extract_channel(img, 0), extract_channel(img, 1), extract_channel(img, 2)};
}

Image merge(const std::array<Plane, 3>& ch) {
    Image img(ch[0].width, ch[0].height);
    for (int c = 0; c < 3; ++c) insert_channel(img, ch[c], c);
    return img;
}

// Impose the power-law shape while keeping the plane's mean and AC energy.
void project_spectrum(Plane& x, const Plane& magnitude) {
    ComplexGrid X = fft2(x);
    double ac = 0, tgt = 0;
    for (std::size_t i = 1; i < X.size(); ++i) {
        ac += std::norm(X[i]);
        tgt += magnitude.data[i] * magnitude.data[i];
    }
    const double scale = tgt > 0 ? std::sqrt(ac / tgt) : 0.0;
    const cdouble dc = X[0];
    for (std::size_t i = 1; i < X.size(); ++i) {
        const double mag = std::abs(X[i]);
        const double t = magnitude.data[i] * scale;
        X[i] = mag > 0 ? X[i] * (t / mag) : cdouble(t, 0.0);
    }
    X[0] = dc;
    x = ifft2_real(std::move(X));
}

}  // namespace

Image generate_spectrum_image(const SpectrumParams& p, int size, const SeedTree& seed) {
    p.validate();
    check_size(size, "generate_spectrum_image");
    const Plane mag = power_law_magnitude(size, size, p.a, p.b);
    std::array<Plane, 3> u;
    for (int c = 0; c < 3; ++c) {
        Rng rng(seed.child("noise", c));
        u[c] = impose_spectrum(gaussian_noise(size, size, rng), mag);
    }
    Image img = merge(rotate(u, p.color_basis));
    robust_rescale(img);
    return img;
}

// ---- color palette ----

double ColorPalette::entropy() const {
    double h = 0;
    for (double w : weights)
        if (w > 0) h -= w * std::log(w);
    return h;
}

const Rgb& ColorPalette::pick(double u) const {
    double acc = 0;
    for (std::size_t k = 0; k + 1 < weights.size(); ++k) {
        acc += weights[k];
        if (u < acc) return colors[k];
    }
    return colors.back();
}

ColorPalette sample_color_palette(const SeedTree& seed) {
    Rng rng(seed);
    const int n = 3 + static_cast<int>(std::floor(rng.uniform(0.0, 20.0)));
    ColorPalette p;
    p.colors.resize(n);
    p.weights.resize(n);
    double total = 0;
    for (int k = 0; k < n; ++k) {
        p.weights[k] = 0.001 + rng.uniform();
        total += p.weights[k];
    }
    for (double& w : p.weights) w /= total;
    for (auto& c : p.colors)
        for (float& v : c) v = static_cast<float>(rng.uniform());
    return p;
}

void match_palette(Image& img, const ColorPalette& palette) {
    if (palette.colors.empty() || palette.colors.size() != palette.weights.size())
        throw ParameterError("match_palette: palette needs matching colors and weights");
    const std::size_t n = img.pixels();
    const Plane lum = luminance(img);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lum.data[a] < lum.data[b]; });

    std::vector<std::size_t> pal(palette.colors.size());
    std::iota(pal.begin(), pal.end(), std::size_t{0});
    auto plum = [&](std::size_t k) {
        const Rgb& c = palette.colors[k];
        return 0.2126 * c[0] + 0.7152 * c[1] + 0.0722 * c[2];
    };
    std::stable_sort(pal.begin(), pal.end(), [&](std::size_t a, std::size_t b) { return plum(a) < plum(b); });

    std::size_t k = 0;
    double upper = palette.weights[pal[0]];
    for (std::size_t r = 0; r < n; ++r) {
        const double q = (static_cast<double>(r) + 0.5) / static_cast<double>(n);
        while (q >= upper && k + 1 < pal.size()) upper += palette.weights[pal[++k]];
        const Rgb& c = palette.colors[pal[k]];
        for (int ch = 0; ch < 3; ++ch) img.data[order[r] * 3 + ch] = c[ch];
    }
}

// ---- WMM ----

void WmmParams::validate() const {
    if (scales < 1) throw ParameterError("wmm: need at least one scale");
    if (static_cast<int>(alpha.size()) != scales) throw ParameterError("wmm: alpha must have one entry per scale");
    for (double a : alpha)
        if (!std::isfinite(a) || a <= 0) throw ParameterError("wmm: alpha must be finite and > 0");
    for (const auto& b : beta) {
        if (static_cast<int>(b.size()) != scales) throw ParameterError("wmm: beta must have one entry per scale");
        for (double v : b)
            if (!std::isfinite(v) || v <= 0) throw ParameterError("wmm: beta must be finite and > 0");
    }
    if (iterations < 1) throw ParameterError("wmm: iterations must be >= 1");
    if (target_samples < 1) throw ParameterError("wmm: target_samples must be >= 1");
}

int wmm_scales_for(int size) {
    if (size < 32) throw ParameterError("wmm: size must be at least 32, got " + std::to_string(size));
    return static_cast<int>(std::floor(std::log2(static_cast<double>(size)))) - 4;
}

std::vector<double> wmm_alphas(int scales) {
    std::vector<double> a(scales);
    for (int i = 0; i < scales; ++i) a[i] = std::pow(4.0, std::pow(2.0, i));
    return a;
}

WmmParams sample_wmm_params(int size, const SeedTree& seed) {
    WmmParams p;
    p.scales = wmm_scales_for(size);
    p.alpha = wmm_alphas(p.scales);
    Rng rng(seed);
    for (auto& b : p.beta) {
        b.resize(p.scales);
        for (double& v : b) v = 0.4 + rng.uniform(0.0, 0.4);
    }
    return p;
}

WmmTargets wmm_targets(const WmmParams& p, int channel, const SeedTree& seed) {
    p.validate();
    if (channel < 0 || channel > 2) throw ParameterError("wmm: channel must be 0, 1 or 2");
    WmmTargets t;
    t.reserve(p.scales);
    for (int s = 0; s < p.scales; ++s)
        t.emplace_back(draw(GeneralizedNormal{p.alpha[s], p.beta[channel][s]}, p.target_samples,
                            seed.child("target", static_cast<std::uint64_t>(channel) * 64 + s)));
    return t;
}

double wmm_reference_variance(const WmmTargets& targets) {
    double v = 0;
    for (const auto& t : targets) {
        double m2 = 0;
        for (double x : t.sorted()) m2 += x * x;
        v += kOrientations * m2 / static_cast<double>(t.size());
    }
    return v;
}

Plane wmm_project(const Plane& x, const WmmTargets& targets) {
    PyramidCoeffs c = pyramid_decompose(x, static_cast<int>(targets.size()));
    for (int s = 0; s < c.scales(); ++s)
        for (auto& band : c.bands[s]) band.data = histogram_match(band.data, targets[s]);
    return pyramid_reconstruct(c);
}

Plane synthesize_wmm_channel(const WmmParams& p, int size, const WmmTargets& targets, const SeedTree& seed) {
    p.validate();
    if (static_cast<int>(targets.size()) != p.scales) throw ParameterError("wmm: one target per scale required");
    check_pyramid_size(size, size, p.scales);
    Rng rng(seed);
    Plane x = gaussian_noise(size, size, rng);
    for (int k = 0; k < p.iterations; ++k) x = wmm_project(x, targets);
    return x;
}

Image generate_wmm_texture(const WmmParams& p, int size, const SeedTree& seed) {
    p.validate();
    std::array<Plane, 3> ch;
    for (int c = 0; c < 3; ++c) {
        const WmmTargets t = wmm_targets(p, c, seed);
        ch[c] = synthesize_wmm_channel(p, size, t, seed.child("noise", c));
    }
    Image img = merge(ch);
    robust_rescale(img);
    return img;
}

std::vector<std::array<double, 4>> wmm_band_distances(const Plane& x, const WmmTargets& targets) {
    const PyramidCoeffs c = pyramid_decompose(x, static_cast<int>(targets.size()));
    std::vector<std::array<double, 4>> d(c.scales());
    for (int s = 0; s < c.scales(); ++s)
        for (int o = 0; o < kOrientations; ++o) d[s][o] = wasserstein1(c.bands[s][o].data, targets[s]);
    return d;
}

// ---- composition ----

ComposedResult generate_composed_detailed(const StatModelSet& models, int size, const SeedTree& seed,
                                          const ComposeOptions& opts) {
    if (models.empty()) throw ParameterError("generate_composed: select at least one constraint");
    if (opts.iterations < 1) throw ParameterError("generate_composed: iterations must be >= 1");
    check_size(size, "generate_composed");

    ComposedResult r;
    r.spectrum = opts.spectrum ? *opts.spectrum : sample_spectrum_params(seed.child("spectrum"));
    if (models.color) r.palette = sample_color_palette(seed.child("palette"));
    if (models.wmm) {
        r.wmm = sample_wmm_params(size, seed.child("wmm"));
        r.wmm.iterations = opts.wmm_iterations;
        r.wmm.target_samples = opts.wmm_target_samples;
    }

    if (!models.color && !models.wmm) {
        r.image = generate_spectrum_image(r.spectrum, size, seed);
        return r;
    }
    if (!models.color && !models.spectrum) {
        r.image = generate_wmm_texture(r.wmm, size, seed);
        return r;
    }

    std::array<WmmTargets, 3> targets;
    std::array<double, 3> ref_sd{};
    if (models.wmm) {
        for (int c = 0; c < 3; ++c) {
            targets[c] = wmm_targets(r.wmm, c, seed);
            ref_sd[c] = std::sqrt(wmm_reference_variance(targets[c]));
        }
    }
    const Plane mag = models.spectrum ? power_law_magnitude(size, size, r.spectrum.a, r.spectrum.b) : Plane();

    // white noise in the spectrum's color coordinates
    std::array<Plane, 3> u;
    for (int c = 0; c < 3; ++c) {
        Rng rng(seed.child("noise", c));
        u[c] = gaussian_noise(size, size, rng);
    }
    std::array<Plane, 3> x = rotate(u, r.spectrum.color_basis);

    for (int it = 0; it < opts.iterations; ++it) {
        if (models.spectrum) {
            u = rotate_transposed(x, r.spectrum.color_basis);
            for (auto& p : u) project_spectrum(p, mag);
            x = rotate(u, r.spectrum.color_basis);
        }
        if (models.wmm) {
            // band targets are absolute; work at the reference scale and map back
            for (int c = 0; c < 3; ++c) {
                const double m = mean(x[c]), sd = stddev(x[c]);
                if (!(sd > 0)) continue;
                Plane z = x[c];
                for (double& v : z.data) v = (v - m) / sd * ref_sd[c];
                z = wmm_project(z, targets[c]);
                const double zm = mean(z);
                for (std::size_t i = 0; i < z.size(); ++i) x[c].data[i] = (z.data[i] - zm) / ref_sd[c] * sd + m;
            }
        }
        if (models.color) {
            Image img = merge(x);
            match_palette(img, r.palette);
            x = split(img);
        }
    }
    r.image = merge(x);
    if (models.color) clamp01(r.image);
    else robust_rescale(r.image);
    return r;
}

Image generate_composed(const StatModelSet& models, int size, const SeedTree& seed, const ComposeOptions& opts) {
    return generate_composed_detailed(models, size, seed, opts).image;
}

}  // namespace noisegen

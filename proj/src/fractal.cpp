#include "noisegen/fractal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace noisegen {

namespace {

Rgb hue_to_rgb(double h) {
    // HSV with fixed saturation 0.85 and value 1
    constexpr double s = 0.85;
    const double k = h * 6.0;
    const int sector = static_cast<int>(std::floor(k)) % 6;
    const double f = k - std::floor(k);
    const float p = static_cast<float>(1.0 - s), q = static_cast<float>(1.0 - s * f),
                t = static_cast<float>(1.0 - s * (1.0 - f));
    switch (sector) {
        case 0: return {1.0f, t, p};
        case 1: return {q, 1.0f, p};
        case 2: return {p, 1.0f, t};
        case 3: return {p, q, 1.0f};
        case 4: return {t, p, 1.0f};
        default: return {1.0f, p, q};
    }
}

std::size_t pick_map(const std::vector<double>& cdf, double u) {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

}  // namespace

double AffineMap::norm() const {
    // sqrt of the top eigenvalue of M^T M
    const double p = a * a + c * c, q = a * b + c * d, r = b * b + d * d;
    const double tr = p + r, disc = std::sqrt(std::max(0.0, (p - r) * (p - r) + 4 * q * q));
    return std::sqrt(0.5 * (tr + disc));
}

void IfsSystem::validate() const {
    if (maps.empty()) throw ParameterError("ifs: at least one map is required");
    if (weights.size() != maps.size() || colors.size() != maps.size())
        throw ParameterError("ifs: weights and colors need one entry per map");
    double s = 0;
    for (std::size_t i = 0; i < maps.size(); ++i) {
        if (!(maps[i].norm() < 1.0))
            throw ParameterError("ifs: map " + std::to_string(i) + " is not contractive (norm " +
                                 std::to_string(maps[i].norm()) + ")");
        if (!(weights[i] > 0) || !std::isfinite(weights[i])) throw ParameterError("ifs: weights must be positive");
        s += weights[i];
    }
    if (std::abs(s - 1.0) > 1e-9) throw ParameterError("ifs: weights must sum to 1");
}

double IfsSystem::bound() const {
    double r = 0;
    for (const AffineMap& m : maps) r = std::max(r, std::hypot(m.e, m.f) / (1.0 - m.norm()));
    return r;
}

void FractalParams::validate() const {
    if (points < 10000) throw ParameterError("fractal: points must be >= 10000, got " + std::to_string(points));
    if (discard < 0) throw ParameterError("fractal: discard must be >= 0");
    if (pilot_points < 100) throw ParameterError("fractal: pilot_points must be >= 100");
    if (max_attempts < 1) throw ParameterError("fractal: max_attempts must be >= 1");
}

IfsSystem sample_ifs(const SeedTree& seed) {
    Rng rng(seed);
    IfsSystem sys;
    const int n = 2 + static_cast<int>(rng.below(7));
    for (int i = 0; i < n; ++i) {
        AffineMap m;
        do {
            m.a = rng.uniform(-1, 1);
            m.b = rng.uniform(-1, 1);
            m.c = rng.uniform(-1, 1);
            m.d = rng.uniform(-1, 1);
        } while (!(m.norm() < 1.0));
        m.e = rng.uniform(-1, 1);
        m.f = rng.uniform(-1, 1);
        sys.maps.push_back(m);
    }
    double total = 0;
    for (const AffineMap& m : sys.maps) {
        sys.weights.push_back(std::abs(m.det()) + 0.01);
        total += sys.weights.back();
    }
    for (double& w : sys.weights) w /= total;
    for (int i = 0; i < n; ++i) sys.colors.push_back(hue_to_rgb(rng.uniform()));
    return sys;
}

IfsSystem sierpinski_system() {
    IfsSystem sys;
    const double h = std::sqrt(3.0) / 4;
    for (auto [e, f] : {std::pair{0.0, 0.0}, std::pair{0.5, 0.0}, std::pair{0.25, h}})
        sys.maps.push_back(AffineMap{0.5, 0, 0, 0.5, e, f});
    sys.weights.assign(3, 1.0 / 3);
    sys.colors = {hue_to_rgb(0.0), hue_to_rgb(1.0 / 3), hue_to_rgb(2.0 / 3)};
    return sys;
}

std::vector<Point2> chaos_game(const IfsSystem& sys, int points, int discard, const SeedTree& seed,
                               std::vector<int>* chosen) {
    sys.validate();
    if (points < 0 || discard < 0) throw ParameterError("chaos_game: counts must be >= 0");
    std::vector<double> cdf(sys.weights.size());
    std::partial_sum(sys.weights.begin(), sys.weights.end(), cdf.begin());
    Rng rng(seed);
    std::vector<Point2> out;
    out.reserve(points);
    if (chosen) {
        chosen->clear();
        chosen->reserve(points);
    }
    double x = 0, y = 0;
    for (int i = 0; i < points + discard; ++i) {
        const std::size_t k = pick_map(cdf, rng.uniform());
        const AffineMap& m = sys.maps[k];
        const double nx = m.a * x + m.b * y + m.e;
        y = m.c * x + m.d * y + m.f;
        x = nx;
        if (i < discard) continue;
        out.push_back({x, y});
        if (chosen) chosen->push_back(static_cast<int>(k));
    }
    return out;
}

FractalRender render_ifs_detailed(const IfsSystem& sys, int size, const FractalParams& p, const SeedTree& seed) {
    p.validate();
    if (size < 8) throw ParameterError("fractal: size must be >= 8, got " + std::to_string(size));

    // The view comes from a separate pilot run so it does not move with the
    // point count.
    const std::vector<Point2> pilot = chaos_game(sys, p.pilot_points, p.discard, seed.child("pilot"));
    double lx = pilot[0].x, hx = lx, ly = pilot[0].y, hy = ly;
    for (const Point2& q : pilot) {
        lx = std::min(lx, q.x);
        hx = std::max(hx, q.x);
        ly = std::min(ly, q.y);
        hy = std::max(hy, q.y);
    }
    const double extent = std::max(hx - lx, hy - ly);
    if (!(extent > 0) || !std::isfinite(extent))
        throw DegenerateAttractor("fractal: degenerate attractor (pilot extent " + std::to_string(extent) + ")");

    FractalRender out;
    const double side = extent * 1.1;
    out.scale = size / side;
    out.x0 = 0.5 * (lx + hx) - 0.5 * side;
    out.y0 = 0.5 * (ly + hy) - 0.5 * side;

    std::vector<int> chosen;
    const std::vector<Point2> pts = chaos_game(sys, p.points, p.discard, seed.child("chaos"), &chosen);
    const std::size_t npix = static_cast<std::size_t>(size) * size;
    out.counts.assign(npix, 0);
    std::vector<std::array<double, 3>> color(npix, {0.0, 0.0, 0.0});
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double fx = (pts[i].x - out.x0) * out.scale, fy = (pts[i].y - out.y0) * out.scale;
        if (!(fx >= 0 && fx < size && fy >= 0 && fy < size)) continue;
        // y grows upward in the plane, downward in the image
        const std::size_t px = static_cast<std::size_t>(fx), py = static_cast<std::size_t>(size - 1 - int(fy));
        const std::size_t idx = py * size + px;
        ++out.counts[idx];
        for (int c = 0; c < 3; ++c) color[idx][c] += sys.colors[chosen[i]][c];
    }

    // all points within one pixel of each other: nothing to look at
    std::uint64_t kept = 0, densest = 0;
    for (std::uint32_t c : out.counts) kept += c;
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            if (!out.counts[static_cast<std::size_t>(y) * size + x]) continue;
            std::uint64_t around = 0;
            for (int yy = std::max(0, y - 1); yy <= std::min(size - 1, y + 1); ++yy)
                for (int xx = std::max(0, x - 1); xx <= std::min(size - 1, x + 1); ++xx)
                    around += out.counts[static_cast<std::size_t>(yy) * size + xx];
            densest = std::max(densest, around);
        }
    if (kept == 0 || densest >= 0.99 * static_cast<double>(kept))
        throw DegenerateAttractor("fractal: degenerate attractor (" + std::to_string(densest) + " of " +
                                  std::to_string(kept) + " points in one 3x3 cell)");

    const std::uint32_t peak = *std::max_element(out.counts.begin(), out.counts.end());
    const double norm = std::log1p(static_cast<double>(peak));
    out.image = Image(size, size);
    for (std::size_t i = 0; i < npix; ++i) {
        const double v = out.counts[i] ? std::log1p(double(out.counts[i])) / norm : 0.0;
        for (int c = 0; c < 3; ++c) {
            const double fg = p.grayscale || !out.counts[i] ? 1.0 : color[i][c] / out.counts[i];
            out.image.data[i * 3 + c] = static_cast<float>(0.5 * (1.0 - v) + fg * v);
        }
    }
    return out;
}

Image render_ifs(const IfsSystem& sys, int size, const FractalParams& p, const SeedTree& seed) {
    return render_ifs_detailed(sys, size, p, seed).image;
}

Image generate_fractal(const FractalParams& p, int size, const SeedTree& seed) {
    p.validate();
    for (int attempt = 0; attempt < p.max_attempts; ++attempt) {
        try {
            return render_ifs(sample_ifs(seed.child("ifs", attempt)), size, p, seed.child("render", attempt));
        } catch (const DegenerateAttractor&) {
        }
    }
    throw DegenerateAttractor("fractal: no usable system after " + std::to_string(p.max_attempts) + " attempts");
}

double box_counting_dimension(const std::vector<std::uint8_t>& mask, int width, int height, int max_box) {
    if (mask.size() != static_cast<std::size_t>(width) * height) throw ParameterError("box counting: mask size mismatch");
    if (max_box < 2) throw ParameterError("box counting: max_box must be >= 2");
    std::vector<double> lx, ly;
    for (int s = 1; s <= max_box; s *= 2) {
        std::size_t n = 0;
        for (int by = 0; by < height; by += s)
            for (int bx = 0; bx < width; bx += s) {
                bool hit = false;
                for (int y = by; y < std::min(by + s, height) && !hit; ++y)
                    for (int x = bx; x < std::min(bx + s, width); ++x)
                        if (mask[static_cast<std::size_t>(y) * width + x]) {
                            hit = true;
                            break;
                        }
                n += hit;
            }
        if (n == 0) throw ParameterError("box counting: empty mask");
        lx.push_back(std::log(1.0 / s));
        ly.push_back(std::log(static_cast<double>(n)));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= lx.size();
    my /= ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace noisegen

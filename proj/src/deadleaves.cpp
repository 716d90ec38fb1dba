#include "noisegen/deadleaves.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace noisegen {

namespace {
constexpr std::uint32_t kNoLeaf = std::numeric_limits<std::uint32_t>::max();

std::string describe_uncovered(std::uint64_t leaves, double uncovered) {
    return "dead leaves: max_leaves (" + std::to_string(leaves) + ") reached with " +
           std::to_string(uncovered * 100.0) + "% of pixels uncovered";
}
}  // namespace

CoverageError::CoverageError(std::uint64_t n, double uncovered)
    : std::runtime_error(describe_uncovered(n, uncovered)), leaves(n), uncovered_fraction(uncovered) {}

void DeadLeavesParams::validate() const {
    if (!std::isfinite(radius_lambda) || radius_lambda < 0.0)
        throw ParameterError("dead leaves: radius_lambda must be > 0 (or 0 for the size-based default)");
    if (!std::isfinite(min_radius) || min_radius < 1.0) throw ParameterError("dead leaves: min_radius must be >= 1");
    if (max_leaves < 1) throw ParameterError("dead leaves: max_leaves must be >= 1");
    if (!std::isfinite(max_rotation) || max_rotation < 0.0)
        throw ParameterError("dead leaves: max_rotation must be finite and >= 0");
    if (variant == DeadLeavesVariant::Textured && texture.empty())
        throw ParameterError("dead leaves: textured variant needs a texture model");
}

double DeadLeavesParams::lambda_for(int side) const {
    return radius_lambda > 0.0 ? radius_lambda : 1.0 / (0.08 * side);
}

Leaf sample_leaf(const DeadLeavesParams& p, int width, int height, Rng& rng, const ColorPalette* palette) {
    const double lambda = p.lambda_for(std::min(width, height));
    Leaf leaf;
    leaf.radius = std::max(p.min_radius, rng.exponential(lambda));
    leaf.cx = rng.uniform(0.0, width);
    leaf.cy = rng.uniform(0.0, height);
    switch (p.variant) {
        case DeadLeavesVariant::Squares:
        case DeadLeavesVariant::Textured:
            leaf.shape = LeafShape::Square;
            break;
        case DeadLeavesVariant::Oriented:
            leaf.shape = LeafShape::Square;
            leaf.rotation = rng.uniform(0.0, p.max_rotation);
            break;
        case DeadLeavesVariant::Shapes: {
            static constexpr LeafShape kShapes[3] = {LeafShape::Circle, LeafShape::Triangle, LeafShape::Rectangle};
            leaf.shape = kShapes[rng.below(3)];
            leaf.rotation = rng.uniform(0.0, 2.0 * std::numbers::pi);
            leaf.aspect = rng.uniform(0.3, 1.0);
            break;
        }
    }
    if (p.color_source == LeafColorSource::Palette) {
        if (!palette) throw ParameterError("sample_leaf: palette color source without a palette");
        leaf.color = palette->pick(rng.uniform());
    } else {
        for (float& c : leaf.color) c = static_cast<float>(rng.uniform());
    }
    return leaf;
}

Leaf sample_leaf(const DeadLeavesParams& p, int width, int height, const SeedTree& seed) {
    p.validate();
    Rng rng(seed);
    ColorPalette palette;
    if (p.color_source == LeafColorSource::Palette) palette = sample_color_palette(seed.child("palette"));
    return sample_leaf(p, width, height, rng, &palette);
}

namespace {

struct Polygon {
    int n = 0;
    std::array<double, 8> x{}, y{};
};

Polygon outline(const Leaf& l) {
    Polygon poly;
    auto put = [&](double ang) {
        poly.x[poly.n] = l.cx + l.radius * std::cos(ang);
        poly.y[poly.n] = l.cy + l.radius * std::sin(ang);
        ++poly.n;
    };
    switch (l.shape) {
        case LeafShape::Square:
            for (int k = 0; k < 4; ++k) put(l.rotation + std::numbers::pi / 4 + k * std::numbers::pi / 2);
            break;
        case LeafShape::Triangle:
            for (int k = 0; k < 3; ++k) put(l.rotation + k * 2.0 * std::numbers::pi / 3.0);
            break;
        case LeafShape::Rectangle: {
            const double phi = std::atan(l.aspect);
            put(l.rotation - phi);
            put(l.rotation + phi);
            put(l.rotation + std::numbers::pi - phi);
            put(l.rotation + std::numbers::pi + phi);
            break;
        }
        case LeafShape::Circle:
            break;
    }
    return poly;
}

bool inside(const Polygon& p, double x, double y) {
    // vertices are counter-clockwise in angle order
    for (int i = 0; i < p.n; ++i) {
        const int j = (i + 1) % p.n;
        const double cross = (p.x[j] - p.x[i]) * (y - p.y[i]) - (p.y[j] - p.y[i]) * (x - p.x[i]);
        if (cross < 0) return false;
    }
    return true;
}

}  // namespace

bool leaf_contains(const Leaf& leaf, double x, double y) {
    const double dx = x - leaf.cx, dy = y - leaf.cy;
    if (leaf.shape == LeafShape::Circle) return dx * dx + dy * dy <= leaf.radius * leaf.radius;
    if (leaf.shape == LeafShape::Square && leaf.rotation == 0.0) {
        const double h = leaf.radius / std::numbers::sqrt2;
        return std::abs(dx) <= h && std::abs(dy) <= h;
    }
    return inside(outline(leaf), x, y);
}

namespace {

int next_pow2(int v) {
    int p = 1;
    while (p < v) p <<= 1;
    return p;
}

}  // namespace

DeadLeavesRender render_dead_leaves(const DeadLeavesParams& p, int size, const SeedTree& seed) {
    p.validate();
    if (size < 16) throw ParameterError("dead leaves: size must be at least 16, got " + std::to_string(size));
    const int w = size, h = size;
    const std::size_t npix = static_cast<std::size_t>(w) * h;

    DeadLeavesRender out;
    out.image = Image(w, h);
    out.leaf_id.assign(npix, kNoLeaf);
    ColorPalette palette;
    if (p.color_source == LeafColorSource::Palette) palette = sample_color_palette(seed.child("palette"));
    Rng rng(seed.child("leaves"));
    const bool textured = p.variant == DeadLeavesVariant::Textured;
    const int min_patch = p.texture.wmm ? 32 : 8;

    std::size_t covered = 0;
    std::uint64_t i = 0;
    for (; i < p.max_leaves && covered < npix; ++i) {
        const Leaf leaf = sample_leaf(p, w, h, rng, &palette);
        const int x0 = std::max(0, static_cast<int>(std::floor(leaf.cx - leaf.radius)));
        const int x1 = std::min(w - 1, static_cast<int>(std::ceil(leaf.cx + leaf.radius)));
        const int y0 = std::max(0, static_cast<int>(std::floor(leaf.cy - leaf.radius)));
        const int y1 = std::min(h - 1, static_cast<int>(std::ceil(leaf.cy + leaf.radius)));
        if (x0 > x1 || y0 > y1) continue;

        const Polygon poly = outline(leaf);
        const double r2 = leaf.radius * leaf.radius;
        const double half = leaf.radius / std::numbers::sqrt2;
        const bool aligned = leaf.shape == LeafShape::Square && leaf.rotation == 0.0;

        Image patch;
        double px0 = 0, py0 = 0;
        if (textured) {
            const int side = std::clamp(next_pow2(static_cast<int>(std::ceil(2.0 * half))), min_patch,
                                        std::max(min_patch, next_pow2(size)));
            patch = generate_composed(p.texture, side, seed.child("patch", i));
            px0 = leaf.cx - half;
            py0 = leaf.cy - half;
        }

        for (int y = y0; y <= y1; ++y) {
            const double fy = y + 0.5;
            for (int x = x0; x <= x1; ++x) {
                const double fx = x + 0.5;
                bool hit;
                if (aligned) hit = std::abs(fx - leaf.cx) <= half && std::abs(fy - leaf.cy) <= half;
                else if (leaf.shape == LeafShape::Circle) {
                    const double dx = fx - leaf.cx, dy = fy - leaf.cy;
                    hit = dx * dx + dy * dy <= r2;
                } else hit = inside(poly, fx, fy);
                if (!hit) continue;
                const std::size_t k = static_cast<std::size_t>(y) * w + x;
                if (out.leaf_id[k] == kNoLeaf) ++covered;
                out.leaf_id[k] = static_cast<std::uint32_t>(std::min<std::uint64_t>(i, kNoLeaf - 1));
                float* px = &out.image.data[k * 3];
                if (textured) {
                    const int tx = std::clamp(static_cast<int>(std::floor(fx - px0)), 0, patch.width - 1);
                    const int ty = std::clamp(static_cast<int>(std::floor(fy - py0)), 0, patch.height - 1);
                    for (int c = 0; c < 3; ++c) px[c] = patch.at(tx, ty, c);
                } else {
                    px[0] = leaf.color[0];
                    px[1] = leaf.color[1];
                    px[2] = leaf.color[2];
                }
            }
        }
    }
    out.leaves = i;
    if (covered < npix) throw CoverageError(p.max_leaves, double(npix - covered) / double(npix));
    return out;
}

Image generate_dead_leaves(const DeadLeavesParams& p, int size, const SeedTree& seed) {
    return render_dead_leaves(p, size, seed).image;
}

}  // namespace noisegen

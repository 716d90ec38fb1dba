#pragma once
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "noisegen/image.hpp"
#include "noisegen/sampling.hpp"
#include "noisegen/statistical.hpp"

namespace noisegen {

enum class DeadLeavesVariant { Squares, Oriented, Shapes, Textured };
enum class LeafShape { Circle, Triangle, Rectangle, Square };
enum class LeafColorSource { UniformRgb, Palette };

struct DeadLeavesParams {
    DeadLeavesVariant variant = DeadLeavesVariant::Squares;
    double radius_lambda = 0.0;  // exponential rate in 1/pixels; 0 means 1 / (0.08 * side)
    double min_radius = 1.0;
    std::uint64_t max_leaves = 1000000;
    LeafColorSource color_source = LeafColorSource::UniformRgb;
    double max_rotation = 1.5707963267948966;  // Oriented: rotation ~ U(0, max_rotation)
    StatModelSet texture{true, false, false};  // Textured: model for the leaf patches

    void validate() const;
    double lambda_for(int side) const;
};

struct Leaf {
    LeafShape shape = LeafShape::Square;
    double cx = 0, cy = 0;
    double radius = 1;    // circumradius
    double rotation = 0;  // radians
    double aspect = 1;    // rectangle short/long side ratio
    Rgb color{0.5f, 0.5f, 0.5f};
};

struct CoverageError : std::runtime_error {
    CoverageError(std::uint64_t leaves, double uncovered);
    std::uint64_t leaves;
    double uncovered_fraction;
};

// `palette` is only consulted for LeafColorSource::Palette.
Leaf sample_leaf(const DeadLeavesParams& p, int width, int height, Rng& rng, const ColorPalette* palette = nullptr);
Leaf sample_leaf(const DeadLeavesParams& p, int width, int height, const SeedTree& seed);

// Pixel-center coverage test.
bool leaf_contains(const Leaf& leaf, double x, double y);

struct DeadLeavesRender {
    Image image;
    std::vector<std::uint32_t> leaf_id;  // index of the visible leaf per pixel
    std::uint64_t leaves = 0;
};

DeadLeavesRender render_dead_leaves(const DeadLeavesParams& p, int size, const SeedTree& seed);
Image generate_dead_leaves(const DeadLeavesParams& p, int size, const SeedTree& seed);

}  // namespace noisegen

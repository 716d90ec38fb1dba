#pragma once
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "noisegen/image.hpp"
#include "noisegen/sampling.hpp"
#include "noisegen/statistical.hpp"

namespace noisegen {

// p' = [a b; c d] p + (e, f)
struct AffineMap {
    double a = 0, b = 0, c = 0, d = 0, e = 0, f = 0;

    double norm() const;  // largest singular value of the linear part
    double det() const { return a * d - b * c; }
};

struct IfsSystem {
    std::vector<AffineMap> maps;
    std::vector<double> weights;  // selection probabilities
    std::vector<Rgb> colors;      // one hue per map

    void validate() const;
    // Radius of a disk about the origin that every map sends into itself, so
    // the attractor and every chaos-game point started at 0 stay inside it.
    double bound() const;
};

struct FractalParams {
    int points = 100000;
    int discard = 100;
    int pilot_points = 20000;  // fixes the view before the main run
    bool grayscale = false;
    int max_attempts = 64;     // resampling budget for degenerate systems

    void validate() const;
};

struct DegenerateAttractor : std::runtime_error {
    using std::runtime_error::runtime_error;
};

IfsSystem sample_ifs(const SeedTree& seed);
// Three half-scale maps onto the corners of an equilateral triangle.
IfsSystem sierpinski_system();

struct Point2 {
    double x = 0, y = 0;
};

// Chaos game from the origin; the first `discard` points are dropped. Also
// returns the map chosen for every kept point.
std::vector<Point2> chaos_game(const IfsSystem& sys, int points, int discard, const SeedTree& seed,
                               std::vector<int>* chosen = nullptr);

struct FractalRender {
    Image image;
    std::vector<std::uint32_t> counts;  // hits per pixel
    double x0 = 0, y0 = 0, scale = 0;  // pixel = (p - origin) * scale
};

FractalRender render_ifs_detailed(const IfsSystem& sys, int size, const FractalParams& p, const SeedTree& seed);
Image render_ifs(const IfsSystem& sys, int size, const FractalParams& p, const SeedTree& seed);
// Samples systems until one renders, consuming seed children "ifs"/attempt.
Image generate_fractal(const FractalParams& p, int size, const SeedTree& seed);

// Log-log slope of occupied box count against inverse box size, boxes of
// 1, 2, 4, ... up to max_box pixels.
double box_counting_dimension(const std::vector<std::uint8_t>& mask, int width, int height, int max_box);

}  // namespace noisegen

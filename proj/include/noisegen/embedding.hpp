#pragma once
#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "noisegen/augment.hpp"
#include "noisegen/image.hpp"
#include "noisegen/pyramid.hpp"
#include "noisegen/sampling.hpp"

namespace noisegen {

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string name() const = 0;
    virtual int dimension() const = 0;
    // Must be deterministic and safe to call concurrently.
    virtual std::vector<double> embed(const Image& img) const = 0;
};

// Hand-made descriptor with no learned weights: log rms energy of every
// oriented pyramid band and the lowpass residual of the luminance, plus mean
// and standard deviation of each color channel. Distances under it are only
// comparable with other distances under it.
class PyramidColorEmbedding : public EmbeddingProvider {
public:
    explicit PyramidColorEmbedding(int analysis_size = 64, int scales = 3);

    std::string name() const override { return "builtin-pyramid-color-v1"; }
    int dimension() const override;
    std::vector<double> embed(const Image& img) const override;

private:
    int size_, scales_;
};

// Comparison at matching positions, for within-image variation: on a grid of
// sample points at each pyramid scale, the four orientation coefficients are
// divided by sqrt(|c|^2 + eps), so edges count by direction and flat areas
// drop to zero. A pooled descriptor cannot tell two crops of stationary
// noise apart; this one can.
class AlignedBandEmbedding : public EmbeddingProvider {
public:
    explicit AlignedBandEmbedding(int analysis_size = 64, int scales = 3, int grid = 8, double eps = 1e-3);

    std::string name() const override { return "builtin-aligned-bands-v1"; }
    int dimension() const override { return scales_ * grid_ * grid_ * kOrientations; }
    std::vector<double> embed(const Image& img) const override;

private:
    int size_, scales_, grid_;
    double eps_;
};

// One row per image, computed in parallel; row order follows the input.
Eigen::MatrixXd embed_all(const EmbeddingProvider& e, const std::vector<Image>& images, int workers = 0);

struct CropVariation {
    double mean = 0;
    std::vector<double> per_image;
    std::string provider;
};

// Mean embedding distance between two independent random crops of each image.
// Crops follow the augmentation crop prior and are resized to crop.out_size.
// Image k draws its crops from seed child ("crops", first_index + k).
CropVariation crop_variation(const std::vector<Image>& images, const EmbeddingProvider& e, const SeedTree& seed,
                             const AugmentConfig& crop = {}, int workers = 0, std::uint64_t first_index = 0);

// External feature file: "NZFE", u32 version 1, u32 rows, u32 dim, then
// rows x dim little-endian float32, row-major.
inline constexpr std::array<char, 4> kFeatureMagic = {'N', 'Z', 'F', 'E'};
inline constexpr std::uint32_t kFeatureVersion = 1;
inline constexpr std::size_t kFeatureHeaderSize = 16;

void write_features(const std::filesystem::path& path, const Eigen::MatrixXd& features);
Eigen::MatrixXd read_features(const std::filesystem::path& path);

}  // namespace noisegen

#pragma once
#include <Eigen/Dense>
#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "noisegen/image.hpp"
#include "noisegen/sampling.hpp"

namespace noisegen {

enum class StyleNetMode { Random, HighFreq, Sparse, Oriented };

std::string to_string(StyleNetMode m);
StyleNetMode parse_stylenet_mode(std::string_view s);

struct StyleNetConfig {
    int out_size = 128;
    std::vector<int> channel_widths;  // one per resolution 4, 8, ..., out_size; empty picks the default
    int latent_dim = 64;
    StyleNetMode mode = StyleNetMode::HighFreq;
    double noise_strength = 0.1;  // times the rms of the conv output it is added to

    void validate() const;
    std::vector<int> widths() const;
};

// 512, 512, 256, 128, 64, 32 for 128 px; every further octave halves again (floor 8).
std::vector<int> default_channel_widths(int out_size);

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Kernel3 = std::array<double, 9>;  // taps[dy + 1][dx + 1]

// Stack of feature grids, one channel per row of `data`, pixels row-major.
struct Features {
    int width = 0;
    int height = 0;
    Matrix data;

    Features() = default;
    Features(int channels, int w, int h) : width(w), height(h), data(Matrix::Zero(channels, Eigen::Index(w) * h)) {}
    int channels() const { return static_cast<int>(data.rows()); }
    double& at(int c, int x, int y) { return data(c, Eigen::Index(y) * width + x); }
    double at(int c, int x, int y) const { return data(c, Eigen::Index(y) * width + x); }
};

struct ConvLayer {
    int in_channels = 0;
    int out_channels = 0;
    Matrix affine;             // style = affine * w / sqrt(latent) + 1
    Matrix kernel;             // out x (in * 9); unused when tied
    Matrix amplitude;          // a_{k,l}; wavelet modes only
    std::vector<int> bank_index;  // per (k, l), or per l when tied
    std::vector<Kernel3> tied;    // f_l, Oriented mode only
    Eigen::VectorXd bias;
    bool demodulate = false;
};

struct NetworkWeights {
    StyleNetConfig cfg;
    Matrix mapping[2];
    Features constant;
    std::vector<ConvLayer> blocks;  // block i runs at 4 * 2^i pixels
    Matrix rgb_affine;
    Matrix to_rgb;  // 3 x C_last
};

enum class NoiseKind { None, PowerLaw, PowerLawEnvelope };

struct NoiseMapSpec {
    NoiseKind kind = NoiseKind::None;
    double alpha_lo = 0.5, alpha_hi = 2.0;
    int envelope_grid = 4;
};

NoiseMapSpec noise_spec_for(StyleNetMode m);

// Per-image noise realizations, one map per block.
struct NoiseMaps {
    std::vector<Plane> maps;
    std::vector<double> alpha;
};
NoiseMaps sample_noise_maps(const NoiseMapSpec& spec, int blocks, const SeedTree& seed);

NetworkWeights init_network(const StyleNetConfig& cfg, const SeedTree& seed);

// 3x3 cross-correlation with mirrored borders (-1 reads 1). Kernel rows are
// output channels laid out as [l * 9 + tap].
Features conv3x3(const Features& x, const Matrix& kernel, const Eigen::VectorXd& bias);
// y_k = sum_l a(k, l) * (x_l correlated with f_l) + b_k, mirrored borders.
Features tied_conv(const Features& x, const std::vector<Kernel3>& f, const Matrix& a, const Eigen::VectorXd& b);
Features upsample2x(const Features& x);

Image synthesize(const NetworkWeights& w, const NoiseMapSpec& noise, const SeedTree& z_seed);

}  // namespace noisegen

#include "noisegen/embedding.hpp"

#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>

#include "noisegen/dataset.hpp"
#include "noisegen/parallel.hpp"
#include "noisegen/pyramid.hpp"
#include "noisegen/stats.hpp"

namespace noisegen {

namespace {

double log_rms(const Plane& p, bool center) {
    double mu = 0;
    if (center) mu = pairwise_sum(p.data) / static_cast<double>(p.size());
    std::vector<double> sq(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) sq[i] = (p.data[i] - mu) * (p.data[i] - mu);
    // the floor keeps flat regions finite and all equal
    return 0.5 * std::log(pairwise_sum(sq) / static_cast<double>(p.size()) + 1e-8);
}

void put_u32(char* p, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) p[i] = static_cast<char>((v >> (8 * i)) & 0xff);
}
std::uint32_t get_u32(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(p[i]) << (8 * i);
    return v;
}

}  // namespace

PyramidColorEmbedding::PyramidColorEmbedding(int analysis_size, int scales) : size_(analysis_size), scales_(scales) {
    check_pyramid_size(size_, size_, scales_);
}

int PyramidColorEmbedding::dimension() const { return scales_ * kOrientations + 1 + 6; }

std::vector<double> PyramidColorEmbedding::embed(const Image& img) const {
    if (img.empty()) throw ParameterError("embedding: empty image");
    const Image sized = img.width == size_ && img.height == size_ ? img : resize_bicubic(img, size_, size_);
    const PyramidCoeffs pyr = pyramid_decompose(luminance(sized), scales_);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(dimension()));
    for (const auto& scale : pyr.bands)
        for (const Plane& band : scale) out.push_back(log_rms(band, false));
    out.push_back(log_rms(pyr.lowpass, true));
    for (int c = 0; c < 3; ++c) {
        const Plane ch = extract_channel(img, c);
        out.push_back(mean(ch));
        out.push_back(stddev(ch));
    }
    return out;
}

AlignedBandEmbedding::AlignedBandEmbedding(int analysis_size, int scales, int grid, double eps)
    : size_(analysis_size), scales_(scales), grid_(grid), eps_(eps) {
    check_pyramid_size(size_, size_, scales_);
    if (grid_ < 1 || (size_ >> (scales_ - 1)) < grid_)
        throw ParameterError("aligned embedding: grid must be between 1 and the coarsest band side");
    if (!(eps_ > 0)) throw ParameterError("aligned embedding: eps must be > 0");
}

std::vector<double> AlignedBandEmbedding::embed(const Image& img) const {
    if (img.empty()) throw ParameterError("embedding: empty image");
    const Image sized = img.width == size_ && img.height == size_ ? img : resize_bicubic(img, size_, size_);
    const PyramidCoeffs pyr = pyramid_decompose(luminance(sized), scales_);
    // unit-length rows of points, so distances land in [0, 2]
    const double w = 1.0 / std::sqrt(static_cast<double>(scales_ * grid_ * grid_));
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(dimension()));
    for (int s = 0; s < scales_; ++s) {
        const int side = size_ >> s;
        for (int gy = 0; gy < grid_; ++gy)
            for (int gx = 0; gx < grid_; ++gx) {
                const int x = (2 * gx + 1) * side / (2 * grid_), y = (2 * gy + 1) * side / (2 * grid_);
                double n = eps_;
                for (int o = 0; o < kOrientations; ++o) n += pyr.bands[s][o].at(x, y) * pyr.bands[s][o].at(x, y);
                n = std::sqrt(n);
                for (int o = 0; o < kOrientations; ++o) out.push_back(w * pyr.bands[s][o].at(x, y) / n);
            }
    }
    return out;
}

Eigen::MatrixXd embed_all(const EmbeddingProvider& e, const std::vector<Image>& images, int workers) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(images.size()), e.dimension());
    parallel_for(images.size(), resolve_workers(workers), [&](std::size_t i) {
        const std::vector<double> v = e.embed(images[i]);
        if (static_cast<int>(v.size()) != e.dimension()) throw std::runtime_error("embedding: wrong output dimension");
        for (int j = 0; j < e.dimension(); ++j) out(static_cast<Eigen::Index>(i), j) = v[static_cast<std::size_t>(j)];
    });
    return out;
}

CropVariation crop_variation(const std::vector<Image>& images, const EmbeddingProvider& e, const SeedTree& seed,
                             const AugmentConfig& crop, int workers, std::uint64_t first_index) {
    if (images.empty()) throw ParameterError("crop_variation: no images");
    crop.validate();
    CropVariation r;
    r.provider = e.name();
    r.per_image.assign(images.size(), 0.0);
    parallel_for(images.size(), resolve_workers(workers), [&](std::size_t i) {
        const Image& img = images[i];
        Rng rng(seed.child("crops", first_index + i));
        const Window a = sample_crop(img.width, img.height, crop, rng);
        const Window b = sample_crop(img.width, img.height, crop, rng);
        const std::vector<double> ea = e.embed(resample_bicubic(img, a, crop.out_size, crop.out_size));
        const std::vector<double> eb = e.embed(resample_bicubic(img, b, crop.out_size, crop.out_size));
        double d = 0;
        for (std::size_t j = 0; j < ea.size(); ++j) d += (ea[j] - eb[j]) * (ea[j] - eb[j]);
        r.per_image[i] = std::sqrt(d);
    });
    r.mean = pairwise_sum(r.per_image) / static_cast<double>(images.size());
    return r;
}

void write_features(const std::filesystem::path& path, const Eigen::MatrixXd& f) {
    if (f.rows() > UINT32_MAX || f.cols() > UINT32_MAX) throw ParameterError("features: matrix too large");
    char header[kFeatureHeaderSize] = {};
    std::memcpy(header, kFeatureMagic.data(), 4);
    put_u32(header + 4, kFeatureVersion);
    put_u32(header + 8, static_cast<std::uint32_t>(f.rows()));
    put_u32(header + 12, static_cast<std::uint32_t>(f.cols()));
    std::vector<char> body(static_cast<std::size_t>(f.size()) * 4);
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < f.rows(); ++i)
        for (Eigen::Index j = 0; j < f.cols(); ++j) {
            const float v = static_cast<float>(f(i, j));
            std::uint32_t bits;
            std::memcpy(&bits, &v, 4);
            put_u32(body.data() + 4 * k++, bits);
        }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "': " + std::strerror(errno));
    out.write(header, sizeof header);
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out.flush()) throw std::runtime_error("write failed for '" + path.string() + "'");
}

Eigen::MatrixXd read_features(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "': " + std::strerror(errno));
    const std::vector<unsigned char> b(std::istreambuf_iterator<char>(in), {});
    if (b.size() < kFeatureHeaderSize) throw FormatError("length", "features: file shorter than its header");
    if (std::memcmp(b.data(), kFeatureMagic.data(), 4) != 0) throw FormatError("magic", "features: bad magic, expected NZFE");
    if (get_u32(b.data() + 4) != kFeatureVersion)
        throw FormatError("version", "features: unsupported version " + std::to_string(get_u32(b.data() + 4)));
    const std::uint64_t rows = get_u32(b.data() + 8), cols = get_u32(b.data() + 12);
    if (b.size() != kFeatureHeaderSize + rows * cols * 4)
        throw FormatError("length", "features: file is " + std::to_string(b.size()) + " bytes, header implies " +
                                        std::to_string(kFeatureHeaderSize + rows * cols * 4));
    Eigen::MatrixXd f(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < f.rows(); ++i)
        for (Eigen::Index j = 0; j < f.cols(); ++j) {
            const std::uint32_t bits = get_u32(b.data() + kFeatureHeaderSize + 4 * k++);
            float v;
            std::memcpy(&v, &bits, 4);
            f(i, j) = v;
        }
    if (!f.allFinite()) throw FormatError("data", "features: non-finite values");
    return f;
}

}  // namespace noisegen

#pragma once
#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "noisegen/image.hpp"
#include "noisegen/sampling.hpp"

namespace noisegen {

struct GaussianSummary {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;  // unbiased, n - 1 denominator
    std::uint64_t samples = 0;

    int dim() const { return static_cast<int>(mean.size()); }
};

// Any numerical trouble a metric had to work around, or a refusal.
struct MetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Rows are observations. Reduction order is a fixed pairwise tree over row
// blocks, so the result is the same however the rows were produced.
GaussianSummary fit_gaussian(const Eigen::MatrixXd& rows);
// Pools two fits as if their samples had been fitted together.
GaussianSummary merge_summaries(const GaussianSummary& a, const GaussianSummary& b);
// Pooled per-pixel L*a*b* values over all images.
GaussianSummary fit_lab_gaussian(const std::vector<Image>& images);

// Eigenvalues below -1e-9 (relative to the largest) are rejected.
void check_psd(const Eigen::MatrixXd& cov, const char* what);

// Closed form KL(p||q) + KL(q||p). A covariance is regularized with
// 1e-6 trace/d on the diagonal only if it cannot be inverted as is.
double symmetric_kl(const GaussianSummary& p, const GaussianSummary& q);
double kl_divergence(const GaussianSummary& p, const GaussianSummary& q);
double frechet_distance(const GaussianSummary& p, const GaussianSummary& q);

struct LogVolume {
    double value = 0;
    bool regularized = false;
};
LogVolume diversity_log_volume(const Eigen::MatrixXd& features);

struct PrecisionRecall {
    double precision = 0, recall = 0;
};
PrecisionRecall knn_precision_recall(const Eigen::MatrixXd& real, const Eigen::MatrixXd& generated, int k = 3);

struct AlphaFit {
    double alpha = 0;  // magnitude falls as f^-alpha
    double A = 0;      // magnitude at 1 cycle per image
    double fit_r2 = 0;
};
// nullopt for an image with no spectrum to fit (constant luminance)
std::optional<AlphaFit> fit_alpha_image(const Image& img);

struct AlphaReport {
    AlphaFit mean;                       // component-wise mean over fitted images
    std::vector<AlphaFit> per_image;
    std::vector<std::size_t> excluded;   // indices of constant images
};
AlphaReport fit_alpha(const std::vector<Image>& images);

double pearson(std::span<const double> x, std::span<const double> y);

struct Histogram {
    double lo = 0, hi = 0;
    std::vector<std::uint64_t> counts;
};
// Equal-width bins over [lo, hi]; lo = hi picks the data range.
Histogram histogram(std::span<const double> values, int bins, double lo = 0, double hi = 0);

// Summation helpers shared with the embedding code.
double pairwise_sum(std::span<const double> v);

}  // namespace noisegen

#pragma once
#include <span>
#include <vector>

namespace noisegen {

// Sorted sample set with interpolated quantiles.
class EmpiricalCdf {
public:
    EmpiricalCdf() = default;
    explicit EmpiricalCdf(std::vector<double> samples);

    // Linear interpolation between order statistics at position p*n - 0.5,
    // clamped to the sample range.
    double quantile(double p) const;
    // quantile((r + 0.5) / m), computed so that m == size() hits order
    // statistics exactly
    double rank_quantile(std::size_t r, std::size_t m) const;
    double cdf(double x) const;  // fraction of samples <= x
    std::span<const double> sorted() const { return sorted_; }
    std::size_t size() const { return sorted_.size(); }

private:
    double interpolate(double pos) const;
    std::vector<double> sorted_;
};

// Rank-preserving histogram matching: the value of rank r among m
// inputs becomes target.quantile((r + 0.5) / m). Ties keep input order.
std::vector<double> histogram_match(std::span<const double> values, const EmpiricalCdf& target);

// Exact 1-Wasserstein distance between two empirical distributions.
double wasserstein1(std::span<const double> a, const EmpiricalCdf& b);
double wasserstein1(const EmpiricalCdf& a, const EmpiricalCdf& b);

}  // namespace noisegen

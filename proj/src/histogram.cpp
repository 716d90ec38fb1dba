#include "noisegen/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "noisegen/sampling.hpp"

namespace noisegen {

EmpiricalCdf::EmpiricalCdf(std::vector<double> samples) : sorted_(std::move(samples)) {
    if (sorted_.empty()) throw ParameterError("EmpiricalCdf: empty sample set");
    for (double v : sorted_)
        if (!std::isfinite(v)) throw ParameterError("EmpiricalCdf: non-finite sample");
    std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::quantile(double p) const {
    return interpolate(p * static_cast<double>(sorted_.size()) - 0.5);
}

double EmpiricalCdf::rank_quantile(std::size_t r, std::size_t m) const {
    const double pos = (static_cast<double>(r) + 0.5) * static_cast<double>(sorted_.size()) / static_cast<double>(m);
    return interpolate(pos - 0.5);
}

double EmpiricalCdf::interpolate(double pos) const {
    const auto n = static_cast<double>(sorted_.size());
    pos = std::clamp(pos, 0.0, n - 1.0);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const double t = pos - static_cast<double>(i);
    if (i + 1 >= sorted_.size()) return sorted_.back();
    return sorted_[i] + t * (sorted_[i + 1] - sorted_[i]);
}

double EmpiricalCdf::cdf(double x) const {
    auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
    return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

std::vector<double> histogram_match(std::span<const double> values, const EmpiricalCdf& target) {
    if (values.empty()) throw ParameterError("histogram_match: empty input");
    if (target.size() == 0) throw ParameterError("histogram_match: empty target");
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> out(values.size());
    for (std::size_t r = 0; r < order.size(); ++r) out[order[r]] = target.rank_quantile(r, order.size());
    return out;
}

namespace {
// Integral of |F_a - F_b| by sweeping both sorted supports.
double w1_sorted(std::span<const double> a, std::span<const double> b) {
    const double wa = 1.0 / static_cast<double>(a.size());
    const double wb = 1.0 / static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double fa = 0.0, fb = 0.0, prev = std::min(a[0], b[0]), acc = 0.0;
    while (i < a.size() || j < b.size()) {
        double x;
        if (j >= b.size() || (i < a.size() && a[i] <= b[j])) x = a[i];
        else x = b[j];
        acc += std::abs(fa - fb) * (x - prev);
        while (i < a.size() && a[i] == x) { fa += wa; ++i; }
        while (j < b.size() && b[j] == x) { fb += wb; ++j; }
        prev = x;
    }
    return acc;
}
}  // namespace

double wasserstein1(std::span<const double> a, const EmpiricalCdf& b) {
    if (a.empty() || b.size() == 0) throw ParameterError("wasserstein1: empty sample set");
    std::vector<double> s(a.begin(), a.end());
    std::sort(s.begin(), s.end());
    return w1_sorted(s, b.sorted());
}

double wasserstein1(const EmpiricalCdf& a, const EmpiricalCdf& b) {
    if (a.size() == 0 || b.size() == 0) throw ParameterError("wasserstein1: empty sample set");
    return w1_sorted(a.sorted(), b.sorted());
}

}  // namespace noisegen

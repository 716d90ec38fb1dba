#include "noisegen/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "noisegen/color.hpp"
#include "noisegen/fft.hpp"
#include "noisegen/parallel.hpp"

namespace noisegen {

namespace {

// Count, mean and scatter matrix of a block of observations.
struct Moments {
    double n = 0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd m2;
};

Moments merge(const Moments& a, const Moments& b) {
    if (a.n == 0) return b;
    if (b.n == 0) return a;
    Moments r;
    r.n = a.n + b.n;
    const Eigen::VectorXd delta = b.mean - a.mean;
    r.mean = a.mean + delta * (b.n / r.n);
    r.m2 = a.m2 + b.m2 + delta * delta.transpose() * (a.n * b.n / r.n);
    return r;
}

constexpr Eigen::Index kLeafRows = 256;

Moments leaf_moments(const Eigen::MatrixXd& rows, Eigen::Index lo, Eigen::Index hi) {
    Moments m;
    m.n = static_cast<double>(hi - lo);
    const auto block = rows.middleRows(lo, hi - lo);
    m.mean = block.colwise().sum().transpose() / m.n;
    const Eigen::MatrixXd c = block.rowwise() - m.mean.transpose();
    m.m2 = c.transpose() * c;
    return m;
}

Moments tree_moments(const Eigen::MatrixXd& rows, Eigen::Index lo, Eigen::Index hi) {
    if (hi - lo <= kLeafRows) return leaf_moments(rows, lo, hi);
    const Eigen::Index mid = lo + (hi - lo) / 2;
    return merge(tree_moments(rows, lo, mid), tree_moments(rows, mid, hi));
}

Moments tree_merge(const std::vector<Moments>& parts, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return parts[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    return merge(tree_merge(parts, lo, mid), tree_merge(parts, mid, hi));
}

GaussianSummary to_summary(const Moments& m) {
    if (m.n < 2) throw MetricError("gaussian fit: need at least 2 samples");
    GaussianSummary g;
    g.mean = m.mean;
    g.covariance = m.m2 / (m.n - 1);
    g.covariance = 0.5 * (g.covariance + g.covariance.transpose());
    g.samples = static_cast<std::uint64_t>(m.n);
    return g;
}

void check_pair(const GaussianSummary& p, const GaussianSummary& q) {
    if (p.dim() == 0 || p.dim() != q.dim()) throw MetricError("gaussian metrics: dimension mismatch");
    if (p.covariance.rows() != p.dim() || p.covariance.cols() != p.dim() || q.covariance.rows() != q.dim() ||
        q.covariance.cols() != q.dim())
        throw MetricError("gaussian metrics: covariance shape does not match the mean");
}

double regularizer(const Eigen::MatrixXd& cov) {
    const double d = static_cast<double>(cov.rows());
    return 1e-6 * std::max(cov.trace() / d, 1e-12);
}

// Cholesky of cov, with the diagonal lifted only if the plain factorization
// fails or is too ill-conditioned to trust.
Eigen::LLT<Eigen::MatrixXd> factor(const Eigen::MatrixXd& cov) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success && llt.rcond() > 1e-12) return llt;
    const Eigen::MatrixXd lifted = cov + regularizer(cov) * Eigen::MatrixXd::Identity(cov.rows(), cov.cols());
    llt.compute(lifted);
    if (llt.info() != Eigen::Success) throw MetricError("covariance is not invertible even after regularization");
    return llt;
}

double log_det(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    if (es.info() != Eigen::Success) throw MetricError("eigendecomposition failed");
    const Eigen::VectorXd r = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * r.asDiagonal() * es.eigenvectors().transpose();
}

// tr sqrt(P Q) for PSD P, Q, through the symmetric form sqrt(P) Q sqrt(P).
double trace_sqrt_product(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
    const Eigen::MatrixXd s = psd_sqrt(p);
    Eigen::MatrixXd m = s * q * s;
    m = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw MetricError("eigendecomposition failed");
    return es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

std::vector<double> row_distances_sq(const Eigen::MatrixXd& from, const Eigen::MatrixXd& to, Eigen::Index i) {
    std::vector<double> d(static_cast<std::size_t>(to.rows()));
    for (Eigen::Index j = 0; j < to.rows(); ++j) d[static_cast<std::size_t>(j)] = (to.row(j) - from.row(i)).squaredNorm();
    return d;
}

// squared distance from each row to its k-th nearest other row
std::vector<double> knn_radii_sq(const Eigen::MatrixXd& x, int k) {
    std::vector<double> r(static_cast<std::size_t>(x.rows()));
    parallel_for(r.size(), resolve_workers(), [&](std::size_t i) {
        std::vector<double> d = row_distances_sq(x, x, static_cast<Eigen::Index>(i));
        d.erase(d.begin() + static_cast<std::ptrdiff_t>(i));
        std::nth_element(d.begin(), d.begin() + (k - 1), d.end());
        r[i] = d[static_cast<std::size_t>(k - 1)];
    });
    return r;
}

// share of `probe` rows inside some ball around a `ref` row
double coverage(const Eigen::MatrixXd& ref, const std::vector<double>& radii, const Eigen::MatrixXd& probe) {
    std::vector<std::uint8_t> inside(static_cast<std::size_t>(probe.rows()), 0);
    parallel_for(inside.size(), resolve_workers(), [&](std::size_t i) {
        const auto p = probe.row(static_cast<Eigen::Index>(i));
        for (Eigen::Index j = 0; j < ref.rows(); ++j)
            if ((ref.row(j) - p).squaredNorm() <= radii[static_cast<std::size_t>(j)]) {
                inside[i] = 1;
                return;
            }
    });
    std::size_t n = 0;
    for (std::uint8_t v : inside) n += v;
    return static_cast<double>(n) / static_cast<double>(inside.size());
}

bool all_rows_equal(const Eigen::MatrixXd& x) {
    for (Eigen::Index i = 1; i < x.rows(); ++i)
        if (x.row(i) != x.row(0)) return false;
    return true;
}

}  // namespace

double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t mid = v.size() / 2;
    return pairwise_sum(v.first(mid)) + pairwise_sum(v.subspan(mid));
}

GaussianSummary fit_gaussian(const Eigen::MatrixXd& rows) {
    if (rows.rows() < 2) throw MetricError("gaussian fit: need at least 2 samples, got " + std::to_string(rows.rows()));
    if (rows.cols() < 1) throw MetricError("gaussian fit: zero-dimensional features");
    if (!rows.allFinite()) throw MetricError("gaussian fit: non-finite feature values");
    return to_summary(tree_moments(rows, 0, rows.rows()));
}

GaussianSummary merge_summaries(const GaussianSummary& a, const GaussianSummary& b) {
    if (a.samples == 0) return b;
    if (b.samples == 0) return a;
    if (a.dim() != b.dim()) throw MetricError("merge: dimension mismatch");
    const auto moments = [](const GaussianSummary& g) {
        return Moments{double(g.samples), g.mean, g.covariance * (double(g.samples) - 1)};
    };
    return to_summary(merge(moments(a), moments(b)));
}

GaussianSummary fit_lab_gaussian(const std::vector<Image>& images) {
    if (images.empty()) throw MetricError("lab gaussian: no images");
    std::vector<Moments> parts(images.size());
    parallel_for(images.size(), resolve_workers(), [&](std::size_t k) {
        const Image& img = images[k];
        if (img.space != ColorSpace::Rgb) throw ParameterError("lab gaussian: images must be RGB");
        Eigen::MatrixXd lab(static_cast<Eigen::Index>(img.pixels()), 3);
        for (std::size_t i = 0; i < img.pixels(); ++i) {
            const Vec3 v = srgb_to_lab({img.data[3 * i], img.data[3 * i + 1], img.data[3 * i + 2]});
            for (int c = 0; c < 3; ++c) lab(static_cast<Eigen::Index>(i), c) = v[c];
        }
        parts[k] = lab.rows() ? tree_moments(lab, 0, lab.rows()) : Moments{};
    });
    const Moments all = tree_merge(parts, 0, parts.size());
    if (all.n < 2) throw MetricError("lab gaussian: need at least 2 pixels");
    return to_summary(all);
}

void check_psd(const Eigen::MatrixXd& cov, const char* what) {
    if (cov.rows() != cov.cols()) throw MetricError(std::string(what) + ": covariance is not square");
    if (!cov.allFinite()) throw MetricError(std::string(what) + ": covariance has non-finite entries");
    const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw MetricError(std::string(what) + ": covariance is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() < -1e-9 * scale)
        throw MetricError(std::string(what) + ": covariance is not positive semi-definite");
}

double kl_divergence(const GaussianSummary& p, const GaussianSummary& q) {
    check_pair(p, q);
    check_psd(p.covariance, "kl");
    check_psd(q.covariance, "kl");
    const auto lp = factor(p.covariance), lq = factor(q.covariance);
    const Eigen::VectorXd delta = q.mean - p.mean;
    const double tr = lq.solve(p.covariance).trace();
    const double maha = delta.dot(lq.solve(delta));
    const double v = 0.5 * (tr + maha - p.dim() + log_det(lq) - log_det(lp));
    return std::max(0.0, v);
}

double symmetric_kl(const GaussianSummary& p, const GaussianSummary& q) {
    check_pair(p, q);
    check_psd(p.covariance, "symmetric kl");
    check_psd(q.covariance, "symmetric kl");
    // the log-determinant terms cancel in the sum
    const auto lp = factor(p.covariance), lq = factor(q.covariance);
    const Eigen::VectorXd delta = q.mean - p.mean;
    const double tr = lq.solve(p.covariance).trace() + lp.solve(q.covariance).trace();
    const double maha = delta.dot(lp.solve(delta)) + delta.dot(lq.solve(delta));
    return std::max(0.0, 0.5 * (tr + maha) - p.dim());
}

double frechet_distance(const GaussianSummary& p, const GaussianSummary& q) {
    check_pair(p, q);
    check_psd(p.covariance, "frechet");
    check_psd(q.covariance, "frechet");
    double cross = 0;
    try {
        cross = trace_sqrt_product(p.covariance, q.covariance);
    } catch (const MetricError&) {
        const auto eye = Eigen::MatrixXd::Identity(p.dim(), p.dim());
        cross = trace_sqrt_product(p.covariance + regularizer(p.covariance) * eye,
                                   q.covariance + regularizer(q.covariance) * eye);
    }
    const double v = (p.mean - q.mean).squaredNorm() + p.covariance.trace() + q.covariance.trace() - 2.0 * cross;
    return std::max(0.0, v);
}

LogVolume diversity_log_volume(const Eigen::MatrixXd& features) {
    const GaussianSummary g = fit_gaussian(features);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.covariance, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw MetricError("log volume: eigendecomposition failed");
    Eigen::VectorXd ev = es.eigenvalues();
    LogVolume r;
    if (features.rows() <= features.cols() || ev.minCoeff() <= 1e-12 * std::max(ev.maxCoeff(), 0.0)) {
        ev.array() += regularizer(g.covariance);
        r.regularized = true;
    }
    if (ev.minCoeff() <= 0) throw MetricError("log volume: covariance is singular even after regularization");
    std::vector<double> logs(static_cast<std::size_t>(ev.size()));
    for (Eigen::Index i = 0; i < ev.size(); ++i) logs[static_cast<std::size_t>(i)] = std::log(ev[i]);
    r.value = pairwise_sum(logs);
    return r;
}

PrecisionRecall knn_precision_recall(const Eigen::MatrixXd& real, const Eigen::MatrixXd& gen, int k) {
    if (k < 1) throw MetricError("precision/recall: k must be >= 1");
    if (real.cols() != gen.cols()) throw MetricError("precision/recall: feature dimensions differ");
    if (real.rows() < k + 1 || gen.rows() < k + 1)
        throw MetricError("precision/recall: each set needs at least k+1 = " + std::to_string(k + 1) + " points");
    if (all_rows_equal(real) || all_rows_equal(gen))
        throw MetricError("precision/recall: a set consists of one repeated point");
    const std::vector<double> rr = knn_radii_sq(real, k), rg = knn_radii_sq(gen, k);
    return {coverage(real, rr, gen), coverage(gen, rg, real)};
}

std::optional<AlphaFit> fit_alpha_image(const Image& img) {
    if (img.width < 4 || img.height < 4) throw ParameterError("fit_alpha: image must be at least 4x4");
    Plane lum = luminance(img);
    const double m = pairwise_sum(lum.data);
    const double mu = m / static_cast<double>(lum.size());
    double spread = 0;
    for (double& v : lum.data) {
        v -= mu;
        spread = std::max(spread, std::abs(v));
    }
    if (!(spread > 1e-9)) return std::nullopt;

    const ComplexGrid f = fft2(lum);
    const int w = img.width, h = img.height, n = std::min(w, h), rmax = n / 2;
    const double unitary = 1.0 / std::sqrt(static_cast<double>(w) * h);
    std::vector<double> sum(static_cast<std::size_t>(rmax) + 1, 0.0), cnt(sum.size(), 0.0);
    for (int ky = 0; ky < h; ++ky)
        for (int kx = 0; kx < w; ++kx) {
            const double fx = signed_freq(kx, w) * double(n) / w, fy = signed_freq(ky, h) * double(n) / h;
            const int r = static_cast<int>(std::lround(std::sqrt(fx * fx + fy * fy)));
            if (r < 1 || r > rmax) continue;
            const double a = std::abs(f.at(kx, ky)) * unitary;
            if (!(a > 0)) continue;
            sum[r] += std::log(a);
            cnt[r] += 1;
        }
    std::vector<double> lx, ly;
    for (int r = 1; r <= rmax; ++r)
        if (cnt[r] > 0) {
            lx.push_back(std::log(static_cast<double>(r)));
            ly.push_back(sum[r] / cnt[r]);
        }
    if (lx.size() < 2) return std::nullopt;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(ly.size());
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    const double slope = sxy / sxx;
    AlphaFit fit;
    fit.alpha = -slope;
    fit.A = std::exp(my - slope * mx);
    fit.fit_r2 = syy > 0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
    return fit;
}

AlphaReport fit_alpha(const std::vector<Image>& images) {
    if (images.empty()) throw MetricError("fit_alpha: no images");
    std::vector<std::optional<AlphaFit>> fits(images.size());
    parallel_for(images.size(), resolve_workers(), [&](std::size_t i) { fits[i] = fit_alpha_image(images[i]); });
    AlphaReport r;
    for (std::size_t i = 0; i < fits.size(); ++i) {
        if (fits[i]) r.per_image.push_back(*fits[i]);
        else r.excluded.push_back(i);
    }
    if (r.per_image.empty()) throw MetricError("fit_alpha: every image is constant");
    std::vector<double> a, amp, r2;
    for (const AlphaFit& f : r.per_image) {
        a.push_back(f.alpha);
        amp.push_back(f.A);
        r2.push_back(f.fit_r2);
    }
    const double n = static_cast<double>(a.size());
    r.mean = {pairwise_sum(a) / n, pairwise_sum(amp) / n, pairwise_sum(r2) / n};
    return r;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw MetricError("pearson: length mismatch");
    if (x.size() < 2) throw MetricError("pearson: need at least 2 pairs");
    const double n = static_cast<double>(x.size());
    const double mx = pairwise_sum(x) / n, my = pairwise_sum(y) / n;
    std::vector<double> xy(x.size()), xx(x.size()), yy(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        xy[i] = (x[i] - mx) * (y[i] - my);
        xx[i] = (x[i] - mx) * (x[i] - mx);
        yy[i] = (y[i] - my) * (y[i] - my);
    }
    const double sxx = pairwise_sum(xx), syy = pairwise_sum(yy);
    if (!(sxx > 0 && syy > 0)) throw MetricError("pearson: a variable is constant");
    return std::clamp(pairwise_sum(xy) / std::sqrt(sxx * syy), -1.0, 1.0);
}

Histogram histogram(std::span<const double> values, int bins, double lo, double hi) {
    if (bins < 1) throw ParameterError("histogram: bins must be >= 1");
    Histogram h;
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    if (lo == hi) {
        if (values.empty()) return h;
        lo = *std::min_element(values.begin(), values.end());
        hi = *std::max_element(values.begin(), values.end());
        if (lo == hi) hi = lo + 1;
    }
    if (!(hi > lo)) throw ParameterError("histogram: hi must exceed lo");
    h.lo = lo;
    h.hi = hi;
    for (double v : values) {
        if (!(v >= lo && v <= hi)) continue;
        const int b = std::min(bins - 1, static_cast<int>((v - lo) / (hi - lo) * bins));
        ++h.counts[static_cast<std::size_t>(b)];
    }
    return h;
}

}  // namespace noisegen

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "noisegen/color.hpp"
#include "noisegen/dataset.hpp"
#include "noisegen/deadleaves.hpp"
#include "noisegen/embedding.hpp"
#include "noisegen/spectrum.hpp"
#include "noisegen/statistical.hpp"
#include "noisegen/stats.hpp"

using namespace noisegen;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace {

Image constant_image(int size, float r, float g, float b) {
    Image img(size, size);
    for (std::size_t i = 0; i < img.pixels(); ++i) {
        img.data[3 * i] = r;
        img.data[3 * i + 1] = g;
        img.data[3 * i + 2] = b;
    }
    return img;
}

Image gray_from(const Plane& p) {
    Image img(p.width, p.height);
    for (std::size_t i = 0; i < p.size(); ++i)
        for (int c = 0; c < 3; ++c) img.data[3 * i + c] = static_cast<float>(p.data[i]);
    return img;
}

GaussianSummary gaussian(VectorXd mean, MatrixXd cov) {
    GaussianSummary g;
    g.mean = std::move(mean);
    g.covariance = std::move(cov);
    return g;
}

MatrixXd random_spd(int d, Rng& rng) {
    MatrixXd a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = rng.gaussian();
    return a * a.transpose() + 0.3 * MatrixXd::Identity(d, d);
}

MatrixXd gaussian_rows(int n, const VectorXd& mean, const MatrixXd& cov, Rng& rng) {
    const MatrixXd l = cov.llt().matrixL();
    MatrixXd x(n, mean.size());
    VectorXd z(mean.size());
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < z.size(); ++j) z[j] = rng.gaussian();
        x.row(i) = (mean + l * z).transpose();
    }
    return x;
}

double log_density(const VectorXd& x, const GaussianSummary& g) {
    const auto llt = g.covariance.llt();
    const VectorXd d = x - g.mean;
    const double logdet = 2.0 * MatrixXd(llt.matrixL()).diagonal().array().log().sum();
    return -0.5 * (d.dot(llt.solve(d)) + logdet + g.dim() * std::log(2 * std::numbers::pi));
}

// whitened: sample covariance exactly the identity
MatrixXd whiten(MatrixXd x) {
    const VectorXd mu = x.colwise().mean().transpose();
    x.rowwise() -= mu.transpose();
    const MatrixXd cov = x.transpose() * x / double(x.rows() - 1);
    const MatrixXd linv = MatrixXd(cov.llt().matrixL()).inverse();
    return x * linv.transpose();
}

}  // namespace

TEST_CASE("fit_gaussian matches a direct computation") {
    Rng rng(SeedTree(1));
    const MatrixXd x = gaussian_rows(5000, Vector3d(1, -2, 3), random_spd(3, rng), rng);
    const GaussianSummary g = fit_gaussian(x);
    const VectorXd mu = x.colwise().mean().transpose();
    const MatrixXd c = x.rowwise() - mu.transpose();
    const MatrixXd cov = c.transpose() * c / double(x.rows() - 1);
    CHECK((g.mean - mu).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((g.covariance - cov).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(g.samples == 5000);
    CHECK((g.covariance - g.covariance.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(fit_gaussian(MatrixXd::Zero(1, 3)), MetricError);
}

TEST_CASE("lab gaussian of constant data") {
    const std::vector<Image> gray(3, constant_image(16, 128 / 255.0f, 128 / 255.0f, 128 / 255.0f));
    const GaussianSummary g = fit_lab_gaussian(gray);
    CHECK(g.mean[0] == doctest::Approx(53.585).epsilon(1e-4));
    CHECK(std::abs(g.mean[1]) < 1e-3);
    CHECK(std::abs(g.mean[2]) < 1e-3);
    CHECK(g.covariance.cwiseAbs().maxCoeff() < 1e-9);
    CHECK(g.samples == 3 * 256);

    // two colors in equal pixel counts: the mean is the average of the two
    const Image red = constant_image(16, 0.9f, 0.1f, 0.1f), blue = constant_image(16, 0.1f, 0.2f, 0.8f);
    const GaussianSummary m = fit_lab_gaussian({red, blue, red, blue});
    const Vec3 lr = srgb_to_lab({0.9f, 0.1f, 0.1f}), lb = srgb_to_lab({0.1f, 0.2f, 0.8f});
    for (int c = 0; c < 3; ++c) CHECK(m.mean[c] == doctest::Approx(0.5 * (lr[c] + lb[c])).epsilon(1e-6));
    const GaussianSummary w = fit_lab_gaussian({red, blue, blue, blue});
    for (int c = 0; c < 3; ++c) CHECK(w.mean[c] == doctest::Approx(0.25 * lr[c] + 0.75 * lb[c]).epsilon(1e-6));
}

TEST_CASE("lab gaussian ignores the worker count") {
    std::vector<Image> imgs;
    DeadLeavesParams p;
    for (int i = 0; i < 9; ++i) imgs.push_back(generate_dead_leaves(p, 32, SeedTree(4).child("i", i)));
    ::setenv("NOISEGEN_WORKERS", "1", 1);
    const GaussianSummary a = fit_lab_gaussian(imgs);
    ::setenv("NOISEGEN_WORKERS", "4", 1);
    const GaussianSummary b = fit_lab_gaussian(imgs);
    ::unsetenv("NOISEGEN_WORKERS");
    CHECK(a.mean == b.mean);
    CHECK(a.covariance == b.covariance);
}

TEST_CASE("symmetric kl identities") {
    Rng rng(SeedTree(2));
    for (int t = 0; t < 20; ++t) {
        const GaussianSummary p = gaussian(VectorXd::Random(3), random_spd(3, rng));
        CHECK(std::abs(symmetric_kl(p, p)) <= 1e-9);
        const GaussianSummary q = gaussian(VectorXd::Random(3), random_spd(3, rng));
        CHECK(std::abs(symmetric_kl(p, q) - symmetric_kl(q, p)) <= 1e-9);
        CHECK(symmetric_kl(p, q) == doctest::Approx(kl_divergence(p, q) + kl_divergence(q, p)).epsilon(1e-9));
    }
    for (int d : {1, 3, 8}) {
        const VectorXd delta = VectorXd::LinSpaced(d, 0.5, -1.5);
        const GaussianSummary p = gaussian(VectorXd::Zero(d), MatrixXd::Identity(d, d));
        const GaussianSummary q = gaussian(delta, MatrixXd::Identity(d, d));
        CHECK(std::abs(symmetric_kl(p, q) - delta.squaredNorm()) <= 1e-9);
    }
}

TEST_CASE("symmetric kl agrees with a Monte Carlo estimate") {
    Rng rng(SeedTree(3));
    for (int t = 0; t < 3; ++t) {
        const GaussianSummary p = gaussian(VectorXd::Random(3), random_spd(3, rng));
        const GaussianSummary q = gaussian(VectorXd::Random(3), random_spd(3, rng));
        const int n = 1000000;
        const MatrixXd xp = gaussian_rows(n, p.mean, p.covariance, rng), xq = gaussian_rows(n, q.mean, q.covariance, rng);
        double s = 0;
        for (int i = 0; i < n; ++i) {
            s += log_density(xp.row(i).transpose(), p) - log_density(xp.row(i).transpose(), q);
            s += log_density(xq.row(i).transpose(), q) - log_density(xq.row(i).transpose(), p);
        }
        CHECK(s / n == doctest::Approx(symmetric_kl(p, q)).epsilon(0.02));
    }
}

TEST_CASE("singular covariances are regularized, broken ones refused") {
    const GaussianSummary z = gaussian(Vector3d(1, 2, 3), MatrixXd::Zero(3, 3));
    CHECK(symmetric_kl(z, z) == doctest::Approx(0.0));
    CHECK(frechet_distance(z, z) == 0.0);
    MatrixXd bad = MatrixXd::Identity(3, 3);
    bad(0, 0) = -1;
    CHECK_THROWS_AS(symmetric_kl(gaussian(Vector3d::Zero(), bad), z), MetricError);
    MatrixXd asym = MatrixXd::Identity(3, 3);
    asym(0, 1) = 0.5;
    CHECK_THROWS_AS(frechet_distance(gaussian(Vector3d::Zero(), asym), z), MetricError);
    CHECK_THROWS_AS(symmetric_kl(z, gaussian(VectorXd::Zero(2), MatrixXd::Identity(2, 2))), MetricError);
}

TEST_CASE("frechet identities") {
    Rng rng(SeedTree(5));
    for (int t = 0; t < 20; ++t) {
        const GaussianSummary p = gaussian(VectorXd::Random(6), random_spd(6, rng));
        CHECK(std::abs(frechet_distance(p, p)) <= 1e-9);
        const GaussianSummary q = gaussian(VectorXd::Random(6), random_spd(6, rng));
        CHECK(std::abs(frechet_distance(p, q) - frechet_distance(q, p)) <= 1e-9);
        const VectorXd delta = VectorXd::Random(6);
        const GaussianSummary shifted = gaussian(p.mean + delta, p.covariance);
        CHECK(std::abs(frechet_distance(p, shifted) - delta.squaredNorm()) <= 1e-9);
    }
    // commuting diagonal covariances: sum of (sqrt a - sqrt b)^2
    const VectorXd a = (VectorXd(4) << 1.0, 4.0, 0.25, 9.0).finished(), b = (VectorXd(4) << 2.0, 1.0, 0.5, 0.0).finished();
    const VectorXd mu = (VectorXd(4) << 1, 0, -1, 2).finished();
    double want = mu.squaredNorm();
    for (int i = 0; i < 4; ++i) want += std::pow(std::sqrt(a[i]) - std::sqrt(b[i]), 2);
    const double got = frechet_distance(gaussian(VectorXd::Zero(4), a.asDiagonal()), gaussian(mu, b.asDiagonal()));
    CHECK(std::abs(got - want) <= 1e-9);
}

TEST_CASE("log volume") {
    Rng rng(SeedTree(6));
    const MatrixXd x = whiten(gaussian_rows(500, VectorXd::Zero(5), random_spd(5, rng), rng));
    const LogVolume w = diversity_log_volume(x);
    CHECK(std::abs(w.value) < 1e-9);
    CHECK_FALSE(w.regularized);
    const double c = 3.0;
    CHECK(diversity_log_volume(c * x).value == doctest::Approx(w.value + 5 * 2 * std::log(c)).epsilon(1e-9));

    const MatrixXd cov = (Eigen::Vector2d(1, 4)).asDiagonal();
    const LogVolume g = diversity_log_volume(gaussian_rows(200000, Eigen::Vector2d::Zero(), cov, rng));
    CHECK(g.value == doctest::Approx(std::log(4.0)).epsilon(0.02));

    MatrixXd flat(100, 3);
    flat.col(0) = VectorXd::Random(100);
    flat.col(1) = VectorXd::Random(100);
    flat.col(2) = flat.col(0) + flat.col(1);
    const LogVolume f = diversity_log_volume(flat);
    CHECK(f.regularized);
    CHECK(std::isfinite(f.value));
    CHECK(diversity_log_volume(MatrixXd::Random(3, 5)).regularized);
}

TEST_CASE("knn precision and recall") {
    Rng rng(SeedTree(7));
    const MatrixXd a = gaussian_rows(300, VectorXd::Zero(4), MatrixXd::Identity(4, 4), rng);
    const PrecisionRecall same = knn_precision_recall(a, a);
    CHECK(same.precision == 1.0);
    CHECK(same.recall == 1.0);

    const MatrixXd far = gaussian_rows(300, VectorXd::Constant(4, 50.0), MatrixXd::Identity(4, 4), rng);
    const PrecisionRecall apart = knn_precision_recall(a, far);
    CHECK(apart.precision < 0.01);
    CHECK(apart.recall < 0.01);

    const MatrixXd tight = gaussian_rows(300, VectorXd::Zero(4), 0.01 * MatrixXd::Identity(4, 4), rng);
    const PrecisionRecall sub = knn_precision_recall(a, tight);
    CHECK(sub.precision > 0.95);
    CHECK(sub.recall < 0.5);

    CHECK_THROWS_AS(knn_precision_recall(a.topRows(3), a), MetricError);
    CHECK_THROWS_AS(knn_precision_recall(MatrixXd::Ones(10, 4), a), MetricError);
    CHECK_THROWS_AS(knn_precision_recall(a, MatrixXd::Random(10, 3)), MetricError);
}

TEST_CASE("alpha fit on constructed spectra") {
    Rng rng(SeedTree(8));
    for (double target : {0.5, 1.0, 1.5, 2.0}) {
        const Plane mag = radial_power_law_magnitude(128, 128, target);
        const Plane field = impose_spectrum(gaussian_noise(128, 128, rng), mag);
        const auto fit = fit_alpha_image(gray_from(field));
        REQUIRE(fit);
        CHECK(fit->alpha == doctest::Approx(target).epsilon(0.05 / target));
        CHECK(fit->fit_r2 > 0.9);
    }
    double white = 0;
    for (int i = 0; i < 8; ++i) white += fit_alpha_image(gray_from(gaussian_noise(128, 128, rng)))->alpha / 8;
    CHECK(std::abs(white) < 0.05);
}

TEST_CASE("alpha fit ignores brightness scaling and skips constant images") {
    Rng rng(SeedTree(9));
    const Plane field = power_law_noise(64, 64, 1.2, rng);
    Plane scaled = field;
    for (double& v : scaled.data) v *= 0.3;
    const auto a = fit_alpha_image(gray_from(field)), b = fit_alpha_image(gray_from(scaled));
    CHECK(a->alpha == doctest::Approx(b->alpha).epsilon(1e-5));
    CHECK(b->A == doctest::Approx(0.3 * a->A).epsilon(1e-4));

    const AlphaReport r = fit_alpha({gray_from(field), constant_image(64, 0.2f, 0.2f, 0.2f), gray_from(scaled)});
    CHECK(r.per_image.size() == 2);
    CHECK(r.excluded == std::vector<std::size_t>{1});
    CHECK(r.mean.alpha == doctest::Approx(a->alpha).epsilon(1e-5));
    CHECK_THROWS_AS(fit_alpha({constant_image(16, 0, 0, 0)}), MetricError);
}

TEST_CASE("alpha of the spectrum generator") {
    std::vector<Image> imgs;
    for (int i = 0; i < 16; ++i) {
        SpectrumParams p = sample_spectrum_params(SeedTree(10).child("p", i));
        p.a = p.b = 2.0;
        imgs.push_back(generate_spectrum_image(p, 128, SeedTree(10).child("img", i)));
    }
    CHECK(fit_alpha(imgs).mean.alpha == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("pearson and histogram") {
    const std::vector<double> x = {1, 2, 3, 4, 5}, y = {2, 4, 6, 8, 10}, z = {5, 4, 3, 2, 1};
    CHECK(pearson(x, y) == doctest::Approx(1.0));
    CHECK(pearson(x, z) == doctest::Approx(-1.0));
    const std::vector<double> u = {1, 0, 1, 0, 1};
    CHECK(pearson(x, u) == doctest::Approx(0.0));
    CHECK_THROWS_AS(pearson(x, std::vector<double>(5, 1.0)), MetricError);

    const Histogram h = histogram(x, 2, 0, 6);
    CHECK(h.counts == std::vector<std::uint64_t>{2, 3});
    const Histogram auto_range = histogram(x, 4);
    CHECK(auto_range.lo == 1);
    CHECK(auto_range.hi == 5);
    CHECK(auto_range.counts == std::vector<std::uint64_t>{1, 1, 1, 2});
}

TEST_CASE("builtin embedding") {
    const PyramidColorEmbedding e;
    CHECK(e.dimension() == 3 * 4 + 1 + 6);
    Rng rng(SeedTree(11));
    const Image img = gray_from(power_law_noise(96, 96, 1.0, rng));
    const std::vector<double> v = e.embed(img);
    CHECK(v.size() == 19u);
    CHECK(v == e.embed(img));
    CHECK(e.embed(constant_image(64, 0.3f, 0.3f, 0.3f)) == e.embed(constant_image(32, 0.3f, 0.3f, 0.3f)));
}

TEST_CASE("aligned embedding") {
    const AlignedBandEmbedding e;
    CHECK(e.dimension() == 3 * 64 * 4);
    CHECK(e.name() != PyramidColorEmbedding().name());
    Rng rng(SeedTree(14));
    const Image img = gray_from(power_law_noise(64, 64, 1.0, rng));
    const std::vector<double> v = e.embed(img);
    REQUIRE(v.size() == 768u);
    double norm = 0;
    for (double x : v) norm += x * x;
    CHECK(norm <= 1.0);
    CHECK(norm > 0.5);
    for (double x : e.embed(constant_image(64, 0.4f, 0.1f, 0.9f))) REQUIRE(std::abs(x) < 1e-6);
    CHECK_THROWS_AS(AlignedBandEmbedding(64, 3, 32), ParameterError);
}

TEST_CASE("crop variation ordering and invariances") {
    const AlignedBandEmbedding e;
    const CropVariation flat = crop_variation(std::vector<Image>(8, constant_image(128, 0.2f, 0.5f, 0.7f)), e, SeedTree(1));
    CHECK(flat.mean < 1e-6);
    CHECK(flat.provider == e.name());

    Rng rng(SeedTree(12));
    std::vector<Image> noise, leaves;
    DeadLeavesParams p;
    for (int i = 0; i < 64; ++i) {
        Image n(128, 128);
        for (float& v : n.data) v = static_cast<float>(rng.uniform());
        noise.push_back(n);
        leaves.push_back(generate_dead_leaves(p, 128, SeedTree(13).child("l", i)));
    }
    const double vn = crop_variation(noise, e, SeedTree(1)).mean, vl = crop_variation(leaves, e, SeedTree(1)).mean;
    MESSAGE("noise " << vn << " leaves " << vl);
    CHECK(vn > vl);

    std::vector<Image> shuffled = leaves;
    std::reverse(shuffled.begin(), shuffled.end());
    const CropVariation a = crop_variation(leaves, e, SeedTree(1)), b = crop_variation(shuffled, e, SeedTree(1));
    double var = 0;
    for (double d : a.per_image) var += (d - a.mean) * (d - a.mean);
    const double se = std::sqrt(var / (a.per_image.size() - 1) / a.per_image.size());
    CHECK(std::abs(a.mean - b.mean) < 4 * std::sqrt(2.0) * se);
    CHECK(crop_variation(leaves, e, SeedTree(1), {}, 1).per_image == crop_variation(leaves, e, SeedTree(1), {}, 3).per_image);
}

TEST_CASE("feature files round-trip and reject damage") {
    char tmpl[] = "/tmp/noisegen-feat-XXXXXX";
    REQUIRE(::mkdtemp(tmpl));
    const std::filesystem::path dir = tmpl, p = dir / "f.nzfe";
    const MatrixXd f = MatrixXd::Random(7, 5);
    write_features(p, f);
    CHECK(std::filesystem::file_size(p) == kFeatureHeaderSize + 7 * 5 * 4);
    const MatrixXd back = read_features(p);
    CHECK((back - f.cast<float>().cast<double>()).cwiseAbs().maxCoeff() == 0.0);

    std::ifstream in(p, std::ios::binary);
    std::vector<char> bytes(std::istreambuf_iterator<char>(in), {});
    in.close();
    auto field_after = [&](std::vector<char> b) {
        std::ofstream(p, std::ios::binary | std::ios::trunc).write(b.data(), static_cast<std::streamsize>(b.size()));
        try {
            read_features(p);
        } catch (const FormatError& e) {
            return e.field;
        }
        return std::string();
    };
    std::vector<char> m = bytes;
    m[0] = 'X';
    CHECK(field_after(m) == "magic");
    m = bytes;
    m[4] = 9;
    CHECK(field_after(m) == "version");
    m = bytes;
    m.pop_back();
    CHECK(field_after(m) == "length");
    CHECK(field_after(std::vector<char>(bytes.begin(), bytes.begin() + 10)) == "length");
    std::filesystem::remove_all(dir);
}

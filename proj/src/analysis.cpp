#include "noisegen/analysis.hpp"

#include <algorithm>
#include <functional>

#include "noisegen/dataset.hpp"
#include "noisegen/embedding.hpp"
#include "noisegen/stats.hpp"

namespace noisegen {

namespace {

using Json = nlohmann::json;

struct Images {
    fs::path dir;
    std::uint64_t count = 0;
    DatasetManifest manifest;
};

Images open_images(const fs::path& dir, std::uint64_t limit) {
    Images d;
    d.dir = dir;
    d.manifest = read_manifest(dir / "manifest.json");
    d.count = limit ? std::min(limit, d.manifest.count) : d.manifest.count;
    return d;
}

// Calls fn(images, first_index) over consecutive chunks in index order.
void for_each_chunk(const Images& d, std::uint64_t chunk,
                    const std::function<void(const std::vector<Image>&, std::uint64_t)>& fn) {
    std::uint64_t done = 0;
    for (const ShardInfo& s : d.manifest.shards) {
        for (std::uint64_t k = 0; k < s.count && done < d.count;) {
            const std::uint64_t n = std::min({chunk, s.count - k, d.count - done});
            fn(read_shard_range(d.dir / s.filename, static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(n)), done);
            k += n;
            done += n;
        }
        if (done >= d.count) break;
    }
}

Json to_json(const GaussianSummary& g) {
    Json cov = Json::array();
    for (int i = 0; i < g.dim(); ++i) {
        Json row = Json::array();
        for (int j = 0; j < g.dim(); ++j) row.push_back(g.covariance(i, j));
        cov.push_back(row);
    }
    return {{"mean", std::vector<double>(g.mean.data(), g.mean.data() + g.mean.size())},
            {"covariance", cov},
            {"samples", g.samples}};
}

Json to_json(const Histogram& h) { return {{"lo", h.lo}, {"hi", h.hi}, {"counts", h.counts}}; }

// What one pass over a dataset collects.
struct Collected {
    GaussianSummary lab;
    std::vector<double> alpha, amplitude, r2;
    std::vector<std::uint64_t> excluded;
    std::vector<double> variation;
    Eigen::MatrixXd embedded;
};

Collected collect(const Images& d, bool lab, bool alpha, bool variation, bool embed, const AnalyzeOptions& o) {
    Collected c;
    const PyramidColorEmbedding pooled;
    const AlignedBandEmbedding aligned;
    if (embed) c.embedded.resize(static_cast<Eigen::Index>(d.count), pooled.dimension());
    for_each_chunk(d, o.chunk, [&](const std::vector<Image>& imgs, std::uint64_t first) {
        if (lab) c.lab = merge_summaries(c.lab, fit_lab_gaussian(imgs));
        if (alpha)
            for (std::size_t i = 0; i < imgs.size(); ++i) {
                if (const auto f = fit_alpha_image(imgs[i])) {
                    c.alpha.push_back(f->alpha);
                    c.amplitude.push_back(f->A);
                    c.r2.push_back(f->fit_r2);
                } else {
                    c.excluded.push_back(first + i);
                }
            }
        if (variation) {
            const CropVariation v = crop_variation(imgs, aligned, SeedTree(o.seed), {}, o.workers, first);
            c.variation.insert(c.variation.end(), v.per_image.begin(), v.per_image.end());
        }
        if (embed)
            c.embedded.middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(imgs.size())) =
                embed_all(pooled, imgs, o.workers);
    });
    return c;
}

Eigen::MatrixXd spaced_rows(const Eigen::MatrixXd& x, std::uint64_t n) {
    const auto rows = static_cast<std::uint64_t>(x.rows());
    if (n == 0 || rows <= n) return x;
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), x.cols());
    for (std::uint64_t i = 0; i < n; ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(i * rows / n));
    return out;
}

double mean_of(const std::vector<double>& v) { return pairwise_sum(v) / static_cast<double>(v.size()); }

}  // namespace

const std::set<std::string>& analysis_metric_names() {
    static const std::set<std::string> names = {"color-kl", "alpha", "variation", "volume", "frechet", "pr"};
    return names;
}

bool metric_needs_reference(const std::string& name) { return name == "color-kl" || name == "frechet" || name == "pr"; }

void validate(const AnalyzeOptions& o) {
    if (o.metrics.empty()) throw AnalysisRequestError("analyze: no metrics requested");
    for (const std::string& m : o.metrics) {
        if (!analysis_metric_names().count(m)) {
            std::string all;
            for (const auto& n : analysis_metric_names()) all += (all.empty() ? "" : ", ") + n;
            throw AnalysisRequestError("analyze: unknown metric '" + m + "'; available: " + all);
        }
        if (metric_needs_reference(m) && !o.reference)
            throw AnalysisRequestError("analyze: metric '" + m + "' needs --reference");
    }
    const bool compares = o.metrics.count("frechet") || o.metrics.count("pr");
    if (o.features && compares && !o.reference_features)
        throw AnalysisRequestError("analyze: --features with frechet or pr also needs --reference-features");
    if (o.reference_features && !o.features) throw AnalysisRequestError("analyze: --reference-features needs --features");
    if (o.bins < 1) throw AnalysisRequestError("analyze: bins must be >= 1");
    if (o.chunk < 1) throw AnalysisRequestError("analyze: chunk must be >= 1");
    if (o.pr_k < 1) throw AnalysisRequestError("analyze: k must be >= 1");
}

Json analyze(const AnalyzeOptions& o) {
    validate(o);
    const auto want = [&](const char* m) { return o.metrics.count(m) > 0; };
    const Images data = open_images(o.dataset, o.limit);
    const bool embed_needed = (want("volume") || want("frechet") || want("pr")) && !o.features;
    const Collected c = collect(data, want("color-kl"), want("alpha"), want("variation"), embed_needed, o);

    Collected r;
    Images ref;
    if (o.reference) {
        ref = open_images(*o.reference, o.limit);
        r = collect(ref, want("color-kl"), false, false, (want("frechet") || want("pr")) && !o.features, o);
    }

    Eigen::MatrixXd feats = o.features ? read_features(*o.features) : c.embedded;
    Eigen::MatrixXd ref_feats = o.reference_features ? read_features(*o.reference_features) : r.embedded;
    const std::string provider = o.features ? "external:" + o.features->filename().string() : PyramidColorEmbedding().name();

    Json metrics = Json::object();
    if (want("color-kl")) {
        metrics["color-kl"] = {{"value", symmetric_kl(c.lab, r.lab)},
                               {"dataset", to_json(c.lab)},
                               {"reference", to_json(r.lab)}};
    }
    if (want("alpha")) {
        if (c.alpha.empty()) throw MetricError("alpha: every image is constant");
        metrics["alpha"] = {{"mean", mean_of(c.alpha)},
                            {"A", mean_of(c.amplitude)},
                            {"fit_r2", mean_of(c.r2)},
                            {"samples", c.alpha.size()},
                            {"excluded", c.excluded},
                            {"histogram", to_json(histogram(c.alpha, o.bins, 0.0, 3.0))}};
    }
    if (want("variation")) {
        metrics["variation"] = {{"value", mean_of(c.variation)},
                                {"provider", AlignedBandEmbedding().name()},
                                {"samples", c.variation.size()},
                                {"histogram", to_json(histogram(c.variation, o.bins, 0.0, 2.0))}};
    }
    if (want("volume")) {
        const LogVolume v = diversity_log_volume(feats);
        metrics["volume"] = {{"value", v.value},
                             {"regularized", v.regularized},
                             {"provider", provider},
                             {"dim", feats.cols()},
                             {"samples", feats.rows()}};
    }
    if (want("frechet")) {
        metrics["frechet"] = {{"value", frechet_distance(fit_gaussian(feats), fit_gaussian(ref_feats))},
                              {"provider", provider},
                              {"samples", feats.rows()},
                              {"reference_samples", ref_feats.rows()}};
    }
    if (want("pr")) {
        const Eigen::MatrixXd g = spaced_rows(feats, o.pr_samples), q = spaced_rows(ref_feats, o.pr_samples);
        const PrecisionRecall pr = knn_precision_recall(q, g, o.pr_k);
        metrics["pr"] = {{"precision", pr.precision},
                         {"recall", pr.recall},
                         {"k", o.pr_k},
                         {"provider", provider},
                         {"samples", g.rows()},
                         {"reference_samples", q.rows()}};
    }
    Json report = {{"dataset", o.dataset.string()},
                   {"images", data.count},
                   {"generator", to_json(data.manifest.generator)},
                   {"metrics", metrics}};
    report["reference"] = o.reference ? Json(o.reference->string()) : Json(nullptr);
    return report;
}

}  // namespace noisegen

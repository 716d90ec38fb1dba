#pragma once
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>

#include "json.hpp"
#include "noisegen/sampling.hpp"

namespace noisegen {

// Requested metric names: color-kl, alpha, variation, volume, frechet, pr.
const std::set<std::string>& analysis_metric_names();
// Metrics that compare against a reference dataset.
bool metric_needs_reference(const std::string& name);

struct AnalyzeOptions {
    std::set<std::string> metrics;
    std::filesystem::path dataset;
    std::optional<std::filesystem::path> reference;
    // External embeddings replacing the builtin pooled descriptor for
    // volume, frechet and pr.
    std::optional<std::filesystem::path> features, reference_features;
    std::uint64_t limit = 0;       // 0: every image
    std::uint64_t pr_samples = 5000;  // evenly spaced subset for the k-NN metric
    int pr_k = 3;
    int bins = 32;
    std::uint64_t seed = 0;        // crop draws
    int workers = 0;
    std::uint64_t chunk = 256;     // images held in memory at once
};

// Missing inputs or unknown metric names; a usage error, not a failure.
struct AnalysisRequestError : ParameterError {
    using ParameterError::ParameterError;
};

void validate(const AnalyzeOptions& o);
// Report keyed by metric name. Reads datasets in chunks, so memory does not
// grow with the dataset size.
nlohmann::json analyze(const AnalyzeOptions& o);

}  // namespace noisegen

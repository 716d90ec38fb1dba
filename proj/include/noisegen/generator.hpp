#pragma once
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "noisegen/deadleaves.hpp"
#include "noisegen/fractal.hpp"
#include "noisegen/statistical.hpp"
#include "noisegen/stylenet.hpp"

namespace noisegen {

using Json = nlohmann::json;

struct UnknownModel : ParameterError {
    explicit UnknownModel(const std::string& name);
};

struct StatisticalSpec {
    StatModelSet models;
    int iterations = 10;
    int wmm_iterations = 20;
    std::size_t wmm_target_samples = 100000;
    std::optional<double> slope_a, slope_b;  // fixed spectral exponents; the color basis is still drawn
};

struct StyleNetSpec {
    StyleNetConfig net;
    std::uint64_t reinit_every = 0;  // 0: one network for the whole dataset
};

using GeneratorParams = std::variant<DeadLeavesParams, StatisticalSpec, StyleNetSpec, FractalParams>;

struct GeneratorSpec {
    std::string model;
    int resolution = 128;
    GeneratorParams params;

    void validate() const;
};

const std::vector<std::string>& model_names();
// Default parameters for a registered model name.
GeneratorSpec make_generator_spec(std::string_view model, int resolution = 128);

// Canonical JSON (sorted keys), every parameter spelled out.
Json to_json(const GeneratorSpec& spec);
// Defaults for j["model"], then any fields present in j overlaid on top.
GeneratorSpec generator_spec_from_json(const Json& j);
// Overlay `patch` onto an existing spec; the model name may not change.
void apply_overlay(GeneratorSpec& spec, const Json& patch);

// Deterministic image source: image i depends only on (spec, root seed, i).
// generate() is safe to call from several threads.
class Generator {
public:
    Generator(GeneratorSpec spec, std::uint64_t root_seed);

    Image generate(std::uint64_t index) const;
    SeedTree image_seed(std::uint64_t index) const;
    const GeneratorSpec& spec() const { return spec_; }
    std::uint64_t root_seed() const { return root_; }

private:
    std::shared_ptr<const NetworkWeights> weights_for(std::uint64_t index) const;

    GeneratorSpec spec_;
    std::uint64_t root_;
    mutable std::mutex mu_;
    mutable std::map<std::uint64_t, std::shared_ptr<const NetworkWeights>> cache_;
};

}  // namespace noisegen

#include "noisegen/generator.hpp"

#include <algorithm>

namespace noisegen {

namespace {

const std::map<std::string, DeadLeavesVariant>& leaf_models() {
    static const std::map<std::string, DeadLeavesVariant> m = {
        {"dead-leaves-squares", DeadLeavesVariant::Squares},
        {"dead-leaves-oriented", DeadLeavesVariant::Oriented},
        {"dead-leaves-shapes", DeadLeavesVariant::Shapes},
        {"dead-leaves-textured", DeadLeavesVariant::Textured},
    };
    return m;
}

const std::map<std::string, StatModelSet>& stat_models() {
    static const std::map<std::string, StatModelSet> m = {
        {"spectrum", {true, false, false}},
        {"wmm", {false, false, true}},
        {"spectrum-color", {true, true, false}},
        {"spectrum-color-wmm", {true, true, true}},
    };
    return m;
}

const std::map<std::string, StyleNetMode>& style_models() {
    static const std::map<std::string, StyleNetMode> m = {
        {"stylenet-random", StyleNetMode::Random},
        {"stylenet-highfreq", StyleNetMode::HighFreq},
        {"stylenet-sparse", StyleNetMode::Sparse},
        {"stylenet-oriented", StyleNetMode::Oriented},
    };
    return m;
}

std::string join_names() {
    std::string s;
    for (const auto& n : model_names()) s += (s.empty() ? "" : ", ") + n;
    return s;
}

Json models_to_json(const StatModelSet& m) {
    Json a = Json::array();
    if (m.spectrum) a.push_back("spectrum");
    if (m.color) a.push_back("color");
    if (m.wmm) a.push_back("wmm");
    return a;
}

StatModelSet models_from_json(const Json& j) {
    StatModelSet m;
    for (const auto& v : j) {
        const std::string s = v.get<std::string>();
        if (s == "spectrum") m.spectrum = true;
        else if (s == "color") m.color = true;
        else if (s == "wmm") m.wmm = true;
        else throw ParameterError("texture: unknown statistical model '" + s + "'");
    }
    return m;
}

template <typename T>
void take(const Json& p, const char* key, T& out) {
    if (!p.contains(key)) return;
    try {
        out = p.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw ParameterError(std::string("config field '") + key + "': " + e.what());
    }
}

void check_keys(const Json& p, std::initializer_list<const char*> allowed, const std::string& model) {
    if (!p.is_object()) throw ParameterError("params for " + model + " must be a JSON object");
    for (auto it = p.begin(); it != p.end(); ++it)
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; }))
            throw ParameterError("unknown parameter '" + it.key() + "' for model " + model);
}

struct ParamsToJson {
    Json operator()(const DeadLeavesParams& p) const {
        return {{"radius_lambda", p.radius_lambda},
                {"min_radius", p.min_radius},
                {"max_leaves", p.max_leaves},
                {"max_rotation", p.max_rotation},
                {"color_source", p.color_source == LeafColorSource::Palette ? "palette" : "uniform-rgb"},
                {"texture", models_to_json(p.texture)}};
    }
    Json operator()(const StatisticalSpec& s) const {
        return {{"iterations", s.iterations},
                {"wmm_iterations", s.wmm_iterations},
                {"wmm_target_samples", s.wmm_target_samples},
                {"slope_a", s.slope_a ? Json(*s.slope_a) : Json(nullptr)},
                {"slope_b", s.slope_b ? Json(*s.slope_b) : Json(nullptr)}};
    }
    Json operator()(const StyleNetSpec& s) const {
        return {{"channel_widths", s.net.widths()},
                {"latent_dim", s.net.latent_dim},
                {"noise_strength", s.net.noise_strength},
                {"reinit_every", s.reinit_every}};
    }
    Json operator()(const FractalParams& p) const {
        return {{"points", p.points},
                {"discard", p.discard},
                {"pilot_points", p.pilot_points},
                {"grayscale", p.grayscale},
                {"max_attempts", p.max_attempts}};
    }
};

struct ParamsOverlay {
    const Json& p;
    const std::string& model;

    void operator()(DeadLeavesParams& d) const {
        check_keys(p, {"radius_lambda", "min_radius", "max_leaves", "max_rotation", "color_source", "texture"}, model);
        take(p, "radius_lambda", d.radius_lambda);
        take(p, "min_radius", d.min_radius);
        take(p, "max_leaves", d.max_leaves);
        take(p, "max_rotation", d.max_rotation);
        if (p.contains("color_source")) {
            std::string s;
            take(p, "color_source", s);
            if (s == "palette") d.color_source = LeafColorSource::Palette;
            else if (s == "uniform-rgb") d.color_source = LeafColorSource::UniformRgb;
            else throw ParameterError("color_source must be 'uniform-rgb' or 'palette', got '" + s + "'");
        }
        if (p.contains("texture")) d.texture = models_from_json(p.at("texture"));
    }
    void operator()(StatisticalSpec& s) const {
        check_keys(p, {"iterations", "wmm_iterations", "wmm_target_samples", "slope_a", "slope_b"}, model);
        take(p, "iterations", s.iterations);
        take(p, "wmm_iterations", s.wmm_iterations);
        take(p, "wmm_target_samples", s.wmm_target_samples);
        for (auto [key, slot] : {std::pair{"slope_a", &s.slope_a}, std::pair{"slope_b", &s.slope_b}}) {
            if (!p.contains(key)) continue;
            if (p.at(key).is_null()) slot->reset();
            else {
                double v = 0;
                take(p, key, v);
                *slot = v;
            }
        }
    }
    void operator()(StyleNetSpec& s) const {
        check_keys(p, {"channel_widths", "latent_dim", "noise_strength", "reinit_every"}, model);
        take(p, "channel_widths", s.net.channel_widths);
        take(p, "latent_dim", s.net.latent_dim);
        take(p, "noise_strength", s.net.noise_strength);
        take(p, "reinit_every", s.reinit_every);
    }
    void operator()(FractalParams& f) const {
        check_keys(p, {"points", "discard", "pilot_points", "grayscale", "max_attempts"}, model);
        take(p, "points", f.points);
        take(p, "discard", f.discard);
        take(p, "pilot_points", f.pilot_points);
        take(p, "grayscale", f.grayscale);
        take(p, "max_attempts", f.max_attempts);
    }
};

}  // namespace

UnknownModel::UnknownModel(const std::string& name)
    : ParameterError("unknown model '" + name + "'; available: " + join_names()) {}

const std::vector<std::string>& model_names() {
    static const std::vector<std::string> names = {
        "dead-leaves-squares", "dead-leaves-oriented", "dead-leaves-shapes", "dead-leaves-textured",
        "spectrum",            "wmm",                  "spectrum-color",     "spectrum-color-wmm",
        "stylenet-random",     "stylenet-highfreq",    "stylenet-sparse",    "stylenet-oriented",
        "fractal",
    };
    return names;
}

GeneratorSpec make_generator_spec(std::string_view model, int resolution) {
    GeneratorSpec g;
    g.model = std::string(model);
    g.resolution = resolution;
    if (auto it = leaf_models().find(g.model); it != leaf_models().end()) {
        DeadLeavesParams p;
        p.variant = it->second;
        g.params = p;
    } else if (auto it = stat_models().find(g.model); it != stat_models().end()) {
        StatisticalSpec s;
        s.models = it->second;
        g.params = s;
    } else if (auto it = style_models().find(g.model); it != style_models().end()) {
        StyleNetSpec s;
        s.net.mode = it->second;
        s.net.out_size = resolution;
        g.params = s;
    } else if (g.model == "fractal") {
        g.params = FractalParams{};
    } else {
        throw UnknownModel(g.model);
    }
    return g;
}

void GeneratorSpec::validate() const {
    if (resolution < 8) throw ParameterError("resolution must be >= 8, got " + std::to_string(resolution));
    if (const auto* d = std::get_if<DeadLeavesParams>(&params)) d->validate();
    if (const auto* s = std::get_if<StatisticalSpec>(&params)) {
        if (s->iterations < 1 || s->wmm_iterations < 1) throw ParameterError("iterations must be >= 1");
        if (s->wmm_target_samples < 1) throw ParameterError("wmm_target_samples must be >= 1");
        if (s->slope_a.has_value() != s->slope_b.has_value())
            throw ParameterError("slope_a and slope_b must be fixed together");
        if (s->slope_a && !(*s->slope_a > 0 && *s->slope_b > 0)) throw ParameterError("fixed slopes must be > 0");
    }
    if (const auto* s = std::get_if<StyleNetSpec>(&params)) {
        if (s->net.out_size != resolution) throw ParameterError("stylenet out_size must equal the resolution");
        s->net.validate();
    }
    if (const auto* f = std::get_if<FractalParams>(&params)) f->validate();
}

Json to_json(const GeneratorSpec& spec) {
    return {{"model", spec.model}, {"resolution", spec.resolution}, {"params", std::visit(ParamsToJson{}, spec.params)}};
}

void apply_overlay(GeneratorSpec& spec, const Json& patch) {
    if (!patch.is_object()) throw ParameterError("generator config must be a JSON object");
    for (auto it = patch.begin(); it != patch.end(); ++it)
        if (it.key() != "model" && it.key() != "resolution" && it.key() != "params")
            throw ParameterError("unknown generator config key '" + it.key() + "'");
    if (patch.contains("model") && patch.at("model").get<std::string>() != spec.model)
        throw ParameterError("config overlay cannot change the model");
    if (patch.contains("resolution")) {
        take(patch, "resolution", spec.resolution);
        if (auto* s = std::get_if<StyleNetSpec>(&spec.params)) {
            s->net.out_size = spec.resolution;
            if (!patch.contains("params") || !patch.at("params").contains("channel_widths")) s->net.channel_widths.clear();
        }
    }
    if (patch.contains("params")) std::visit(ParamsOverlay{patch.at("params"), spec.model}, spec.params);
    spec.validate();
}

GeneratorSpec generator_spec_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("model") || !j.at("model").is_string())
        throw ParameterError("generator config needs a string 'model' field");
    int res = 128;
    if (j.contains("resolution")) take(j, "resolution", res);
    GeneratorSpec g = make_generator_spec(j.at("model").get<std::string>(), res);
    apply_overlay(g, j);
    return g;
}

Generator::Generator(GeneratorSpec spec, std::uint64_t root_seed) : spec_(std::move(spec)), root_(root_seed) {
    spec_.validate();
}

SeedTree Generator::image_seed(std::uint64_t index) const { return derive_seed(SeedTree(root_), "img", index); }

std::shared_ptr<const NetworkWeights> Generator::weights_for(std::uint64_t index) const {
    const auto& s = std::get<StyleNetSpec>(spec_.params);
    const std::uint64_t epoch = s.reinit_every ? index / s.reinit_every : 0;
    {
        std::lock_guard<std::mutex> lock(mu_);
        if (auto it = cache_.find(epoch); it != cache_.end()) return it->second;
    }
    // built outside the lock; a racing duplicate is identical and discarded
    auto w = std::make_shared<const NetworkWeights>(init_network(s.net, SeedTree(root_).child("weights", epoch)));
    std::lock_guard<std::mutex> lock(mu_);
    auto [it, inserted] = cache_.emplace(epoch, w);
    while (cache_.size() > 8) cache_.erase(cache_.begin()->first == epoch ? std::next(cache_.begin()) : cache_.begin());
    return it->second;
}

Image Generator::generate(std::uint64_t index) const {
    const SeedTree seed = image_seed(index);
    const int res = spec_.resolution;
    if (const auto* d = std::get_if<DeadLeavesParams>(&spec_.params)) return generate_dead_leaves(*d, res, seed);
    if (const auto* s = std::get_if<StatisticalSpec>(&spec_.params)) {
        ComposeOptions o;
        o.iterations = s->iterations;
        o.wmm_iterations = s->wmm_iterations;
        o.wmm_target_samples = s->wmm_target_samples;
        if (s->slope_a) {
            SpectrumParams sp = sample_spectrum_params(seed.child("spectrum"));
            sp.a = *s->slope_a;
            sp.b = *s->slope_b;
            o.spectrum = sp;
        }
        return generate_composed(s->models, res, seed, o);
    }
    if (const auto* s = std::get_if<StyleNetSpec>(&spec_.params))
        return synthesize(*weights_for(index), noise_spec_for(s->net.mode), seed);
    return generate_fractal(std::get<FractalParams>(spec_.params), res, seed);
}

}  // namespace noisegen

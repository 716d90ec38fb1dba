#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "noisegen/analysis.hpp"
#include "noisegen/dataset.hpp"
#include "noisegen/parallel.hpp"
#include "noisegen/png_io.hpp"

using namespace noisegen;

namespace {

constexpr int kExitOk = 0, kExitFailure = 1, kExitUsage = 2;

Json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParameterError("cannot open config file '" + path + "'");
    try {
        return Json::parse(f);
    } catch (const Json::exception& e) {
        throw ParameterError("config file '" + path + "' is not valid JSON: " + e.what());
    }
}

// A run: the generator plus how many images, from which seed, in what shards.
struct RunConfig {
    std::optional<GeneratorSpec> spec;
    std::uint64_t count = 0;
    std::uint64_t seed = 0;
    std::uint64_t shard_size = kDefaultShardSize;
    bool has_count = false;
};

template <typename T>
void take_run(const Json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw ParameterError(std::string("config field '") + key + "': " + e.what());
    }
}

// Accepts either a manifest.json (its generator, root_seed, count and
// shard_size) or a flat object: GeneratorSpec keys plus count, seed and
// shard_size.
RunConfig run_config_from_json(const Json& j) {
    if (!j.is_object()) throw ParameterError("config must be a JSON object");
    RunConfig r;
    if (j.contains("generator")) {
        r.spec = generator_spec_from_json(j.at("generator"));
        take_run(j, "root_seed", r.seed);
    } else {
        Json gen = Json::object();
        for (const char* k : {"model", "resolution", "params"})
            if (j.contains(k)) gen[k] = j.at(k);
        if (gen.contains("model")) r.spec = generator_spec_from_json(gen);
        else if (gen.contains("params") || gen.contains("resolution"))
            throw ParameterError("config sets generator fields without a model");
        take_run(j, "seed", r.seed);
    }
    static const std::set<std::string> known = {"model",      "resolution", "params", "generator", "root_seed", "seed",
                                                "count",      "shard_size", "format_version",        "shards"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) throw ParameterError("unknown config key '" + it.key() + "'");
    r.has_count = j.contains("count");
    take_run(j, "count", r.count);
    take_run(j, "shard_size", r.shard_size);
    return r;
}

// Flags win over the config file.
struct GenFlags {
    std::string model, config, out;
    int size = 128;
    std::uint64_t count = 0, seed = 0, shard_size = kDefaultShardSize;
    int workers = 0;
    bool stream = false;
};

bool given(const CLI::App& cmd, const std::string& flag) {
    const CLI::Option* o = cmd.get_option_no_throw(flag);
    return o && o->count() > 0;
}

GeneratorSpec effective_spec(const CLI::App& cmd, const GenFlags& f, RunConfig& rc) {
    if (!f.config.empty()) rc = run_config_from_json(read_json_file(f.config));
    GeneratorSpec spec;
    if (given(cmd, "--model")) {
        if (rc.spec && rc.spec->model != f.model) {
            // a different model: start from its defaults
            spec = make_generator_spec(f.model, rc.spec->resolution);
        } else {
            spec = rc.spec ? *rc.spec : make_generator_spec(f.model, f.size);
        }
    } else if (rc.spec) {
        spec = *rc.spec;
    } else {
        throw ParameterError("--model is required (or a config file naming one)");
    }
    if (given(cmd, "--size") || !rc.spec) apply_overlay(spec, Json{{"resolution", f.size}});
    if (given(cmd, "--seed")) rc.seed = f.seed;
    if (given(cmd, "--count")) {
        rc.count = f.count;
        rc.has_count = true;
    }
    if (given(cmd, "--shard-size")) rc.shard_size = f.shard_size;
    spec.validate();
    return spec;
}

void emit(const Json& j, const std::string& report) {
    const std::string text = canonical_dump(j);
    if (report.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(report, std::ios::trunc);
    if (!f || !(f << text)) throw std::runtime_error("cannot write report '" + report + "'");
}

int cmd_generate(const CLI::App& cmd, const GenFlags& f) {
    RunConfig rc;
    const GeneratorSpec spec = effective_spec(cmd, f, rc);
    if (!rc.has_count || rc.count < 1) throw ParameterError("--count must be given and >= 1");
    const int workers = resolve_workers(f.workers);
    const auto t0 = std::chrono::steady_clock::now();
    const auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

    if (f.stream) {
        // throughput of the unbounded source; nothing is written
        const Generator gen(spec, rc.seed);
        parallel_for(rc.count, workers, [&](std::size_t i) { (void)gen.generate(i); });
        const double s = elapsed();
        emit({{"mode", "stream"},
              {"images", rc.count},
              {"workers", workers},
              {"seconds", s},
              {"images_per_second", rc.count / s},
              {"images_per_second_per_worker", rc.count / s / workers}},
             "");
        return kExitOk;
    }
    if (f.out.empty()) throw ParameterError("--out is required unless --stream is given");
    WriteOptions o;
    o.shard_size = rc.shard_size;
    o.workers = workers;
    const std::uint64_t step = std::max<std::uint64_t>(rc.count / 20, 1);
    std::uint64_t next = step;
    o.progress = [&](std::uint64_t done, std::uint64_t total) {
        if (done >= next || done == total) {
            std::cerr << "generated " << done << "/" << total << "\n";
            next = done + step;
        }
    };
    const DatasetManifest m = write_shards(spec, rc.count, f.out, rc.seed, o);
    emit({{"mode", "shards"},
          {"out", f.out},
          {"images", m.count},
          {"shards", m.shards.size()},
          {"workers", workers},
          {"seconds", elapsed()}},
         "");
    return kExitOk;
}

std::set<std::string> split_list(const std::string& s) {
    std::set<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.insert(item);
    return out;
}

int grid_columns(int n) { return std::min(n, static_cast<int>(std::ceil(std::sqrt(1.5 * n)))); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"noisegen: procedural structured-noise image datasets and dataset statistics"};
    app.require_subcommand(1);

    GenFlags gen;
    CLI::App* g = app.add_subcommand("generate", "materialize a sharded dataset, or benchmark streaming");
    g->add_option("--model", gen.model, "generator model name");
    g->add_option("--count", gen.count, "number of images");
    g->add_option("--size", gen.size, "image side in pixels")->check(CLI::PositiveNumber);
    g->add_option("--seed", gen.seed, "root seed");
    g->add_option("--out", gen.out, "output directory");
    g->add_option("--shard-size", gen.shard_size, "images per shard")->check(CLI::PositiveNumber);
    g->add_flag("--stream", gen.stream, "generate without writing and report throughput");
    g->add_option("--workers", gen.workers, "worker threads (default NOISEGEN_WORKERS or all cores)")
        ->check(CLI::PositiveNumber);
    g->add_option("--config", gen.config, "JSON config: generator spec and run fields, or a manifest.json");

    AnalyzeOptions an;
    std::string stats_list, report, dataset, reference, features, reference_features;
    CLI::App* a = app.add_subcommand("analyze", "per-image and dataset statistics as a JSON report");
    a->add_option("--stats", stats_list, "comma list of color-kl,alpha,variation,volume,frechet,pr")->required();
    a->add_option("--dataset", dataset, "dataset directory")->required();
    a->add_option("--reference", reference, "reference dataset directory");
    a->add_option("--features", features, "external features for the dataset (NZFE file)");
    a->add_option("--reference-features", reference_features, "external features for the reference");
    a->add_option("--limit", an.limit, "use only the first N images of each dataset");
    a->add_option("--bins", an.bins, "histogram bins")->check(CLI::PositiveNumber);
    a->add_option("--pr-samples", an.pr_samples, "points per set for precision/recall");
    a->add_option("--k", an.pr_k, "neighbours for precision/recall")->check(CLI::PositiveNumber);
    a->add_option("--seed", an.seed, "seed for crop draws");
    a->add_option("--workers", an.workers, "worker threads")->check(CLI::PositiveNumber);
    a->add_option("--report", report, "write the report here instead of stdout");

    GenFlags pv;
    int grid = 96;
    CLI::App* p = app.add_subcommand("preview", "tile fresh samples into a PNG grid");
    p->add_option("--model", pv.model, "generator model name");
    p->add_option("--grid", grid, "number of samples")->check(CLI::PositiveNumber);
    p->add_option("--size", pv.size, "sample side in pixels")->check(CLI::PositiveNumber);
    p->add_option("--seed", pv.seed, "root seed");
    p->add_option("--out", pv.out, "output PNG")->required();
    p->add_option("--workers", pv.workers, "worker threads")->check(CLI::PositiveNumber);
    p->add_option("--config", pv.config, "JSON config as for generate");

    std::string regen_dir, regen_out;
    int regen_workers = 0;
    CLI::App* r = app.add_subcommand("regenerate", "rebuild shards from a manifest and check their checksums");
    r->add_option("--dataset", regen_dir, "directory holding manifest.json")->required();
    r->add_option("--out", regen_out, "write here instead of in place");
    r->add_option("--workers", regen_workers, "worker threads")->check(CLI::PositiveNumber);

    std::string verify_dir;
    CLI::App* v = app.add_subcommand("verify", "check shard headers and checksums against the manifest");
    v->add_option("--dataset", verify_dir, "dataset directory")->required();

    std::string dump_dir, dump_png;
    std::uint64_t dump_index = 0;
    CLI::App* d = app.add_subcommand("dump", "print manifest and shard headers, or export one image");
    d->add_option("--dataset", dump_dir, "dataset directory")->required();
    d->add_option("--index", dump_index, "image index to export");
    d->add_option("--png", dump_png, "export image --index as PNG");

    CLI::App* l = app.add_subcommand("models", "list generator models and their default parameters");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*g) return cmd_generate(*g, gen);

        if (*a) {
            an.metrics = split_list(stats_list);
            an.dataset = dataset;
            if (!reference.empty()) an.reference = reference;
            if (!features.empty()) an.features = features;
            if (!reference_features.empty()) an.reference_features = reference_features;
            validate(an);
            emit(analyze(an), report);
            return kExitOk;
        }

        if (*p) {
            RunConfig rc;
            const GeneratorSpec spec = effective_spec(*p, pv, rc);
            const Generator gen_p(spec, rc.seed);
            std::vector<Image> imgs(static_cast<std::size_t>(grid));
            parallel_for(imgs.size(), resolve_workers(pv.workers), [&](std::size_t i) { imgs[i] = gen_p.generate(i); });
            write_png(pv.out, tile_grid(imgs, grid_columns(grid)));
            return kExitOk;
        }

        if (*r) {
            const DatasetManifest m = read_manifest(fs::path(regen_dir) / "manifest.json");
            const fs::path out = regen_out.empty() ? fs::path(regen_dir) : fs::path(regen_out);
            const DatasetManifest again = regenerate_dataset(m, out, regen_workers);
            int bad = 0;
            for (std::size_t k = 0; k < m.shards.size(); ++k)
                if (again.shards[k].checksum != m.shards[k].checksum) {
                    std::cerr << m.shards[k].filename << ": checksum " << again.shards[k].checksum << ", manifest says "
                              << m.shards[k].checksum << "\n";
                    ++bad;
                }
            emit({{"shards", m.shards.size()}, {"mismatched", bad}}, "");
            return bad ? kExitFailure : kExitOk;
        }

        if (*v) {
            const VerifyResult res = verify_dataset(verify_dir);
            for (const std::string& s : res.problems) std::cerr << s << "\n";
            emit({{"ok", res.ok}, {"problems", res.problems}}, "");
            return res.ok ? kExitOk : kExitFailure;
        }

        if (*d) {
            const fs::path dir = dump_dir;
            const DatasetManifest m = read_manifest(dir / "manifest.json");
            if (!dump_png.empty()) {
                if (dump_index >= m.count) throw ParameterError("--index out of range");
                const ShardInfo& s = m.shards[dump_index / m.shard_size];
                write_png(dump_png, read_shard_range(dir / s.filename, static_cast<std::uint32_t>(dump_index - s.first_index), 1)[0]);
                return kExitOk;
            }
            Json headers = Json::array();
            for (const ShardInfo& s : m.shards) {
                const ShardHeader h = read_shard_header(dir / s.filename);
                headers.push_back({{"filename", s.filename},
                                   {"version", h.version},
                                   {"count", h.count},
                                   {"height", h.height},
                                   {"width", h.width},
                                   {"channels", h.channels},
                                   {"dtype", h.dtype}});
            }
            emit({{"manifest", to_json(m)}, {"headers", headers}}, "");
            return kExitOk;
        }

        if (*l) {
            Json all = Json::object();
            for (const std::string& name : model_names()) all[name] = to_json(make_generator_spec(name));
            emit(all, "");
            return kExitOk;
        }
    } catch (const ParameterError& e) {
        std::cerr << "noisegen: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "noisegen: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}

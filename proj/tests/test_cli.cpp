#include <unistd.h>
#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "doctest.h"
#include "noisegen/dataset.hpp"
#include "noisegen/embedding.hpp"
#include "noisegen/png_io.hpp"

using namespace noisegen;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(NOISEGEN_CLI) + " " + args + " 2>/dev/null";
    FILE* p = ::popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    Run r;
    char buf[4096];
    for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, n);
    const int status = ::pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

struct TempDir {
    fs::path path;
    TempDir() {
        std::string tmpl = (fs::temp_directory_path() / "noisegen-cli-XXXXXX").string();
        REQUIRE(::mkdtemp(tmpl.data()) != nullptr);
        path = tmpl;
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), {});
}

void write_text(const std::string& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("usage errors exit with 2") {
    TempDir t;
    CHECK(run("").code == 2);
    CHECK(run("frobnicate").code == 2);
    CHECK(run("generate --model nosuch --count 3 --out " + t / "x").code == 2);
    CHECK(run("generate --model fractal --count 3 --size -4 --out " + t / "x").code == 2);
    CHECK(run("generate --count 3 --out " + t / "x").code == 2);
    CHECK(run("generate --model fractal --out " + t / "x").code == 2);
    REQUIRE(run("generate --model dead-leaves-squares --count 4 --size 32 --out " + t / "d").code == 0);
    CHECK(run("analyze --stats color-kl --dataset " + t / "d").code == 2);
    CHECK(run("analyze --stats nosuch --dataset " + t / "d").code == 2);
    write_text(t / "bad.json", R"({"model": "fractal", "params": {"pointz": 5}})");
    CHECK(run("generate --config " + t / "bad.json" + " --count 2 --out " + t / "y").code == 2);
    CHECK(run("--help").code == 0);
}

TEST_CASE("runtime failures exit with 1") {
    TempDir t;
    CHECK(run("verify --dataset " + t / "missing").code == 1);
    REQUIRE(run("generate --model dead-leaves-squares --count 6 --size 32 --shard-size 4 --out " + t / "d").code == 0);
    std::string shard = slurp(t / "d/shard-00001.noiz");
    shard[30] ^= 0x55;
    write_text(t / "d/shard-00001.noiz", shard);
    const Run v = run("verify --dataset " + t / "d");
    CHECK(v.code == 1);
    CHECK(v.out.find("shard-00001.noiz") != std::string::npos);
    // regeneration repairs it
    CHECK(run("regenerate --dataset " + t / "d").code == 0);
    CHECK(run("verify --dataset " + t / "d").code == 0);
}

TEST_CASE("generate is reproducible and shards like the library") {
    TempDir t;
    const std::string args = "generate --model stylenet-oriented --count 8 --size 256 --seed 1 --out ";
    REQUIRE(run(args + t / "a").code == 0);
    REQUIRE(run(args + t / "b" + " --workers 3").code == 0);
    const DatasetManifest a = read_manifest(t / "a/manifest.json"), b = read_manifest(t / "b/manifest.json");
    REQUIRE(a.shards.size() == 1);
    CHECK(a.shards[0].checksum == b.shards[0].checksum);
    CHECK(slurp(t / "a/manifest.json") == slurp(t / "b/manifest.json"));
    CHECK(a.generator.resolution == 256);

    REQUIRE(run("generate --model dead-leaves-shapes --count 10 --size 32 --shard-size 4 --seed 7 --out " + t / "c").code == 0);
    const DatasetManifest c = read_manifest(t / "c/manifest.json");
    REQUIRE(c.shards.size() == 3);
    CHECK(c.shards[2].count == 2);
    CHECK(c.root_seed == 7);
}

TEST_CASE("config files overlay, flags win, the manifest replays") {
    TempDir t;
    write_text(t / "cfg.json",
               R"({"model": "spectrum", "resolution": 64, "params": {"slope_a": 1.5, "slope_b": 1.5}, "count": 5, "seed": 3})");
    REQUIRE(run("generate --config " + t / "cfg.json" + " --out " + t / "a").code == 0);
    const DatasetManifest a = read_manifest(t / "a/manifest.json");
    CHECK(a.count == 5);
    CHECK(a.root_seed == 3);
    CHECK(*std::get<StatisticalSpec>(a.generator.params).slope_a == 1.5);

    REQUIRE(run("generate --config " + t / "cfg.json" + " --seed 4 --count 6 --out " + t / "b").code == 0);
    const DatasetManifest b = read_manifest(t / "b/manifest.json");
    CHECK(b.count == 6);
    CHECK(b.root_seed == 4);
    CHECK(b.resolution == 64);

    // the manifest is itself a complete config
    REQUIRE(run("generate --config " + t / "a/manifest.json" + " --out " + t / "c").code == 0);
    CHECK(slurp(t / "a/manifest.json") == slurp(t / "c/manifest.json"));
    CHECK(slurp(t / "a/shard-00000.noiz") == slurp(t / "c/shard-00000.noiz"));
}

TEST_CASE("analyze reports") {
    TempDir t;
    write_text(t / "cfg.json", R"({"model": "spectrum", "params": {"slope_a": 1.5, "slope_b": 1.5}})");
    REQUIRE(run("generate --config " + t / "cfg.json" + " --count 24 --size 128 --seed 2 --out " + t / "s").code == 0);
    const Run r = run("analyze --stats alpha,frechet,volume,variation,pr,color-kl --k 3 --dataset " + t / "s" +
                      " --reference " + t / "s");
    REQUIRE(r.code == 0);
    const Json j = Json::parse(r.out);
    CHECK(j.at("metrics").at("alpha").at("mean").get<double>() == doctest::Approx(1.5).epsilon(0.2 / 1.5));
    CHECK(std::abs(j.at("metrics").at("frechet").at("value").get<double>()) <= 1e-6);
    CHECK(std::abs(j.at("metrics").at("color-kl").at("value").get<double>()) <= 1e-6);
    CHECK(j.at("metrics").at("pr").at("precision") == 1.0);
    CHECK(j.at("metrics").at("pr").at("recall") == 1.0);
    CHECK(j.at("metrics").at("alpha").at("samples") == 24);
    CHECK(j.at("metrics").at("variation").at("provider") == "builtin-aligned-bands-v1");
    CHECK(j.at("metrics").at("alpha").at("histogram").at("counts").size() == 32);

    REQUIRE(run("analyze --stats alpha --dataset " + t / "s" + " --report " + t / "r.json").code == 0);
    CHECK(Json::parse(slurp(t / "r.json")).at("metrics").contains("alpha"));
}

TEST_CASE("external features feed the dataset metrics") {
    TempDir t;
    REQUIRE(run("generate --model wmm --count 4 --size 32 --out " + t / "d").code == 0);
    write_features(t / "f.nzfe", Eigen::MatrixXd::Identity(20, 4) + Eigen::MatrixXd::Constant(20, 4, 0.5));
    const Run r = run("analyze --stats volume,frechet --dataset " + t / "d" + " --reference " + t / "d" +
                      " --features " + t / "f.nzfe" + " --reference-features " + t / "f.nzfe");
    REQUIRE(r.code == 0);
    const Json j = Json::parse(r.out);
    CHECK(j.at("metrics").at("volume").at("samples") == 20);
    CHECK(j.at("metrics").at("frechet").at("value").get<double>() <= 1e-9);
    CHECK(run("analyze --stats frechet --dataset " + t / "d" + " --reference " + t / "d" + " --features " + t / "f.nzfe")
              .code == 2);
}

TEST_CASE("preview grids") {
    TempDir t;
    REQUIRE(run("preview --model dead-leaves-squares --grid 96 --size 16 --seed 5 --out " + t / "g.png").code == 0);
    const Image g = read_png(t / "g.png");
    CHECK(g.width == 12 * 16);
    CHECK(g.height == 8 * 16);
    REQUIRE(run("preview --model dead-leaves-squares --grid 96 --size 16 --seed 5 --out " + t / "h.png").code == 0);
    CHECK(slurp(t / "g.png") == slurp(t / "h.png"));
    REQUIRE(run("preview --model fractal --grid 1 --size 64 --seed 5 --out " + t / "one.png").code == 0);
    const Image one = read_png(t / "one.png");
    CHECK(one.width == 64);
    CHECK(one.height == 64);
}

TEST_CASE("dump exports a stored image") {
    TempDir t;
    REQUIRE(run("generate --model spectrum-color --count 5 --size 32 --shard-size 2 --out " + t / "d").code == 0);
    REQUIRE(run("dump --dataset " + t / "d" + " --index 3 --png " + t / "i.png").code == 0);
    const Image png = read_png(t / "i.png");
    const Image stored = read_dataset(t / "d")[3];
    REQUIRE(png.data.size() == stored.data.size());
    for (std::size_t i = 0; i < png.data.size(); ++i) REQUIRE(quantize(png.data[i]) == quantize(stored.data[i]));
    const Run r = run("dump --dataset " + t / "d");
    REQUIRE(r.code == 0);
    CHECK(Json::parse(r.out).at("headers").size() == 3);
}

#include <unistd.h>

#include <cstdlib>
#include <fstream>

#include "doctest.h"
#include "noisegen/dataset.hpp"
#include "noisegen/png_io.hpp"

using namespace noisegen;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::string tmpl = (fs::temp_directory_path() / "noisegen-XXXXXX").string();
        REQUIRE(::mkdtemp(tmpl.data()) != nullptr);
        path = tmpl;
    }
    ~TempDir() { fs::remove_all(path); }
};

std::vector<std::uint8_t> bytes_of(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(f), {});
}

void put_bytes(const fs::path& p, const std::vector<std::uint8_t>& b) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

GeneratorSpec quick_spec(const std::string& model = "dead-leaves-squares", int size = 32) {
    GeneratorSpec g = make_generator_spec(model, size);
    if (auto* s = std::get_if<StatisticalSpec>(&g.params)) {
        s->iterations = 2;
        s->wmm_iterations = 2;
        s->wmm_target_samples = 2000;
    }
    return g;
}

std::string field_of_error(const fs::path& p) {
    try {
        read_shard(p);
    } catch (const FormatError& e) {
        return e.field;
    }
    return "";
}

}  // namespace

TEST_CASE("header layout is little-endian and fixed") {
    ShardHeader h;
    h.count = 0x01020304;
    h.height = 0x0506;
    h.width = 0x0708;
    const auto b = encode_header(h);
    const std::array<std::uint8_t, kShardHeaderSize> want = {'N', 'O', 'I', 'Z', 1, 0, 0, 0, 4, 3, 2, 1,
                                                              6,   5,   8,   7,   3, 0, 0, 0};
    CHECK(b == want);
    const ShardHeader back = decode_header(b);
    CHECK(back.count == h.count);
    CHECK(back.height == h.height);
    CHECK(back.width == h.width);
}

TEST_CASE("write then read is an exact inverse of quantization") {
    TempDir dir;
    std::vector<Image> imgs;
    Rng rng(SeedTree(3));
    for (int k = 0; k < 3; ++k) {
        Image im(7, 5);
        for (float& v : im.data) v = static_cast<float>(rng.uniform(-0.1, 1.1));
        imgs.push_back(im);
    }
    imgs[0].data[0] = 0.5f / 255;  // rounds half away from zero
    const fs::path p = dir.path / "a.noiz";
    write_shard(p, imgs);
    CHECK(fs::file_size(p) == kShardHeaderSize + 3 * 7 * 5 * 3);
    const std::vector<Image> back = read_shard(p);
    REQUIRE(back.size() == 3);
    for (int k = 0; k < 3; ++k) {
        REQUIRE(back[k].width == 7);
        REQUIRE(back[k].height == 5);
        for (std::size_t i = 0; i < imgs[k].data.size(); ++i) REQUIRE(quantize(back[k].data[i]) == quantize(imgs[k].data[i]));
    }
    CHECK(quantize(imgs[0].data[0]) == 1);
    const auto raw = read_shard_image_bytes(p, 1);
    for (std::size_t i = 0; i < raw.size(); ++i) REQUIRE(raw[i] == quantize(imgs[1].data[i]));
}

TEST_CASE("malformed shards name the failing field") {
    TempDir dir;
    const fs::path p = dir.path / "s.noiz";
    write_shard(p, {Image(4, 4), Image(4, 4)});
    const std::vector<std::uint8_t> good = bytes_of(p);

    auto mutated = [&](std::size_t offset, std::uint8_t value) {
        std::vector<std::uint8_t> b = good;
        b[offset] = value;
        put_bytes(p, b);
        return field_of_error(p);
    };
    CHECK(mutated(0, 'X') == "magic");
    CHECK(mutated(4, 2) == "version");
    CHECK(mutated(8, 3) == "length");
    CHECK(mutated(12, 0) == "height");
    CHECK(mutated(14, 0) == "width");
    CHECK(mutated(16, 4) == "channels");
    CHECK(mutated(17, 1) == "dtype");
    CHECK(mutated(18, 1) == "reserved");
    CHECK(mutated(19, 1) == "reserved");

    std::vector<std::uint8_t> xxxx = good;
    std::copy_n("XXXX", 4, xxxx.begin());
    put_bytes(p, xxxx);
    CHECK(field_of_error(p) == "magic");

    for (std::size_t len : {std::size_t(0), std::size_t(9), kShardHeaderSize, good.size() - 1}) {
        CAPTURE(len);
        put_bytes(p, std::vector<std::uint8_t>(good.begin(), good.begin() + static_cast<std::ptrdiff_t>(len)));
        CHECK(field_of_error(p) == "length");
    }
    std::vector<std::uint8_t> longer = good;
    longer.push_back(0);
    put_bytes(p, longer);
    CHECK(field_of_error(p) == "length");
}

TEST_CASE("shard arithmetic") {
    CHECK(shard_counts(10, 4) == std::vector<std::uint64_t>{4, 4, 2});
    CHECK(shard_counts(8, 4) == std::vector<std::uint64_t>{4, 4});
    CHECK(shard_counts(3, 4096) == std::vector<std::uint64_t>{3});
    CHECK(shard_counts(105000, 4096).size() == 26);
    CHECK(shard_counts(105000, 4096).back() == 105000 - 25 * 4096);
    CHECK_THROWS_AS(shard_counts(5, 0), ParameterError);
    CHECK(shard_filename(3) == "shard-00003.noiz");
}

TEST_CASE("write_shards lays images out by index") {
    TempDir dir;
    const GeneratorSpec spec = quick_spec();
    WriteOptions o;
    o.shard_size = 4;
    o.workers = 3;
    const DatasetManifest m = write_shards(spec, 10, dir.path, 42, o);
    REQUIRE(m.shards.size() == 3);
    CHECK(m.shards[0].count == 4);
    CHECK(m.shards[1].count == 4);
    CHECK(m.shards[2].count == 2);
    CHECK(m.shards[2].first_index == 8);
    CHECK(m.shards[0].checksum.size() == 16);

    const Generator g(spec, 42);
    const std::vector<Image> all = read_dataset(dir.path);
    REQUIRE(all.size() == 10);
    for (std::uint64_t i = 0; i < 10; ++i) {
        const Image want = g.generate(i);
        for (std::size_t q = 0; q < want.data.size(); ++q) REQUIRE(quantize(all[i].data[q]) == quantize(want.data[q]));
    }
    CHECK(read_dataset(dir.path, 5).size() == 5);
    CHECK(verify_dataset(dir.path).ok);
}

TEST_CASE("manifest is canonical and round-trips") {
    TempDir dir;
    GeneratorSpec spec = quick_spec("spectrum", 32);
    apply_overlay(spec, Json::parse(R"({"params": {"slope_a": 1.25, "slope_b": 2.0}})"));
    WriteOptions o;
    o.shard_size = 3;
    const DatasetManifest m = write_shards(spec, 7, dir.path, 0xfedcba9876543210ULL, o);
    const DatasetManifest back = read_manifest(dir.path / "manifest.json");
    CHECK(to_json(back) == to_json(m));
    CHECK(back.root_seed == 0xfedcba9876543210ULL);
    const std::string text = canonical_dump(to_json(m));
    CHECK(text == canonical_dump(to_json(back)));
    const auto disk = bytes_of(dir.path / "manifest.json");
    CHECK(std::string(disk.begin(), disk.end()) == text);
    // keys come out sorted
    CHECK(text.find("\"count\"") < text.find("\"format_version\""));
    CHECK(text.find("\"format_version\"") < text.find("\"generator\""));

    Json bad = to_json(m);
    bad["format_version"] = 2;
    CHECK_THROWS_WITH_AS(manifest_from_json(bad), doctest::Contains("format_version"), FormatError);
    bad = to_json(m);
    bad["count"] = 8;
    CHECK_THROWS_AS(manifest_from_json(bad), FormatError);
    bad = to_json(m);
    bad["shards"][0]["filename"] = "../x";
    CHECK_THROWS_AS(manifest_from_json(bad), FormatError);
    bad = to_json(m);
    bad.erase("root_seed");
    CHECK_THROWS_WITH_AS(manifest_from_json(bad), doctest::Contains("root_seed"), FormatError);
}

TEST_CASE("output bytes do not depend on worker count") {
    for (const std::string& model : {"dead-leaves-textured", "wmm", "stylenet-highfreq", "fractal"}) {
        CAPTURE(model);
        TempDir a, b;
        const GeneratorSpec spec = quick_spec(model, 32);
        WriteOptions o;
        o.shard_size = 5;
        o.workers = 1;
        const DatasetManifest m1 = write_shards(spec, 12, a.path, 9, o);
        o.workers = 8;
        const DatasetManifest m8 = write_shards(spec, 12, b.path, 9, o);
        CHECK(canonical_dump(to_json(m1)) == canonical_dump(to_json(m8)));
        for (const ShardInfo& s : m1.shards) CHECK(bytes_of(a.path / s.filename) == bytes_of(b.path / s.filename));
        CHECK(bytes_of(a.path / "manifest.json") == bytes_of(b.path / "manifest.json"));
    }
}

TEST_CASE("NOISEGEN_WORKERS does not change output") {
    TempDir a, b;
    const GeneratorSpec spec = quick_spec();
    ::setenv("NOISEGEN_WORKERS", "1", 1);
    const DatasetManifest m1 = write_shards(spec, 9, a.path, 2, {4, 0, {}});
    ::setenv("NOISEGEN_WORKERS", "6", 1);
    const DatasetManifest m6 = write_shards(spec, 9, b.path, 2, {4, 0, {}});
    ::unsetenv("NOISEGEN_WORKERS");
    CHECK(to_json(m1) == to_json(m6));
}

TEST_CASE("regenerating from the manifest restores deleted shards") {
    TempDir dir;
    WriteOptions o;
    o.shard_size = 4;
    std::uint64_t last = 0;
    o.progress = [&](std::uint64_t done, std::uint64_t total) {
        CHECK(total == 10);
        last = done;
    };
    const DatasetManifest m = write_shards(quick_spec("dead-leaves-oriented"), 10, dir.path, 77, o);
    CHECK(last == 10);
    const auto before = bytes_of(dir.path / m.shards[1].filename);
    for (const ShardInfo& s : m.shards) fs::remove(dir.path / s.filename);
    CHECK_FALSE(verify_dataset(dir.path).ok);

    const DatasetManifest again = regenerate_dataset(read_manifest(dir.path / "manifest.json"), dir.path, 2);
    CHECK(to_json(again) == to_json(m));
    CHECK(bytes_of(dir.path / m.shards[1].filename) == before);
    CHECK(verify_dataset(dir.path).ok);
}

TEST_CASE("verify flags the corrupted shard") {
    TempDir dir;
    WriteOptions o;
    o.shard_size = 4;
    const DatasetManifest m = write_shards(quick_spec(), 10, dir.path, 1, o);
    std::vector<std::uint8_t> b = bytes_of(dir.path / m.shards[1].filename);
    b[kShardHeaderSize + 5] ^= 1;
    put_bytes(dir.path / m.shards[1].filename, b);
    const VerifyResult r = verify_dataset(dir.path);
    CHECK_FALSE(r.ok);
    REQUIRE(r.problems.size() == 1);
    CHECK(r.problems[0].find(m.shards[1].filename) != std::string::npos);
    CHECK(r.problems[0].find("checksum") != std::string::npos);

    b.pop_back();
    put_bytes(dir.path / m.shards[1].filename, b);
    const VerifyResult t = verify_dataset(dir.path);
    REQUIRE(t.problems.size() == 1);
    CHECK(t.problems[0].find("length") != std::string::npos);
}

TEST_CASE("bad write requests fail before any file is created") {
    TempDir dir;
    CHECK_THROWS_AS(write_shards(quick_spec(), 0, dir.path / "a", 1), ParameterError);
    CHECK_THROWS_AS(write_shards(quick_spec(), 4, dir.path / "b", 1, {0, 1, {}}), ParameterError);
    CHECK_FALSE(fs::exists(dir.path / "a"));
    CHECK_FALSE(fs::exists(dir.path / "b"));
}

TEST_CASE("streaming matches the materialized prefix") {
    TempDir dir;
    const GeneratorSpec spec = quick_spec("dead-leaves-shapes", 32);
    WriteOptions o;
    o.shard_size = 32;
    write_shards(spec, 100, dir.path, 5, o);
    const std::vector<Image> disk = read_dataset(dir.path);
    SampleStream s1(spec, 5), s2(spec, 5);
    for (int i = 0; i < 100; ++i) {
        const Image a = s1.next();
        REQUIRE(a.data == s2.next().data);
        for (std::size_t q = 0; q < a.data.size(); ++q) REQUIRE(quantize(disk[i].data[q]) == quantize(a.data[q]));
    }
    CHECK(s1.position() == 100);
    s2.seek(17);
    CHECK(s2.next().data == Generator(spec, 5).generate(17).data);
}

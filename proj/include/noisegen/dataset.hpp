#pragma once
#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "noisegen/generator.hpp"
#include "noisegen/image.hpp"

namespace noisegen {

namespace fs = std::filesystem;

inline constexpr std::array<char, 4> kShardMagic = {'N', 'O', 'I', 'Z'};
inline constexpr std::uint32_t kShardVersion = 1;
// magic 4, version 4, count 4, height 2, width 2, channels 1, dtype 1, reserved 2
inline constexpr std::size_t kShardHeaderSize = 20;
inline constexpr int kManifestVersion = 1;
inline constexpr std::uint64_t kDefaultShardSize = 4096;

struct ShardHeader {
    std::uint32_t version = kShardVersion;
    std::uint32_t count = 0;
    std::uint16_t height = 0;
    std::uint16_t width = 0;
    std::uint8_t channels = 3;
    std::uint8_t dtype = 0;

    std::size_t image_bytes() const { return static_cast<std::size_t>(height) * width * channels; }
    std::uint64_t file_size() const { return kShardHeaderSize + std::uint64_t(count) * image_bytes(); }
};

// Malformed shard; `field` names the offending header field or "length".
struct FormatError : std::runtime_error {
    FormatError(std::string field, const std::string& what);
    std::string field;
};

std::array<std::uint8_t, kShardHeaderSize> encode_header(const ShardHeader& h);
// Validates magic, version, channels, dtype, reserved bytes and, if
// file_size is given, the total length.
ShardHeader decode_header(std::span<const std::uint8_t> bytes, std::int64_t file_size = -1);

// round(255 v) per channel, row-major RGB
void quantize_into(const Image& img, std::uint8_t* dst);
Image dequantize(const std::uint8_t* src, int width, int height);

void write_shard(const fs::path& path, const std::vector<Image>& images);
std::vector<Image> read_shard(const fs::path& path);
// Images first .. first+count-1 of one shard.
std::vector<Image> read_shard_range(const fs::path& path, std::uint32_t first, std::uint32_t count);
ShardHeader read_shard_header(const fs::path& path);
// Raw payload bytes of image k (no dequantization).
std::vector<std::uint8_t> read_shard_image_bytes(const fs::path& path, std::uint32_t k);

// FNV-1a 64 over the whole file, as 16 lowercase hex digits.
std::string file_checksum(const fs::path& path);

struct ShardInfo {
    std::string filename;
    std::uint64_t first_index = 0;
    std::uint64_t count = 0;
    std::string checksum;
};

struct DatasetManifest {
    int format_version = kManifestVersion;
    std::uint64_t root_seed = 0;
    GeneratorSpec generator;
    std::uint64_t count = 0;
    int resolution = 0;
    std::uint64_t shard_size = kDefaultShardSize;
    std::vector<ShardInfo> shards;
};

Json to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const Json& j);
// Canonical text: sorted keys, two-space indent, trailing newline.
std::string canonical_dump(const Json& j);
void write_manifest(const fs::path& path, const DatasetManifest& m);
DatasetManifest read_manifest(const fs::path& path);

std::string shard_filename(std::size_t k);
// Shard sizes for a dataset of `count` images.
std::vector<std::uint64_t> shard_counts(std::uint64_t count, std::uint64_t shard_size);

struct WriteOptions {
    std::uint64_t shard_size = kDefaultShardSize;
    int workers = 0;  // 0: NOISEGEN_WORKERS or hardware threads
    std::function<void(std::uint64_t done, std::uint64_t total)> progress;
};

// Generates images 0..count-1 straight into preallocated shard files and
// writes manifest.json. Output bytes do not depend on the worker count.
DatasetManifest write_shards(const GeneratorSpec& spec, std::uint64_t count, const fs::path& out_dir,
                             std::uint64_t root_seed, const WriteOptions& opts = {});

// Rebuilds every shard listed in the manifest into out_dir.
DatasetManifest regenerate_dataset(const DatasetManifest& m, const fs::path& out_dir, int workers = 0);

struct VerifyResult {
    bool ok = true;
    std::vector<std::string> problems;  // one line per bad shard
};
VerifyResult verify_dataset(const fs::path& dir);

// All images of a dataset in index order.
std::vector<Image> read_dataset(const fs::path& dir, std::uint64_t limit = UINT64_MAX);

// Unbounded sample source sharing the materialized datasets' derivation.
class SampleStream {
public:
    SampleStream(GeneratorSpec spec, std::uint64_t root_seed) : gen_(std::move(spec), root_seed) {}

    Image next() { return gen_.generate(pos_++); }
    std::uint64_t position() const { return pos_; }
    void seek(std::uint64_t i) { pos_ = i; }
    const Generator& generator() const { return gen_; }

private:
    Generator gen_;
    std::uint64_t pos_ = 0;
};

}  // namespace noisegen

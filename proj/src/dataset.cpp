#include "noisegen/dataset.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>

#include "noisegen/parallel.hpp"
#include "noisegen/png_io.hpp"

namespace noisegen {

namespace {

void put_u16(std::uint8_t* p, std::uint16_t v) {
    p[0] = static_cast<std::uint8_t>(v);
    p[1] = static_cast<std::uint8_t>(v >> 8);
}
void put_u32(std::uint8_t* p, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}
std::uint16_t get_u16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }
std::uint32_t get_u32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(p[i]) << (8 * i);
    return v;
}

[[noreturn]] void io_fail(const std::string& what, const fs::path& p) {
    throw std::runtime_error(what + " '" + p.string() + "': " + std::strerror(errno));
}

// Owns a POSIX descriptor; pwrite lets workers fill disjoint ranges of one
// file without sharing a seek position.
struct Fd {
    int fd = -1;
    Fd() = default;
    Fd(const fs::path& p, int flags) : fd(::open(p.c_str(), flags, 0644)) {
        if (fd < 0) io_fail("cannot open", p);
    }
    Fd(Fd&& o) noexcept : fd(o.fd) { o.fd = -1; }
    Fd& operator=(Fd&& o) noexcept {
        std::swap(fd, o.fd);
        return *this;
    }
    ~Fd() {
        if (fd >= 0) ::close(fd);
    }
};

void pwrite_all(int fd, const std::uint8_t* buf, std::size_t n, std::uint64_t off, const fs::path& p) {
    while (n > 0) {
        const ssize_t w = ::pwrite(fd, buf, n, static_cast<off_t>(off));
        if (w < 0) {
            if (errno == EINTR) continue;
            io_fail("write failed for", p);
        }
        buf += w;
        n -= static_cast<std::size_t>(w);
        off += static_cast<std::uint64_t>(w);
    }
}

std::vector<std::uint8_t> slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) io_fail("cannot open", p);
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(f), {});
}

template <typename T>
T field(const Json& j, const char* key) {
    if (!j.contains(key)) throw FormatError(key, std::string("manifest: missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw FormatError(key, std::string("manifest: bad field '") + key + "': " + e.what());
    }
}

}  // namespace

FormatError::FormatError(std::string f, const std::string& what) : std::runtime_error(what), field(std::move(f)) {}

std::array<std::uint8_t, kShardHeaderSize> encode_header(const ShardHeader& h) {
    std::array<std::uint8_t, kShardHeaderSize> b{};
    std::memcpy(b.data(), kShardMagic.data(), 4);
    put_u32(b.data() + 4, h.version);
    put_u32(b.data() + 8, h.count);
    put_u16(b.data() + 12, h.height);
    put_u16(b.data() + 14, h.width);
    b[16] = h.channels;
    b[17] = h.dtype;
    return b;
}

ShardHeader decode_header(std::span<const std::uint8_t> b, std::int64_t file_size) {
    if (b.size() < kShardHeaderSize)
        throw FormatError("length", "shard: file is " + std::to_string(b.size()) + " bytes, shorter than the " +
                                        std::to_string(kShardHeaderSize) + "-byte header");
    if (std::memcmp(b.data(), kShardMagic.data(), 4) != 0) throw FormatError("magic", "shard: bad magic, expected NOIZ");
    ShardHeader h;
    h.version = get_u32(b.data() + 4);
    if (h.version != kShardVersion)
        throw FormatError("version", "shard: unsupported version " + std::to_string(h.version));
    h.count = get_u32(b.data() + 8);
    h.height = get_u16(b.data() + 12);
    h.width = get_u16(b.data() + 14);
    if (h.height == 0) throw FormatError("height", "shard: height is 0");
    if (h.width == 0) throw FormatError("width", "shard: width is 0");
    h.channels = b[16];
    if (h.channels != 3) throw FormatError("channels", "shard: channels must be 3, got " + std::to_string(h.channels));
    h.dtype = b[17];
    if (h.dtype != 0) throw FormatError("dtype", "shard: dtype must be 0 (u8), got " + std::to_string(h.dtype));
    if (b[18] != 0 || b[19] != 0) throw FormatError("reserved", "shard: reserved bytes must be zero");
    if (file_size >= 0 && static_cast<std::uint64_t>(file_size) != h.file_size())
        throw FormatError("length", "shard: file is " + std::to_string(file_size) + " bytes, header implies " +
                                        std::to_string(h.file_size()));
    return h;
}

void quantize_into(const Image& img, std::uint8_t* dst) {
    for (std::size_t i = 0; i < img.data.size(); ++i) dst[i] = quantize(img.data[i]);
}

Image dequantize(const std::uint8_t* src, int width, int height) {
    Image img(width, height);
    for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = static_cast<float>(src[i] / 255.0);
    return img;
}

namespace {

ShardHeader header_for(int width, int height, std::size_t count) {
    if (width < 1 || height < 1 || width > 65535 || height > 65535)
        throw ParameterError("shard: image size must fit in 16 bits");
    if (count > UINT32_MAX) throw ParameterError("shard: too many images for one shard");
    ShardHeader h;
    h.count = static_cast<std::uint32_t>(count);
    h.width = static_cast<std::uint16_t>(width);
    h.height = static_cast<std::uint16_t>(height);
    return h;
}

// Creates the file at its final length with the header in place.
Fd create_shard(const fs::path& path, const ShardHeader& h) {
    Fd f(path, O_WRONLY | O_CREAT | O_TRUNC);
    if (::ftruncate(f.fd, static_cast<off_t>(h.file_size())) != 0) io_fail("cannot size", path);
    const auto hb = encode_header(h);
    pwrite_all(f.fd, hb.data(), hb.size(), 0, path);
    return f;
}

}  // namespace

void write_shard(const fs::path& path, const std::vector<Image>& images) {
    if (images.empty()) throw ParameterError("write_shard: no images");
    const ShardHeader h = header_for(images[0].width, images[0].height, images.size());
    Fd f = create_shard(path, h);
    std::vector<std::uint8_t> buf(h.image_bytes());
    for (std::size_t k = 0; k < images.size(); ++k) {
        if (images[k].width != h.width || images[k].height != h.height)
            throw ParameterError("write_shard: image " + std::to_string(k) + " has a different size");
        quantize_into(images[k], buf.data());
        pwrite_all(f.fd, buf.data(), buf.size(), kShardHeaderSize + k * h.image_bytes(), path);
    }
}

std::vector<Image> read_shard(const fs::path& path) {
    const std::vector<std::uint8_t> bytes = slurp(path);
    const ShardHeader h = decode_header(bytes, static_cast<std::int64_t>(bytes.size()));
    std::vector<Image> out;
    out.reserve(h.count);
    for (std::uint32_t k = 0; k < h.count; ++k)
        out.push_back(dequantize(bytes.data() + kShardHeaderSize + k * h.image_bytes(), h.width, h.height));
    return out;
}

ShardHeader read_shard_header(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) io_fail("cannot open", path);
    std::array<std::uint8_t, kShardHeaderSize> b{};
    f.read(reinterpret_cast<char*>(b.data()), b.size());
    const auto got = static_cast<std::size_t>(f.gcount());
    return decode_header(std::span<const std::uint8_t>(b.data(), got), static_cast<std::int64_t>(fs::file_size(path)));
}

std::vector<Image> read_shard_range(const fs::path& path, std::uint32_t first, std::uint32_t count) {
    const ShardHeader h = read_shard_header(path);
    if (std::uint64_t(first) + count > h.count) throw ParameterError("shard: image range out of bounds");
    std::ifstream f(path, std::ios::binary);
    f.seekg(static_cast<std::streamoff>(kShardHeaderSize + std::uint64_t(first) * h.image_bytes()));
    std::vector<std::uint8_t> buf(std::size_t(count) * h.image_bytes());
    f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(f.gcount()) != buf.size()) throw FormatError("length", "shard: short read");
    std::vector<Image> out;
    out.reserve(count);
    for (std::uint32_t k = 0; k < count; ++k) out.push_back(dequantize(buf.data() + k * h.image_bytes(), h.width, h.height));
    return out;
}

std::vector<std::uint8_t> read_shard_image_bytes(const fs::path& path, std::uint32_t k) {
    const ShardHeader h = read_shard_header(path);
    if (k >= h.count) throw ParameterError("shard: image " + std::to_string(k) + " out of range");
    std::ifstream f(path, std::ios::binary);
    f.seekg(static_cast<std::streamoff>(kShardHeaderSize + std::uint64_t(k) * h.image_bytes()));
    std::vector<std::uint8_t> out(h.image_bytes());
    f.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(out.size()));
    return out;
}

std::string file_checksum(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) io_fail("cannot open", path);
    std::vector<char> buf(1 << 20);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    while (f) {
        f.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        h = fnv1a64(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(buf.data()),
                                                 static_cast<std::size_t>(f.gcount())),
                    h);
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

Json to_json(const DatasetManifest& m) {
    Json shards = Json::array();
    for (const ShardInfo& s : m.shards)
        shards.push_back({{"filename", s.filename}, {"first_index", s.first_index}, {"count", s.count}, {"checksum", s.checksum}});
    return {{"format_version", m.format_version}, {"root_seed", m.root_seed}, {"generator", to_json(m.generator)},
            {"count", m.count},   {"resolution", m.resolution}, {"shard_size", m.shard_size},
            {"shards", shards}};
}

DatasetManifest manifest_from_json(const Json& j) {
    if (!j.is_object()) throw FormatError("manifest", "manifest: not a JSON object");
    DatasetManifest m;
    m.format_version = field<int>(j, "format_version");
    if (m.format_version != kManifestVersion)
        throw FormatError("format_version", "manifest: unsupported format_version " + std::to_string(m.format_version));
    m.root_seed = field<std::uint64_t>(j, "root_seed");
    if (!j.contains("generator")) throw FormatError("generator", "manifest: missing field 'generator'");
    m.generator = generator_spec_from_json(j.at("generator"));
    m.count = field<std::uint64_t>(j, "count");
    m.resolution = field<int>(j, "resolution");
    m.shard_size = field<std::uint64_t>(j, "shard_size");
    if (!j.contains("shards") || !j.at("shards").is_array()) throw FormatError("shards", "manifest: missing shard list");
    std::uint64_t total = 0;
    for (const Json& s : j.at("shards")) {
        ShardInfo info{field<std::string>(s, "filename"), field<std::uint64_t>(s, "first_index"),
                       field<std::uint64_t>(s, "count"), field<std::string>(s, "checksum")};
        if (info.filename.find('/') != std::string::npos || info.filename == "..")
            throw FormatError("filename", "manifest: shard filename must be a plain name");
        if (info.first_index != total) throw FormatError("first_index", "manifest: shards are not contiguous");
        total += info.count;
        m.shards.push_back(std::move(info));
    }
    if (total != m.count) throw FormatError("count", "manifest: shard counts sum to " + std::to_string(total) +
                                                         ", expected " + std::to_string(m.count));
    if (m.resolution != m.generator.resolution) throw FormatError("resolution", "manifest: resolution disagrees with generator");
    return m;
}

std::string canonical_dump(const Json& j) { return j.dump(2) + "\n"; }

void write_manifest(const fs::path& path, const DatasetManifest& m) {
    // write then rename so a crash never leaves a half manifest behind
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) io_fail("cannot open", tmp);
        f << canonical_dump(to_json(m));
        if (!f.flush()) io_fail("write failed for", tmp);
    }
    fs::rename(tmp, path);
}

DatasetManifest read_manifest(const fs::path& path) {
    std::ifstream f(path);
    if (!f) io_fail("cannot open", path);
    Json j;
    try {
        j = Json::parse(f);
    } catch (const Json::exception& e) {
        throw FormatError("manifest", "manifest: invalid JSON: " + std::string(e.what()));
    }
    return manifest_from_json(j);
}

std::string shard_filename(std::size_t k) {
    char name[32];
    std::snprintf(name, sizeof name, "shard-%05zu.noiz", k);
    return name;
}

std::vector<std::uint64_t> shard_counts(std::uint64_t count, std::uint64_t shard_size) {
    if (shard_size < 1) throw ParameterError("shard_size must be >= 1");
    std::vector<std::uint64_t> out;
    for (std::uint64_t left = count; left > 0; left -= std::min(left, shard_size)) out.push_back(std::min(left, shard_size));
    return out;
}

DatasetManifest write_shards(const GeneratorSpec& spec, std::uint64_t count, const fs::path& out_dir,
                             std::uint64_t root_seed, const WriteOptions& opts) {
    if (count < 1) throw ParameterError("count must be >= 1");
    if (opts.shard_size < 1 || opts.shard_size > UINT32_MAX) throw ParameterError("shard_size must be in [1, 2^32)");
    const Generator gen(spec, root_seed);
    const int workers = resolve_workers(opts.workers);
    fs::create_directories(out_dir);

    DatasetManifest m;
    m.root_seed = root_seed;
    m.generator = spec;
    m.count = count;
    m.resolution = spec.resolution;
    m.shard_size = opts.shard_size;

    const std::vector<std::uint64_t> counts = shard_counts(count, opts.shard_size);
    std::vector<Fd> files;
    std::vector<ShardHeader> headers;
    std::uint64_t first = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        ShardInfo info{shard_filename(k), first, counts[k], ""};
        headers.push_back(header_for(spec.resolution, spec.resolution, counts[k]));
        files.push_back(create_shard(out_dir / info.filename, headers.back()));
        m.shards.push_back(std::move(info));
        first += counts[k];
    }

    std::atomic<std::uint64_t> done{0};
    std::mutex progress_mu;
    parallel_for(count, workers, [&](std::size_t i) {
        const std::size_t k = i / opts.shard_size, slot = i % opts.shard_size;
        const Image img = gen.generate(i);
        if (img.width != spec.resolution || img.height != spec.resolution)
            throw std::runtime_error("generator returned a " + std::to_string(img.width) + "x" +
                                     std::to_string(img.height) + " image");
        std::vector<std::uint8_t> buf(headers[k].image_bytes());
        quantize_into(img, buf.data());
        pwrite_all(files[k].fd, buf.data(), buf.size(), kShardHeaderSize + slot * buf.size(), out_dir / m.shards[k].filename);
        const std::uint64_t d = ++done;
        if (opts.progress && (d % 256 == 0 || d == count)) {
            std::lock_guard<std::mutex> lock(progress_mu);
            opts.progress(d, count);
        }
    });

    for (std::size_t k = 0; k < files.size(); ++k) {
        if (::close(files[k].fd) != 0) io_fail("close failed for", out_dir / m.shards[k].filename);
        files[k].fd = -1;
    }
    for (ShardInfo& s : m.shards) s.checksum = file_checksum(out_dir / s.filename);
    write_manifest(out_dir / "manifest.json", m);
    return m;
}

DatasetManifest regenerate_dataset(const DatasetManifest& m, const fs::path& out_dir, int workers) {
    WriteOptions o;
    o.shard_size = m.shard_size;
    o.workers = workers;
    return write_shards(m.generator, m.count, out_dir, m.root_seed, o);
}

VerifyResult verify_dataset(const fs::path& dir) {
    VerifyResult r;
    const DatasetManifest m = read_manifest(dir / "manifest.json");
    for (const ShardInfo& s : m.shards) {
        const fs::path p = dir / s.filename;
        auto bad = [&](const std::string& why) {
            r.ok = false;
            r.problems.push_back(s.filename + ": " + why);
        };
        if (!fs::exists(p)) {
            bad("missing");
            continue;
        }
        try {
            const ShardHeader h = read_shard_header(p);
            if (h.count != s.count) bad("header count " + std::to_string(h.count) + ", manifest says " + std::to_string(s.count));
            else if (h.width != m.resolution || h.height != m.resolution) bad("image size disagrees with manifest");
            else if (const std::string c = file_checksum(p); c != s.checksum)
                bad("checksum mismatch (file " + c + ", manifest " + s.checksum + ")");
        } catch (const FormatError& e) {
            bad(e.field + " error: " + e.what());
        }
    }
    return r;
}

std::vector<Image> read_dataset(const fs::path& dir, std::uint64_t limit) {
    const DatasetManifest m = read_manifest(dir / "manifest.json");
    std::vector<Image> out;
    for (const ShardInfo& s : m.shards) {
        if (out.size() >= limit) break;
        std::vector<Image> imgs = read_shard(dir / s.filename);
        if (imgs.size() != s.count) throw FormatError("count", s.filename + ": header count disagrees with manifest");
        for (Image& im : imgs) {
            if (out.size() >= limit) break;
            out.push_back(std::move(im));
        }
    }
    return out;
}

}  // namespace noisegen

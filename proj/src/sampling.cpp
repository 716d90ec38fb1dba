#include "noisegen/sampling.hpp"

#include <cmath>
#include <numbers>

namespace noisegen {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    return mix64(state);
}

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t h) {
    for (std::uint8_t c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

SeedTree::SeedTree(std::uint64_t root) : root_(root), key_(mix64(root ^ 0x6E6F697365676E31ULL)) {}

SeedTree SeedTree::child(std::string_view label, std::uint64_t index) const {
    SeedTree c;
    c.root_ = root_;
    std::uint64_t k = mix64(key_ + 0x9E3779B97F4A7C15ULL);
    k = mix64(k ^ fnv1a64(label));
    k = mix64(k ^ (index * 0xD6E8FEB86659FD93ULL + 0x632BE59BD9B4E019ULL));
    c.key_ = k;
    c.path_.reserve(path_.size() + 1);
    c.path_ = path_;
    c.path_.push_back({std::string(label), index});
    return c;
}

std::string SeedTree::describe() const {
    std::string s = std::to_string(root_);
    for (const auto& step : path_) s += "/" + step.label + "[" + std::to_string(step.index) + "]";
    return s;
}

SeedTree derive_seed(const SeedTree& parent, std::string_view label, std::uint64_t index) {
    return parent.child(label, index);
}

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
constexpr double kInv53 = 1.0 / 9007199254740992.0;
}  // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& s : s_) s = splitmix64(sm);
}

Rng::result_type Rng::operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() { return static_cast<double>((*this)() >> 11) * kInv53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::uniform_open() { return (static_cast<double>((*this)() >> 11) + 0.5) * kInv53; }

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw ParameterError("Rng::below: n must be positive");
    // Lemire's nearly divisionless method
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (lo < threshold) {
            m = static_cast<unsigned __int128>((*this)()) * n;
            lo = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

bool Rng::bernoulli(double p) { return uniform() < p; }

double Rng::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_open()));
    const double phi = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
}

double Rng::gaussian(double mean, double sigma) { return mean + sigma * gaussian(); }

double Rng::exponential(double rate) { return -std::log(uniform_open()) / rate; }

double Rng::laplacian(double scale) {
    const double u = uniform_open() - 0.5;
    const double mag = -scale * std::log1p(-2.0 * std::abs(u));
    return u < 0 ? -mag : mag;
}

double Rng::gamma(double shape) {
    if (shape < 1.0) {
        // boost from shape + 1
        const double g = gamma(shape + 1.0);
        return g * std::pow(uniform_open(), 1.0 / shape);
    }
    // Marsaglia & Tsang
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = gaussian();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform_open();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double Rng::generalized_normal(double scale, double beta) {
    const double g = gamma(1.0 / beta);
    const double mag = scale * std::pow(g, 1.0 / beta);
    return ((*this)() >> 63) ? -mag : mag;
}

void validate(const DistributionSpec& spec) {
    auto positive = [](double v, const char* what) {
        if (!std::isfinite(v) || v <= 0.0)
            throw ParameterError(std::string(what) + " must be finite and > 0, got " + std::to_string(v));
    };
    std::visit(
        [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Uniform>) {
                if (!std::isfinite(d.lo) || !std::isfinite(d.hi) || !(d.lo < d.hi))
                    throw ParameterError("Uniform needs finite lo < hi");
            } else if constexpr (std::is_same_v<T, Gaussian>) {
                if (!std::isfinite(d.mean)) throw ParameterError("Gaussian mean must be finite");
                positive(d.sigma, "Gaussian sigma");
            } else if constexpr (std::is_same_v<T, Laplacian>) {
                positive(d.scale, "Laplacian scale");
            } else if constexpr (std::is_same_v<T, Exponential>) {
                positive(d.rate, "Exponential rate");
            } else {
                positive(d.alpha, "GeneralizedNormal alpha");
                positive(d.beta, "GeneralizedNormal beta");
            }
        },
        spec);
}

double sample(const DistributionSpec& spec, Rng& rng) {
    return std::visit(
        [&](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Uniform>) return rng.uniform(d.lo, d.hi);
            else if constexpr (std::is_same_v<T, Gaussian>) return rng.gaussian(d.mean, d.sigma);
            else if constexpr (std::is_same_v<T, Laplacian>) return rng.laplacian(d.scale);
            else if constexpr (std::is_same_v<T, Exponential>) return rng.exponential(d.rate);
            else return rng.generalized_normal(d.alpha, d.beta);
        },
        spec);
}

std::vector<double> draw(const DistributionSpec& spec, std::size_t n, const SeedTree& seed) {
    validate(spec);
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& v : out) v = sample(spec, rng);
    return out;
}

}  // namespace noisegen

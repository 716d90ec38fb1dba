#pragma once
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace noisegen {

// Bad parameter values anywhere in the library.
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SeedStep {
    std::string label;
    std::uint64_t index = 0;
};

// Node of the hierarchical seed tree. A child's key depends only on the
// parent's key, the label and the index, never on derivation order.
class SeedTree {
public:
    SeedTree() = default;
    explicit SeedTree(std::uint64_t root);

    SeedTree child(std::string_view label, std::uint64_t index = 0) const;

    std::uint64_t root() const { return root_; }
    std::uint64_t key() const { return key_; }
    const std::vector<SeedStep>& path() const { return path_; }
    std::string describe() const;

private:
    std::uint64_t root_ = 0;
    std::uint64_t key_ = 0;
    std::vector<SeedStep> path_;
};

SeedTree derive_seed(const SeedTree& parent, std::string_view label, std::uint64_t index = 0);

std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t mix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

// xoshiro256** stream. All variates are produced by hand-written transforms so
// the sequence is identical on every standard library.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed);
    explicit Rng(const SeedTree& node) : Rng(node.key()) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type(0); }
    result_type operator()();

    double uniform();                        // [0, 1)
    double uniform(double lo, double hi);    // [lo, hi)
    double uniform_open();                   // (0, 1)
    std::uint64_t below(std::uint64_t n);    // [0, n)
    bool bernoulli(double p);
    double gaussian();
    double gaussian(double mean, double sigma);
    double exponential(double rate);
    double laplacian(double scale);
    double gamma(double shape);
    double generalized_normal(double scale, double beta);

private:
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

struct Uniform { double lo = 0.0, hi = 1.0; };
struct Gaussian { double mean = 0.0, sigma = 1.0; };
struct Laplacian { double scale = 1.0; };
struct Exponential { double rate = 1.0; };
// density proportional to exp(-(|x|/alpha)^beta)
struct GeneralizedNormal { double alpha = 1.0, beta = 2.0; };

using DistributionSpec = std::variant<Uniform, Gaussian, Laplacian, Exponential, GeneralizedNormal>;

void validate(const DistributionSpec& spec);
double sample(const DistributionSpec& spec, Rng& rng);
std::vector<double> draw(const DistributionSpec& spec, std::size_t n, const SeedTree& seed);

}  // namespace noisegen

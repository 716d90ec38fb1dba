#include <cmath>

#include "doctest.h"
#include "noisegen/stylenet.hpp"
#include "noisegen/wavelet_bank.hpp"
#include "oracles.hpp"
#include "style_measures.hpp"

using namespace noisegen;

namespace {

int mirror(int i, int n) {
    if (n == 1) return 0;
    return i < 0 ? -i : (i >= n ? 2 * n - 2 - i : i);
}

Features random_features(int c, int w, int h, Rng& rng) {
    Features f(c, w, h);
    for (Eigen::Index i = 0; i < f.data.size(); ++i) f.data.data()[i] = rng.gaussian();
    return f;
}

std::vector<Kernel3> random_kernels(int n, Rng& rng) {
    std::vector<Kernel3> k(n);
    for (auto& kk : k)
        for (double& t : kk) t = rng.gaussian();
    return k;
}

// the tied equation evaluated one output sample at a time
Features brute_tied(const Features& x, const std::vector<Kernel3>& f, const Matrix& a, const Eigen::VectorXd& b) {
    Features y(static_cast<int>(a.rows()), x.width, x.height);
    for (int k = 0; k < a.rows(); ++k)
        for (int yy = 0; yy < x.height; ++yy)
            for (int xx = 0; xx < x.width; ++xx) {
                double acc = b[k];
                for (int l = 0; l < x.channels(); ++l) {
                    double conv = 0;
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dx = -1; dx <= 1; ++dx)
                            conv += f[l][(dy + 1) * 3 + dx + 1] *
                                    x.at(l, mirror(xx + dx, x.width), mirror(yy + dy, x.height));
                    acc += a(k, l) * conv;
                }
                y.at(k, xx, yy) = acc;
            }
    return y;
}

double max_abs_diff(const Features& a, const Features& b) { return (a.data - b.data).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("tied_conv matches a brute-force evaluation of the tied equation") {
    Rng rng(1);
    double worst = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int cin = 1 + static_cast<int>(rng.below(4)), cout = 1 + static_cast<int>(rng.below(4));
        const int w = 1 + static_cast<int>(rng.below(10)), h = 1 + static_cast<int>(rng.below(10));
        const Features x = random_features(cin, w, h, rng);
        const auto f = random_kernels(cin, rng);
        Matrix a(cout, cin);
        for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.gaussian();
        Eigen::VectorXd b(cout);
        for (int k = 0; k < cout; ++k) b[k] = rng.uniform(-1, 1);
        worst = std::max(worst, max_abs_diff(tied_conv(x, f, a, b), brute_tied(x, f, a, b)));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("tied_conv identity and bias-only cases") {
    Rng rng(2);
    const Features x0 = random_features(3, 8, 8, rng);
    const auto f = random_kernels(3, rng);
    Features x(3, 8, 8);
    x.data.row(1) = x0.data.row(1);  // only channel 1 is nonzero
    Matrix a = Matrix::Zero(4, 3);
    a.col(1).setOnes();
    const Features y = tied_conv(x, f, a, Eigen::VectorXd::Zero(4));
    const Features ref = brute_tied(x, f, a, Eigen::VectorXd::Zero(4));
    for (int k = 0; k < 4; ++k) {
        CHECK((y.data.row(k) - y.data.row(0)).cwiseAbs().maxCoeff() == 0.0);
        CHECK((y.data.row(k) - ref.data.row(k)).cwiseAbs().maxCoeff() < 1e-12);
    }

    Eigen::VectorXd b(2);
    b << 0.5, -1.25;
    Matrix a2(2, 3);
    a2.setOnes();
    const Features yb = tied_conv(Features(3, 5, 7), f, a2, b);
    for (int k = 0; k < 2; ++k) CHECK((yb.data.row(k).array() == b[k]).all());
}

TEST_CASE("tied_conv is linear in its input") {
    Rng rng(3);
    const auto f = random_kernels(2, rng);
    const Matrix a = Matrix::Random(3, 2);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
    for (int t = 0; t < 50; ++t) {
        const Features x1 = random_features(2, 8, 8, rng), x2 = random_features(2, 8, 8, rng);
        const double c1 = rng.gaussian(), c2 = rng.gaussian();
        Features mix(2, 8, 8);
        mix.data = c1 * x1.data + c2 * x2.data;
        const Matrix lhs = tied_conv(mix, f, a, zero).data;
        const Matrix rhs = c1 * tied_conv(x1, f, a, zero).data + c2 * tied_conv(x2, f, a, zero).data;
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("conv3x3 agrees with tied_conv on an expanded kernel") {
    Rng rng(4);
    for (int t = 0; t < 100; ++t) {
        const int cin = 1 + static_cast<int>(rng.below(5)), cout = 1 + static_cast<int>(rng.below(5));
        const int w = 1 + static_cast<int>(rng.below(12)), h = 1 + static_cast<int>(rng.below(12));
        const Features x = random_features(cin, w, h, rng);
        const auto f = random_kernels(cin, rng);
        const Matrix a = Matrix::Random(cout, cin);
        const Eigen::VectorXd b = Eigen::VectorXd::Random(cout);
        Matrix k(cout, cin * 9);
        for (int o = 0; o < cout; ++o)
            for (int l = 0; l < cin; ++l)
                for (int tap = 0; tap < 9; ++tap) k(o, l * 9 + tap) = a(o, l) * f[l][tap];
        CHECK(max_abs_diff(conv3x3(x, k, b), brute_tied(x, f, a, b)) < 1e-9);
    }
    CHECK_THROWS_AS(conv3x3(Features(2, 4, 4), Matrix::Zero(3, 9), Eigen::VectorXd::Zero(3)), ParameterError);
    CHECK_THROWS_AS(tied_conv(Features(2, 4, 4), std::vector<Kernel3>(3), Matrix::Zero(1, 2), Eigen::VectorXd::Zero(1)),
                    ParameterError);
}

TEST_CASE("channel widths and config validation") {
    CHECK(default_channel_widths(128) == std::vector<int>{512, 512, 256, 128, 64, 32});
    CHECK(default_channel_widths(256) == std::vector<int>{512, 512, 256, 128, 64, 32, 16});
    CHECK(default_channel_widths(32).size() == 4);
    StyleNetConfig c;
    c.out_size = 96;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c.out_size = 64;
    c.channel_widths = {8, 8, 8};
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c.channel_widths = {8, 8, 8, 8, 8};
    CHECK_NOTHROW(c.validate());
    c.latent_dim = 0;
    CHECK_THROWS_AS(init_network(c, SeedTree(0)), ParameterError);
    CHECK(parse_stylenet_mode("oriented") == StyleNetMode::Oriented);
    CHECK_THROWS_AS(parse_stylenet_mode("trained"), ParameterError);
}

TEST_CASE("initialization schemes per mode") {
    StyleNetConfig c;
    c.out_size = 32;
    c.channel_widths = {16, 16, 8, 8};
    const WaveletBank bank = make_wavelet_bank();

    c.mode = StyleNetMode::Random;
    CHECK(noise_spec_for(c.mode).kind == NoiseKind::None);
    const NetworkWeights rnd = init_network(c, SeedTree(5));
    for (const auto& L : rnd.blocks) {
        CHECK(L.demodulate);
        CHECK((L.bias.array() == 0).all());
    }

    c.mode = StyleNetMode::HighFreq;
    CHECK(noise_spec_for(c.mode).kind == NoiseKind::PowerLaw);
    const NetworkWeights hf = init_network(c, SeedTree(5));
    for (const auto& L : hf.blocks) {
        CHECK_FALSE(L.demodulate);
        for (int k = 0; k < L.out_channels; ++k)
            for (int l = 0; l < L.in_channels; ++l) {
                const auto& wv = bank[L.bank_index[static_cast<std::size_t>(k) * L.in_channels + l]];
                for (int t = 0; t < 9; ++t) REQUIRE(L.kernel(k, l * 9 + t) == L.amplitude(k, l) * wv.taps[t]);
            }
        CHECK((L.bias.array() == 0).all());
    }

    c.mode = StyleNetMode::Sparse;
    CHECK(noise_spec_for(c.mode).kind == NoiseKind::PowerLawEnvelope);
    const NetworkWeights sp = init_network(c, SeedTree(5));
    bool some_bias = false;
    for (std::size_t b = 0; b < sp.blocks.size(); ++b) {
        const auto& L = sp.blocks[b];
        // only the biases differ from HighFreq
        CHECK(L.kernel == hf.blocks[b].kernel);
        CHECK(L.affine == hf.blocks[b].affine);
        CHECK((L.bias.array().abs() <= 0.2).all());
        some_bias |= (L.bias.array() != 0).any();
    }
    CHECK(some_bias);

    c.mode = StyleNetMode::Oriented;
    const NetworkWeights ori = init_network(c, SeedTree(5));
    for (const auto& L : ori.blocks) {
        REQUIRE(L.tied.size() == static_cast<std::size_t>(L.in_channels));
        REQUIRE(L.bank_index.size() == static_cast<std::size_t>(L.in_channels));
        for (int l = 0; l < L.in_channels; ++l) CHECK(L.tied[l] == bank[L.bank_index[l]].taps);
        CHECK((L.bias.array().abs() <= 0.2).all());
    }
}

TEST_CASE("noise maps follow the power-law prior") {
    NoiseMapSpec s;
    s.kind = NoiseKind::PowerLaw;
    const NoiseMaps m = sample_noise_maps(s, 5, SeedTree(6));
    REQUIRE(m.maps.size() == 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(m.maps[i].width == (4 << i));
        CHECK(m.alpha[i] >= 0.5);
        CHECK(m.alpha[i] <= 2.0);
        CHECK(stddev(m.maps[i]) == doctest::Approx(1.0).epsilon(1e-9));
    }
    // a long stretch of per-map alphas covers the range uniformly
    std::vector<double> al;
    for (int i = 0; i < 2000; ++i) al.push_back(sample_noise_maps(s, 1, SeedTree(7).child("n", i)).alpha[0]);
    CHECK(oracle::ks_statistic(al, [](double v) { return std::clamp((v - 0.5) / 1.5, 0.0, 1.0); }) <
          oracle::ks_crit(al.size()));
    // at 64 px the fitted slope sits near the drawn alpha
    const NoiseMaps big = sample_noise_maps(s, 5, SeedTree(8));
    CHECK(oracle::radial_alpha(big.maps[4].data, 64) == doctest::Approx(big.alpha[4]).epsilon(0.15));

    s.kind = NoiseKind::None;
    CHECK(sample_noise_maps(s, 4, SeedTree(6)).maps.empty());
    s.kind = NoiseKind::PowerLawEnvelope;
    const NoiseMaps e = sample_noise_maps(s, 5, SeedTree(6));
    // the envelope makes the maps heavier tailed than the plain ones
    CHECK(oracle::moments(e.maps[4].data).exkurt > oracle::moments(m.maps[4].data).exkurt + 1.0);
}

TEST_CASE("synthesis is deterministic and normalized") {
    StyleNetConfig c;
    c.out_size = 32;
    c.channel_widths = {32, 32, 16, 16};
    for (auto mode : {StyleNetMode::Random, StyleNetMode::HighFreq, StyleNetMode::Sparse, StyleNetMode::Oriented}) {
        c.mode = mode;
        const NetworkWeights w = init_network(c, SeedTree(9));
        const Image a = synthesize(w, noise_spec_for(mode), SeedTree(10));
        CHECK(a.width == 32);
        CHECK(a.data == synthesize(w, noise_spec_for(mode), SeedTree(10)).data);
        CHECK(a.data != synthesize(w, noise_spec_for(mode), SeedTree(11)).data);
        for (float v : a.data) REQUIRE((v >= 0.0f && v <= 1.0f));
    }
}

TEST_CASE("random mode lacks high frequencies") {
    StyleNetConfig c;
    c.out_size = 64;
    double r = 0, h = 0;
    c.mode = StyleNetMode::Random;
    const NetworkWeights wr = init_network(c, SeedTree(12));
    c.mode = StyleNetMode::HighFreq;
    const NetworkWeights wh = init_network(c, SeedTree(12));
    for (int i = 0; i < 8; ++i) {
        r += measure::high_frequency_fraction(synthesize(wr, noise_spec_for(StyleNetMode::Random), SeedTree(13).child("z", i)));
        h += measure::high_frequency_fraction(synthesize(wh, noise_spec_for(StyleNetMode::HighFreq), SeedTree(13).child("z", i)));
    }
    CHECK(r < h);
}

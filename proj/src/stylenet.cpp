#include "noisegen/stylenet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "noisegen/resample.hpp"
#include "noisegen/spectrum.hpp"
#include "noisegen/wavelet_bank.hpp"

namespace noisegen {

namespace {

constexpr double kSlope = 0.2;
const double kGain = std::numbers::sqrt2;

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

int log2i(int v) {
    int k = 0;
    while ((1 << k) < v) ++k;
    return k;
}

Matrix gaussian_matrix(int rows, int cols, Rng& rng) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.gaussian();
    return m;
}

void lrelu_inplace(Matrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        double& v = m.data()[i];
        v = (v < 0 ? v * kSlope : v) * kGain;
    }
}

Eigen::VectorXd style_for(const Matrix& affine, const Eigen::VectorXd& w) {
    Eigen::VectorXd s = affine * w / std::sqrt(static_cast<double>(w.size()));
    s.array() += 1.0;
    return s;
}

}  // namespace

std::string to_string(StyleNetMode m) {
    switch (m) {
        case StyleNetMode::Random: return "random";
        case StyleNetMode::HighFreq: return "highfreq";
        case StyleNetMode::Sparse: return "sparse";
        case StyleNetMode::Oriented: return "oriented";
    }
    return "?";
}

StyleNetMode parse_stylenet_mode(std::string_view s) {
    if (s == "random") return StyleNetMode::Random;
    if (s == "highfreq" || s == "high-freq") return StyleNetMode::HighFreq;
    if (s == "sparse") return StyleNetMode::Sparse;
    if (s == "oriented") return StyleNetMode::Oriented;
    throw ParameterError("stylenet: unknown mode '" + std::string(s) + "'");
}

std::vector<int> default_channel_widths(int out_size) {
    if (!is_power_of_two(out_size) || out_size < 32)
        throw ParameterError("stylenet: out_size must be a power of two >= 32, got " + std::to_string(out_size));
    const int n = log2i(out_size) - 1;
    std::vector<int> w = {512, 512, 256, 128, 64, 32};
    while (static_cast<int>(w.size()) < n) w.push_back(std::max(8, w.back() / 2));
    w.resize(n);
    return w;
}

std::vector<int> StyleNetConfig::widths() const {
    return channel_widths.empty() ? default_channel_widths(out_size) : channel_widths;
}

void StyleNetConfig::validate() const {
    if (!is_power_of_two(out_size) || out_size < 32)
        throw ParameterError("stylenet: out_size must be a power of two >= 32, got " + std::to_string(out_size));
    const int n = log2i(out_size) - 1;
    if (!channel_widths.empty()) {
        if (static_cast<int>(channel_widths.size()) != n)
            throw ParameterError("stylenet: channel_widths needs " + std::to_string(n) + " entries for out_size " +
                                 std::to_string(out_size) + ", got " + std::to_string(channel_widths.size()));
        for (int c : channel_widths)
            if (c < 1) throw ParameterError("stylenet: channel widths must be >= 1");
    }
    if (latent_dim < 1) throw ParameterError("stylenet: latent_dim must be >= 1");
    if (!std::isfinite(noise_strength) || noise_strength < 0)
        throw ParameterError("stylenet: noise_strength must be finite and >= 0");
}

NoiseMapSpec noise_spec_for(StyleNetMode m) {
    NoiseMapSpec s;
    switch (m) {
        case StyleNetMode::Random: s.kind = NoiseKind::None; break;
        case StyleNetMode::HighFreq: s.kind = NoiseKind::PowerLaw; break;
        case StyleNetMode::Sparse:
        case StyleNetMode::Oriented: s.kind = NoiseKind::PowerLawEnvelope; break;
    }
    return s;
}

NoiseMaps sample_noise_maps(const NoiseMapSpec& spec, int blocks, const SeedTree& seed) {
    NoiseMaps n;
    if (spec.kind == NoiseKind::None) return n;
    if (!(spec.alpha_lo <= spec.alpha_hi)) throw ParameterError("stylenet: noise alpha range is empty");
    if (spec.envelope_grid < 1) throw ParameterError("stylenet: envelope grid must be >= 1");
    for (int i = 0; i < blocks; ++i) {
        const int r = 4 << i;
        Rng rng(seed.child("noise", i));
        const double a = rng.uniform(spec.alpha_lo, spec.alpha_hi);
        Plane m = power_law_noise(r, r, a, rng);
        if (spec.kind == NoiseKind::PowerLawEnvelope) {
            const int g = spec.envelope_grid;
            Plane grid(g, g);
            for (double& v : grid.data) v = rng.laplacian(1.0);
            const Plane env = resize_bicubic(grid, r, r);
            for (std::size_t p = 0; p < m.size(); ++p) m.data[p] *= env.data[p];
        }
        n.alpha.push_back(a);
        n.maps.push_back(std::move(m));
    }
    return n;
}

NetworkWeights init_network(const StyleNetConfig& cfg, const SeedTree& seed) {
    cfg.validate();
    NetworkWeights w;
    w.cfg = cfg;
    const std::vector<int> widths = cfg.widths();
    const int lat = cfg.latent_dim;
    const StyleNetMode mode = cfg.mode;
    const WaveletBank bank = make_wavelet_bank();

    for (int i = 0; i < 2; ++i) {
        Rng rng(seed.child("mapping", i));
        w.mapping[i] = gaussian_matrix(lat, lat, rng);
    }
    {
        Rng rng(seed.child("const"));
        w.constant = Features(widths[0], 4, 4);
        for (Eigen::Index i = 0; i < w.constant.data.size(); ++i) w.constant.data.data()[i] = rng.gaussian();
    }

    int cin = widths[0];
    for (std::size_t b = 0; b < widths.size(); ++b) {
        const SeedTree bs = seed.child("block", b);
        ConvLayer L;
        L.in_channels = cin;
        L.out_channels = widths[b];
        const int cout = L.out_channels;
        {
            Rng rng(bs.child("affine"));
            L.affine = gaussian_matrix(cin, lat, rng);
        }
        L.bias = Eigen::VectorXd::Zero(cout);
        if (mode == StyleNetMode::Random) {
            Rng rng(bs.child("kernel"));
            L.kernel = gaussian_matrix(cout, cin * 9, rng);
            L.demodulate = true;
        } else {
            // Sparse and Oriented share HighFreq's amplitude stream so the modes
            // differ only where they are meant to.
            Rng amp(bs.child("amplitude"));
            L.amplitude = gaussian_matrix(cout, cin, amp);
            Rng pick(bs.child("bank"));
            if (mode == StyleNetMode::Oriented) {
                L.bank_index.resize(cin);
                for (int l = 0; l < cin; ++l) {
                    L.bank_index[l] = static_cast<int>(pick.below(bank.size()));
                    L.tied.push_back(bank[L.bank_index[l]].taps);
                }
            } else {
                L.bank_index.resize(static_cast<std::size_t>(cout) * cin);
                L.kernel = Matrix::Zero(cout, cin * 9);
                for (int k = 0; k < cout; ++k)
                    for (int l = 0; l < cin; ++l) {
                        const int j = static_cast<int>(pick.below(bank.size()));
                        L.bank_index[static_cast<std::size_t>(k) * cin + l] = j;
                        for (int t = 0; t < 9; ++t) L.kernel(k, l * 9 + t) = L.amplitude(k, l) * bank[j].taps[t];
                    }
            }
            if (mode != StyleNetMode::HighFreq) {
                Rng rng(bs.child("bias"));
                for (int k = 0; k < cout; ++k) L.bias[k] = rng.uniform(-0.2, 0.2);
            }
        }
        w.blocks.push_back(std::move(L));
        cin = widths[b];
    }
    Rng rng(seed.child("to_rgb"));
    w.rgb_affine = gaussian_matrix(cin, lat, rng);
    w.to_rgb = gaussian_matrix(3, cin, rng);
    return w;
}

namespace {

// Whole-sample mirror: -1 -> 1, n -> n - 2.
int reflect(int i, int n) {
    if (n == 1) return 0;
    if (i < 0) return -i;
    if (i >= n) return 2 * n - 2 - i;
    return i;
}

// Each channel with a one-pixel mirrored border, (W + 2) x (H + 2).
Matrix pad_reflect(const Features& x) {
    const int W = x.width, H = x.height, pw = W + 2;
    Matrix p(x.channels(), Eigen::Index(pw) * (H + 2));
    for (int c = 0; c < x.channels(); ++c)
        for (int y = -1; y <= H; ++y)
            for (int xx = -1; xx <= W; ++xx)
                p(c, Eigen::Index(y + 1) * pw + xx + 1) = x.at(c, reflect(xx, W), reflect(y, H));
    return p;
}

}  // namespace

Features conv3x3(const Features& x, const Matrix& kernel, const Eigen::VectorXd& bias) {
    const int cin = x.channels(), W = x.width, H = x.height, pw = W + 2;
    if (kernel.cols() != Eigen::Index(cin) * 9)
        throw ParameterError("conv3x3: kernel has " + std::to_string(kernel.cols()) + " columns, expected " +
                             std::to_string(cin * 9));
    if (bias.size() != kernel.rows()) throw ParameterError("conv3x3: bias length must equal output channels");
    const Matrix P = pad_reflect(x);
    Features y(static_cast<int>(kernel.rows()), W, H);
    // im2col over horizontal strips keeps the column buffer small
    const int strip = std::max(1, 8192 / std::max(W, 1));
    Matrix cols;
    for (int y0 = 0; y0 < H; y0 += strip) {
        const int rows = std::min(strip, H - y0);
        const Eigen::Index n = Eigen::Index(rows) * W;
        cols.resize(Eigen::Index(cin) * 9, n);
        for (int l = 0; l < cin; ++l)
            for (int t = 0; t < 9; ++t) {
                const int dy = t / 3 - 1, dx = t % 3 - 1;
                double* dst = &cols(Eigen::Index(l) * 9 + t, 0);
                for (int r = 0; r < rows; ++r) {
                    const double* src = &P(l, Eigen::Index(y0 + r + dy + 1) * pw + dx + 1);
                    std::copy(src, src + W, dst + Eigen::Index(r) * W);
                }
            }
        y.data.middleCols(Eigen::Index(y0) * W, n).noalias() = kernel * cols;
    }
    y.data.colwise() += bias;
    return y;
}

Features tied_conv(const Features& x, const std::vector<Kernel3>& f, const Matrix& a, const Eigen::VectorXd& b) {
    const int cin = x.channels(), W = x.width, H = x.height, pw = W + 2;
    if (static_cast<int>(f.size()) != cin)
        throw ParameterError("tied_conv: need one kernel per input channel (" + std::to_string(cin) + "), got " +
                             std::to_string(f.size()));
    if (a.cols() != cin) throw ParameterError("tied_conv: amplitude matrix must have one column per input channel");
    if (b.size() != a.rows()) throw ParameterError("tied_conv: bias length must equal amplitude rows");
    const Matrix P = pad_reflect(x);
    Features g(cin, W, H);
    for (int l = 0; l < cin; ++l)
        for (int yy = 0; yy < H; ++yy)
            for (int xx = 0; xx < W; ++xx) {
                double acc = 0;
                for (int t = 0; t < 9; ++t) acc += f[l][t] * P(l, Eigen::Index(yy + t / 3) * pw + xx + t % 3);
                g.at(l, xx, yy) = acc;
            }
    Features y(static_cast<int>(a.rows()), W, H);
    y.data.noalias() = a * g.data;
    y.data.colwise() += b;
    return y;
}

Features upsample2x(const Features& x) {
    Features y(x.channels(), x.width * 2, x.height * 2);
    for (int c = 0; c < x.channels(); ++c)
        resize_bicubic(&x.data(c, 0), x.width, x.height, &y.data(c, 0), y.width, y.height);
    return y;
}

Image synthesize(const NetworkWeights& w, const NoiseMapSpec& noise, const SeedTree& z_seed) {
    const StyleNetConfig& cfg = w.cfg;
    const int lat = cfg.latent_dim;
    const int blocks = static_cast<int>(w.blocks.size());
    if (blocks < 1 || (4 << (blocks - 1)) != cfg.out_size)
        throw ParameterError("stylenet: weights do not match the configured output size");

    Rng zr(z_seed.child("z"));
    Eigen::VectorXd z(lat);
    for (int i = 0; i < lat; ++i) z[i] = zr.gaussian();
    z /= std::sqrt(z.squaredNorm() / lat + 1e-8);  // pixel norm
    Matrix h = z;
    for (const Matrix& m : w.mapping) {
        h = m * h / std::sqrt(static_cast<double>(lat));
        lrelu_inplace(h);
    }
    const Eigen::VectorXd wv = h.col(0);

    const NoiseMaps maps = sample_noise_maps(noise, blocks, z_seed);

    Features x = w.constant;
    for (int b = 0; b < blocks; ++b) {
        const ConvLayer& L = w.blocks[b];
        if (b > 0) x = upsample2x(x);
        const Eigen::VectorXd s = style_for(L.affine, wv);
        Eigen::VectorXd d;
        x.data = s.asDiagonal() * x.data;
        const Eigen::VectorXd zero = Eigen::VectorXd::Zero(L.out_channels);
        Features y;
        if (L.demodulate) {
            y = conv3x3(x, L.kernel, zero);
            // demodulation: unit norm of every style-scaled output filter
            Eigen::VectorXd norm2 = Eigen::VectorXd::Zero(L.out_channels);
            for (int l = 0; l < L.in_channels; ++l)
                norm2 += L.kernel.middleCols(Eigen::Index(l) * 9, 9).rowwise().squaredNorm() * (s[l] * s[l]);
            d = (norm2.array() + 1e-8).rsqrt();
            y.data = d.asDiagonal() * y.data;
        } else {
            // fan-in scaling over the modulated inputs; bank filters are unit norm
            const double fan = 1.0 / std::sqrt(s.squaredNorm() + 1e-8);
            if (L.tied.empty()) {
                y = conv3x3(x, L.kernel, zero);
            } else {
                y = tied_conv(x, L.tied, L.amplitude, zero);
            }
            y.data *= fan;
        }
        if (!maps.maps.empty() && cfg.noise_strength > 0) {
            const double rms = std::sqrt(y.data.squaredNorm() / static_cast<double>(y.data.size()));
            const Plane& m = maps.maps[b];
            const Eigen::Map<const Eigen::RowVectorXd> nm(m.data.data(), Eigen::Index(m.size()));
            y.data.rowwise() += (cfg.noise_strength * rms) * nm;
        }
        y.data.colwise() += L.bias;
        lrelu_inplace(y.data);
        x = std::move(y);
    }

    const Eigen::VectorXd s = style_for(w.rgb_affine, wv);
    const Matrix rgb = (w.to_rgb * s.asDiagonal()) * x.data / std::sqrt(static_cast<double>(x.channels()));
    Image img(x.width, x.height);
    for (int p = 0; p < x.width * x.height; ++p)
        for (int c = 0; c < 3; ++c) img.data[static_cast<std::size_t>(p) * 3 + c] = static_cast<float>(rgb(c, p));
    robust_rescale(img);
    return img;
}

}  // namespace noisegen

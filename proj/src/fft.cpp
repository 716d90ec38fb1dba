#include "noisegen/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <tuple>

namespace noisegen {

void ComplexGrid::Free::operator()(cdouble* p) const { fftw_free(p); }

ComplexGrid::ComplexGrid(int w, int h) : w_(w), h_(h) {
    const std::size_t n = size();
    auto* raw = static_cast<cdouble*>(fftw_malloc(sizeof(cdouble) * std::max<std::size_t>(n, 1)));
    if (!raw) throw std::bad_alloc();
    std::fill(raw, raw + n, cdouble(0.0, 0.0));
    data_.reset(raw);
}

ComplexGrid::ComplexGrid(const ComplexGrid& other) : ComplexGrid(other.w_, other.h_) {
    std::copy(other.data(), other.data() + size(), data());
}

ComplexGrid& ComplexGrid::operator=(const ComplexGrid& other) {
    if (this != &other) {
        ComplexGrid tmp(other);
        *this = std::move(tmp);
    }
    return *this;
}

namespace {

std::mutex g_plan_mutex;
std::map<std::tuple<int, int, int>, fftw_plan> g_plans;

fftw_plan plan_for(int w, int h, int sign) {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    auto key = std::make_tuple(w, h, sign);
    auto it = g_plans.find(key);
    if (it != g_plans.end()) return it->second;
    ComplexGrid scratch(w, h);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan p = fftw_plan_dft_2d(h, w, buf, buf, sign, FFTW_ESTIMATE);
    g_plans.emplace(key, p);
    return p;
}

void run(ComplexGrid& g, int sign) {
    if (g.size() == 0) return;
    fftw_plan p = plan_for(g.width(), g.height(), sign);
    auto* buf = reinterpret_cast<fftw_complex*>(g.data());
    fftw_execute_dft(p, buf, buf);
}

}  // namespace

void fft2_inplace(ComplexGrid& g) { run(g, FFTW_FORWARD); }
void ifft2_inplace(ComplexGrid& g) { run(g, FFTW_BACKWARD); }

ComplexGrid fft2(const Plane& p) {
    ComplexGrid g(p.width, p.height);
    for (std::size_t i = 0; i < p.size(); ++i) g[i] = cdouble(p.data[i], 0.0);
    fft2_inplace(g);
    return g;
}

Plane ifft2_real(ComplexGrid g) {
    ifft2_inplace(g);
    Plane p(g.width(), g.height());
    const double inv = 1.0 / static_cast<double>(g.size());
    for (std::size_t i = 0; i < p.size(); ++i) p.data[i] = g[i].real() * inv;
    return p;
}

}  // namespace noisegen

#pragma once
#include <complex>
#include <cstddef>
#include <memory>

#include "noisegen/image.hpp"

namespace noisegen {

using cdouble = std::complex<double>;

// 2-D complex grid in FFT-aligned storage. Index (kx, ky) is row ky, column kx.
class ComplexGrid {
public:
    ComplexGrid() = default;
    ComplexGrid(int w, int h);
    ComplexGrid(const ComplexGrid& other);
    ComplexGrid& operator=(const ComplexGrid& other);
    ComplexGrid(ComplexGrid&&) noexcept = default;
    ComplexGrid& operator=(ComplexGrid&&) noexcept = default;

    int width() const { return w_; }
    int height() const { return h_; }
    std::size_t size() const { return static_cast<std::size_t>(w_) * h_; }
    cdouble* data() { return data_.get(); }
    const cdouble* data() const { return data_.get(); }
    cdouble& at(int x, int y) { return data_[static_cast<std::size_t>(y) * w_ + x]; }
    const cdouble& at(int x, int y) const { return data_[static_cast<std::size_t>(y) * w_ + x]; }
    cdouble& operator[](std::size_t i) { return data_[i]; }
    const cdouble& operator[](std::size_t i) const { return data_[i]; }

private:
    struct Free { void operator()(cdouble* p) const; };
    int w_ = 0, h_ = 0;
    std::unique_ptr<cdouble[], Free> data_;
};

// Unnormalized in-place transforms; thread-safe.
void fft2_inplace(ComplexGrid& g);
void ifft2_inplace(ComplexGrid& g);

ComplexGrid fft2(const Plane& p);
// Inverse transform scaled by 1/N, real part kept.
Plane ifft2_real(ComplexGrid g);

// Signed integer frequency of bin k on an axis of length n.
inline int signed_freq(int k, int n) { return k <= n / 2 ? k : k - n; }

}  // namespace noisegen

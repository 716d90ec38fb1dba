#include "noisegen/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

#include "noisegen/sampling.hpp"

namespace noisegen {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_fail(png_structp png, png_const_charp msg) {
    (void)png;
    throw std::runtime_error(std::string("png: ") + msg);
}

}  // namespace

std::uint8_t quantize(float v) {
    const float c = std::clamp(v, 0.0f, 1.0f);
    return static_cast<std::uint8_t>(std::lround(255.0f * c));
}

void write_png(const std::string& path, const Image& img) {
    if (img.empty()) throw ParameterError("write_png: empty image");
    if (img.space != ColorSpace::Rgb) throw ParameterError("write_png: image must be RGB");
    File f(std::fopen(path.c_str(), "wb"));
    if (!f) throw std::runtime_error("write_png: cannot open " + path + " for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("write_png: libpng initialization failed");
    }
    std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width) * 3);
    try {
        png_init_io(png, f.get());
        png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                     PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x)
                for (int c = 0; c < 3; ++c) row[static_cast<std::size_t>(x) * 3 + c] = quantize(img.at(x, y, c));
            png_write_row(png, row.data());
        }
        png_write_end(png, nullptr);
    } catch (...) {
        png_destroy_write_struct(&png, &info);
        throw;
    }
    png_destroy_write_struct(&png, &info);
}

Image read_png(const std::string& path) {
    File f(std::fopen(path.c_str(), "rb"));
    if (!f) throw std::runtime_error("read_png: cannot open " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("read_png: libpng initialization failed");
    }
    Image img;
    try {
        png_init_io(png, f.get());
        png_read_info(png, info);
        png_set_expand(png);
        png_set_strip_16(png);
        png_set_strip_alpha(png);
        png_set_gray_to_rgb(png);
        png_read_update_info(png, info);
        const int w = static_cast<int>(png_get_image_width(png, info));
        const int h = static_cast<int>(png_get_image_height(png, info));
        img = Image(w, h);
        std::vector<std::uint8_t> row(png_get_rowbytes(png, info));
        for (int y = 0; y < h; ++y) {
            png_read_row(png, row.data(), nullptr);
            for (int x = 0; x < w; ++x)
                for (int c = 0; c < 3; ++c) img.at(x, y, c) = row[static_cast<std::size_t>(x) * 3 + c] / 255.0f;
        }
    } catch (...) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw;
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

Image tile_grid(const std::vector<Image>& images, int columns) {
    if (images.empty()) throw ParameterError("tile_grid: no images");
    if (columns < 1) throw ParameterError("tile_grid: columns must be >= 1");
    const int w = images[0].width, h = images[0].height;
    const int cols = std::min<int>(columns, static_cast<int>(images.size()));
    const int rows = (static_cast<int>(images.size()) + cols - 1) / cols;
    Image out(w * cols, h * rows);
    for (std::size_t i = 0; i < images.size(); ++i) {
        const Image& im = images[i];
        if (im.width != w || im.height != h) throw ParameterError("tile_grid: images differ in size");
        const int ox = static_cast<int>(i % cols) * w, oy = static_cast<int>(i / cols) * h;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                for (int c = 0; c < 3; ++c) out.at(ox + x, oy + y, c) = im.at(x, y, c);
    }
    return out;
}

}  // namespace noisegen

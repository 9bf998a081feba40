#pragma once

#include <cstdint>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <png.h>

#include "triwarp/raster.hpp"

namespace triwarp {

namespace detail {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline RasterImage finish_decode(int w, int h, int channels, int maxval,
                                 const std::vector<std::uint16_t>& samples,
                                 const std::string& path) {
    if (w < 2 || h < 2)
        throw std::runtime_error("raster: image below 2x2 minimum: " + path);
    RasterImage img(w, h, channels);
    const double inv = 1.0 / maxval;
    for (std::size_t i = 0; i < samples.size(); ++i) img.data[i] = samples[i] * inv;
    return img;
}

// --- PNG ---------------------------------------------------------------

inline RasterImage decode_png(std::FILE* fp, const std::string& path) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("raster: png init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("raster: png init failed");
    }
    std::vector<png_bytep> row_ptrs;
    std::vector<png_byte> raw;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("raster: failed to read PNG: " + path);
    }
    png_init_io(png, fp);
    png_read_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);

    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png); // alpha dropped
    png_read_update_info(png, info);

    depth = png_get_bit_depth(png, info);
    const int ch = png_get_channels(png, info);
    if (ch != 1 && ch != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("raster: unsupported PNG channel layout: " + path);
    }

    const std::size_t rowbytes = png_get_rowbytes(png, info);
    raw.resize(rowbytes * h);
    row_ptrs.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) row_ptrs[y] = raw.data() + y * rowbytes;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    std::vector<std::uint16_t> samples(static_cast<std::size_t>(w) * h * ch);
    if (depth == 16) {
        // PNG stores 16-bit samples big-endian
        for (std::size_t i = 0; i < samples.size(); ++i)
            samples[i] = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
        return finish_decode(static_cast<int>(w), static_cast<int>(h), ch, 65535, samples, path);
    }
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = raw[i];
    return finish_decode(static_cast<int>(w), static_cast<int>(h), ch, 255, samples, path);
}

// --- binary PPM / PGM ---------------------------------------------------

inline int pnm_next_int(std::FILE* fp, const std::string& path) {
    int c;
    for (;;) {
        c = std::fgetc(fp);
        if (c == '#') {
            while (c != '\n' && c != EOF) c = std::fgetc(fp);
        } else if (!std::isspace(c)) {
            break;
        }
    }
    int val = 0;
    bool any = false;
    while (c != EOF && std::isdigit(c)) {
        val = val * 10 + (c - '0');
        any = true;
        c = std::fgetc(fp);
    }
    if (!any) throw std::runtime_error("raster: malformed PNM header: " + path);
    return val;
}

inline RasterImage decode_pnm(std::FILE* fp, char kind, const std::string& path) {
    const int channels = (kind == '6') ? 3 : 1;
    const int w = pnm_next_int(fp, path);
    const int h = pnm_next_int(fp, path);
    const int maxval = pnm_next_int(fp, path);
    if (w <= 0 || h <= 0) throw std::runtime_error("raster: zero-sized image: " + path);
    if (maxval != 255 && maxval != 65535)
        throw std::runtime_error("raster: unsupported PNM maxval: " + path);

    const std::size_t n = static_cast<std::size_t>(w) * h * channels;
    std::vector<std::uint16_t> samples(n);
    if (maxval == 255) {
        std::vector<std::uint8_t> buf(n);
        if (std::fread(buf.data(), 1, n, fp) != n)
            throw std::runtime_error("raster: truncated PNM data: " + path);
        for (std::size_t i = 0; i < n; ++i) samples[i] = buf[i];
    } else {
        std::vector<std::uint8_t> buf(2 * n);
        if (std::fread(buf.data(), 1, 2 * n, fp) != 2 * n)
            throw std::runtime_error("raster: truncated PNM data: " + path);
        for (std::size_t i = 0; i < n; ++i)
            samples[i] = static_cast<std::uint16_t>((buf[2 * i] << 8) | buf[2 * i + 1]);
    }
    return finish_decode(w, h, channels, maxval, samples, path);
}

} // namespace detail

// Reads a PNG or binary PPM/PGM file. Values scaled to [0,1]; alpha dropped.
inline RasterImage decode_image(const std::string& path) {
    detail::FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw std::runtime_error("raster: cannot open file: " + path);

    unsigned char magic[8] = {};
    const std::size_t got = std::fread(magic, 1, 8, fp.get());
    std::rewind(fp.get());
    if (got >= 8 && png_sig_cmp(magic, 0, 8) == 0) return detail::decode_png(fp.get(), path);
    if (got >= 2 && magic[0] == 'P' && (magic[1] == '5' || magic[1] == '6')) {
        std::fseek(fp.get(), 2, SEEK_SET);
        return detail::decode_pnm(fp.get(), static_cast<char>(magic[1]), path);
    }
    throw std::runtime_error("raster: unsupported image format: " + path);
}

// Writes an 8-bit PNG; values quantized by round-half-up of v*255.
inline void encode_image(const RasterImage& img, const std::string& path) {
    if (img.channels != 1 && img.channels != 3)
        throw std::invalid_argument("raster: encode needs 1 or 3 channels");
    detail::FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw std::runtime_error("raster: cannot open file for writing: " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("raster: png init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("raster: png init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("raster: failed to write PNG: " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, img.width, img.height, 8,
                 img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<png_byte> row(static_cast<std::size_t>(img.width) * img.channels);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) {
                const double q = std::floor(img.at(y, x, c) * 255.0 + 0.5);
                row[static_cast<std::size_t>(x) * img.channels + c] =
                    static_cast<png_byte>(std::clamp(q, 0.0, 255.0));
            }
        png_write_row(png, row.data());
    }
    png_write_end(png, info);
    png_destroy_write_struct(&png, &info);
}

// Grayscale emission helper for diagnostic maps; clamps to [0,1].
inline void encode_field(const ScalarField& f, const std::string& path) {
    RasterImage img(f.width, f.height, 1);
    for (std::size_t i = 0; i < f.data.size(); ++i)
        img.data[i] = std::clamp(f.data[i], 0.0, 1.0);
    encode_image(img, path);
}

} // namespace triwarp

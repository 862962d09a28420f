/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: src/core/image.cpp
 *
 * Copyright 2026 The morphfit authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "morphfit/core/image.hpp"
#include "morphfit/core/error.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

namespace morphfit {
namespace core {

namespace {

struct FileCloser
{
    void operator()(std::FILE* f) const noexcept
    {
        if (f)
            std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode)
{
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f)
        throw Error(ErrorKind::io, "cannot open " + path.string());
    return f;
}

// Images are written next to their destination and renamed into place.
std::filesystem::path temp_path_for(const std::filesystem::path& path)
{
    auto tmp = path;
    tmp += ".tmp";
    return tmp;
}

void write_png_rows(const std::filesystem::path& path, int width, int height, int colour_type, int channels,
                    const std::uint8_t* data)
{
    const auto tmp = temp_path_for(path);
    {
        auto f = open_file(tmp, "wb");
        png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        png_infop info = png ? png_create_info_struct(png) : nullptr;
        if (!png || !info) {
            png_destroy_write_struct(&png, &info);
            throw Error(ErrorKind::io, "libpng initialisation failed");
        }
        if (setjmp(png_jmpbuf(png))) {
            png_destroy_write_struct(&png, &info);
            throw Error(ErrorKind::io, "failed writing PNG " + path.string());
        }
        png_init_io(png, f.get());
        png_set_IHDR(png, info, width, height, 8, colour_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                     PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        for (int y = 0; y < height; ++y) {
            png_write_row(png, const_cast<png_bytep>(data + std::size_t(y) * width * channels));
        }
        png_write_end(png, nullptr);
        png_destroy_write_struct(&png, &info);
    }
    std::filesystem::rename(tmp, path);
}

RasterImage read_png(const std::filesystem::path& path)
{
    auto f = open_file(path, "rb");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(ErrorKind::io, "libpng initialisation failed");
    }
    RasterImage image;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ParseError("png", "corrupt PNG file " + path.string());
    }
    png_init_io(png, f.get());
    png_read_info(png, info);
    const int colour_type = png_get_color_type(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    if (bit_depth == 16)
        png_set_strip_16(png);
    if (colour_type == PNG_COLOR_TYPE_PALETTE)
        png_set_palette_to_rgb(png);
    if (colour_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS))
        png_set_tRNS_to_alpha(png);
    if (colour_type == PNG_COLOR_TYPE_GRAY || colour_type == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    if (png_get_rowbytes(png, info) != std::size_t(width) * 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ParseError("png", "unsupported PNG layout in " + path.string());
    }
    image = RasterImage(width, height);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y)
        rows[y] = image.pixel(0, y);
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return image;
}

// Skips whitespace and '#' comments in a PNM header, then reads one integer.
int read_pnm_int(std::istream& in, const char* field)
{
    int c = in.peek();
    while (c != EOF) {
        if (c == '#') {
            std::string ignored;
            std::getline(in, ignored);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
        c = in.peek();
    }
    int value = 0;
    if (!(in >> value))
        throw ParseError(field, "malformed PPM header");
    return value;
}

RasterImage read_ppm(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::io, "cannot open " + path.string());
    std::string magic(2, '\0');
    in.read(magic.data(), 2);
    if (magic != "P6")
        throw ParseError("magic", "not a binary PPM file");
    const int width = read_pnm_int(in, "width");
    const int height = read_pnm_int(in, "height");
    const int maxval = read_pnm_int(in, "maxval");
    if (width <= 0 || height <= 0)
        throw ParseError("dimensions", "non-positive PPM dimensions");
    if (maxval != 255)
        throw ParseError("maxval", "only 8-bit PPM files are supported");
    in.get(); // single whitespace byte before the raster
    RasterImage image(width, height);
    in.read(reinterpret_cast<char*>(image.data.data()), static_cast<std::streamsize>(image.data.size()));
    if (in.gcount() != static_cast<std::streamsize>(image.data.size()))
        throw ParseError("raster", "truncated PPM file");
    return image;
}

} // namespace

Eigen::Vector3d sample_bilinear(const RasterImage& image, double x, double y)
{
    const double fx = std::clamp(x - 0.5, 0.0, double(image.width - 1));
    const double fy = std::clamp(y - 0.5, 0.0, double(image.height - 1));
    const int x0 = static_cast<int>(std::floor(fx));
    const int y0 = static_cast<int>(std::floor(fy));
    const int x1 = std::min(x0 + 1, image.width - 1);
    const int y1 = std::min(y0 + 1, image.height - 1);
    const double ax = fx - x0;
    const double ay = fy - y0;
    Eigen::Vector3d result;
    const auto* p00 = image.pixel(x0, y0);
    const auto* p10 = image.pixel(x1, y0);
    const auto* p01 = image.pixel(x0, y1);
    const auto* p11 = image.pixel(x1, y1);
    for (int c = 0; c < 3; ++c) {
        const double top = (1.0 - ax) * p00[c] + ax * p10[c];
        const double bottom = (1.0 - ax) * p01[c] + ax * p11[c];
        result[c] = (1.0 - ay) * top + ay * bottom;
    }
    return result;
}

Eigen::ArrayXXd to_grayscale(const RasterImage& image)
{
    Eigen::ArrayXXd gray(image.height, image.width);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            const auto* p = image.pixel(x, y);
            gray(y, x) = (0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]) / 255.0;
        }
    }
    return gray;
}

RasterImage read_image(const std::filesystem::path& path)
{
    std::ifstream probe(path, std::ios::binary);
    if (!probe)
        throw Error(ErrorKind::io, "cannot open " + path.string());
    unsigned char signature[8] = {};
    probe.read(reinterpret_cast<char*>(signature), 8);
    if (probe.gcount() >= 2 && signature[0] == 'P' && signature[1] == '6')
        return read_ppm(path);
    if (probe.gcount() == 8 && png_sig_cmp(signature, 0, 8) == 0)
        return read_png(path);
    throw ParseError("magic", "unrecognised image format: " + path.string());
}

void write_png(const RasterImage& image, const std::filesystem::path& path)
{
    write_png_rows(path, image.width, image.height, PNG_COLOR_TYPE_RGB, 3, image.data.data());
}

void write_png(const GrayImage& image, const std::filesystem::path& path)
{
    write_png_rows(path, image.width, image.height, PNG_COLOR_TYPE_GRAY, 1, image.data.data());
}

void write_ppm(const RasterImage& image, const std::filesystem::path& path)
{
    const auto tmp = temp_path_for(path);
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out)
            throw Error(ErrorKind::io, "cannot open " + tmp.string());
        out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
        out.write(reinterpret_cast<const char*>(image.data.data()), static_cast<std::streamsize>(image.data.size()));
        if (!out)
            throw Error(ErrorKind::io, "failed writing " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

void write_image(const RasterImage& image, const std::filesystem::path& path)
{
    if (path.extension() == ".ppm")
        write_ppm(image, path);
    else
        write_png(image, path);
}

} /* namespace core */
} /* namespace morphfit */

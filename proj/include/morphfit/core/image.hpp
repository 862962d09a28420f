/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: include/morphfit/core/image.hpp
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
#pragma once

#ifndef MORPHFIT_CORE_IMAGE_HPP
#define MORPHFIT_CORE_IMAGE_HPP

#include "Eigen/Core"

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace morphfit {
namespace core {

/**
 * An 8-bit RGB image with top-left origin, stored row by row.
 *
 * Pixel (x, y) covers the continuous square [x, x+1) x [y, y+1); its centre
 * is at (x + 0.5, y + 0.5). All sampling and rasterisation code in the library
 * follows this convention.
 */
struct RasterImage
{
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data; ///< width * height * 3 bytes, RGB interleaved.

    RasterImage() = default;
    RasterImage(int width, int height) : width(width), height(height), data(std::size_t(width) * height * 3, 0) {}

    bool empty() const noexcept
    {
        return width == 0 || height == 0;
    }

    std::uint8_t* pixel(int x, int y) noexcept
    {
        return data.data() + (std::size_t(y) * width + x) * 3;
    }
    const std::uint8_t* pixel(int x, int y) const noexcept
    {
        return data.data() + (std::size_t(y) * width + x) * 3;
    }

    void set(int x, int y, const std::array<std::uint8_t, 3>& rgb) noexcept
    {
        auto* p = pixel(x, y);
        p[0] = rgb[0];
        p[1] = rgb[1];
        p[2] = rgb[2];
    }

    friend bool operator==(const RasterImage&, const RasterImage&) = default;
};

/// Single-channel 8-bit image, e.g. a validity mask.
struct GrayImage
{
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    GrayImage() = default;
    GrayImage(int width, int height) : width(width), height(height), data(std::size_t(width) * height, 0) {}

    std::uint8_t& at(int x, int y) noexcept
    {
        return data[std::size_t(y) * width + x];
    }
    std::uint8_t at(int x, int y) const noexcept
    {
        return data[std::size_t(y) * width + x];
    }
};

/**
 * Bilinear sample at a continuous image position (pixel centres at +0.5).
 * Coordinates outside the image are clamped to the border.
 */
Eigen::Vector3d sample_bilinear(const RasterImage& image, double x, double y);

/// Luminance in [0, 1] as a height x width array (row = y).
Eigen::ArrayXXd to_grayscale(const RasterImage& image);

/**
 * Reads a PNG or binary PPM (P6) file, detected by signature.
 * Grey, grey-alpha and RGBA PNGs are converted to RGB.
 */
RasterImage read_image(const std::filesystem::path& path);

void write_png(const RasterImage& image, const std::filesystem::path& path);
void write_png(const GrayImage& image, const std::filesystem::path& path);
void write_ppm(const RasterImage& image, const std::filesystem::path& path);

/// Writes PNG or PPM depending on the extension (".ppm" selects PPM).
void write_image(const RasterImage& image, const std::filesystem::path& path);

} /* namespace core */
} /* namespace morphfit */

#endif /* MORPHFIT_CORE_IMAGE_HPP */

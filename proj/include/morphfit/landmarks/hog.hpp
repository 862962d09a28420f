/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: include/morphfit/landmarks/hog.hpp
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

#ifndef MORPHFIT_LANDMARKS_HOG_HPP
#define MORPHFIT_LANDMARKS_HOG_HPP

#include "Eigen/Core"

namespace morphfit {
namespace landmarks {

/**
 * Layout of the HOG patch around each landmark: num_cells x num_cells cells
 * of cell_size x cell_size samples, num_bins unsigned orientation bins over
 * [0, 180) degrees.
 */
struct HogConfig
{
    int cell_size = 8;
    int num_cells = 3;
    int num_bins = 9;

    int descriptor_length() const noexcept
    {
        return num_cells * num_cells * num_bins;
    }

    friend bool operator==(const HogConfig&, const HogConfig&) = default;
};

/**
 * HOG descriptors for the given points, concatenated in point order.
 *
 * The patch is a grid of (num_cells * cell_size) samples centred on each
 * point with spacing `scale` pixels, read with bilinear interpolation and
 * border clamping, so sub-pixel points and any patch scale are handled.
 * Gradients are central differences; votes are split trilinearly over
 * neighbouring cells and orientation bins, and each point's descriptor is
 * L2-hys normalised (clip 0.2).
 *
 * @param[in] image Grayscale image, rows = y.
 * @param[in] points 2 x L pixel positions.
 */
Eigen::VectorXd extract_hog(const Eigen::ArrayXXd& image, const Eigen::Matrix2Xd& points, const HogConfig& config,
                            double scale = 1.0);

} /* namespace landmarks */
} /* namespace morphfit */

#endif /* MORPHFIT_LANDMARKS_HOG_HPP */

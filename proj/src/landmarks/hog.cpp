/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: src/landmarks/hog.cpp
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
#include "morphfit/landmarks/hog.hpp"
#include "morphfit/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace morphfit {
namespace landmarks {

namespace {

// Pixel centres sit at +0.5; samples outside the image are clamped to the border.
double sample(const Eigen::ArrayXXd& image, double x, double y)
{
    const double fx = std::clamp(x - 0.5, 0.0, double(image.cols() - 1));
    const double fy = std::clamp(y - 0.5, 0.0, double(image.rows() - 1));
    const Eigen::Index x0 = static_cast<Eigen::Index>(std::floor(fx));
    const Eigen::Index y0 = static_cast<Eigen::Index>(std::floor(fy));
    const Eigen::Index x1 = std::min<Eigen::Index>(x0 + 1, image.cols() - 1);
    const Eigen::Index y1 = std::min<Eigen::Index>(y0 + 1, image.rows() - 1);
    const double ax = fx - x0;
    const double ay = fy - y0;
    const double top = (1.0 - ax) * image(y0, x0) + ax * image(y0, x1);
    const double bottom = (1.0 - ax) * image(y1, x0) + ax * image(y1, x1);
    return (1.0 - ay) * top + ay * bottom;
}

void normalise_l2_hys(Eigen::Ref<Eigen::VectorXd> v)
{
    constexpr double epsilon = 1e-3;
    v /= std::sqrt(v.squaredNorm() + epsilon * epsilon);
    v = v.cwiseMin(0.2);
    v /= std::sqrt(v.squaredNorm() + epsilon * epsilon);
}

} // namespace

Eigen::VectorXd extract_hog(const Eigen::ArrayXXd& image, const Eigen::Matrix2Xd& points, const HogConfig& config,
                            double scale)
{
    if (config.cell_size <= 0 || config.num_cells <= 0 || config.num_bins <= 0)
        throw Error(ErrorKind::parameter, "HOG cell size, cell count and bin count must be positive");
    if (!(scale > 0.0))
        throw Error(ErrorKind::parameter, "HOG sampling scale must be positive");
    if (image.size() == 0)
        throw Error(ErrorKind::dimension, "HOG input image is empty");

    const int patch = config.num_cells * config.cell_size;
    const int length = config.descriptor_length();
    const double bin_width = 180.0 / config.num_bins;
    Eigen::VectorXd descriptor = Eigen::VectorXd::Zero(points.cols() * length);
    // Patch samples with a one-sample border for the central differences.
    Eigen::ArrayXXd values(patch + 2, patch + 2);

    for (Eigen::Index l = 0; l < points.cols(); ++l) {
        const Eigen::Vector2d p = points.col(l);
        for (int j = 0; j < patch + 2; ++j) {
            const double y = p.y() + scale * (j - 1 - 0.5 * patch + 0.5);
            for (int i = 0; i < patch + 2; ++i)
                values(j, i) = sample(image, p.x() + scale * (i - 1 - 0.5 * patch + 0.5), y);
        }

        auto block = descriptor.segment(l * length, length);
        for (int j = 0; j < patch; ++j) {
            for (int i = 0; i < patch; ++i) {
                const double gx = values(j + 1, i + 2) - values(j + 1, i);
                const double gy = values(j + 2, i + 1) - values(j, i + 1);
                const double magnitude = std::hypot(gx, gy);
                if (magnitude == 0.0)
                    continue;
                double angle = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
                if (angle < 0.0)
                    angle += 180.0;
                if (angle >= 180.0)
                    angle -= 180.0;

                const double b = angle / bin_width - 0.5;
                const int b0 = static_cast<int>(std::floor(b));
                const double wb = b - b0;
                const int bins[2] = {(b0 + config.num_bins) % config.num_bins, (b0 + 1) % config.num_bins};
                const double bin_weights[2] = {1.0 - wb, wb};

                const double cx = (i + 0.5) / config.cell_size - 0.5;
                const double cy = (j + 0.5) / config.cell_size - 0.5;
                const int cx0 = static_cast<int>(std::floor(cx));
                const int cy0 = static_cast<int>(std::floor(cy));
                const double wx = cx - cx0;
                const double wy = cy - cy0;
                for (int dy = 0; dy < 2; ++dy) {
                    const int cell_y = cy0 + dy;
                    if (cell_y < 0 || cell_y >= config.num_cells)
                        continue;
                    const double weight_y = dy ? wy : 1.0 - wy;
                    for (int dx = 0; dx < 2; ++dx) {
                        const int cell_x = cx0 + dx;
                        if (cell_x < 0 || cell_x >= config.num_cells)
                            continue;
                        const double weight = magnitude * weight_y * (dx ? wx : 1.0 - wx);
                        const int cell = (cell_y * config.num_cells + cell_x) * config.num_bins;
                        for (int k = 0; k < 2; ++k)
                            block(cell + bins[k]) += weight * bin_weights[k];
                    }
                }
            }
        }
        normalise_l2_hys(block);
    }
    return descriptor;
}

} /* namespace landmarks */
} /* namespace morphfit */

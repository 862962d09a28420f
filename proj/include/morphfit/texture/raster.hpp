/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: include/morphfit/texture/raster.hpp
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

#ifndef MORPHFIT_TEXTURE_RASTER_HPP
#define MORPHFIT_TEXTURE_RASTER_HPP

#include "Eigen/Core"

#include <algorithm>
#include <cmath>

namespace morphfit {
namespace texture {

namespace detail {

inline double edge_function(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& p)
{
    return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
}

// Top-left rule for a triangle with positive edge_function orientation (y down).
inline bool is_top_left(const Eigen::Vector2d& from, const Eigen::Vector2d& to)
{
    const Eigen::Vector2d d = to - from;
    return (d.y() == 0.0 && d.x() > 0.0) || d.y() < 0.0;
}

} // namespace detail

/**
 * Calls fn(x, y, barycentric) for every pixel whose centre (x + 0.5, y + 0.5)
 * lies inside the triangle a, b, c (pixel coordinates, y down). Pixels centred
 * exactly on an edge are covered only for top and left edges, so triangles
 * sharing an edge never both cover a pixel. Either winding is accepted;
 * barycentric weights refer to a, b, c in the order given. Degenerate
 * triangles cover nothing.
 */
template <typename Fn>
void rasterize_triangle(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c, int width,
                        int height, Fn&& fn)
{
    const double area = detail::edge_function(a, b, c);
    if (area == 0.0 || !std::isfinite(area))
        return;
    // Work on a positively oriented copy; remember how to map weights back.
    const bool flipped = area < 0.0;
    const Eigen::Vector2d& p0 = a;
    const Eigen::Vector2d& p1 = flipped ? c : b;
    const Eigen::Vector2d& p2 = flipped ? b : c;
    const double abs_area = std::abs(area);

    const int x_min = std::max(0, static_cast<int>(std::floor(std::min({a.x(), b.x(), c.x()}) - 0.5)));
    const int x_max = std::min(width - 1, static_cast<int>(std::ceil(std::max({a.x(), b.x(), c.x()}) - 0.5)));
    const int y_min = std::max(0, static_cast<int>(std::floor(std::min({a.y(), b.y(), c.y()}) - 0.5)));
    const int y_max = std::min(height - 1, static_cast<int>(std::ceil(std::max({a.y(), b.y(), c.y()}) - 0.5)));

    const bool top_left_12 = detail::is_top_left(p1, p2);
    const bool top_left_20 = detail::is_top_left(p2, p0);
    const bool top_left_01 = detail::is_top_left(p0, p1);

    for (int y = y_min; y <= y_max; ++y) {
        for (int x = x_min; x <= x_max; ++x) {
            const Eigen::Vector2d p(x + 0.5, y + 0.5);
            const double w0 = detail::edge_function(p1, p2, p);
            const double w1 = detail::edge_function(p2, p0, p);
            const double w2 = detail::edge_function(p0, p1, p);
            const bool inside = (w0 > 0.0 || (w0 == 0.0 && top_left_12)) &&
                                (w1 > 0.0 || (w1 == 0.0 && top_left_20)) &&
                                (w2 > 0.0 || (w2 == 0.0 && top_left_01));
            if (!inside)
                continue;
            Eigen::Vector3d bary(w0 / abs_area, w1 / abs_area, w2 / abs_area);
            if (flipped)
                std::swap(bary(1), bary(2));
            fn(x, y, bary);
        }
    }
}

/// Barycentric coordinates of p with respect to a, b, c (may be negative outside).
inline Eigen::Vector3d barycentric(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c,
                                   const Eigen::Vector2d& p)
{
    const double area = detail::edge_function(a, b, c);
    return Eigen::Vector3d(detail::edge_function(b, c, p), detail::edge_function(c, a, p),
                           detail::edge_function(a, b, p)) /
           area;
}

} /* namespace texture */
} /* namespace morphfit */

#endif /* MORPHFIT_TEXTURE_RASTER_HPP */

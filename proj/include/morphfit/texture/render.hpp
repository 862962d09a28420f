/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: include/morphfit/texture/render.hpp
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

#ifndef MORPHFIT_TEXTURE_RENDER_HPP
#define MORPHFIT_TEXTURE_RENDER_HPP

#include "morphfit/camera/affine_camera.hpp"
#include "morphfit/core/image.hpp"
#include "morphfit/model/morphable_model.hpp"
#include "morphfit/texture/isomap.hpp"

#include "Eigen/Core"

#include <cstddef>
#include <vector>

namespace morphfit {
namespace texture {

/**
 * A pose-invariant texture in chart space. `mask` is 255 where the texel was
 * filled from the image and 0 where it is invisible (self-occluded,
 * back-facing, outside the image) or outside the chart; invisible texels are
 * black.
 */
struct TextureMap
{
    core::RasterImage image;
    core::GrayImage mask;
    std::size_t covered_texels = 0; ///< texels inside some chart triangle

    int resolution() const noexcept
    {
        return image.width;
    }

    std::size_t filled_texels() const;

    /// Fraction of chart-covered texels that are invisible.
    double invisible_fraction() const;
};

/**
 * Per-pixel result of z-buffered rasterisation: the closest front-facing
 * triangle (or -1) and the barycentric weights of the pixel centre.
 */
struct VisibilityBuffer
{
    int width = 0;
    int height = 0;
    std::vector<int> triangle;
    std::vector<Eigen::Vector3d> barycentric;
    std::vector<double> depth;

    int triangle_at(int x, int y) const noexcept
    {
        return triangle[std::size_t(y) * width + x];
    }
};

/// Front-facing test: the counter-clockwise normal points towards the viewer.
bool is_front_facing(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c,
                     const Eigen::Vector3d& towards_viewer);

/**
 * Rasterises all front-facing triangles with a z-buffer. Depth is the
 * coordinate along camera.towards_viewer() (larger is closer); ties keep the
 * earlier triangle.
 */
VisibilityBuffer rasterize_mesh(const model::Mesh& mesh, const camera::AffineCamerad& camera, int width, int height);

/// Renders per-vertex colours (mesh.colours required) with Gouraud interpolation; background black.
core::RasterImage render_vertex_colours(const model::Mesh& mesh, const camera::AffineCamerad& camera, int width,
                                        int height);

/// Renders the mesh with colours looked up in `texture` through the chart; invisible texels render black.
core::RasterImage render_textured(const model::Mesh& mesh, const camera::AffineCamerad& camera,
                                  const TextureMap& texture, const IsomapChart& chart, int width, int height);

/**
 * Canonical frontal camera for a square output: identity rotation, the mesh's
 * x/y bounding box scaled to fill 80% of the output (10% margin per side) and
 * centred.
 */
camera::AffineCamerad frontal_camera(const model::Mesh& mesh, int output_size);

/// Frontal rendering of a fitted mesh from its isomap texture.
core::RasterImage render_frontal(const model::Mesh& mesh, const TextureMap& texture, const IsomapChart& chart,
                                 int output_size);

/**
 * Texels covered by the chart's triangles at the given resolution
 * (255 inside, 0 outside).
 */
core::GrayImage chart_coverage(const IsomapChart& chart, const std::vector<model::Triangle>& triangles,
                               int resolution);

/**
 * Remaps image colours into the isomap. For every texel inside a chart
 * triangle the corresponding 3D point is projected with the camera and the
 * image is sampled bilinearly. The texel is marked invisible if its triangle
 * is back-facing, if it projects outside the image, or if another,
 * non-adjacent triangle lies in front of it in the z-buffer by more than
 * 1e-4 of the mesh's depth range.
 *
 * Throws a mismatch error if the chart was computed for a different model and
 * a parameter error for resolution < 32.
 */
TextureMap remap_texture(const core::RasterImage& image, const model::Mesh& mesh,
                         const camera::AffineCamerad& camera, const IsomapChart& chart, int resolution);

} /* namespace texture */
} /* namespace morphfit */

#endif /* MORPHFIT_TEXTURE_RENDER_HPP */

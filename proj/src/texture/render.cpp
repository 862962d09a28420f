/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: src/texture/render.cpp
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
#include "morphfit/texture/render.hpp"
#include "morphfit/core/error.hpp"
#include "morphfit/texture/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace morphfit {
namespace texture {

namespace {

std::uint8_t to_byte(double value)
{
    return static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
}

template <typename Shader>
core::RasterImage shade(const VisibilityBuffer& buffer, Shader&& shader)
{
    core::RasterImage image(buffer.width, buffer.height);
    for (int y = 0; y < buffer.height; ++y) {
        for (int x = 0; x < buffer.width; ++x) {
            const std::size_t i = std::size_t(y) * buffer.width + x;
            if (buffer.triangle[i] < 0)
                continue;
            const Eigen::Vector3d rgb = shader(buffer.triangle[i], buffer.barycentric[i]);
            image.set(x, y, {to_byte(rgb(0)), to_byte(rgb(1)), to_byte(rgb(2))});
        }
    }
    return image;
}

} // namespace

std::size_t TextureMap::filled_texels() const
{
    return static_cast<std::size_t>(std::count(mask.data.begin(), mask.data.end(), std::uint8_t(255)));
}

double TextureMap::invisible_fraction() const
{
    if (covered_texels == 0)
        return 1.0;
    return 1.0 - static_cast<double>(filled_texels()) / static_cast<double>(covered_texels);
}

bool is_front_facing(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c,
                     const Eigen::Vector3d& towards_viewer)
{
    return (b - a).cross(c - a).dot(towards_viewer) > 0.0;
}

VisibilityBuffer rasterize_mesh(const model::Mesh& mesh, const camera::AffineCamerad& camera, int width, int height)
{
    if (width <= 0 || height <= 0)
        throw Error(ErrorKind::dimension, "render target must have positive size");
    VisibilityBuffer buffer;
    buffer.width = width;
    buffer.height = height;
    const std::size_t pixels = std::size_t(width) * height;
    buffer.triangle.assign(pixels, -1);
    buffer.barycentric.assign(pixels, Eigen::Vector3d::Zero());
    buffer.depth.assign(pixels, -std::numeric_limits<double>::infinity());

    const Eigen::Vector3d view = camera.towards_viewer();
    const int V = mesh.vertex_count();
    Eigen::Matrix2Xd projected(2, V);
    Eigen::VectorXd depth(V);
    for (int v = 0; v < V; ++v) {
        projected.col(v) = camera::project(camera, mesh.vertex(v));
        depth(v) = view.dot(mesh.vertex(v));
    }

    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        if (!is_front_facing(mesh.vertex(tri[0]), mesh.vertex(tri[1]), mesh.vertex(tri[2]), view))
            continue;
        rasterize_triangle(projected.col(tri[0]), projected.col(tri[1]), projected.col(tri[2]), width, height,
                           [&](int x, int y, const Eigen::Vector3d& bary) {
                               const double z =
                                   bary(0) * depth(tri[0]) + bary(1) * depth(tri[1]) + bary(2) * depth(tri[2]);
                               const std::size_t i = std::size_t(y) * width + x;
                               if (z > buffer.depth[i]) {
                                   buffer.depth[i] = z;
                                   buffer.triangle[i] = static_cast<int>(t);
                                   buffer.barycentric[i] = bary;
                               }
                           });
    }
    return buffer;
}

core::RasterImage render_vertex_colours(const model::Mesh& mesh, const camera::AffineCamerad& camera, int width,
                                        int height)
{
    if (!mesh.colours)
        throw Error(ErrorKind::parameter, "mesh has no per-vertex colours");
    const auto& colours = *mesh.colours;
    const auto buffer = rasterize_mesh(mesh, camera, width, height);
    return shade(buffer, [&](int t, const Eigen::Vector3d& bary) {
        const auto& tri = mesh.triangles[t];
        Eigen::Vector3d rgb = Eigen::Vector3d::Zero();
        for (int k = 0; k < 3; ++k)
            rgb += bary(k) * colours.segment<3>(3 * tri[k]);
        return Eigen::Vector3d(255.0 * rgb);
    });
}

core::RasterImage render_textured(const model::Mesh& mesh, const camera::AffineCamerad& camera,
                                  const TextureMap& texture, const IsomapChart& chart, int width, int height)
{
    if (chart.uv.cols() != mesh.vertex_count())
        throw Error(ErrorKind::dimension, "chart and mesh vertex counts differ");
    const int resolution = texture.resolution();
    if (resolution <= 0 || texture.image.height != resolution || texture.mask.width != resolution ||
        texture.mask.height != resolution)
        throw Error(ErrorKind::dimension, "texture must be square with a matching mask");
    const auto buffer = rasterize_mesh(mesh, camera, width, height);
    return shade(buffer, [&](int t, const Eigen::Vector3d& bary) -> Eigen::Vector3d {
        const auto& tri = mesh.triangles[t];
        const Eigen::Vector2d uv =
            bary(0) * chart.uv.col(tri[0]) + bary(1) * chart.uv.col(tri[1]) + bary(2) * chart.uv.col(tri[2]);
        const double tx = uv.x() * resolution;
        const double ty = uv.y() * resolution;
        const int nx = std::clamp(static_cast<int>(std::floor(tx)), 0, resolution - 1);
        const int ny = std::clamp(static_cast<int>(std::floor(ty)), 0, resolution - 1);
        if (texture.mask.at(nx, ny) == 0)
            return Eigen::Vector3d::Zero();
        return core::sample_bilinear(texture.image, tx, ty);
    });
}

camera::AffineCamerad frontal_camera(const model::Mesh& mesh, int output_size)
{
    const Eigen::Map<const Eigen::Matrix3Xd> points(mesh.vertices.data(), 3, mesh.vertex_count());
    const Eigen::Vector2d lo = points.topRows<2>().rowwise().minCoeff();
    const Eigen::Vector2d hi = points.topRows<2>().rowwise().maxCoeff();
    const double extent = (hi - lo).maxCoeff();
    if (!(extent > 0.0))
        throw Error(ErrorKind::degenerate, "mesh has zero extent");
    const double scale = 0.8 * output_size / extent;
    const Eigen::Vector2d centre = 0.5 * (lo + hi);
    const Eigen::Vector2d origin(0.5 * output_size - scale * centre.x(), 0.5 * output_size + scale * centre.y());
    return camera::make_camera({}, scale, origin);
}

core::RasterImage render_frontal(const model::Mesh& mesh, const TextureMap& texture, const IsomapChart& chart,
                                 int output_size)
{
    if (output_size <= 0)
        throw Error(ErrorKind::dimension, "output size must be positive");
    return render_textured(mesh, frontal_camera(mesh, output_size), texture, chart, output_size, output_size);
}

core::GrayImage chart_coverage(const IsomapChart& chart, const std::vector<model::Triangle>& triangles,
                               int resolution)
{
    core::GrayImage coverage(resolution, resolution);
    for (const auto& tri : triangles) {
        rasterize_triangle(chart.uv.col(tri[0]) * resolution, chart.uv.col(tri[1]) * resolution,
                           chart.uv.col(tri[2]) * resolution, resolution, resolution,
                           [&](int x, int y, const Eigen::Vector3d&) { coverage.at(x, y) = 255; });
    }
    return coverage;
}

} /* namespace texture */
} /* namespace morphfit */

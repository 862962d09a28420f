/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: src/texture/remap.cpp
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
#include "morphfit/core/error.hpp"
#include "morphfit/texture/raster.hpp"
#include "morphfit/texture/render.hpp"

#include <algorithm>
#include <cmath>

namespace morphfit {
namespace texture {

namespace {

bool share_vertex(const model::Triangle& a, const model::Triangle& b)
{
    for (int i : a)
        for (int j : b)
            if (i == j)
                return true;
    return false;
}

} // namespace

TextureMap remap_texture(const core::RasterImage& image, const model::Mesh& mesh,
                         const camera::AffineCamerad& camera, const IsomapChart& chart, int resolution)
{
    if (chart.fingerprint != mesh.source_fingerprint)
        throw Error(ErrorKind::mismatch, "chart/model mismatch: the chart was computed for a different model");
    if (chart.uv.cols() != mesh.vertex_count())
        throw Error(ErrorKind::mismatch, "chart/model mismatch: vertex counts differ");
    if (resolution < 32)
        throw Error(ErrorKind::parameter, "isomap resolution must be at least 32");
    if (image.empty())
        throw Error(ErrorKind::dimension, "input image is empty");

    const VisibilityBuffer buffer = rasterize_mesh(mesh, camera, image.width, image.height);
    const Eigen::Vector3d view = camera.towards_viewer();
    const int V = mesh.vertex_count();
    Eigen::Matrix2Xd projected(2, V);
    Eigen::VectorXd depth(V);
    for (int v = 0; v < V; ++v) {
        projected.col(v) = camera::project(camera, mesh.vertex(v));
        depth(v) = view.dot(mesh.vertex(v));
    }
    const double epsilon = 1e-4 * (depth.maxCoeff() - depth.minCoeff());

    TextureMap texture;
    texture.image = core::RasterImage(resolution, resolution);
    texture.mask = core::GrayImage(resolution, resolution);
    core::GrayImage covered(resolution, resolution);

    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const bool front =
            is_front_facing(mesh.vertex(tri[0]), mesh.vertex(tri[1]), mesh.vertex(tri[2]), view);
        rasterize_triangle(
            chart.uv.col(tri[0]) * resolution, chart.uv.col(tri[1]) * resolution, chart.uv.col(tri[2]) * resolution,
            resolution, resolution, [&](int x, int y, const Eigen::Vector3d& bary) {
                covered.at(x, y) = 255;
                // A later chart triangle overwrites an earlier one at folds.
                texture.image.set(x, y, {0, 0, 0});
                texture.mask.at(x, y) = 0;
                if (!front)
                    return;
                const Eigen::Vector2d q =
                    bary(0) * projected.col(tri[0]) + bary(1) * projected.col(tri[1]) + bary(2) * projected.col(tri[2]);
                if (!(q.x() >= 0.0 && q.y() >= 0.0 && q.x() < image.width && q.y() < image.height))
                    return;
                const double z = bary(0) * depth(tri[0]) + bary(1) * depth(tri[1]) + bary(2) * depth(tri[2]);
                const int px = std::min(static_cast<int>(q.x()), image.width - 1);
                const int py = std::min(static_cast<int>(q.y()), image.height - 1);
                const int occluder = buffer.triangle_at(px, py);
                if (occluder >= 0 && occluder != static_cast<int>(t) &&
                    !share_vertex(mesh.triangles[occluder], tri)) {
                    const auto& o = mesh.triangles[occluder];
                    const Eigen::Vector3d ob =
                        barycentric(projected.col(o[0]), projected.col(o[1]), projected.col(o[2]), q);
                    const double occluder_depth = ob(0) * depth(o[0]) + ob(1) * depth(o[1]) + ob(2) * depth(o[2]);
                    if (z < occluder_depth - epsilon)
                        return;
                }
                const Eigen::Vector3d rgb = core::sample_bilinear(image, q.x(), q.y());
                texture.image.set(x, y,
                                  {static_cast<std::uint8_t>(std::lround(rgb(0))),
                                   static_cast<std::uint8_t>(std::lround(rgb(1))),
                                   static_cast<std::uint8_t>(std::lround(rgb(2)))});
                texture.mask.at(x, y) = 255;
            });
    }
    texture.covered_texels =
        static_cast<std::size_t>(std::count(covered.data.begin(), covered.data.end(), std::uint8_t(255)));
    return texture;
}

} /* namespace texture */
} /* namespace morphfit */

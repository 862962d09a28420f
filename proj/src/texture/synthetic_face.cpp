/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: src/texture/synthetic_face.cpp
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
#include "morphfit/texture/synthetic_face.hpp"
#include "morphfit/core/error.hpp"
#include "morphfit/texture/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace morphfit {
namespace texture {

namespace {

using Point = Eigen::Vector2d;

double segment_distance(const Point& p, const Point& a, const Point& b)
{
    const Point ab = b - a;
    const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

double polyline_distance(const Point& p, const std::vector<Point>& line)
{
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < line.size(); ++i)
        best = std::min(best, segment_distance(p, line[i], line[i + 1]));
    return best;
}

bool inside_polygon(const Point& p, const std::vector<Point>& polygon)
{
    bool inside = false;
    for (std::size_t i = 0, j = polygon.size() - 1; i < polygon.size(); j = i++) {
        const Point& a = polygon[i];
        const Point& b = polygon[j];
        if ((a.y() > p.y()) != (b.y() > p.y()) &&
            p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x())
            inside = !inside;
    }
    return inside;
}

struct Eye
{
    Point centre;
    double half_width = 0.0;
};

// Facial features in mean-shape (x, y) coordinates.
class FacePainter
{
public:
    explicit FacePainter(const model::MorphableModel& model)
    {
        const auto& map = model.landmarks();
        auto at = [&](int id) -> std::optional<Point> {
            const auto it = map.find(std::to_string(id));
            if (it == map.end())
                return std::nullopt;
            return model.mean_vertex(it->second).head<2>();
        };
        auto collect = [&](std::initializer_list<int> ids) {
            std::vector<Point> points;
            for (int id : ids) {
                const auto p = at(id);
                if (!p)
                    return std::vector<Point>{};
                points.push_back(*p);
            }
            return points;
        };
        for (const auto& ids : {std::initializer_list<int>{18, 19, 20, 21, 22}, {23, 24, 25, 26, 27}}) {
            auto brow = collect(ids);
            if (!brow.empty())
                brows_.push_back(std::move(brow));
        }
        for (const auto& ids : {std::initializer_list<int>{37, 38, 39, 40, 41, 42}, {43, 44, 45, 46, 47, 48}}) {
            const auto contour = collect(ids);
            if (contour.empty())
                continue;
            Eye eye;
            eye.centre = Point::Zero();
            for (const auto& p : contour)
                eye.centre += p / contour.size();
            eye.half_width = 0.5 * (contour[3] - contour[0]).norm();
            eyes_.push_back(eye);
        }
        for (int id : {32, 36}) {
            if (const auto p = at(id))
                nostrils_.push_back(*p);
        }
        lips_ = collect({49, 50, 51, 52, 53, 54, 55, 56, 57, 58, 59, 60});
        mouth_line_ = collect({49, 62, 63, 64, 55});
    }

    Eigen::Vector3d albedo(const Point& p) const
    {
        for (const auto& eye : eyes_) {
            const Point d = p - eye.centre;
            const double ax = 1.1 * eye.half_width;
            const double ay = 0.5 * eye.half_width;
            if (std::pow(d.x() / ax, 2) + std::pow(d.y() / ay, 2) <= 1.0) {
                const double r = d.norm();
                if (r < 0.35 * ay)
                    return {0.03, 0.03, 0.03};
                if (r < 0.9 * ay)
                    return {0.22, 0.28, 0.38};
                return {0.93, 0.92, 0.90};
            }
        }
        for (const auto& brow : brows_) {
            if (polyline_distance(p, brow) < 0.035)
                return {0.26, 0.18, 0.12};
        }
        for (const auto& n : nostrils_) {
            if ((p - n).norm() < 0.028)
                return {0.30, 0.15, 0.12};
        }
        if (!mouth_line_.empty() && polyline_distance(p, mouth_line_) < 0.012)
            return {0.28, 0.08, 0.08};
        if (!lips_.empty() && inside_polygon(p, lips_))
            return {0.72, 0.26, 0.26};
        return {0.80, 0.62, 0.50};
    }

private:
    std::vector<std::vector<Point>> brows_;
    std::vector<Eye> eyes_;
    std::vector<Point> nostrils_;
    std::vector<Point> lips_;
    std::vector<Point> mouth_line_;
};

Eigen::Matrix3Xd vertex_normals(const model::Mesh& mesh)
{
    Eigen::Matrix3Xd normals = Eigen::Matrix3Xd::Zero(3, mesh.vertex_count());
    for (const auto& t : mesh.triangles) {
        const Eigen::Vector3d a = mesh.vertex(t[0]);
        const Eigen::Vector3d n = (mesh.vertex(t[1]) - a).cross(mesh.vertex(t[2]) - a);
        for (int k = 0; k < 3; ++k)
            normals.col(t[k]) += n;
    }
    for (Eigen::Index v = 0; v < normals.cols(); ++v) {
        const double length = normals.col(v).norm();
        if (length > 0.0)
            normals.col(v) /= length;
    }
    return normals;
}

} // namespace

SyntheticFace render_synthetic_face(const model::MorphableModel& model, const Eigen::VectorXd& alpha,
                                    const camera::AffineCamerad& camera, int width, int height,
                                    const std::vector<std::string>& landmark_names)
{
    SyntheticFace face;
    face.alpha = alpha;
    face.camera = camera;
    face.pose = camera::extract_pose_angles(camera);
    face.mesh = model::instantiate(model, alpha);

    const VisibilityBuffer buffer = rasterize_mesh(face.mesh, camera, width, height);
    const FacePainter painter(model);
    const Eigen::Matrix3Xd normals = vertex_normals(face.mesh);
    const Eigen::Vector3d light = camera.towards_viewer();
    const auto& mean = model.shape_model().mean;

    face.image = core::RasterImage(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const int t = buffer.triangle_at(x, y);
            if (t < 0) {
                face.image.set(x, y, {48, 52, 60});
                continue;
            }
            const auto& tri = face.mesh.triangles[t];
            const Eigen::Vector3d& bary = buffer.barycentric[std::size_t(y) * width + x];
            Point reference = Point::Zero();
            Eigen::Vector3d normal = Eigen::Vector3d::Zero();
            for (int k = 0; k < 3; ++k) {
                reference += bary(k) * mean.segment<2>(3 * tri[k]);
                normal += bary(k) * normals.col(tri[k]);
            }
            const double shading = 0.25 + 0.75 * std::max(0.0, normal.normalized().dot(light));
            const Eigen::Vector3d rgb = 255.0 * shading * painter.albedo(reference);
            face.image.set(x, y,
                           {static_cast<std::uint8_t>(std::clamp(std::lround(rgb(0)), 0L, 255L)),
                            static_cast<std::uint8_t>(std::clamp(std::lround(rgb(1)), 0L, 255L)),
                            static_cast<std::uint8_t>(std::clamp(std::lround(rgb(2)), 0L, 255L))});
        }
    }

    const auto& map = model.landmarks();
    for (const auto& name : landmark_names) {
        const auto it = map.find(name);
        if (it == map.end())
            throw Error(ErrorKind::mapping, "landmark not in model: " + name);
        face.landmarks.push_back({name, camera::project(camera, face.mesh.vertex(it->second))});
    }
    return face;
}

SyntheticFace random_synthetic_face(const model::MorphableModel& model, core::Random& rng,
                                    const SyntheticSceneOptions& options,
                                    const std::vector<std::string>& landmark_names)
{
    const int K = model.num_shape_coefficients();
    Eigen::VectorXd alpha(K);
    for (int i = 0; i < K; ++i)
        alpha(i) = rng.uniform(-options.alpha_range, options.alpha_range);
    camera::PoseAngles pose;
    pose.yaw = rng.uniform(-options.max_yaw, options.max_yaw);
    pose.pitch = rng.uniform(-options.max_pitch, options.max_pitch);
    pose.roll = rng.uniform(-options.max_roll, options.max_roll);
    // The landmark region of the synthetic model spans about 1.3 units including margin.
    const double scale =
        options.face_size / 1.3 * rng.uniform(1.0 - options.scale_jitter, 1.0 + options.scale_jitter);
    const Eigen::Vector2d origin(0.5 * options.image_size + rng.uniform(-options.max_shift, options.max_shift),
                                 0.5 * options.image_size + rng.uniform(-options.max_shift, options.max_shift));
    return render_synthetic_face(model, alpha, camera::make_camera(pose, scale, origin), options.image_size,
                                 options.image_size, landmark_names);
}

} /* namespace texture */
} /* namespace morphfit */

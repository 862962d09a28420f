/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: src/camera/affine_camera.cpp
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
#include "morphfit/camera/affine_camera.hpp"
#include "morphfit/camera/normalization.hpp"

#include "Eigen/Geometry"
#include "Eigen/QR"
#include "Eigen/SVD"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace morphfit {
namespace camera {

namespace {
constexpr double rad_to_deg = 180.0 / std::numbers::pi;
constexpr double deg_to_rad = std::numbers::pi / 180.0;
} // namespace

AffineCamerad estimate_affine_camera(const Eigen::Ref<const Eigen::Matrix2Xd>& image_points,
                                     const Eigen::Ref<const Eigen::Matrix3Xd>& model_points)
{
    if (image_points.cols() != model_points.cols())
        throw Error(ErrorKind::dimension, "image and model point counts differ");
    const Eigen::Index n = image_points.cols();
    if (n < 4)
        throw Error(ErrorKind::insufficient_points,
                    "insufficient-points: affine camera estimation needs at least 4 correspondences, got " +
                        std::to_string(n));

    const auto image = normalize_2d(image_points);
    const auto model = normalize_3d(model_points);

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 8);
    Eigen::VectorXd b(2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        a.block<1, 3>(2 * i, 0) = model.points.col(i).transpose();
        a(2 * i, 3) = 1.0;
        a.block<1, 3>(2 * i + 1, 4) = model.points.col(i).transpose();
        a(2 * i + 1, 7) = 1.0;
        b.segment<2>(2 * i) = image.points.col(i);
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < 8)
        throw DegenerateError("model points are coplanar or collinear", static_cast<int>(qr.rank()));
    const Eigen::Matrix<double, 8, 1> p = qr.solve(b);

    Eigen::Matrix<double, 3, 4> normalised;
    normalised.row(0) = p.head<4>().transpose();
    normalised.row(1) = p.tail<4>().transpose();
    normalised.row(2) << 0.0, 0.0, 0.0, 1.0;

    const Eigen::Matrix<double, 3, 4> denormalised =
        image.transform.inverse().matrix() * normalised * model.transform.matrix();
    return AffineCamerad(denormalised.topRows<2>());
}

double reprojection_rmse(const AffineCamerad& camera, const Eigen::Ref<const Eigen::Matrix2Xd>& image_points,
                         const Eigen::Ref<const Eigen::Matrix3Xd>& model_points)
{
    const Eigen::Matrix2Xd projected = project_points<double>(camera, model_points);
    return std::sqrt((projected - image_points).colwise().squaredNorm().mean());
}

Eigen::Matrix3d rotation_from_angles(const PoseAngles& angles)
{
    return (Eigen::AngleAxisd(angles.yaw * deg_to_rad, Eigen::Vector3d::UnitY()) *
            Eigen::AngleAxisd(angles.pitch * deg_to_rad, Eigen::Vector3d::UnitX()) *
            Eigen::AngleAxisd(angles.roll * deg_to_rad, Eigen::Vector3d::UnitZ()))
        .toRotationMatrix();
}

PoseAngles angles_from_rotation(const Eigen::Matrix3d& r)
{
    PoseAngles angles;
    angles.pitch = std::asin(std::clamp(-r(1, 2), -1.0, 1.0)) * rad_to_deg;
    angles.yaw = std::atan2(r(0, 2), r(2, 2)) * rad_to_deg;
    angles.roll = std::atan2(r(1, 0), r(1, 1)) * rad_to_deg;
    return angles;
}

PoseAngles extract_pose_angles(const AffineCamerad& camera)
{
    const Eigen::Matrix<double, 2, 3> linear = camera.linear();
    const Eigen::JacobiSVD<Eigen::Matrix<double, 2, 3>> svd(linear);
    const auto& sv = svd.singularValues();
    if (!(sv(0) > 0.0) || sv(1) <= 1e-12 * sv(0))
        throw DegenerateError("camera linear part is rank-deficient", sv(0) > 0.0 ? 1 : 0);

    const Eigen::Vector3d first = linear.row(0).transpose().normalized();
    const Eigen::Vector3d up = -linear.row(1).transpose();
    const Eigen::Vector3d second = (up - up.dot(first) * first).normalized();
    Eigen::Matrix3d rotation;
    rotation.row(0) = first.transpose();
    rotation.row(1) = second.transpose();
    rotation.row(2) = first.cross(second).transpose();
    return angles_from_rotation(rotation);
}

AffineCamerad make_camera(const PoseAngles& angles, double scale, const Eigen::Vector2d& origin)
{
    const Eigen::Matrix3d r = rotation_from_angles(angles);
    Eigen::Matrix<double, 2, 4> rows;
    rows.block<1, 3>(0, 0) = scale * r.row(0);
    rows.block<1, 3>(1, 0) = -scale * r.row(1);
    rows.col(3) = origin;
    return AffineCamerad(rows);
}

} /* namespace camera */
} /* namespace morphfit */

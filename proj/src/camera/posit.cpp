/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: src/camera/posit.cpp
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
#include "morphfit/camera/posit.hpp"

#include "Eigen/Geometry"
#include "Eigen/LU"
#include "Eigen/QR"
#include "Eigen/SVD"

#include <algorithm>
#include <cmath>
#include <limits>

namespace morphfit {
namespace camera {

namespace {

// Model y-up / z-towards-viewer to camera y-down / z-forward.
const Eigen::Matrix3d flip = Eigen::Vector3d(1.0, -1.0, -1.0).asDiagonal();

Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m)
{
    const Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
    if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0)
        d(2, 2) = -1.0;
    return svd.matrixU() * d * svd.matrixV().transpose();
}

} // namespace

RigidPose estimate_pose_posit(const Eigen::Ref<const Eigen::Matrix2Xd>& image_points,
                              const Eigen::Ref<const Eigen::Matrix3Xd>& model_points, double focal_length,
                              const Eigen::Vector2d& principal_point, const PositOptions& options)
{
    if (image_points.cols() != model_points.cols())
        throw Error(ErrorKind::dimension, "image and model point counts differ");
    const Eigen::Index n = model_points.cols();
    if (n < 4)
        throw Error(ErrorKind::insufficient_points, "insufficient-points: POSIT needs at least 4 correspondences");
    if (!(focal_length > 0.0))
        throw Error(ErrorKind::parameter, "focal length must be positive");

    const Eigen::Vector3d reference = model_points.col(0);
    const Eigen::MatrixXd offsets = (model_points.rightCols(n - 1).colwise() - reference).transpose(); // (n-1) x 3
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(offsets);
    if (qr.rank() < 3)
        throw DegenerateError("POSIT model points are coplanar", static_cast<int>(qr.rank()));
    const Eigen::Matrix3d normal = offsets.transpose() * offsets;
    const Eigen::MatrixXd object_matrix = normal.inverse() * offsets.transpose(); // 3 x (n-1)

    const Eigen::Matrix2Xd centred = image_points.colwise() - principal_point;
    Eigen::VectorXd epsilon = Eigen::VectorXd::Zero(n - 1);
    RigidPose pose;
    bool have_previous = false;

    for (int iteration = 1; iteration <= options.max_iterations; ++iteration) {
        const Eigen::VectorXd xs =
            centred.row(0).tail(n - 1).transpose().cwiseProduct((1.0 + epsilon.array()).matrix()).array() -
            centred(0, 0);
        const Eigen::VectorXd ys =
            centred.row(1).tail(n - 1).transpose().cwiseProduct((1.0 + epsilon.array()).matrix()).array() -
            centred(1, 0);
        const Eigen::Vector3d i_vec = object_matrix * xs;
        const Eigen::Vector3d j_vec = object_matrix * ys;
        const double scale_i = i_vec.norm();
        const double scale_j = j_vec.norm();
        if (!(scale_i > 0.0) || !(scale_j > 0.0) || !std::isfinite(scale_i) || !std::isfinite(scale_j))
            throw DegenerateError("POSIT image points are degenerate", 0);
        const double scale = 0.5 * (scale_i + scale_j);
        const Eigen::Vector3d i_axis = i_vec / scale_i;
        const Eigen::Vector3d k_axis = i_axis.cross(j_vec / scale_j).normalized();
        const Eigen::Vector3d j_axis = k_axis.cross(i_axis);
        const double depth = focal_length / scale;

        Eigen::Matrix3d rotation;
        rotation.row(0) = i_axis.transpose();
        rotation.row(1) = j_axis.transpose();
        rotation.row(2) = k_axis.transpose();
        rotation = nearest_rotation(rotation);
        const Eigen::Vector3d reference_position(centred(0, 0) * depth / focal_length,
                                                 centred(1, 0) * depth / focal_length, depth);
        const Eigen::Vector3d translation = reference_position - rotation * reference;

        const double delta = have_previous
                                 ? std::max((rotation - pose.rotation).cwiseAbs().maxCoeff(),
                                            (translation - pose.translation).norm() / translation.norm())
                                 : std::numeric_limits<double>::infinity();
        pose.rotation = rotation;
        pose.translation = translation;
        pose.iterations = iteration;
        have_previous = true;
        if (delta < options.tolerance)
            return pose;

        epsilon = offsets * rotation.row(2).transpose() / depth;
    }
    throw PositConvergenceError("POSIT did not converge in " + std::to_string(options.max_iterations) + " iterations",
                                pose);
}

PoseAngles pose_angles_from_camera_rotation(const Eigen::Matrix3d& rotation)
{
    return angles_from_rotation(flip * rotation);
}

Eigen::Matrix3d camera_rotation_from_pose_angles(const PoseAngles& angles)
{
    return flip * rotation_from_angles(angles);
}

} /* namespace camera */
} /* namespace morphfit */

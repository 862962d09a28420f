/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: include/morphfit/camera/affine_camera.hpp
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

#ifndef MORPHFIT_CAMERA_AFFINE_CAMERA_HPP
#define MORPHFIT_CAMERA_AFFINE_CAMERA_HPP

#include "morphfit/core/error.hpp"

#include "Eigen/Core"
#include "Eigen/Geometry"

namespace morphfit {
namespace camera {

/**
 * A 3x4 affine camera mapping homogeneous model points to pixel coordinates
 * (origin top-left, y down). The third row is always [0, 0, 0, 1].
 */
template <typename Scalar>
class AffineCamera
{
public:
    using Matrix34 = Eigen::Matrix<Scalar, 3, 4>;

    AffineCamera()
    {
        matrix_.setZero();
        matrix_(0, 0) = Scalar(1);
        matrix_(1, 1) = Scalar(1);
        matrix_(2, 3) = Scalar(1);
    }

    /// Takes the top two rows of `top_rows`; the third row is set to [0, 0, 0, 1].
    explicit AffineCamera(const Eigen::Matrix<Scalar, 2, 4>& top_rows)
    {
        matrix_.template topRows<2>() = top_rows;
        matrix_.row(2) << Scalar(0), Scalar(0), Scalar(0), Scalar(1);
    }

    const Matrix34& matrix() const noexcept
    {
        return matrix_;
    }

    /// The 2x3 linear part.
    Eigen::Matrix<Scalar, 2, 3> linear() const
    {
        return matrix_.template topLeftCorner<2, 3>();
    }

    Eigen::Matrix<Scalar, 2, 1> translation() const
    {
        return matrix_.template topRightCorner<2, 1>();
    }

    /// Unit vector in model space pointing from the face towards the viewer.
    Eigen::Matrix<Scalar, 3, 1> towards_viewer() const
    {
        const Eigen::Matrix<Scalar, 3, 1> r1 = matrix_.template block<1, 3>(0, 0).transpose();
        const Eigen::Matrix<Scalar, 3, 1> r2 = matrix_.template block<1, 3>(1, 0).transpose();
        return r2.cross(r1).normalized();
    }

private:
    Matrix34 matrix_;
};

using AffineCamerad = AffineCamera<double>;

/// Projects a single 3D point. The homogeneous third component is 1 by construction.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, 2, 1> project(const AffineCamera<Scalar>& camera, const Eigen::MatrixBase<Derived>& point)
{
    return camera.linear() * point + camera.translation();
}

/// Projects every column of a 3 x N matrix.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, Eigen::Dynamic> project_points(const AffineCamera<Scalar>& camera,
                                                        const Eigen::Matrix<Scalar, 3, Eigen::Dynamic>& points)
{
    return (camera.linear() * points).colwise() + camera.translation();
}

/**
 * Gold Standard estimation of an affine camera from >= 4 correspondences
 * (Hartley & Zisserman, Multiple View Geometry, Alg. 7.2).
 *
 * Both point sets are similarity-normalised, the 2N x 8 system for the top two
 * rows is solved by column-pivoting QR, and the result is denormalised as
 * C = U^-1 C~ W. Minimises the pixel reprojection SSE over all affine cameras.
 *
 * Throws insufficient-points for N < 4 and DegenerateError (with the rank) if
 * the model points are coplanar or collinear.
 */
AffineCamerad estimate_affine_camera(const Eigen::Ref<const Eigen::Matrix2Xd>& image_points,
                                     const Eigen::Ref<const Eigen::Matrix3Xd>& model_points);

/// Root-mean-square pixel distance between projected model points and image points.
double reprojection_rmse(const AffineCamerad& camera, const Eigen::Ref<const Eigen::Matrix2Xd>& image_points,
                         const Eigen::Ref<const Eigen::Matrix3Xd>& model_points);

/// Head pose in degrees: yaw about y, pitch about x, roll about z (intrinsic y-x-z).
struct PoseAngles
{
    double yaw = 0.0;
    double pitch = 0.0;
    double roll = 0.0;
};

/// R = Ry(yaw) * Rx(pitch) * Rz(roll), acting on model space (x right, y up, z to the viewer).
Eigen::Matrix3d rotation_from_angles(const PoseAngles& angles);

/// Inverse of rotation_from_angles; pitch in [-90, 90], yaw and roll in [-180, 180].
PoseAngles angles_from_rotation(const Eigen::Matrix3d& rotation);

/**
 * Recovers yaw, pitch and roll from the linear part of an affine camera: the
 * two rows are orthonormalised by Gram-Schmidt, the y axis is flipped to undo
 * the image's y-down convention, and the third row is their cross product.
 *
 * Throws DegenerateError if the 2x3 block is rank-deficient.
 */
PoseAngles extract_pose_angles(const AffineCamerad& camera);

/**
 * Builds a scaled-orthographic camera viewing the model rotated by `angles`,
 * scaled by `scale` pixels per model unit and shifted so the model origin
 * lands on `origin` in the image.
 */
AffineCamerad make_camera(const PoseAngles& angles, double scale, const Eigen::Vector2d& origin);

} /* namespace camera */
} /* namespace morphfit */

#endif /* MORPHFIT_CAMERA_AFFINE_CAMERA_HPP */

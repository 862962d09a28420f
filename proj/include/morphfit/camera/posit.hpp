/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: include/morphfit/camera/posit.hpp
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

#ifndef MORPHFIT_CAMERA_POSIT_HPP
#define MORPHFIT_CAMERA_POSIT_HPP

#include "morphfit/camera/affine_camera.hpp"
#include "morphfit/core/error.hpp"

#include "Eigen/Core"

namespace morphfit {
namespace camera {

/**
 * Rigid pose of a model in a pinhole camera frame with x right, y down and
 * z pointing forward from the camera: X_cam = rotation * X_model + translation.
 */
struct RigidPose
{
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
    int iterations = 0;
};

/// Thrown when POSIT does not settle; carries the last iterate.
class PositConvergenceError : public Error
{
public:
    PositConvergenceError(const std::string& message, RigidPose last)
        : Error(ErrorKind::convergence, message), last_iterate_(last)
    {
    }

    const RigidPose& last_iterate() const noexcept
    {
        return last_iterate_;
    }

private:
    RigidPose last_iterate_;
};

struct PositOptions
{
    double tolerance = 1e-6;
    int max_iterations = 100;
};

/**
 * POSIT (DeMenthon & Davis): iterates a scaled-orthographic pose solved from
 * the normal equations of the model points relative to the first point, then
 * corrects the image points for perspective, until the pose changes by less
 * than the tolerance.
 *
 * image_points are pixels; principal_point is subtracted first. The returned
 * rotation is orthonormal to machine precision.
 *
 * Throws insufficient-points for N < 4, DegenerateError for coplanar model
 * points and PositConvergenceError after max_iterations.
 */
RigidPose estimate_pose_posit(const Eigen::Ref<const Eigen::Matrix2Xd>& image_points,
                              const Eigen::Ref<const Eigen::Matrix3Xd>& model_points, double focal_length,
                              const Eigen::Vector2d& principal_point = Eigen::Vector2d::Zero(),
                              const PositOptions& options = {});

/**
 * Head pose angles of a camera-frame rotation. A model whose face points at the
 * camera (model +z towards the viewer, +y up) yields (0, 0, 0); the convention
 * matches extract_pose_angles() for affine cameras.
 */
PoseAngles pose_angles_from_camera_rotation(const Eigen::Matrix3d& rotation);

/// Camera-frame rotation for the given head pose; inverse of pose_angles_from_camera_rotation().
Eigen::Matrix3d camera_rotation_from_pose_angles(const PoseAngles& angles);

} /* namespace camera */
} /* namespace morphfit */

#endif /* MORPHFIT_CAMERA_POSIT_HPP */

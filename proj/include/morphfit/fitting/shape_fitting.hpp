/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: include/morphfit/fitting/shape_fitting.hpp
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

#ifndef MORPHFIT_FITTING_SHAPE_FITTING_HPP
#define MORPHFIT_FITTING_SHAPE_FITTING_HPP

#include "morphfit/camera/affine_camera.hpp"
#include "morphfit/core/landmark.hpp"
#include "morphfit/model/morphable_model.hpp"

#include "Eigen/Core"

#include <optional>
#include <vector>

namespace morphfit {
namespace fitting {

struct FitConfig
{
    double lambda = 3.0;               ///< ridge weight on ||alpha||^2, alpha in stddev units
    int iterations = 5;                ///< camera/shape alternations
    std::optional<int> num_coeffs;     ///< defaults to min(K, 63)
};

/// Data term (landmark reprojection SSE, pixels^2) and regulariser (lambda * ||alpha||^2).
struct CostTerms
{
    double data = 0.0;
    double regulariser = 0.0;

    double total() const noexcept
    {
        return data + regulariser;
    }
};

struct FitResult
{
    camera::AffineCamerad camera;
    Eigen::VectorXd alpha;
    std::vector<CostTerms> trace; ///< one entry per iteration
};

/// Image landmarks paired with the model vertices they correspond to.
struct Correspondences
{
    Eigen::Matrix2Xd image_points;
    std::vector<int> vertex_indices;
};

/**
 * Looks every landmark name up in the model's landmark map. Landmarks with
 * non-finite coordinates (failed detections) are dropped first.
 * Throws a mapping error naming the first unknown landmark.
 */
Correspondences find_correspondences(const model::MorphableModel& model, const core::LandmarkSet& landmarks);

int effective_num_coeffs(const model::MorphableModel& model, const FitConfig& config);

/**
 * Ridge solve of min ||A x - b||^2 + lambda ||x||^2. For lambda > 0 the normal
 * equations are factorised by Cholesky; for lambda == 0 a rank-revealing QR is
 * used and a rank error is thrown if A is rank-deficient.
 */
Eigen::VectorXd solve_ridge(const Eigen::Ref<const Eigen::MatrixXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                            double lambda);

/**
 * Closed-form shape coefficients for a fixed camera:
 *
 *     argmin_alpha  sum_i || x_i - P (mean_i + S_i diag(sigma) alpha) - t ||^2 + lambda ||alpha||^2
 *
 * The homogeneous third coordinate contributes a zero residual under an affine
 * camera, so the system has 2N rows.
 */
Eigen::VectorXd fit_shape(const camera::AffineCamerad& camera, const model::MorphableModel& model,
                          const Correspondences& correspondences, const FitConfig& config);

Eigen::VectorXd fit_shape(const camera::AffineCamerad& camera, const model::MorphableModel& model,
                          const core::LandmarkSet& landmarks, const FitConfig& config);

/// Evaluates the objective for the given camera and coefficients.
CostTerms evaluate_cost(const camera::AffineCamerad& camera, const model::MorphableModel& model,
                        const Correspondences& correspondences, const Eigen::VectorXd& alpha, double lambda);

/**
 * Alternates camera estimation and shape fitting. The first camera is
 * estimated against the mean shape; each iteration then fits the shape with
 * the current camera and re-estimates the camera against the identity-specific
 * shape. Both steps are exact block minimisers, so the recorded objective is
 * non-increasing.
 *
 * Needs N >= 4 landmarks after dropping missing ones.
 */
FitResult fit(const model::MorphableModel& model, const core::LandmarkSet& landmarks, const FitConfig& config = {});

FitResult fit(const model::MorphableModel& model, const Correspondences& correspondences,
              const FitConfig& config = {});

} /* namespace fitting */
} /* namespace morphfit */

#endif /* MORPHFIT_FITTING_SHAPE_FITTING_HPP */

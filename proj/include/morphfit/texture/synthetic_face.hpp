/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: include/morphfit/texture/synthetic_face.hpp
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

#ifndef MORPHFIT_TEXTURE_SYNTHETIC_FACE_HPP
#define MORPHFIT_TEXTURE_SYNTHETIC_FACE_HPP

#include "morphfit/camera/affine_camera.hpp"
#include "morphfit/core/image.hpp"
#include "morphfit/core/landmark.hpp"
#include "morphfit/core/random.hpp"
#include "morphfit/model/morphable_model.hpp"

#include "Eigen/Core"

#include <string>
#include <vector>

namespace morphfit {
namespace texture {

/**
 * A rendered face together with everything that generated it. `landmarks`
 * are the exact projections of the model's landmark vertices.
 */
struct SyntheticFace
{
    core::RasterImage image;
    core::LandmarkSet landmarks;
    model::Mesh mesh;
    camera::AffineCamerad camera;
    Eigen::VectorXd alpha;
    camera::PoseAngles pose;
};

/**
 * Renders an instance of the model with a procedural albedo (skin, brows,
 * eyes, nostrils, lips) painted in mean-shape coordinates, so it moves with
 * the shape, and Lambertian shading lit from the viewer.
 *
 * Facial features are laid out from the model's iBUG-named landmarks; a model
 * without them renders as plain skin.
 */
SyntheticFace render_synthetic_face(const model::MorphableModel& model, const Eigen::VectorXd& alpha,
                                    const camera::AffineCamerad& camera, int width, int height,
                                    const std::vector<std::string>& landmark_names);

struct SyntheticSceneOptions
{
    int image_size = 192;     ///< square output
    double face_size = 112.0; ///< approximate landmark extent in pixels (the derived face box is ~128)
    double max_yaw = 30.0;    ///< degrees, uniform in [-max, max]
    double max_pitch = 10.0;
    double max_roll = 10.0;
    double alpha_range = 0.8; ///< shape coefficients uniform in [-range, range]
    double max_shift = 8.0;   ///< pixels, uniform offset of the face centre
    double scale_jitter = 0.1;
};

/// Draws a random shape and pose and renders it.
SyntheticFace random_synthetic_face(const model::MorphableModel& model, core::Random& rng,
                                    const SyntheticSceneOptions& options,
                                    const std::vector<std::string>& landmark_names);

} /* namespace texture */
} /* namespace morphfit */

#endif /* MORPHFIT_TEXTURE_SYNTHETIC_FACE_HPP */

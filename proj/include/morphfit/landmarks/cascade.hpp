/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: include/morphfit/landmarks/cascade.hpp
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

#ifndef MORPHFIT_LANDMARKS_CASCADE_HPP
#define MORPHFIT_LANDMARKS_CASCADE_HPP

#include "morphfit/core/image.hpp"
#include "morphfit/core/landmark.hpp"
#include "morphfit/landmarks/hog.hpp"

#include "Eigen/Core"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace morphfit {
namespace landmarks {

/**
 * One linear update: maps the concatenated HOG features (D) at the current
 * estimate to a landmark displacement (2L, interleaved x/y) in face-box units.
 */
struct LinearStage
{
    Eigen::MatrixXd weights; ///< 2L x D
    Eigen::VectorXd bias;    ///< 2L
};

/**
 * A supervised-descent landmark regressor. Landmark positions are expressed
 * relative to the face box: (0, 0) is its top-left and (1, 1) its
 * bottom-right corner. HOG patches are sampled at a spacing of
 * box side / reference_box_size pixels.
 */
struct RegressorCascade
{
    std::vector<std::string> names;
    Eigen::Matrix2Xd mean_landmarks; ///< 2 x L, in unit-box coordinates
    HogConfig hog;
    double reference_box_size = 128.0;
    std::vector<LinearStage> stages;

    int num_landmarks() const noexcept
    {
        return static_cast<int>(names.size());
    }
};

struct TrainingSample
{
    Eigen::ArrayXXd image; ///< grayscale, see core::to_grayscale
    core::LandmarkSet landmarks;
    core::FaceBox box;
};

struct TrainingOptions
{
    int stages = 4;
    /// Ridge weight per training row: the penalty is ridge * rows * ||W||^2.
    double ridge = 0.05;
    int perturbations = 2;            ///< initialisations per sample
    double translation_jitter = 0.1;  ///< fraction of the box side
    double scale_jitter = 0.1;        ///< relative scale about the box centre
    std::uint64_t seed = 0;
    HogConfig hog;
};

struct TrainingResult
{
    RegressorCascade cascade;
    /// Mean point error over box diagonal: entry 0 at initialisation, entry s after stage s.
    std::vector<double> training_errors;
};

/**
 * Trains a cascade by stage-wise ridge regression from features at the
 * current estimates to the remaining displacement. Each stage solves
 * min ||Xc W - Yc||^2 + ridge * n * ||W||^2 on centred features and targets,
 * with an unpenalised bias.
 *
 * Throws an insufficient-data error for fewer than 100 samples, a mismatch
 * error for inconsistent landmark names and a rank error when the features
 * carry no variation or ridge = 0 leaves the system singular.
 */
TrainingResult train_cascade(const std::vector<TrainingSample>& samples, const TrainingOptions& options = {});

/**
 * Places the mean landmarks in the box and applies every stage.
 * Throws a parameter error for a box with zero area.
 */
core::LandmarkSet detect_landmarks(const Eigen::ArrayXXd& image, const core::FaceBox& box,
                                   const RegressorCascade& cascade);

core::LandmarkSet detect_landmarks(const core::RasterImage& image, const core::FaceBox& box,
                                   const RegressorCascade& cascade);

/// Mean point distance divided by the box diagonal.
double normalised_error(const core::LandmarkSet& estimate, const core::LandmarkSet& truth, const core::FaceBox& box);

void save_cascade(const RegressorCascade& cascade, std::ostream& out);
void save_cascade(const RegressorCascade& cascade, const std::filesystem::path& path);
RegressorCascade load_cascade(std::istream& in);
RegressorCascade load_cascade(const std::filesystem::path& path);

} /* namespace landmarks */
} /* namespace morphfit */

#endif /* MORPHFIT_LANDMARKS_CASCADE_HPP */

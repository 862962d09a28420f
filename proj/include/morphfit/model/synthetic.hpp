/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: include/morphfit/model/synthetic.hpp
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

#ifndef MORPHFIT_MODEL_SYNTHETIC_HPP
#define MORPHFIT_MODEL_SYNTHETIC_HPP

#include "morphfit/model/morphable_model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace morphfit {
namespace model {

struct SyntheticModelOptions
{
    bool with_colour = false;
};

/**
 * Generates a face-like Morphable Model for tests and demos.
 *
 * The base mesh is a triangulated grid wrapped onto a half-ellipsoid with a nose
 * ridge, facing +z (x right, y up). The shape basis orthonormalises K smooth
 * random deformation fields (low-frequency sinusoid mixtures) after removing the
 * global affine modes of the mesh and of the 49-point landmark set, so pose and
 * identity are separable from the landmarks. Standard deviations decay with the
 * component index. 49 landmarks named by their iBUG-68 numbers are attached to
 * fixed grid vertices.
 *
 * Deterministic in seed. Requires vertex_count >= 50 and 1 <= num_coefficients < vertex_count.
 */
MorphableModel generate_synthetic_model(std::uint64_t seed, int vertex_count, int num_coefficients,
                                        const SyntheticModelOptions& options = {});

/// Landmark names of the 7-, 13- and 49-point schemes, each a subset of the next.
const std::vector<std::string>& landmark_set_7();
const std::vector<std::string>& landmark_set_13();
const std::vector<std::string>& landmark_set_49();

} /* namespace model */
} /* namespace morphfit */

#endif /* MORPHFIT_MODEL_SYNTHETIC_HPP */

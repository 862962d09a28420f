/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: include/morphfit/model/morphable_model.hpp
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

#ifndef MORPHFIT_MODEL_MORPHABLE_MODEL_HPP
#define MORPHFIT_MODEL_MORPHABLE_MODEL_HPP

#include "Eigen/Core"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace morphfit {
namespace model {

using Triangle = std::array<int, 3>;

/**
 * A PCA model over per-vertex 3-vectors (shape or RGB colour).
 *
 * Basis columns are unit-norm eigenvectors; the coefficient of column i is
 * measured in units of stddevs(i), i.e. an instance is
 * mean + sum_i coeff_i * stddevs(i) * basis.col(i).
 */
struct PcaModel
{
    Eigen::VectorXd mean;    ///< 3V, interleaved [x1, y1, z1, ..., xV, yV, zV]
    Eigen::MatrixXd basis;   ///< 3V x K
    Eigen::VectorXd stddevs; ///< K, strictly positive, non-increasing

    int num_components() const noexcept
    {
        return static_cast<int>(basis.cols());
    }
};

/**
 * A 3D Morphable Model: shape PCA model, optional colour PCA model, a
 * triangulation and a mapping from landmark names to vertex indices.
 *
 * Immutable after construction. The constructor validates every invariant
 * (orthonormal basis, positive sorted standard deviations, index ranges,
 * edge-connected triangulation) and throws morphfit::Error on violation.
 */
class MorphableModel
{
public:
    MorphableModel(PcaModel shape, std::vector<Triangle> triangles, std::map<std::string, int> landmarks,
                   std::optional<PcaModel> colour = std::nullopt);

    int vertex_count() const noexcept
    {
        return static_cast<int>(shape_.mean.size() / 3);
    }
    int num_shape_coefficients() const noexcept
    {
        return shape_.num_components();
    }

    const PcaModel& shape_model() const noexcept
    {
        return shape_;
    }
    const std::optional<PcaModel>& colour_model() const noexcept
    {
        return colour_;
    }
    const std::vector<Triangle>& triangles() const noexcept
    {
        return triangles_;
    }
    const std::map<std::string, int>& landmarks() const noexcept
    {
        return landmarks_;
    }

    Eigen::Vector3d mean_vertex(int index) const
    {
        return shape_.mean.segment<3>(3 * index);
    }

    /// Hash of the triangulation and mean shape; identifies charts computed for this model.
    std::uint64_t fingerprint() const noexcept
    {
        return fingerprint_;
    }

    friend bool operator==(const MorphableModel& a, const MorphableModel& b);

private:
    PcaModel shape_;
    std::optional<PcaModel> colour_;
    std::vector<Triangle> triangles_;
    std::map<std::string, int> landmarks_;
    std::uint64_t fingerprint_ = 0;
};

/// A mesh generated from a model. Shares V and the triangle list with its source model.
struct Mesh
{
    Eigen::VectorXd vertices; ///< 3V interleaved
    std::vector<Triangle> triangles;
    std::optional<Eigen::VectorXd> colours; ///< 3V interleaved RGB in [0, 1]
    std::uint64_t source_fingerprint = 0;

    int vertex_count() const noexcept
    {
        return static_cast<int>(vertices.size() / 3);
    }
    Eigen::Vector3d vertex(int index) const
    {
        return vertices.segment<3>(3 * index);
    }
};

/**
 * Evaluates a PCA instance. `coefficients` may be shorter than the number of
 * basis vectors; the remaining coefficients are zero.
 */
Eigen::VectorXd draw_sample(const PcaModel& pca, const Eigen::Ref<const Eigen::VectorXd>& coefficients);

Eigen::VectorXd instantiate_shape(const MorphableModel& model, const Eigen::Ref<const Eigen::VectorXd>& alpha);

/**
 * Builds the mesh for shape coefficients alpha and, if given, colour coefficients beta.
 * Throws a dimension error if a coefficient vector is longer than its basis, and a
 * parameter error if beta is given for a model without colour.
 */
Mesh instantiate(const MorphableModel& model, const Eigen::Ref<const Eigen::VectorXd>& alpha,
                 const std::optional<Eigen::VectorXd>& beta = std::nullopt);

/// Gathers the mean-shape positions of the given vertices as columns of a 3 x N matrix.
Eigen::Matrix3Xd gather_vertices(const Eigen::VectorXd& vertices, const std::vector<int>& indices);

/// Max deviation of basis^T basis from identity.
double orthonormality_residual(const Eigen::MatrixXd& basis);

/// Number of edge-connected components of a triangulation over vertex_count vertices.
int count_components(int vertex_count, const std::vector<Triangle>& triangles);

} /* namespace model */
} /* namespace morphfit */

#endif /* MORPHFIT_MODEL_MORPHABLE_MODEL_HPP */

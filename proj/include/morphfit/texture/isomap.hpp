/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: include/morphfit/texture/isomap.hpp
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

#ifndef MORPHFIT_TEXTURE_ISOMAP_HPP
#define MORPHFIT_TEXTURE_ISOMAP_HPP

#include "morphfit/model/morphable_model.hpp"

#include "Eigen/Core"

#include <cstdint>
#include <vector>

namespace morphfit {
namespace texture {

/**
 * Per-vertex texture coordinates in [0, 1]^2 (u right, v down), shared by
 * every shape of one model. `fingerprint` ties the chart to the model it was
 * computed from.
 */
struct IsomapChart
{
    Eigen::Matrix2Xd uv;
    std::uint64_t fingerprint = 0;

    friend bool operator==(const IsomapChart&, const IsomapChart&) = default;
};

struct IsomapOptions
{
    /// Vertices up to this many edges apart are joined by their straight-line distance.
    int neighbourhood_rings = 3;
};

/**
 * All-pairs approximate geodesic distances: Dijkstra over the graph joining
 * each vertex to its k-ring neighbours, weighted by Euclidean distance.
 * With rings = 1 this is the plain mesh edge graph.
 *
 * Throws a connectivity error listing the component count if the mesh is not
 * edge-connected.
 */
Eigen::MatrixXd geodesic_distances(const Eigen::VectorXd& vertices, const std::vector<model::Triangle>& triangles,
                                   int rings);

/**
 * Classical MDS to two dimensions: the two leading eigenvectors of the
 * double-centred squared-distance matrix, found by deterministic subspace
 * iteration. Returns a 2 x V embedding.
 */
Eigen::Matrix2Xd classical_mds_2d(const Eigen::MatrixXd& distances);

/**
 * Isomap chart of the model's mean shape: geodesic distances, classical MDS,
 * then a fixed orientation (orthogonal Procrustes onto the frontal x/y
 * projection of the mean, so u grows with model x and v grows downwards) and
 * an aspect-preserving fit into the unit square.
 */
IsomapChart compute_isomap(const model::MorphableModel& model, const IsomapOptions& options = {});

/**
 * Kruskal stress-1 of embedding distances against target distances, after the
 * least-squares uniform rescaling of the embedding.
 */
double kruskal_stress(const Eigen::MatrixXd& target_distances, const Eigen::Matrix2Xd& embedding);

/// Mean over pairs of |s * d_ij - t_ij| / t_ij with the same optimal scale s.
double mean_relative_distortion(const Eigen::MatrixXd& target_distances, const Eigen::Matrix2Xd& embedding);

} /* namespace texture */
} /* namespace morphfit */

#endif /* MORPHFIT_TEXTURE_ISOMAP_HPP */

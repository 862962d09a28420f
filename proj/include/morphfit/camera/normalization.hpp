/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: include/morphfit/camera/normalization.hpp
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

#ifndef MORPHFIT_CAMERA_NORMALIZATION_HPP
#define MORPHFIT_CAMERA_NORMALIZATION_HPP

#include "morphfit/core/error.hpp"

#include "Eigen/Core"

#include <cmath>

namespace morphfit {
namespace camera {

/**
 * A similarity x -> scale * x + translation in Dim dimensions (uniform
 * scale, no rotation), scale > 0.
 */
template <typename Scalar, int Dim>
struct SimilarityTransform
{
    Scalar scale = Scalar(1);
    Eigen::Matrix<Scalar, Dim, 1> translation = Eigen::Matrix<Scalar, Dim, 1>::Zero();

    /// Homogeneous (Dim+1) x (Dim+1) matrix.
    Eigen::Matrix<Scalar, Dim + 1, Dim + 1> matrix() const
    {
        Eigen::Matrix<Scalar, Dim + 1, Dim + 1> m = Eigen::Matrix<Scalar, Dim + 1, Dim + 1>::Identity();
        m.template topLeftCorner<Dim, Dim>() *= scale;
        m.template topRightCorner<Dim, 1>() = translation;
        return m;
    }

    SimilarityTransform inverse() const
    {
        return {Scalar(1) / scale, -translation / scale};
    }

    template <typename Derived>
    Eigen::Matrix<Scalar, Dim, Eigen::Dynamic> apply(const Eigen::MatrixBase<Derived>& points) const
    {
        return (scale * points).colwise() + translation;
    }
};

using SimilarityTransform2D = SimilarityTransform<double, 2>;
using SimilarityTransform3D = SimilarityTransform<double, 3>;

template <typename Scalar, int Dim>
struct NormalizedPoints
{
    Eigen::Matrix<Scalar, Dim, Eigen::Dynamic> points;
    SimilarityTransform<Scalar, Dim> transform; ///< maps the inputs onto `points`
};

/**
 * Translates the centroid of the points (columns) to the origin and scales
 * them so the RMS distance from the origin is sqrt(Dim): sqrt(2) for image
 * points, sqrt(3) for model points.
 *
 * Throws a degenerate-configuration error if fewer than 2 points are given or
 * all points coincide.
 */
template <typename Derived>
NormalizedPoints<typename Derived::Scalar, Derived::RowsAtCompileTime>
normalize_points(const Eigen::MatrixBase<Derived>& points)
{
    using Scalar = typename Derived::Scalar;
    constexpr int Dim = Derived::RowsAtCompileTime;
    static_assert(Dim != Eigen::Dynamic, "point dimension must be fixed at compile time");
    if (points.cols() < 2)
        throw DegenerateError("normalisation needs at least 2 points", 0);

    const Eigen::Matrix<Scalar, Dim, 1> centroid = points.rowwise().mean();
    const Eigen::Matrix<Scalar, Dim, Eigen::Dynamic> centred = points.colwise() - centroid;
    const Scalar rms = std::sqrt(centred.colwise().squaredNorm().mean());
    if (!(rms > Scalar(0)) || !std::isfinite(static_cast<double>(rms)))
        throw DegenerateError("all points coincide", 0);

    NormalizedPoints<Scalar, Dim> result;
    result.transform.scale = std::sqrt(Scalar(Dim)) / rms;
    result.transform.translation = -result.transform.scale * centroid;
    result.points = result.transform.scale * centred;
    return result;
}

inline NormalizedPoints<double, 2> normalize_2d(const Eigen::Ref<const Eigen::Matrix2Xd>& points)
{
    return normalize_points(points);
}

inline NormalizedPoints<double, 3> normalize_3d(const Eigen::Ref<const Eigen::Matrix3Xd>& points)
{
    return normalize_points(points);
}

} /* namespace camera */
} /* namespace morphfit */

#endif /* MORPHFIT_CAMERA_NORMALIZATION_HPP */

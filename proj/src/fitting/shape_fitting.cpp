/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: src/fitting/shape_fitting.cpp
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
#include "morphfit/fitting/shape_fitting.hpp"
#include "morphfit/core/error.hpp"

#include "Eigen/Cholesky"
#include "Eigen/QR"

#include <algorithm>
#include <cmath>

namespace morphfit {
namespace fitting {

namespace {

void validate_config(const FitConfig& config)
{
    if (!(config.lambda >= 0.0) || !std::isfinite(config.lambda))
        throw Error(ErrorKind::parameter, "lambda must be a finite non-negative number");
    if (config.iterations < 1)
        throw Error(ErrorKind::parameter, "iterations must be at least 1");
    if (config.num_coeffs && *config.num_coeffs < 0)
        throw Error(ErrorKind::parameter, "num_coeffs must be non-negative");
}

// Rows of the shape basis belonging to the corresponding vertices, scaled by sigma.
Eigen::MatrixXd landmark_basis(const model::MorphableModel& model, const std::vector<int>& vertices, int k)
{
    const auto& pca = model.shape_model();
    Eigen::MatrixXd rows(3 * vertices.size(), k);
    for (std::size_t i = 0; i < vertices.size(); ++i)
        rows.middleRows<3>(3 * i) = pca.basis.block(3 * vertices[i], 0, 3, k);
    return rows * pca.stddevs.head(k).asDiagonal();
}

Eigen::VectorXd landmark_mean(const model::MorphableModel& model, const std::vector<int>& vertices)
{
    Eigen::VectorXd mean(3 * vertices.size());
    for (std::size_t i = 0; i < vertices.size(); ++i)
        mean.segment<3>(3 * i) = model.mean_vertex(vertices[i]);
    return mean;
}

Eigen::Matrix3Xd as_points(const Eigen::VectorXd& stacked)
{
    return Eigen::Map<const Eigen::Matrix3Xd>(stacked.data(), 3, stacked.size() / 3);
}

} // namespace

Correspondences find_correspondences(const model::MorphableModel& model, const core::LandmarkSet& landmarks)
{
    Correspondences c;
    const auto present = core::drop_missing(landmarks);
    c.image_points.resize(2, present.size());
    for (std::size_t i = 0; i < present.size(); ++i) {
        const auto found = model.landmarks().find(present[i].name);
        if (found == model.landmarks().end())
            throw Error(ErrorKind::mapping, "landmark '" + present[i].name + "' has no vertex in the model");
        c.image_points.col(i) = present[i].point;
        c.vertex_indices.push_back(found->second);
    }
    return c;
}

int effective_num_coeffs(const model::MorphableModel& model, const FitConfig& config)
{
    const int k = model.num_shape_coefficients();
    return config.num_coeffs ? std::min(*config.num_coeffs, k) : std::min(k, 63);
}

Eigen::VectorXd solve_ridge(const Eigen::Ref<const Eigen::MatrixXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                            double lambda)
{
    if (a.cols() == 0)
        return Eigen::VectorXd();
    if (lambda == 0.0) {
        const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
        if (qr.rank() < a.cols())
            throw Error(ErrorKind::rank, "rank: design matrix has rank " + std::to_string(qr.rank()) + " < " +
                                             std::to_string(a.cols()) + " and lambda is 0");
        return qr.solve(b);
    }
    Eigen::MatrixXd normal = a.transpose() * a;
    normal.diagonal().array() += lambda;
    const Eigen::LLT<Eigen::MatrixXd> llt(normal);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorKind::numerical, "ridge normal equations are not positive definite");
    return llt.solve(a.transpose() * b);
}

Eigen::VectorXd fit_shape(const camera::AffineCamerad& camera, const model::MorphableModel& model,
                          const Correspondences& correspondences, const FitConfig& config)
{
    validate_config(config);
    const auto n = correspondences.vertex_indices.size();
    if (n == 0)
        throw Error(ErrorKind::insufficient_points, "insufficient-points: shape fitting needs at least 1 landmark");
    const int k = effective_num_coeffs(model, config);

    const Eigen::MatrixXd basis = landmark_basis(model, correspondences.vertex_indices, k);
    const Eigen::VectorXd mean = landmark_mean(model, correspondences.vertex_indices);
    const Eigen::Matrix<double, 2, 3> p = camera.linear();

    Eigen::MatrixXd a(2 * n, k);
    Eigen::VectorXd b(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        a.middleRows<2>(2 * i) = p * basis.middleRows<3>(3 * i);
        b.segment<2>(2 * i) =
            correspondences.image_points.col(i) - camera::project(camera, mean.segment<3>(3 * i));
    }
    return solve_ridge(a, b, config.lambda);
}

Eigen::VectorXd fit_shape(const camera::AffineCamerad& camera, const model::MorphableModel& model,
                          const core::LandmarkSet& landmarks, const FitConfig& config)
{
    return fit_shape(camera, model, find_correspondences(model, landmarks), config);
}

CostTerms evaluate_cost(const camera::AffineCamerad& camera, const model::MorphableModel& model,
                        const Correspondences& correspondences, const Eigen::VectorXd& alpha, double lambda)
{
    const int k = static_cast<int>(alpha.size());
    const Eigen::VectorXd shape = landmark_mean(model, correspondences.vertex_indices) +
                                  landmark_basis(model, correspondences.vertex_indices, k) * alpha;
    const Eigen::Matrix2Xd projected = camera::project_points<double>(camera, as_points(shape));
    return {(projected - correspondences.image_points).squaredNorm(), lambda * alpha.squaredNorm()};
}

FitResult fit(const model::MorphableModel& model, const Correspondences& correspondences, const FitConfig& config)
{
    validate_config(config);
    if (correspondences.vertex_indices.size() < 4)
        throw Error(ErrorKind::insufficient_points,
                    "insufficient-points: fitting needs at least 4 landmarks, got " +
                        std::to_string(correspondences.vertex_indices.size()));
    const int k = effective_num_coeffs(model, config);
    const Eigen::VectorXd mean = landmark_mean(model, correspondences.vertex_indices);
    const Eigen::MatrixXd basis = landmark_basis(model, correspondences.vertex_indices, k);

    FitResult result;
    result.camera = camera::estimate_affine_camera(correspondences.image_points, as_points(mean));
    result.alpha = Eigen::VectorXd::Zero(k);
    for (int iteration = 0; iteration < config.iterations; ++iteration) {
        result.alpha = fit_shape(result.camera, model, correspondences, config);
        const Eigen::VectorXd shape = mean + basis * result.alpha;
        result.camera = camera::estimate_affine_camera(correspondences.image_points, as_points(shape));
        const CostTerms cost = evaluate_cost(result.camera, model, correspondences, result.alpha, config.lambda);
        if (!std::isfinite(cost.total()))
            throw Error(ErrorKind::numerical, "numerical-failure: non-finite fitting cost");
        result.trace.push_back(cost);
    }
    return result;
}

FitResult fit(const model::MorphableModel& model, const core::LandmarkSet& landmarks, const FitConfig& config)
{
    return fit(model, find_correspondences(model, landmarks), config);
}

} /* namespace fitting */
} /* namespace morphfit */

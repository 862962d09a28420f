/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: tests/support.hpp
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

#ifndef MORPHFIT_TESTS_SUPPORT_HPP
#define MORPHFIT_TESTS_SUPPORT_HPP

#include "morphfit/camera/affine_camera.hpp"
#include "morphfit/core/landmark.hpp"
#include "morphfit/core/random.hpp"
#include "morphfit/eval/det.hpp"
#include "morphfit/model/morphable_model.hpp"
#include "morphfit/model/synthetic.hpp"
#include "morphfit/texture/isomap.hpp"
#include "morphfit/texture/render.hpp"

#include "Eigen/Cholesky"
#include "Eigen/Core"
#include "Eigen/LU"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

namespace morphfit {
namespace test {

/// Shared V=500, K=20 synthetic model (seed 7).
inline const model::MorphableModel& small_model()
{
    static const model::MorphableModel m = model::generate_synthetic_model(7, 500, 20);
    return m;
}

inline Eigen::VectorXd random_alpha(core::Random& rng, int k, double range = 3.0)
{
    Eigen::VectorXd alpha(k);
    for (int i = 0; i < k; ++i)
        alpha(i) = rng.uniform(-range, range);
    return alpha;
}

/// Rotation + scale camera for a face of about 100-200 px.
inline camera::AffineCamerad random_camera(core::Random& rng, double max_angle = 40.0)
{
    const camera::PoseAngles pose{rng.uniform(-max_angle, max_angle), rng.uniform(-0.5 * max_angle, 0.5 * max_angle),
                                  rng.uniform(-0.5 * max_angle, 0.5 * max_angle)};
    return camera::make_camera(pose, rng.uniform(50.0, 100.0), {rng.uniform(100.0, 200.0), rng.uniform(100.0, 200.0)});
}

/// Projects the named landmark vertices of the instance, optionally with Gaussian pixel noise.
inline core::LandmarkSet project_landmarks(const model::MorphableModel& m, const Eigen::VectorXd& alpha,
                                           const camera::AffineCamerad& camera,
                                           const std::vector<std::string>& names, core::Random* rng = nullptr,
                                           double noise = 0.0)
{
    const Eigen::VectorXd shape = model::instantiate_shape(m, alpha);
    core::LandmarkSet out;
    for (const auto& name : names) {
        Eigen::Vector2d p = camera::project(camera, Eigen::Vector3d(shape.segment<3>(3 * m.landmarks().at(name))));
        if (rng)
            p += Eigen::Vector2d(rng->normal(0.0, noise), rng->normal(0.0, noise));
        out.push_back({name, p});
    }
    return out;
}

/// Dense ridge solution (A^T A + lambda I)^-1 A^T b via explicit normal equations.
inline Eigen::VectorXd ridge_oracle(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double lambda)
{
    const Eigen::MatrixXd normal = a.transpose() * a + lambda * Eigen::MatrixXd::Identity(a.cols(), a.cols());
    return normal.fullPivLu().solve(a.transpose() * b);
}

/// Least-squares affine camera from the raw (unnormalised) 2N x 8 system.
inline camera::AffineCamerad affine_camera_oracle(const Eigen::Matrix2Xd& x, const Eigen::Matrix3Xd& X)
{
    const Eigen::Index n = x.cols();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 8);
    Eigen::VectorXd b(2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        a.block<1, 3>(2 * i, 0) = X.col(i).transpose();
        a(2 * i, 3) = 1.0;
        a.block<1, 3>(2 * i + 1, 4) = X.col(i).transpose();
        a(2 * i + 1, 7) = 1.0;
        b(2 * i) = x(0, i);
        b(2 * i + 1) = x(1, i);
    }
    const Eigen::VectorXd p = (a.transpose() * a).ldlt().solve(a.transpose() * b);
    Eigen::Matrix<double, 2, 4> rows;
    rows.row(0) = p.head<4>().transpose();
    rows.row(1) = p.tail<4>().transpose();
    return camera::AffineCamerad(rows);
}

/**
 * Random score matrix with up to `max_side` probes and gallery entries. Some
 * ids appear on both sides (self-matches), and scores are quantised so that
 * ties occur.
 */
inline eval::ScoreMatrix random_score_matrix(core::Random& rng, int max_side = 50)
{
    eval::ScoreMatrix m;
    const int probes = 2 + static_cast<int>(rng.uniform(0.0, max_side - 1.0));
    const int gallery = 2 + static_cast<int>(rng.uniform(0.0, max_side - 1.0));
    const int subjects = 2 + static_cast<int>(rng.uniform(0.0, 6.0));
    const double step = rng.uniform(0.0, 1.0) < 0.5 ? 0.05 : 0.0;
    auto label = [&](const std::string& id) {
        if (!m.subjects.count(id))
            m.subjects[id] = "s" + std::to_string(static_cast<int>(rng.uniform(0.0, subjects)));
    };
    for (int g = 0; g < gallery; ++g) {
        m.gallery_ids.push_back("img" + std::to_string(g));
        label(m.gallery_ids.back());
    }
    for (int p = 0; p < probes; ++p) {
        // Every third probe reuses a gallery image.
        const bool reused = p % 3 == 0 && p / 3 < gallery;
        m.probe_ids.push_back(reused ? "img" + std::to_string(p / 3) : "probe" + std::to_string(p));
        label(m.probe_ids.back());
        m.yaw[m.probe_ids.back()] = rng.uniform(-80.0, 80.0);
    }
    m.scores.resize(probes, gallery);
    for (int p = 0; p < probes; ++p) {
        for (int g = 0; g < gallery; ++g) {
            const bool genuine = m.subjects[m.probe_ids[p]] == m.subjects[m.gallery_ids[g]];
            double s = rng.normal(genuine ? 1.0 : 0.0, 0.7);
            if (step > 0.0)
                s = step * std::round(s / step);
            m.scores(p, g) = s;
        }
    }
    bool genuine = false, impostor = false;
    for (const auto& p : m.probe_ids)
        for (const auto& g : m.gallery_ids)
            if (p != g)
                (m.subjects[p] == m.subjects[g] ? genuine : impostor) = true;
    return genuine && impostor ? m : random_score_matrix(rng, max_side);
}

/// DET samples by exhaustive enumeration: for each candidate threshold, count every pair again.
inline std::vector<eval::DetPoint> det_oracle(const eval::ScoreMatrix& m)
{
    std::set<double> candidates;
    for (std::size_t p = 0; p < m.probe_ids.size(); ++p)
        for (std::size_t g = 0; g < m.gallery_ids.size(); ++g)
            if (m.probe_ids[p] != m.gallery_ids[g])
                candidates.insert(m.scores(p, g));
    candidates.insert(std::numeric_limits<double>::infinity());

    std::vector<eval::DetPoint> out;
    for (double t : candidates) {
        double genuine = 0, impostor = 0, rejected = 0, accepted = 0;
        for (std::size_t p = 0; p < m.probe_ids.size(); ++p) {
            for (std::size_t g = 0; g < m.gallery_ids.size(); ++g) {
                if (m.probe_ids[p] == m.gallery_ids[g])
                    continue;
                const bool same = m.subjects.at(m.probe_ids[p]) == m.subjects.at(m.gallery_ids[g]);
                const bool accept = m.scores(p, g) >= t;
                if (same) {
                    genuine += 1;
                    rejected += !accept;
                } else {
                    impostor += 1;
                    accepted += accept;
                }
            }
        }
        out.push_back({t, accepted / impostor, rejected / genuine});
    }
    return out;
}

/**
 * Operating point oracle: among samples with FAR <= target pick the most
 * lenient one, then interpolate linearly in FAR towards its more lenient
 * neighbour.
 */
inline double frr_at_far_oracle(const std::vector<eval::DetPoint>& samples, double target)
{
    std::size_t best = samples.size();
    for (std::size_t k = 0; k < samples.size(); ++k)
        if (samples[k].far <= target && (best == samples.size() || samples[k].threshold < samples[best].threshold))
            best = k;
    if (best == samples.size())
        return samples.back().frr;
    if (best == 0)
        return samples[0].frr;
    const auto& a = samples[best - 1];
    const auto& b = samples[best];
    // Same evaluation order as the declared rule, so results compare exactly.
    const double t = (a.far - target) / (a.far - b.far);
    return a.frr + t * (b.frr - a.frr);
}

// Flat rows x cols grid with unit spacing in the z = 0 plane and a single shape mode.
inline model::MorphableModel planar_grid(int rows, int cols)
{
    model::PcaModel pca;
    pca.mean.resize(3 * rows * cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            pca.mean.segment<3>(3 * (r * cols + c)) = Eigen::Vector3d(c, -r, 0.0);
    pca.basis = Eigen::MatrixXd::Zero(3 * rows * cols, 1);
    pca.basis(2, 0) = 1.0;
    pca.stddevs = Eigen::VectorXd::Ones(1);
    std::vector<model::Triangle> triangles;
    for (int r = 0; r + 1 < rows; ++r) {
        for (int c = 0; c + 1 < cols; ++c) {
            const int tl = r * cols + c, tr = tl + 1, bl = tl + cols, br = bl + 1;
            triangles.push_back({bl, br, tr});
            triangles.push_back({bl, tr, tl});
        }
    }
    return model::MorphableModel(pca, triangles, {});
}

inline Eigen::MatrixXd euclidean_distances(const Eigen::Matrix3Xd& points)
{
    Eigen::MatrixXd d(points.cols(), points.cols());
    for (Eigen::Index i = 0; i < points.cols(); ++i)
        for (Eigen::Index j = 0; j < points.cols(); ++j)
            d(i, j) = (points.col(i) - points.col(j)).norm();
    return d;
}

inline Eigen::Matrix3Xd as_points(const Eigen::VectorXd& stacked)
{
    return Eigen::Map<const Eigen::Matrix3Xd>(stacked.data(), 3, stacked.size() / 3);
}

inline const texture::IsomapChart& small_chart()
{
    static const texture::IsomapChart chart = texture::compute_isomap(small_model());
    return chart;
}

inline model::Mesh coloured_mean(const Eigen::Vector3d& rgb)
{
    auto mesh = model::instantiate(small_model(), Eigen::VectorXd::Zero(0));
    Eigen::VectorXd colours(mesh.vertices.size());
    for (int v = 0; v < mesh.vertex_count(); ++v)
        colours.segment<3>(3 * v) = rgb;
    mesh.colours = colours;
    return mesh;
}

inline camera::AffineCamerad head_camera(double yaw, int size)
{
    return camera::make_camera({yaw, 0, 0}, 0.35 * size, {0.5 * size, 0.5 * size});
}

inline texture::TextureMap checkerboard(int resolution, int cells)
{
    texture::TextureMap map;
    map.image = core::RasterImage(resolution, resolution);
    map.mask = core::GrayImage(resolution, resolution);
    for (int y = 0; y < resolution; ++y) {
        for (int x = 0; x < resolution; ++x) {
            const bool dark = ((x * cells / resolution) + (y * cells / resolution)) % 2 == 0;
            const std::uint8_t value = dark ? 40 : 220;
            map.image.set(x, y, {value, value, value});
            map.mask.at(x, y) = 255;
        }
    }
    map.covered_texels = std::size_t(resolution) * resolution;
    return map;
}


} /* namespace test */
} /* namespace morphfit */

#endif /* MORPHFIT_TESTS_SUPPORT_HPP */

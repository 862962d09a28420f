/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: src/texture/isomap.cpp
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
#include "morphfit/texture/isomap.hpp"
#include "morphfit/core/error.hpp"
#include "morphfit/core/random.hpp"

#include "Eigen/Eigenvalues"
#include "Eigen/QR"
#include "Eigen/SVD"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>

namespace morphfit {
namespace texture {

namespace {

struct Edge
{
    int to;
    double length;
};

std::vector<std::vector<Edge>> neighbourhood_graph(const Eigen::VectorXd& vertices,
                                                   const std::vector<model::Triangle>& triangles, int rings)
{
    const int V = static_cast<int>(vertices.size() / 3);
    std::vector<std::set<int>> one_ring(V);
    for (const auto& t : triangles) {
        for (int e = 0; e < 3; ++e) {
            one_ring[t[e]].insert(t[(e + 1) % 3]);
            one_ring[t[(e + 1) % 3]].insert(t[e]);
        }
    }
    std::vector<std::vector<Edge>> graph(V);
    std::vector<int> depth(V, -1);
    std::vector<int> touched;
    for (int source = 0; source < V; ++source) {
        // Breadth-first search up to `rings` hops.
        std::vector<int> frontier{source};
        depth[source] = 0;
        touched.assign(1, source);
        for (int ring = 1; ring <= rings && !frontier.empty(); ++ring) {
            std::vector<int> next;
            for (int v : frontier) {
                for (int w : one_ring[v]) {
                    if (depth[w] < 0) {
                        depth[w] = ring;
                        next.push_back(w);
                        touched.push_back(w);
                    }
                }
            }
            frontier = std::move(next);
        }
        for (int w : touched) {
            if (w != source) {
                const double length = (vertices.segment<3>(3 * w) - vertices.segment<3>(3 * source)).norm();
                graph[source].push_back({w, length});
            }
            depth[w] = -1;
        }
        std::sort(graph[source].begin(), graph[source].end(),
                  [](const Edge& x, const Edge& y) { return x.to < y.to; });
    }
    return graph;
}

double optimal_scale(const Eigen::MatrixXd& target, const Eigen::Matrix2Xd& embedding, Eigen::MatrixXd& embedded)
{
    const Eigen::Index n = embedding.cols();
    embedded.resize(n, n);
    double cross = 0.0, norm = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = (embedding.col(i) - embedding.col(j)).norm();
            embedded(i, j) = d;
            cross += d * target(i, j);
            norm += d * d;
        }
    }
    return norm > 0.0 ? cross / norm : 1.0;
}

} // namespace

Eigen::MatrixXd geodesic_distances(const Eigen::VectorXd& vertices, const std::vector<model::Triangle>& triangles,
                                   int rings)
{
    const int V = static_cast<int>(vertices.size() / 3);
    if (rings < 1)
        throw Error(ErrorKind::parameter, "neighbourhood rings must be at least 1");
    const int components = model::count_components(V, triangles);
    if (components != 1)
        throw Error(ErrorKind::connectivity,
                    "mesh is not edge-connected: " + std::to_string(components) + " components");

    const auto graph = neighbourhood_graph(vertices, triangles, rings);
    Eigen::MatrixXd distances(V, V);
    using Entry = std::pair<double, int>;
    std::vector<double> dist(V);
    for (int source = 0; source < V; ++source) {
        std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
        std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
        dist[source] = 0.0;
        queue.emplace(0.0, source);
        while (!queue.empty()) {
            const auto [d, v] = queue.top();
            queue.pop();
            if (d > dist[v])
                continue;
            for (const auto& e : graph[v]) {
                const double candidate = d + e.length;
                if (candidate < dist[e.to]) {
                    dist[e.to] = candidate;
                    queue.emplace(candidate, e.to);
                }
            }
        }
        for (int v = 0; v < V; ++v)
            distances(v, source) = dist[v];
    }
    // Symmetrise away floating-point path-order differences.
    return 0.5 * (distances + distances.transpose());
}

Eigen::Matrix2Xd classical_mds_2d(const Eigen::MatrixXd& distances)
{
    const Eigen::Index n = distances.rows();
    if (n < 3)
        throw Error(ErrorKind::dimension, "MDS needs at least 3 points");
    // B = -1/2 J D^2 J
    Eigen::MatrixXd b = distances.array().square().matrix();
    const Eigen::VectorXd row_means = b.rowwise().mean();
    const Eigen::RowVectorXd col_means = b.colwise().mean();
    const double grand_mean = row_means.mean();
    b = -0.5 * ((b.colwise() - row_means).rowwise() - col_means).array() - 0.5 * grand_mean;

    const Eigen::Index block = std::min<Eigen::Index>(8, n);
    core::Random rng(0x15041a9);
    Eigen::MatrixXd q(n, block);
    for (Eigen::Index j = 0; j < block; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            q(i, j) = rng.normal();
    q = Eigen::HouseholderQR<Eigen::MatrixXd>(q).householderQ() * Eigen::MatrixXd::Identity(n, block);

    const double norm_estimate = b.cwiseAbs().rowwise().sum().maxCoeff();
    Eigen::MatrixXd ritz_vectors;
    Eigen::VectorXd ritz_values;
    for (int iteration = 0; iteration < 2000; ++iteration) {
        const Eigen::MatrixXd z = b * q;
        const Eigen::MatrixXd t = q.transpose() * z;
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (t + t.transpose()));
        // Eigen returns ascending order; the leading pair is at the end.
        ritz_values = eig.eigenvalues().reverse();
        const Eigen::MatrixXd w = eig.eigenvectors().rowwise().reverse();
        ritz_vectors = q * w;
        const Eigen::MatrixXd residual = z * w - ritz_vectors * ritz_values.asDiagonal();
        const double worst = std::max(residual.col(0).norm(), residual.col(1).norm());
        if (worst <= 1e-10 * norm_estimate)
            break;
        q = Eigen::HouseholderQR<Eigen::MatrixXd>(z).householderQ() * Eigen::MatrixXd::Identity(n, block);
    }

    Eigen::Matrix2Xd embedding(2, n);
    for (int axis = 0; axis < 2; ++axis)
        embedding.row(axis) = ritz_vectors.col(axis).transpose() * std::sqrt(std::max(ritz_values(axis), 0.0));
    return embedding;
}

IsomapChart compute_isomap(const model::MorphableModel& model, const IsomapOptions& options)
{
    const auto& mean = model.shape_model().mean;
    const Eigen::MatrixXd distances = geodesic_distances(mean, model.triangles(), options.neighbourhood_rings);
    Eigen::Matrix2Xd embedding = classical_mds_2d(distances);

    // Orientation: orthogonal Procrustes onto the frontal (x, y) projection of the mean shape.
    const Eigen::Index n = embedding.cols();
    Eigen::Matrix2Xd frontal(2, n);
    for (Eigen::Index v = 0; v < n; ++v)
        frontal.col(v) = mean.segment<2>(3 * v);
    const Eigen::Vector2d frontal_centre = frontal.rowwise().mean();
    frontal.colwise() -= frontal_centre;
    const Eigen::Vector2d embedding_centre = embedding.rowwise().mean();
    embedding.colwise() -= embedding_centre;
    const Eigen::Matrix2d cross = frontal * embedding.transpose();
    const Eigen::JacobiSVD<Eigen::Matrix2d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Matrix2d rotation = svd.matrixU() * svd.matrixV().transpose();
    Eigen::Matrix2Xd aligned = rotation * embedding;
    aligned.row(1) *= -1.0; // texture rows grow downwards

    const Eigen::Vector2d lo = aligned.rowwise().minCoeff();
    const Eigen::Vector2d hi = aligned.rowwise().maxCoeff();
    const Eigen::Vector2d extent = hi - lo;
    const double size = extent.maxCoeff();
    IsomapChart chart;
    chart.uv.resize(2, n);
    for (int axis = 0; axis < 2; ++axis) {
        const double offset = 0.5 * (1.0 - extent(axis) / size);
        chart.uv.row(axis) = ((aligned.row(axis).array() - lo(axis)) / size + offset).matrix();
    }
    chart.uv = chart.uv.cwiseMax(0.0).cwiseMin(1.0);
    chart.fingerprint = model.fingerprint();
    return chart;
}

double kruskal_stress(const Eigen::MatrixXd& target_distances, const Eigen::Matrix2Xd& embedding)
{
    Eigen::MatrixXd embedded;
    const double scale = optimal_scale(target_distances, embedding, embedded);
    double residual = 0.0, total = 0.0;
    const Eigen::Index n = embedding.cols();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            residual += std::pow(scale * embedded(i, j) - target_distances(i, j), 2);
            total += target_distances(i, j) * target_distances(i, j);
        }
    }
    return std::sqrt(residual / total);
}

double mean_relative_distortion(const Eigen::MatrixXd& target_distances, const Eigen::Matrix2Xd& embedding)
{
    Eigen::MatrixXd embedded;
    const double scale = optimal_scale(target_distances, embedding, embedded);
    double sum = 0.0;
    std::size_t count = 0;
    const Eigen::Index n = embedding.cols();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (target_distances(i, j) > 0.0) {
                sum += std::abs(scale * embedded(i, j) - target_distances(i, j)) / target_distances(i, j);
                ++count;
            }
        }
    }
    return count ? sum / count : 0.0;
}

} /* namespace texture */
} /* namespace morphfit */

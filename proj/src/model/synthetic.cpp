/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: src/model/synthetic.cpp
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
#include "morphfit/model/synthetic.hpp"
#include "morphfit/core/error.hpp"
#include "morphfit/core/random.hpp"

#include "Eigen/QR"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

namespace morphfit {
namespace model {

namespace {

constexpr double deg = std::numbers::pi / 180.0;

struct LandmarkAnchor
{
    const char* name;
    double u; // grid coordinate, -1 (image left) .. 1
    double v; // grid coordinate, -1 (chin) .. 1 (forehead)
};

// Anatomical placement of the iBUG-68 points used by the 49-point scheme
// (eyebrows, nose, eyes, outer and inner mouth without the inner corners).
constexpr LandmarkAnchor anchors[] = {
    {"18", -0.55, 0.42}, {"19", -0.45, 0.48}, {"20", -0.33, 0.50}, {"21", -0.22, 0.48}, {"22", -0.11, 0.44},
    {"23", 0.11, 0.44},  {"24", 0.22, 0.48},  {"25", 0.33, 0.50},  {"26", 0.45, 0.48},  {"27", 0.55, 0.42},
    {"28", 0.00, 0.30},  {"29", 0.00, 0.20},  {"30", 0.00, 0.10},  {"31", 0.00, 0.00},  {"32", -0.14, -0.10},
    {"33", -0.07, -0.12}, {"34", 0.00, -0.13}, {"35", 0.07, -0.12}, {"36", 0.14, -0.10}, {"37", -0.46, 0.28},
    {"38", -0.39, 0.33}, {"39", -0.28, 0.33}, {"40", -0.20, 0.28}, {"41", -0.28, 0.23}, {"42", -0.39, 0.23},
    {"43", 0.20, 0.28},  {"44", 0.28, 0.33},  {"45", 0.39, 0.33},  {"46", 0.46, 0.28},  {"47", 0.39, 0.23},
    {"48", 0.28, 0.23},  {"49", -0.30, -0.40}, {"50", -0.20, -0.33}, {"51", -0.08, -0.30}, {"52", 0.00, -0.31},
    {"53", 0.08, -0.30}, {"54", 0.20, -0.33}, {"55", 0.30, -0.40}, {"56", 0.20, -0.48}, {"57", 0.08, -0.52},
    {"58", 0.00, -0.53}, {"59", -0.08, -0.52}, {"60", -0.20, -0.48}, {"62", -0.09, -0.37}, {"63", 0.00, -0.37},
    {"64", 0.09, -0.37}, {"66", 0.09, -0.44}, {"67", 0.00, -0.44}, {"68", -0.09, -0.44},
};

// Half-ellipsoid with a nose ridge and shallow eye sockets.
Eigen::Vector3d surface_point(double u, double v)
{
    const double theta = u * 75.0 * deg;
    const double phi = v * 60.0 * deg;
    const double x = 1.0 * std::sin(theta) * std::cos(phi);
    const double y = 1.2 * std::sin(phi);
    double z = 0.85 * std::cos(theta) * std::cos(phi);
    z += 0.28 * std::exp(-std::pow(x / 0.15, 2) - std::pow((y + 0.02) / 0.3, 2));
    for (double side : {-1.0, 1.0}) {
        z -= 0.05 * std::exp(-(std::pow(x - side * 0.4, 2) + std::pow(y - 0.35, 2)) / (0.12 * 0.12));
    }
    return {x, y, z};
}

struct GridLayout
{
    int rows = 0;
    int cols = 0;
    int extra = 0; // vertices in the partial row below the grid
    std::vector<Eigen::Vector2d> uv;
};

GridLayout make_layout(int vertex_count)
{
    GridLayout g;
    g.rows = static_cast<int>(std::floor(std::sqrt(static_cast<double>(vertex_count))));
    g.cols = vertex_count / g.rows;
    g.extra = vertex_count - g.rows * g.cols;
    g.uv.reserve(vertex_count);
    for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c)
            g.uv.emplace_back(-1.0 + 2.0 * c / (g.cols - 1), 1.0 - 2.0 * r / (g.rows - 1));
    for (int c = 0; c < g.extra; ++c)
        g.uv.emplace_back(-1.0 + 2.0 * c / (g.cols - 1), -1.0 - 2.0 / (g.rows - 1));
    return g;
}

// Counter-clockwise when seen from +z (outside of the face).
std::vector<Triangle> triangulate(const GridLayout& g)
{
    std::vector<Triangle> triangles;
    const auto id = [&g](int r, int c) { return r * g.cols + c; };
    for (int r = 0; r + 1 < g.rows; ++r) {
        for (int c = 0; c + 1 < g.cols; ++c) {
            const int tl = id(r, c), tr = id(r, c + 1), bl = id(r + 1, c), br = id(r + 1, c + 1);
            triangles.push_back({bl, br, tr});
            triangles.push_back({bl, tr, tl});
        }
    }
    const int last = g.rows - 1;
    const int first_extra = g.rows * g.cols;
    for (int c = 0; c < g.extra; ++c) {
        const int bl = first_extra + c;
        const int tl = id(last, c);
        const int tr = id(last, c + 1);
        if (c + 1 < g.extra) {
            const int br = bl + 1;
            triangles.push_back({bl, br, tr});
        }
        triangles.push_back({bl, tr, tl});
    }
    return triangles;
}

std::map<std::string, int> place_landmarks(const GridLayout& g)
{
    std::map<std::string, int> landmarks;
    std::vector<bool> used(g.rows * g.cols, false);
    for (const auto& anchor : anchors) {
        int best = -1;
        double best_distance = std::numeric_limits<double>::infinity();
        for (int i = 0; i < g.rows * g.cols; ++i) {
            if (used[i])
                continue;
            const double d = (g.uv[i] - Eigen::Vector2d(anchor.u, anchor.v)).squaredNorm();
            if (d < best_distance) {
                best_distance = d;
                best = i;
            }
        }
        used[best] = true;
        landmarks.emplace(anchor.name, best);
    }
    return landmarks;
}

// 3V x K matrix of smooth random vector fields over the grid parameterisation.
Eigen::MatrixXd smooth_fields(core::Random& rng, const GridLayout& g, int count)
{
    const int V = static_cast<int>(g.uv.size());
    Eigen::MatrixXd fields = Eigen::MatrixXd::Zero(3 * V, count);
    for (int k = 0; k < count; ++k) {
        for (int d = 0; d < 3; ++d) {
            for (int m = 0; m < 3; ++m) {
                const double amplitude = rng.normal();
                const double fu = rng.uniform(-3.0, 3.0);
                const double fv = rng.uniform(-3.0, 3.0);
                const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
                for (int v = 0; v < V; ++v) {
                    fields(3 * v + d, k) +=
                        amplitude * std::sin(std::numbers::pi * (fu * g.uv[v].x() + fv * g.uv[v].y()) + phase);
                }
            }
        }
    }
    return fields;
}

// Columns spanning x -> A x + t evaluated at the given vertices (zero elsewhere).
void append_affine_modes(Eigen::MatrixXd& modes, int& column, const Eigen::VectorXd& mean,
                         const std::vector<int>& vertices)
{
    for (int k = 0; k < 3; ++k) {
        for (int g = 0; g < 4; ++g) {
            for (int v : vertices)
                modes(3 * v + k, column) = g == 0 ? 1.0 : mean(3 * v + g - 1);
            ++column;
        }
    }
}

Eigen::MatrixXd orthonormal_complement_basis(Eigen::MatrixXd fields, const Eigen::MatrixXd& constraints)
{
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> cqr(constraints);
    const Eigen::Index rank = cqr.rank();
    const Eigen::MatrixXd q = cqr.householderQ() * Eigen::MatrixXd::Identity(constraints.rows(), rank);
    fields -= q * (q.transpose() * fields);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(fields);
    Eigen::MatrixXd basis = qr.householderQ() * Eigen::MatrixXd::Identity(fields.rows(), fields.cols());
    // Second projection removes round-off leakage back into the constrained subspace.
    basis -= q * (q.transpose() * basis);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr2(basis);
    return qr2.householderQ() * Eigen::MatrixXd::Identity(fields.rows(), fields.cols());
}

} // namespace

MorphableModel generate_synthetic_model(std::uint64_t seed, int vertex_count, int num_coefficients,
                                        const SyntheticModelOptions& options)
{
    if (vertex_count < 50)
        throw Error(ErrorKind::parameter, "synthetic model needs at least 50 vertices");
    if (num_coefficients < 1 || num_coefficients >= vertex_count)
        throw Error(ErrorKind::parameter, "number of coefficients must satisfy 1 <= K < V");

    const GridLayout layout = make_layout(vertex_count);
    const int V = vertex_count;

    PcaModel shape;
    shape.mean.resize(3 * V);
    for (int v = 0; v < V; ++v)
        shape.mean.segment<3>(3 * v) = surface_point(layout.uv[v].x(), layout.uv[v].y());

    auto landmarks = place_landmarks(layout);
    std::vector<int> all_vertices(V);
    for (int v = 0; v < V; ++v)
        all_vertices[v] = v;
    std::vector<int> landmark_vertices;
    for (const auto& entry : landmarks)
        landmark_vertices.push_back(entry.second);

    Eigen::MatrixXd constraints = Eigen::MatrixXd::Zero(3 * V, 24);
    int column = 0;
    append_affine_modes(constraints, column, shape.mean, all_vertices);
    append_affine_modes(constraints, column, shape.mean, landmark_vertices);

    core::Random rng(seed);
    shape.basis = orthonormal_complement_basis(smooth_fields(rng, layout, num_coefficients), constraints);
    shape.stddevs.resize(num_coefficients);
    const double scale = 0.05 * std::sqrt(3.0 * V);
    for (int i = 0; i < num_coefficients; ++i)
        shape.stddevs(i) = scale / (1.0 + 0.25 * i);

    std::optional<PcaModel> colour;
    if (options.with_colour) {
        const int Kc = std::min(num_coefficients, 10);
        PcaModel c;
        c.mean.resize(3 * V);
        for (int v = 0; v < V; ++v)
            c.mean.segment<3>(3 * v) = Eigen::Vector3d(0.78, 0.58, 0.47);
        const Eigen::MatrixXd no_constraints = Eigen::MatrixXd::Zero(3 * V, 1);
        c.basis = orthonormal_complement_basis(smooth_fields(rng, layout, Kc), no_constraints);
        c.stddevs.resize(Kc);
        for (int i = 0; i < Kc; ++i)
            c.stddevs(i) = 0.02 * std::sqrt(3.0 * V) / (1.0 + 0.5 * i);
        colour = std::move(c);
    }

    return MorphableModel(std::move(shape), triangulate(layout), std::move(landmarks), std::move(colour));
}

const std::vector<std::string>& landmark_set_7()
{
    static const std::vector<std::string> names{"31", "37", "40", "43", "46", "49", "55"};
    return names;
}

const std::vector<std::string>& landmark_set_13()
{
    static const std::vector<std::string> names{"18", "22", "23", "27", "31", "37", "40",
                                                "43", "46", "49", "52", "55", "58"};
    return names;
}

const std::vector<std::string>& landmark_set_49()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> all;
        for (const auto& anchor : anchors)
            all.emplace_back(anchor.name);
        return all;
    }();
    return names;
}

} /* namespace model */
} /* namespace morphfit */

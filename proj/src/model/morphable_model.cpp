/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: src/model/morphable_model.cpp
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
#include "morphfit/model/morphable_model.hpp"
#include "morphfit/core/error.hpp"

#include <cmath>
#include <cstring>
#include <numeric>

namespace morphfit {
namespace model {

namespace {

class Fnv1a
{
public:
    void update(const void* bytes, std::size_t size) noexcept
    {
        const auto* p = static_cast<const unsigned char*>(bytes);
        for (std::size_t i = 0; i < size; ++i) {
            hash_ ^= p[i];
            hash_ *= 1099511628211ULL;
        }
    }
    std::uint64_t value() const noexcept
    {
        return hash_;
    }

private:
    std::uint64_t hash_ = 14695981039346656037ULL;
};

void validate_pca(const PcaModel& pca, const std::string& name, Eigen::Index expected_rows)
{
    if (pca.mean.size() != expected_rows)
        throw Error(ErrorKind::dimension, name + " mean has length " + std::to_string(pca.mean.size()) +
                                              ", expected " + std::to_string(expected_rows));
    if (pca.basis.rows() != expected_rows)
        throw Error(ErrorKind::dimension, name + " basis has " + std::to_string(pca.basis.rows()) + " rows, expected " +
                                              std::to_string(expected_rows));
    if (pca.stddevs.size() != pca.basis.cols())
        throw Error(ErrorKind::dimension, name + " stddevs length does not match basis column count");
    if (!pca.mean.allFinite() || !pca.basis.allFinite() || !pca.stddevs.allFinite())
        throw Error(ErrorKind::numerical, name + " contains non-finite values");
    for (Eigen::Index i = 0; i < pca.stddevs.size(); ++i) {
        if (!(pca.stddevs(i) > 0.0))
            throw Error(ErrorKind::parameter, name + " stddev " + std::to_string(i) + " is not strictly positive");
        if (i > 0 && pca.stddevs(i) > pca.stddevs(i - 1))
            throw Error(ErrorKind::parameter, name + " stddevs are not sorted non-increasing");
    }
    const Eigen::MatrixXd gram = pca.basis.transpose() * pca.basis;
    for (Eigen::Index i = 0; i < gram.rows(); ++i) {
        if (std::abs(std::sqrt(gram(i, i)) - 1.0) > 1e-9)
            throw Error(ErrorKind::parameter, name + " basis column " + std::to_string(i) + " is not unit-norm");
        for (Eigen::Index j = 0; j < i; ++j) {
            if (std::abs(gram(i, j)) > 1e-8)
                throw Error(ErrorKind::parameter, name + " basis columns " + std::to_string(j) + " and " +
                                                      std::to_string(i) + " are not orthogonal");
        }
    }
}

} // namespace

MorphableModel::MorphableModel(PcaModel shape, std::vector<Triangle> triangles, std::map<std::string, int> landmarks,
                               std::optional<PcaModel> colour)
    : shape_(std::move(shape)), colour_(std::move(colour)), triangles_(std::move(triangles)),
      landmarks_(std::move(landmarks))
{
    if (shape_.mean.size() == 0 || shape_.mean.size() % 3 != 0)
        throw Error(ErrorKind::dimension, "shape mean length must be a positive multiple of 3");
    const int V = vertex_count();
    validate_pca(shape_, "shape model", shape_.mean.size());
    if (colour_)
        validate_pca(*colour_, "colour model", shape_.mean.size());
    for (const auto& t : triangles_) {
        for (int index : t) {
            if (index < 0 || index >= V)
                throw Error(ErrorKind::parameter, "triangle index out of range: " + std::to_string(index));
        }
    }
    for (const auto& [name, index] : landmarks_) {
        if (index < 0 || index >= V)
            throw Error(ErrorKind::parameter, "landmark '" + name + "' maps to out-of-range vertex " +
                                                  std::to_string(index));
    }
    const int components = count_components(V, triangles_);
    if (components != 1)
        throw Error(ErrorKind::connectivity,
                    "triangulation is not edge-connected: " + std::to_string(components) + " components");

    Fnv1a hash;
    hash.update(triangles_.data(), triangles_.size() * sizeof(Triangle));
    hash.update(shape_.mean.data(), std::size_t(shape_.mean.size()) * sizeof(double));
    fingerprint_ = hash.value();
}

bool operator==(const MorphableModel& a, const MorphableModel& b)
{
    const auto pca_equal = [](const PcaModel& x, const PcaModel& y) {
        return x.mean.size() == y.mean.size() && x.basis.rows() == y.basis.rows() &&
               x.basis.cols() == y.basis.cols() && x.stddevs.size() == y.stddevs.size() && x.mean == y.mean &&
               x.basis == y.basis && x.stddevs == y.stddevs;
    };
    if (a.colour_.has_value() != b.colour_.has_value())
        return false;
    if (a.colour_ && !pca_equal(*a.colour_, *b.colour_))
        return false;
    return pca_equal(a.shape_, b.shape_) && a.triangles_ == b.triangles_ && a.landmarks_ == b.landmarks_;
}

Eigen::VectorXd draw_sample(const PcaModel& pca, const Eigen::Ref<const Eigen::VectorXd>& coefficients)
{
    const Eigen::Index n = coefficients.size();
    if (n > pca.basis.cols())
        throw Error(ErrorKind::dimension, "coefficient vector of length " + std::to_string(n) +
                                              " exceeds basis size " + std::to_string(pca.basis.cols()));
    if (n == 0)
        return pca.mean;
    return pca.mean + pca.basis.leftCols(n) * coefficients.cwiseProduct(pca.stddevs.head(n));
}

Eigen::VectorXd instantiate_shape(const MorphableModel& model, const Eigen::Ref<const Eigen::VectorXd>& alpha)
{
    return draw_sample(model.shape_model(), alpha);
}

Mesh instantiate(const MorphableModel& model, const Eigen::Ref<const Eigen::VectorXd>& alpha,
                 const std::optional<Eigen::VectorXd>& beta)
{
    Mesh mesh;
    mesh.vertices = instantiate_shape(model, alpha);
    mesh.triangles = model.triangles();
    mesh.source_fingerprint = model.fingerprint();
    if (beta) {
        if (!model.colour_model())
            throw Error(ErrorKind::parameter, "colour coefficients given but the model has no colour model");
        mesh.colours = draw_sample(*model.colour_model(), *beta);
    }
    return mesh;
}

Eigen::Matrix3Xd gather_vertices(const Eigen::VectorXd& vertices, const std::vector<int>& indices)
{
    Eigen::Matrix3Xd points(3, indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i)
        points.col(i) = vertices.segment<3>(3 * indices[i]);
    return points;
}

double orthonormality_residual(const Eigen::MatrixXd& basis)
{
    if (basis.cols() == 0)
        return 0.0;
    const Eigen::MatrixXd gram = basis.transpose() * basis;
    return (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

int count_components(int vertex_count, const std::vector<Triangle>& triangles)
{
    std::vector<int> parent(vertex_count);
    std::iota(parent.begin(), parent.end(), 0);
    const auto find = [&parent](int v) {
        while (parent[v] != v) {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        return v;
    };
    int components = vertex_count;
    for (const auto& t : triangles) {
        for (int e = 0; e < 3; ++e) {
            const int a = find(t[e]);
            const int b = find(t[(e + 1) % 3]);
            if (a != b) {
                parent[a] = b;
                --components;
            }
        }
    }
    return components;
}

} /* namespace model */
} /* namespace morphfit */

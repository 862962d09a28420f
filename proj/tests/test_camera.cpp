/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: tests/test_camera.cpp
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
#include "support.hpp"

#include "morphfit/camera/affine_camera.hpp"
#include "morphfit/camera/normalization.hpp"
#include "morphfit/core/error.hpp"

#include "doctest.h"

#include <cmath>

using namespace morphfit;
using namespace morphfit::camera;

namespace {

Eigen::Matrix3Xd random_cloud(core::Random& rng, int n, double extent = 1.0)
{
    Eigen::Matrix3Xd points(3, n);
    for (int i = 0; i < n; ++i)
        points.col(i) = Eigen::Vector3d(rng.uniform(-extent, extent), rng.uniform(-extent, extent),
                                        rng.uniform(-extent, extent));
    return points;
}

AffineCamerad random_affine(core::Random& rng)
{
    Eigen::Matrix<double, 2, 4> rows;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 4; ++c)
            rows(r, c) = c == 3 ? rng.uniform(50.0, 250.0) : rng.uniform(-80.0, 80.0);
    return AffineCamerad(rows);
}

double rms_norm(const Eigen::MatrixXd& points)
{
    return std::sqrt(points.colwise().squaredNorm().mean());
}

} // namespace

TEST_SUITE("camera")
{
    TEST_CASE("two-point 2D normalisation is forced by symmetry")
    {
        Eigen::Matrix2Xd points(2, 2);
        points << 0, 2, 0, 0;
        const auto n = normalize_2d(points);
        CHECK(n.points(0, 0) == doctest::Approx(-std::sqrt(2.0)));
        CHECK(n.points(0, 1) == doctest::Approx(std::sqrt(2.0)));
        CHECK(n.points(1, 0) == 0.0);
        CHECK(n.points(1, 1) == 0.0);
    }

    TEST_CASE("two-point 3D normalisation is forced by symmetry")
    {
        Eigen::Matrix3Xd points = Eigen::Matrix3Xd::Zero(3, 2);
        points(0, 1) = 2.0;
        const auto n = normalize_3d(points);
        CHECK(n.points(0, 0) == doctest::Approx(-std::sqrt(3.0)));
        CHECK(n.points(0, 1) == doctest::Approx(std::sqrt(3.0)));
        CHECK(n.points.bottomRows<2>().cwiseAbs().maxCoeff() == 0.0);
    }

    TEST_CASE("normalised clouds have the target RMS and invertible transforms")
    {
        core::Random rng(11);
        for (int trial = 0; trial < 20; ++trial) {
            const Eigen::Matrix3Xd cloud = random_cloud(rng, 49, rng.uniform(0.1, 100.0));
            const auto n3 = normalize_3d(cloud);
            CHECK(rms_norm(n3.points) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
            CHECK((n3.points.rowwise().mean()).norm() < 1e-12);
            const Eigen::Matrix3Xd back = n3.transform.inverse().apply(n3.points);
            CHECK((back - cloud).cwiseAbs().maxCoeff() < 1e-10 * (1.0 + cloud.cwiseAbs().maxCoeff()));

            const Eigen::Matrix2Xd flat = cloud.topRows<2>();
            const auto n2 = normalize_2d(flat);
            CHECK(rms_norm(n2.points) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

            // Recompute by hand through the homogeneous matrix.
            Eigen::Matrix3Xd homogeneous(3, flat.cols());
            homogeneous << flat, Eigen::RowVectorXd::Ones(flat.cols());
            const Eigen::Matrix3Xd mapped = n2.transform.matrix() * homogeneous;
            CHECK((mapped.topRows<2>() - n2.points).cwiseAbs().maxCoeff() < 1e-12);
        }
    }

    TEST_CASE("coincident points cannot be normalised")
    {
        Eigen::Matrix2Xd same = Eigen::Matrix2Xd::Ones(2, 5);
        CHECK_THROWS_AS(normalize_2d(same), DegenerateError);
        CHECK_THROWS_AS(normalize_2d(Eigen::Matrix2Xd::Zero(2, 1)), DegenerateError);
    }

    TEST_CASE("projection")
    {
        Eigen::Matrix<double, 2, 4> rows;
        rows << 1, 0, 0, 0, 0, 1, 0, 0;
        const AffineCamerad identity(rows);
        CHECK(project(identity, Eigen::Vector3d(3, -4, 7)) == Eigen::Vector2d(3, -4));
        CHECK(identity.matrix().row(2) == Eigen::RowVector4d(0, 0, 0, 1));

        rows.col(3) << 10, -20;
        const AffineCamerad shifted(rows);
        CHECK(project(shifted, Eigen::Vector3d(3, -4, 7)) == Eigen::Vector2d(13, -24));

        core::Random rng(5);
        for (int i = 0; i < 10; ++i) {
            const auto cam = random_affine(rng);
            const Eigen::Vector3d x(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
            Eigen::Vector2d expected;
            for (int r = 0; r < 2; ++r) {
                expected(r) = cam.matrix()(r, 3);
                for (int c = 0; c < 3; ++c)
                    expected(r) += cam.matrix()(r, c) * x(c);
            }
            CHECK((project(cam, x) - expected).norm() < 1e-12);
        }
    }

    TEST_CASE("camera is recovered from a unit tetrahedron")
    {
        Eigen::Matrix3Xd tetra(3, 4);
        tetra << 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1;
        core::Random rng(1);
        for (int trial = 0; trial < 10; ++trial) {
            const auto truth = random_affine(rng);
            const Eigen::Matrix2Xd image = project_points(truth, tetra);
            const auto cam = estimate_affine_camera(image, tetra);
            CHECK(reprojection_rmse(cam, image, tetra) < 1e-10);
            CHECK((cam.matrix() - truth.matrix()).cwiseAbs().maxCoeff() < 1e-8);
        }
    }

    TEST_CASE("noisy estimate matches the unnormalised least-squares oracle")
    {
        const auto& m = test::small_model();
        const auto& names = model::landmark_set_49();
        std::vector<int> indices;
        for (const auto& name : names)
            indices.push_back(m.landmarks().at(name));
        const Eigen::Matrix3Xd X = model::gather_vertices(m.shape_model().mean, indices);

        core::Random rng(21);
        double mean_rmse = 0.0;
        for (int seed = 0; seed < 100; ++seed) {
            const auto truth = test::random_camera(rng);
            Eigen::Matrix2Xd x = project_points(truth, X);
            for (Eigen::Index i = 0; i < x.size(); ++i)
                x.data()[i] += rng.normal(0.0, 1.0);
            const auto cam = estimate_affine_camera(x, X);
            const auto oracle = test::affine_camera_oracle(x, X);
            CHECK((cam.matrix() - oracle.matrix()).cwiseAbs().maxCoeff() < 1e-6);
            mean_rmse += reprojection_rmse(cam, x, X) / 100.0;
        }
        CHECK(mean_rmse <= 1.5);
    }

    TEST_CASE("too few or coplanar points are rejected")
    {
        core::Random rng(2);
        const Eigen::Matrix3Xd three = random_cloud(rng, 3);
        try {
            estimate_affine_camera(Eigen::Matrix2Xd::Zero(2, 3), three);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::insufficient_points);
        }

        Eigen::Matrix3Xd plane = random_cloud(rng, 10);
        plane.row(2).setZero();
        const auto cam = random_affine(rng);
        try {
            estimate_affine_camera(project_points(cam, plane), plane);
            FAIL("expected a degenerate error");
        } catch (const DegenerateError& e) {
            CHECK(e.rank() == 6);
        }
    }

    TEST_CASE("pose angles")
    {
        SUBCASE("frontal")
        {
            const auto a = extract_pose_angles(make_camera({}, 2.0, {10, 10}));
            CHECK(std::abs(a.yaw) < 1e-9);
            CHECK(std::abs(a.pitch) < 1e-9);
            CHECK(std::abs(a.roll) < 1e-9);
        }
        SUBCASE("pure yaw")
        {
            const auto a = extract_pose_angles(make_camera({30, 0, 0}, 80.0, {0, 0}));
            CHECK(a.yaw == doctest::Approx(30.0).epsilon(0.01 / 30.0));
            CHECK(std::abs(a.pitch) < 0.01);
            CHECK(std::abs(a.roll) < 0.01);
        }
        SUBCASE("pure roll")
        {
            const auto a = extract_pose_angles(make_camera({0, 0, 15}, 80.0, {0, 0}));
            CHECK(a.roll == doctest::Approx(15.0).epsilon(0.01 / 15.0));
            CHECK(std::abs(a.yaw) < 0.01);
            CHECK(std::abs(a.pitch) < 0.01);
        }
        SUBCASE("random round trip")
        {
            core::Random rng(9);
            for (int i = 0; i < 50; ++i) {
                const PoseAngles truth{rng.uniform(-80, 80), rng.uniform(-80, 80), rng.uniform(-170, 170)};
                const auto a = extract_pose_angles(make_camera(truth, rng.uniform(1, 100), {0, 0}));
                CHECK(a.yaw == doctest::Approx(truth.yaw).epsilon(1e-9));
                CHECK(a.pitch == doctest::Approx(truth.pitch).epsilon(1e-9));
                CHECK(a.roll == doctest::Approx(truth.roll).epsilon(1e-9));
            }
        }
        SUBCASE("positive yaw moves the nose tip to larger image x")
        {
            const auto cam = make_camera({30, 0, 0}, 1.0, {0, 0});
            CHECK(project(cam, Eigen::Vector3d(0, 0, 1)).x() > 0.0);
        }
        SUBCASE("rank-deficient camera")
        {
            Eigen::Matrix<double, 2, 4> rows = Eigen::Matrix<double, 2, 4>::Zero();
            rows(0, 0) = 1.0;
            rows(1, 0) = 2.0;
            CHECK_THROWS_AS(extract_pose_angles(AffineCamerad(rows)), DegenerateError);
        }
    }

    TEST_CASE("towards_viewer is the model +z axis for a frontal camera")
    {
        const auto cam = make_camera({}, 3.0, {0, 0});
        CHECK((cam.towards_viewer() - Eigen::Vector3d::UnitZ()).norm() < 1e-12);
        const auto turned = make_camera({90, 0, 0}, 3.0, {0, 0});
        CHECK(std::abs(turned.towards_viewer().z()) < 1e-12);
    }
}

/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: tests/test_fitting.cpp
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

#include "morphfit/core/error.hpp"
#include "morphfit/fitting/shape_fitting.hpp"

#include "doctest.h"

#include <cmath>
#include <limits>

using namespace morphfit;

namespace {

double landmark_rmse(const fitting::FitResult& r, const model::MorphableModel& m, const core::LandmarkSet& lms)
{
    const auto c = fitting::find_correspondences(m, lms);
    return std::sqrt(fitting::evaluate_cost(r.camera, m, c, r.alpha, 0.0).data / c.vertex_indices.size());
}

} // namespace

TEST_SUITE("fitting")
{
    TEST_CASE("shape step matches a dense ridge oracle on a small instance")
    {
        const auto& m = test::small_model();
        const std::vector<std::string> names{"31", "37", "46", "49", "55"};
        core::Random rng(12);
        const auto cam = test::random_camera(rng);
        const auto lms = test::project_landmarks(m, test::random_alpha(rng, 20), cam, names, &rng, 2.0);

        const int k = 3;
        const double lambda = 0.7;
        const auto& pca = m.shape_model();
        Eigen::MatrixXd a(2 * names.size(), k);
        Eigen::VectorXd b(2 * names.size());
        for (std::size_t i = 0; i < names.size(); ++i) {
            const int v = m.landmarks().at(names[i]);
            for (int r = 0; r < 2; ++r) {
                double predicted = cam.matrix()(r, 3);
                for (int c = 0; c < 3; ++c)
                    predicted += cam.matrix()(r, c) * pca.mean(3 * v + c);
                b(2 * i + r) = lms[i].point(r) - predicted;
                for (int j = 0; j < k; ++j) {
                    double entry = 0.0;
                    for (int c = 0; c < 3; ++c)
                        entry += cam.matrix()(r, c) * pca.basis(3 * v + c, j) * pca.stddevs(j);
                    a(2 * i + r, j) = entry;
                }
            }
        }
        const Eigen::VectorXd expected = test::ridge_oracle(a, b, lambda);

        fitting::FitConfig config;
        config.lambda = lambda;
        config.num_coeffs = k;
        const Eigen::VectorXd alpha = fitting::fit_shape(cam, m, lms, config);
        REQUIRE(alpha.size() == k);
        CHECK((alpha - expected).cwiseAbs().maxCoeff() < 1e-10);
    }

    TEST_CASE("known camera recovers the generating coefficients")
    {
        const auto& m = test::small_model();
        core::Random rng(13);
        for (int trial = 0; trial < 10; ++trial) {
            const Eigen::VectorXd truth = test::random_alpha(rng, 20);
            const auto cam = test::random_camera(rng);
            const auto lms = test::project_landmarks(m, truth, cam, model::landmark_set_49());
            fitting::FitConfig config;
            config.lambda = 1e-6;
            const Eigen::VectorXd alpha = fitting::fit_shape(cam, m, lms, config);
            CHECK((alpha - truth).cwiseAbs().maxCoeff() < 1e-6);
        }
    }

    TEST_CASE("a huge lambda collapses to the mean shape")
    {
        const auto& m = test::small_model();
        core::Random rng(14);
        const auto cam = test::random_camera(rng);
        const auto lms = test::project_landmarks(m, test::random_alpha(rng, 20), cam, model::landmark_set_49());
        fitting::FitConfig config;
        config.lambda = 1e12;
        CHECK(fitting::fit_shape(cam, m, lms, config).norm() < 1e-6);
    }

    TEST_CASE("ridge solver")
    {
        core::Random rng(15);
        Eigen::MatrixXd a(12, 4);
        Eigen::VectorXd b(12);
        for (Eigen::Index i = 0; i < a.size(); ++i)
            a.data()[i] = rng.normal();
        for (Eigen::Index i = 0; i < b.size(); ++i)
            b(i) = rng.normal();
        CHECK((fitting::solve_ridge(a, b, 0.3) - test::ridge_oracle(a, b, 0.3)).norm() < 1e-12);
        CHECK((fitting::solve_ridge(a, b, 0.0) - test::ridge_oracle(a, b, 0.0)).norm() < 1e-10);

        a.col(3) = a.col(0) + a.col(1);
        try {
            fitting::solve_ridge(a, b, 0.0);
            FAIL("expected a rank error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::rank);
        }
        CHECK_NOTHROW(fitting::solve_ridge(a, b, 1e-3));
    }

    TEST_CASE("noiseless alternation reaches zero reprojection error")
    {
        const auto& m = test::small_model();
        core::Random rng(16);
        for (int trial = 0; trial < 10; ++trial) {
            const Eigen::VectorXd truth = test::random_alpha(rng, 20);
            const auto lms = test::project_landmarks(m, truth, test::random_camera(rng), model::landmark_set_49());
            fitting::FitConfig config;
            config.lambda = 1e-6;
            const auto result = fitting::fit(m, lms, config);
            CHECK(result.trace.size() == 5);
            CHECK(landmark_rmse(result, m, lms) < 1e-6);
            CHECK((result.alpha - truth).cwiseAbs().maxCoeff() < 1e-4);
        }
    }

    TEST_CASE("mean-shape data gives zero coefficients and the mean-shape camera")
    {
        const auto& m = test::small_model();
        core::Random rng(17);
        const auto cam = test::random_camera(rng);
        const auto lms = test::project_landmarks(m, Eigen::VectorXd::Zero(20), cam, model::landmark_set_49());
        fitting::FitConfig config;
        config.lambda = 1e-6;
        const auto result = fitting::fit(m, lms, config);
        CHECK(result.alpha.norm() < 1e-6);

        const auto c = fitting::find_correspondences(m, lms);
        const auto mean_camera = camera::estimate_affine_camera(
            c.image_points, model::gather_vertices(m.shape_model().mean, c.vertex_indices));
        CHECK((result.camera.matrix() - mean_camera.matrix()).cwiseAbs().maxCoeff() < 1e-6);
    }

    TEST_CASE("objective trace is non-increasing")
    {
        const auto& m = test::small_model();
        core::Random rng(18);
        for (int trial = 0; trial < 40; ++trial) {
            const double noise = trial % 2 ? 0.5 : 0.0;
            const auto lms = test::project_landmarks(m, test::random_alpha(rng, 20), test::random_camera(rng),
                                                     model::landmark_set_49(), &rng, noise);
            fitting::FitConfig config;
            config.lambda = trial % 4 < 2 ? 3.0 : 0.1;
            const auto result = fitting::fit(m, lms, config);
            for (std::size_t i = 1; i < result.trace.size(); ++i)
                CHECK(result.trace[i].total() <= result.trace[i - 1].total() + 1e-9);
        }
    }

    TEST_CASE("missing landmarks are dropped")
    {
        const auto& m = test::small_model();
        core::Random rng(19);
        auto lms = test::project_landmarks(m, Eigen::VectorXd::Zero(20), test::random_camera(rng),
                                           model::landmark_set_13());
        const double nan = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t i = 0; i < 9; ++i)
            lms[i].point.x() = nan;
        CHECK_NOTHROW(fitting::fit(m, lms));
        lms[9].point.y() = nan;
        try {
            fitting::fit(m, lms);
            FAIL("expected insufficient points");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::insufficient_points);
        }
    }

    TEST_CASE("unknown landmark names are reported")
    {
        const auto& m = test::small_model();
        core::LandmarkSet lms{{"31", {0, 0}}, {"nose_tip_typo", {1, 1}}};
        try {
            fitting::find_correspondences(m, lms);
            FAIL("expected a mapping error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::mapping);
            CHECK(std::string(e.what()).find("nose_tip_typo") != std::string::npos);
        }
    }

    TEST_CASE("configuration validation")
    {
        const auto& m = test::small_model();
        core::Random rng(20);
        const auto lms = test::project_landmarks(m, Eigen::VectorXd::Zero(20), test::random_camera(rng),
                                                 model::landmark_set_7());
        fitting::FitConfig config;
        config.lambda = -1.0;
        CHECK_THROWS_AS(fitting::fit(m, lms, config), Error);
        config.lambda = 1.0;
        config.iterations = 0;
        CHECK_THROWS_AS(fitting::fit(m, lms, config), Error);
        config.iterations = 5;
        config.num_coeffs = 100;
        CHECK(fitting::effective_num_coeffs(m, config) == 20);
        CHECK(fitting::effective_num_coeffs(m, {}) == 20);
    }
}

/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: tests/test_eval.cpp
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
#include "morphfit/eval/det.hpp"
#include "morphfit/eval/scores.hpp"

#include "doctest.h"

#include <cmath>
#include <set>
#include <sstream>

using namespace morphfit;
using namespace morphfit::eval;

namespace {

// Probes p1 (A) and p2 (B) against gallery g1 (A) and g2 (B).
ScoreMatrix toy_matrix()
{
    ScoreMatrix m;
    m.probe_ids = {"p1", "p2"};
    m.gallery_ids = {"g1", "g2"};
    m.scores.resize(2, 2);
    m.scores << 0.9, 0.2, 0.1, 0.8;
    m.subjects = {{"p1", "A"}, {"p2", "B"}, {"g1", "A"}, {"g2", "B"}};
    return m;
}

ScoreMatrix with_yaws(ScoreMatrix m, const std::vector<double>& yaws)
{
    for (std::size_t i = 0; i < yaws.size(); ++i)
        m.yaw[m.probe_ids[i]] = yaws[i];
    return m;
}

template <class F>
ScoreMatrix transformed(ScoreMatrix m, F f)
{
    m.scores = m.scores.unaryExpr(f);
    return m;
}

std::vector<std::pair<double, double>> tradeoff(const DetCurve& c)
{
    std::vector<std::pair<double, double>> out;
    for (const auto& s : c.samples)
        out.emplace_back(s.far, s.frr);
    return out;
}

} // namespace

TEST_SUITE("eval")
{
    TEST_CASE("toy matrix DET")
    {
        const auto curve = compute_det(toy_matrix());
        const double inf = std::numeric_limits<double>::infinity();
        const std::vector<DetPoint> expected{
            {0.1, 1.0, 0.0}, {0.2, 0.5, 0.0}, {0.8, 0.0, 0.0}, {0.9, 0.0, 0.5}, {inf, 0.0, 1.0}};
        CHECK(curve.samples == expected);
        CHECK(curve.samples == test::det_oracle(toy_matrix()));

        // A threshold of 0.5 falls between the impostor and genuine scores.
        CHECK(curve.samples[2].far == 0.0);
        CHECK(curve.samples[2].frr == 0.0);
        CHECK(frr_at_far(curve, 0.01) == test::frr_at_far_oracle(expected, 0.01));
        CHECK(frr_at_far(curve, 0.01) == 0.0);
    }

    TEST_CASE("all scores equal")
    {
        auto m = toy_matrix();
        m.scores.setConstant(0.3);
        const auto curve = compute_det(m);
        REQUIRE(curve.samples.size() == 2);
        CHECK(curve.samples[0].far == 1.0);
        CHECK(curve.samples[0].frr == 0.0);
        CHECK(curve.samples[1].far == 0.0);
        CHECK(curve.samples[1].frr == 1.0);
    }

    TEST_CASE("self matches are excluded and pair kinds are required")
    {
        ScoreMatrix m;
        m.probe_ids = {"a", "b"};
        m.gallery_ids = {"a", "b"};
        m.scores = Eigen::MatrixXd::Constant(2, 2, 0.5);
        m.subjects = {{"a", "S"}, {"b", "T"}};
        // Only impostor pairs remain once a-a and b-b are dropped.
        try {
            compute_det(m);
            FAIL("expected insufficient data");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::insufficient_data);
        }
        m.subjects["b"] = "S";
        CHECK_THROWS_AS(compute_det(m), Error);
    }

    TEST_CASE("random matrices match the enumeration oracle")
    {
        core::Random rng(41);
        for (int trial = 0; trial < 30; ++trial) {
            const auto m = test::random_score_matrix(rng);
            const auto curve = compute_det(m);
            const auto oracle = test::det_oracle(m);
            REQUIRE(curve.samples == oracle);
            for (std::size_t k = 1; k < curve.samples.size(); ++k) {
                CHECK(curve.samples[k].far <= curve.samples[k - 1].far);
                CHECK(curve.samples[k].frr >= curve.samples[k - 1].frr);
            }
            for (double target : {0.001, 0.01, 0.1, 0.37, 0.9})
                CHECK(frr_at_far(curve, target) == test::frr_at_far_oracle(oracle, target));
        }
    }

    TEST_CASE("monotone transforms keep the trade-off")
    {
        core::Random rng(42);
        for (int trial = 0; trial < 5; ++trial) {
            const auto m = test::random_score_matrix(rng);
            const auto reference = tradeoff(compute_det(m));
            CHECK(tradeoff(compute_det(transformed(m, [](double s) { return 3.0 * s - 7.0; }))) == reference);
            CHECK(tradeoff(compute_det(transformed(m, [](double s) { return s * s * s; }))) == reference);
            CHECK(tradeoff(compute_det(transformed(m, [](double s) { return 1.0 / (1.0 + std::exp(-s)); }))) ==
                  reference);
        }
    }

    TEST_CASE("operating point interpolation")
    {
        DetCurve curve;
        curve.samples = {{0.0, 1.0, 0.0}, {1.0, 0.5, 0.2}, {2.0, 0.0, 0.6}};
        CHECK(frr_at_far(curve, 0.25) == doctest::Approx(0.4));
        CHECK(frr_at_far(curve, 0.5) == doctest::Approx(0.2));

        // The target is never reached, so the strictest threshold applies.
        DetCurve short_curve;
        short_curve.samples = {{0.0, 1.0, 0.0}, {1.0, 0.5, 0.3}};
        CHECK(frr_at_far(short_curve, 0.1) == 0.3);

        CHECK_THROWS_AS(frr_at_far(DetCurve{}, 0.01), Error);
        CHECK_THROWS_AS(frr_at_far(curve, 0.0), Error);
        CHECK_THROWS_AS(frr_at_far(curve, 1.0), Error);
    }

    TEST_CASE("perfect separation gives zero FRR")
    {
        auto m = toy_matrix();
        const auto curve = compute_det(m);
        for (double target : {0.001, 0.01, 0.5, 0.99})
            CHECK(frr_at_far(curve, target) == 0.0);
    }

    TEST_CASE("yaw bins follow the half-open rule")
    {
        ScoreMatrix m;
        m.probe_ids = {"a", "b", "c", "d", "e", "f", "g"};
        m.gallery_ids = {"x"};
        m.scores = Eigen::MatrixXd::Zero(7, 1);
        for (const auto& id : m.probe_ids)
            m.subjects[id] = "S";
        m.subjects["x"] = "S";
        m = with_yaws(m, {-65, -5, 5, 65, 0, -70, 70});

        const auto binning = bin_by_yaw(m, 10.0, 70.0);
        REQUIRE(binning.bins.size() == 14);
        CHECK(binning.bins[0].lower == -70.0);
        CHECK(binning.bins[0].view.probe_ids == std::vector<std::string>{"a", "f"});
        CHECK(binning.bins[6].view.probe_ids == std::vector<std::string>{"b"});
        CHECK(binning.bins[7].view.probe_ids == std::vector<std::string>{"c", "e"});
        CHECK(binning.bins[13].view.probe_ids == std::vector<std::string>{"d"});
        CHECK(binning.bins[13].upper == 70.0);
        CHECK(binning.out_of_range == std::vector<std::string>{"g"});
        CHECK(binning.bins[3].view.probe_ids.empty());
        CHECK(binning.bins[3].view.scores.rows() == 0);
        CHECK(binning.bins[3].centre() == -35.0);

        m.yaw.erase("c");
        try {
            bin_by_yaw(m, 10.0, 70.0);
            FAIL("expected a missing-annotation error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::insufficient_data);
            CHECK(std::string(e.what()).find("c") != std::string::npos);
        }
        CHECK_THROWS_AS(bin_by_yaw(with_yaws(m, {0, 0, 0, 0, 0, 0, 0}), 0.0, 70.0), Error);
        CHECK_THROWS_AS(bin_by_yaw(with_yaws(m, {0, 0, 0, 0, 0, 0, 0}), 30.0, 70.0), Error);
    }

    TEST_CASE("yaw bins partition the probes")
    {
        core::Random rng(43);
        ScoreMatrix m;
        m.gallery_ids = {"x"};
        m.subjects["x"] = "S";
        for (int i = 0; i < 1000; ++i) {
            const std::string id = "p" + std::to_string(i);
            m.probe_ids.push_back(id);
            m.subjects[id] = "S";
            m.yaw[id] = rng.uniform(-70.0, 70.0);
        }
        m.scores = Eigen::MatrixXd::Zero(1000, 1);

        const auto binning = bin_by_yaw(m, 10.0, 70.0);
        CHECK(binning.out_of_range.empty());
        std::multiset<std::string> seen;
        for (const auto& bin : binning.bins) {
            for (const auto& id : bin.view.probe_ids) {
                seen.insert(id);
                CHECK(m.yaw.at(id) >= bin.lower);
                CHECK(m.yaw.at(id) < bin.upper);
            }
        }
        CHECK(seen.size() == 1000);
        CHECK(std::set<std::string>(seen.begin(), seen.end()).size() == 1000);
    }

    TEST_CASE("improvement curve")
    {
        core::Random rng(44);
        auto baseline = test::random_score_matrix(rng);
        for (auto& [id, yaw] : baseline.yaw)
            yaw = rng.uniform(-70.0, 70.0);

        SUBCASE("identical inputs give zero improvement")
        {
            const auto curve = improvement_curve(baseline, baseline, 0.01);
            REQUIRE(curve.points.size() == 14);
            for (const auto& p : curve.points) {
                if (std::isnan(p.frr_baseline))
                    CHECK(std::isnan(p.delta));
                else
                    CHECK(p.delta == 0.0);
            }
        }
        SUBCASE("a perfectly separating method recovers the baseline FRR")
        {
            auto method = baseline;
            for (Eigen::Index p = 0; p < method.scores.rows(); ++p)
                for (Eigen::Index g = 0; g < method.scores.cols(); ++g)
                    method.scores(p, g) =
                        method.subjects[method.probe_ids[p]] == method.subjects[method.gallery_ids[g]];
            for (const auto& p : improvement_curve(baseline, method, 0.01).points) {
                if (std::isnan(p.frr_baseline))
                    continue;
                CHECK(p.frr_method == 0.0);
                CHECK(p.delta == p.frr_baseline);
            }
        }
        SUBCASE("per-bin values match the oracle")
        {
            auto method = transformed(baseline, [&](double s) { return s + rng.normal(0.0, 0.3); });
            const auto curve = improvement_curve(baseline, method, 0.05, 20.0, 60.0);
            REQUIRE(curve.points.size() == 6);
            for (const auto& p : curve.points) {
                std::vector<std::string> ids;
                for (const auto& id : baseline.probe_ids)
                    if (baseline.yaw.at(id) >= p.centre - 10.0 && baseline.yaw.at(id) < p.centre + 10.0)
                        ids.push_back(id);
                double expected = std::numeric_limits<double>::quiet_NaN();
                try {
                    const double b = test::frr_at_far_oracle(test::det_oracle(baseline.select_probes(ids)), 0.05);
                    const double m = test::frr_at_far_oracle(test::det_oracle(method.select_probes(ids)), 0.05);
                    // The oracle divides by zero pair counts instead of throwing.
                    if (std::isfinite(b) && std::isfinite(m))
                        expected = b - m;
                } catch (const Error&) {
                }
                if (std::isnan(expected))
                    CHECK(std::isnan(p.delta));
                else
                    CHECK(std::abs(p.delta - expected) < 1e-12);
            }
        }
        SUBCASE("mismatched ids are named")
        {
            auto method = baseline;
            method.probe_ids.back() = "stranger";
            method.subjects["stranger"] = "s0";
            try {
                improvement_curve(baseline, method, 0.01);
                FAIL("expected a mismatch error");
            } catch (const Error& e) {
                CHECK(e.kind() == ErrorKind::mismatch);
                CHECK(std::string(e.what()).find("stranger") != std::string::npos);
                CHECK(std::string(e.what()).find(baseline.probe_ids.back()) != std::string::npos);
            }
        }
    }

    TEST_CASE("score files")
    {
        SUBCASE("round trip")
        {
            core::Random rng(45);
            const auto m = test::random_score_matrix(rng, 10);
            std::stringstream scores, labels;
            write_score_matrix(m, scores, labels);
            const auto back = read_score_matrix(scores, labels);
            CHECK(back.probe_ids == m.probe_ids);
            CHECK(back.gallery_ids == m.gallery_ids);
            CHECK(back.scores == m.scores);
            CHECK(back.subjects == m.subjects);
            CHECK(back.yaw == m.yaw);
        }
        SUBCASE("empty yaw cells are allowed")
        {
            std::istringstream scores(",g1\np1,0.5\n"), labels("id,subject,yaw\ng1,A,\np1,A,12.5\n");
            const auto m = read_score_matrix(scores, labels);
            CHECK(m.yaw.size() == 1);
            CHECK(m.yaw.at("p1") == 12.5);
        }
        SUBCASE("errors name the line")
        {
            auto field_of = [](const std::string& s, const std::string& l) {
                std::istringstream scores(s), labels(l);
                try {
                    read_score_matrix(scores, labels);
                } catch (const ParseError& e) {
                    return e.field();
                }
                return std::string("no error");
            };
            const std::string labels = "id,subject,yaw\ng1,A,\ng2,B,\np1,A,0\np2,B,0\n";
            CHECK(field_of(",g1,g2\np1,0.5,0.1\np2,0.2\n", labels) == "scores line 3");
            CHECK(field_of(",g1,g2\np1,0.5,abc\np2,0.2,0.3\n", labels) == "scores line 2");
            CHECK(field_of("", labels) == "scores");
            CHECK(field_of(",g1,g2\np1,0.5,0.1\n", "name,subject\n") == "labels line 1");
            CHECK(field_of(",g1,g2\np1,0.5,0.1\n", "id,subject,yaw\ng1,A,north\n") == "labels line 2");

            std::istringstream scores(",g1\np1,0.5\n"), partial("id,subject,yaw\ng1,A,\n");
            try {
                read_score_matrix(scores, partial);
                FAIL("expected a mapping error");
            } catch (const Error& e) {
                CHECK(e.kind() == ErrorKind::mapping);
                CHECK(std::string(e.what()).find("p1") != std::string::npos);
            }
        }
    }

    TEST_CASE("curve writers")
    {
        std::ostringstream det;
        write_det_csv(compute_det(toy_matrix()), det);
        CHECK(det.str() == "threshold,far,frr\n0.10000000000000001,1,0\n0.20000000000000001,0.5,0\n"
                           "0.80000000000000004,0,0\n0.90000000000000002,0,0.5\ninf,0,1\n");

        ImprovementCurve curve;
        curve.points = {{-65.0, 0.5, 0.25, 0.25}, {-55.0, std::nan(""), std::nan(""), std::nan("")}};
        std::ostringstream improvement;
        write_improvement_csv(curve, improvement);
        CHECK(improvement.str() ==
              "bin_centre,frr_baseline,frr_method,delta_frr\n-65,0.5,0.25,0.25\n-55,nan,nan,nan\n");

        std::ostringstream bins;
        write_binned_csv({{-70.0, -60.0, 3, 0.125}}, bins);
        CHECK(bins.str() == "bin_lower,bin_upper,probes,frr\n-70,-60,3,0.125\n");
    }
}

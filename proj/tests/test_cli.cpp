/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: tests/test_cli.cpp
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

#include "morphfit/core/image.hpp"
#include "morphfit/eval/scores.hpp"

#include "doctest.h"
#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace morphfit;
namespace fs = std::filesystem;

namespace {

struct Run
{
    int status = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

const fs::path& work()
{
    static const fs::path dir = [] {
        const fs::path d = MORPHFIT_CLI_WORK;
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

Run cli(const std::string& args)
{
    const fs::path out = work() / "stdout.txt";
    const fs::path err = work() / "stderr.txt";
    const std::string command = "cd '" + work().string() + "' && '" MORPHFIT_EXE "' " + args + " > '" +
                                out.string() + "' 2> '" + err.string() + "'";
    const int raw = std::system(command.c_str());
    Run r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream(work() / path) << text;
}

// The shared V=500, K=20 model file, written once.
const std::string& model_file()
{
    static const std::string name = [] {
        const auto r = cli("model gen --seed 7 --vertices 500 --coeffs 20 --out model.bin");
        REQUIRE(r.status == 0);
        return std::string("model.bin");
    }();
    return name;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream cells_in(line);
        std::string cell;
        while (std::getline(cells_in, cell, ','))
            cells.push_back(cell);
        if (!line.empty() && line.back() == ',')
            cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

double parse_value(const std::string& cell)
{
    return cell == "inf" ? std::numeric_limits<double>::infinity() : std::stod(cell);
}

} // namespace

TEST_SUITE("cli")
{
    TEST_CASE("model gen is deterministic and inspect reports dimensions")
    {
        REQUIRE(cli("model gen --seed 7 --vertices 500 --coeffs 20 --out a.bin").status == 0);
        REQUIRE(cli("model gen --seed 7 --vertices 500 --coeffs 20 --out b.bin").status == 0);
        CHECK(slurp(work() / "a.bin") == slurp(work() / "b.bin"));

        const auto r = cli("model inspect a.bin");
        CHECK(r.status == 0);
        CHECK(r.out.find("vertices 500\n") != std::string::npos);
        CHECK(r.out.find("shape_coefficients 20\n") != std::string::npos);
        CHECK(r.out.find("landmark 31 ") != std::string::npos);
    }

    TEST_CASE("corrupt model files name the failing field")
    {
        const std::string bytes = slurp(work() / model_file());
        std::ofstream(work() / "truncated.bin", std::ios::binary) << bytes.substr(0, 2000);
        const auto r = cli("model inspect truncated.bin");
        CHECK(r.status == 1);
        const auto line = nlohmann::json::parse(r.err);
        CHECK(line["error"] == "parse");
        CHECK(line["message"].get<std::string>().find("shape_mean") == 0);
    }

    TEST_CASE("usage errors exit with 2")
    {
        for (const std::string args :
             {"", "frobnicate", "model gen --seed 7", "fit --image x.png", "detect --cascade c", "train-detector",
              "eval det --labels l.csv", "pose-annotate --model m.bin", "synth --model m.bin",
              "fit --model m.bin --lambda -1"}) {
            CAPTURE(args);
            const auto r = cli(args);
            CHECK(r.status == 2);
        }
    }

    TEST_CASE("fit reproduces the golden frontal rendering")
    {
        const auto& model = model_file();
        REQUIRE(cli("synth --model " + model + " --out-dir golden --count 1 --seed 3 --yaw 15").status == 0);
        const auto r = cli("fit --model " + model +
                           " --image golden/face_0000.png --landmarks golden/face_0000.pts --out-dir fit");
        REQUIRE(r.status == 0);
        const auto record = nlohmann::json::parse(r.out);
        CHECK(record["skipped"] == false);
        CHECK(record["cost_trace"].size() == 5);
        CHECK(std::abs(record["pose"]["yaw"].get<double>() - 15.0) < 1.0);
        for (const char* suffix : {".alpha.csv", ".camera.csv", ".frontal.png", ".isomap.png", ".isomap.mask.png"})
            CHECK(fs::exists(work() / "fit" / (std::string("face_0000") + suffix)));

        const auto produced = core::read_image(work() / "fit/face_0000.frontal.png");
        const auto golden = core::read_image(fs::path(MORPHFIT_TEST_DATA) / "golden_frontal.png");
        REQUIRE(produced.width == golden.width);
        REQUIRE(produced.height == golden.height);
        std::size_t close = 0;
        const std::size_t pixels = std::size_t(golden.width) * golden.height;
        for (std::size_t p = 0; p < pixels; ++p) {
            bool ok = true;
            for (int c = 0; c < 3; ++c)
                ok = ok && std::abs(int(produced.data[3 * p + c]) - int(golden.data[3 * p + c])) <= 8;
            close += ok;
        }
        MESSAGE("pixels within 8/255 of the golden image: ", double(close) / pixels);
        CHECK(double(close) / pixels >= 0.99);
    }

    TEST_CASE("fit skips normalisation below --min-yaw")
    {
        const auto& model = model_file();
        REQUIRE(cli("synth --model " + model + " --out-dir near --count 1 --seed 4 --yaw 5").status == 0);
        const auto r = cli("fit --model " + model +
                           " --image near/face_0000.png --landmarks near/face_0000.pts --out-dir near_fit"
                           " --min-yaw 20");
        REQUIRE(r.status == 0);
        CHECK(nlohmann::json::parse(r.out)["skipped"] == true);
        const auto input = core::read_image(work() / "near/face_0000.png");
        const auto copied = core::read_image(work() / "near_fit/face_0000.frontal.png");
        CHECK(input.data == copied.data);
        CHECK_FALSE(fs::exists(work() / "near_fit/face_0000.isomap.png"));
    }

    TEST_CASE("fit with three landmarks reports insufficient points")
    {
        const auto& model = model_file();
        REQUIRE(cli("synth --model " + model + " --out-dir few --count 1 --seed 5 --landmarks 7").status == 0);
        write_text("few/three.pts", "31 100 120\n37 80 90\n46 120 90\n");
        const auto r = cli("fit --model " + model + " --image few/face_0000.png --landmarks few/three.pts"
                           " --out-dir few_fit");
        CHECK(r.status == 1);
        CHECK(r.err.find("insufficient-points") != std::string::npos);
    }

    TEST_CASE("train-detector and detect")
    {
        const auto& model = model_file();
        REQUIRE(cli("synth --model " + model + " --out-dir train --count 120 --seed 11 --landmarks 13").status == 0);
        REQUIRE(cli("synth --model " + model + " --out-dir hold --count 20 --seed 12 --landmarks 13").status == 0);
        const auto trained =
            cli("train-detector --manifest train/manifest.csv --holdout hold/manifest.csv --out detector.bin");
        REQUIRE(trained.status == 0);

        double initial = -1, final = -1;
        std::istringstream lines(trained.out);
        std::string key;
        while (lines >> key) {
            if (key == "held_out_initial_error")
                lines >> initial;
            else if (key == "held_out_final_error")
                lines >> final;
        }
        MESSAGE("held-out error ", initial, " -> ", final);
        REQUIRE(initial > 0);
        CHECK(final <= 0.5 * initial);

        // Detect on one held-out render with its ground-truth box.
        const auto manifest = csv_rows(slurp(work() / "hold/manifest.csv"));
        const auto& row = manifest[1];
        const std::string box = row[3] + "," + row[4] + "," + row[5] + "," + row[6];
        const auto detected = cli("detect --cascade detector.bin --image hold/" + row[1] + " --face-box " + box +
                                  " --out detected.pts");
        REQUIRE(detected.status == 0);
        const auto found = core::read_landmarks(work() / "detected.pts");
        const auto truth = core::read_landmarks(work() / "hold" / row[2]);
        REQUIRE(found.size() == truth.size());
        for (std::size_t i = 0; i < found.size(); ++i)
            CHECK(found[i].name == truth[i].name);

        const auto zero = cli("detect --cascade detector.bin --image hold/" + row[1] + " --face-box 10,10,0,0");
        CHECK(zero.status == 1);
        CHECK(nlohmann::json::parse(zero.err)["error"] == "parameter");
    }

    TEST_CASE("eval det matches the oracle table")
    {
        core::Random rng(51);
        const auto m = test::random_score_matrix(rng, 12);
        {
            std::ofstream scores(work() / "scores.csv"), labels(work() / "labels.csv");
            eval::write_score_matrix(m, scores, labels);
        }
        const auto r = cli("eval det --scores scores.csv --labels labels.csv");
        REQUIRE(r.status == 0);
        const auto rows = csv_rows(r.out);
        const auto oracle = test::det_oracle(m);
        REQUIRE(rows.size() == oracle.size() + 1);
        CHECK(rows[0] == std::vector<std::string>{"threshold", "far", "frr"});
        for (std::size_t k = 0; k < oracle.size(); ++k) {
            CHECK(parse_value(rows[k + 1][0]) == oracle[k].threshold);
            CHECK(parse_value(rows[k + 1][1]) == oracle[k].far);
            CHECK(parse_value(rows[k + 1][2]) == oracle[k].frr);
        }
        // The default operating point is 0.01 FAR.
        std::ostringstream expected;
        expected << "frr_at_far 0.01 " << test::frr_at_far_oracle(oracle, 0.01);
        CHECK(r.err.find(expected.str()) == 0);

        const auto bins = cli("eval bins --scores scores.csv --labels labels.csv --bin-width 20 --range 80");
        CHECK(bins.status == 0);
        CHECK(csv_rows(bins.out).size() == 9);
        CHECK(cli("eval det --scores scores.csv --labels labels.csv --far 1.5").status == 1);
    }

    TEST_CASE("eval improve with identical inputs is zero")
    {
        core::Random rng(52);
        auto m = test::random_score_matrix(rng, 30);
        for (auto& [id, yaw] : m.yaw)
            yaw = rng.uniform(-70.0, 70.0);
        {
            std::ofstream scores(work() / "base.csv"), labels(work() / "base_labels.csv");
            eval::write_score_matrix(m, scores, labels);
        }
        const auto r = cli("eval improve --baseline base.csv --method base.csv --labels base_labels.csv");
        REQUIRE(r.status == 0);
        const auto rows = csv_rows(r.out);
        REQUIRE(rows.size() == 15);
        int filled = 0;
        for (std::size_t k = 1; k < rows.size(); ++k) {
            if (rows[k][3] == "nan")
                continue;
            CHECK(std::stod(rows[k][3]) == 0.0);
            ++filled;
        }
        CHECK(filled > 0);

        write_text("other.csv", ",img0\nstranger,0.5\n");
        write_text("other_labels.csv", "id,subject,yaw\nimg0,s0,\nstranger,s0,0\n");
        const auto bad = cli("eval improve --baseline base.csv --labels base_labels.csv --method other.csv"
                             " --method-labels other_labels.csv");
        CHECK(bad.status == 1);
        CHECK(bad.err.find("stranger") != std::string::npos);
    }

    TEST_CASE("pose-annotate")
    {
        const auto& model = model_file();
        REQUIRE(cli("synth --model " + model + " --out-dir yaw40 --count 3 --seed 6 --yaw 40").status == 0);
        REQUIRE(cli("synth --model " + model + " --out-dir yaw0 --count 3 --seed 7 --yaw 0").status == 0);

        // Synthetic renders are orthographic, so POSIT gets a focal length far beyond the object depth.
        for (const std::string method : {"affine", "posit --focal 100000"}) {
            CAPTURE(method);
            const auto turned =
                cli("pose-annotate --model " + model + " --manifest yaw40/manifest.csv --method " + method);
            REQUIRE(turned.status == 0);
            const auto rows = csv_rows(turned.out);
            REQUIRE(rows.size() == 4);
            for (std::size_t k = 1; k < rows.size(); ++k)
                CHECK(std::abs(std::stod(rows[k][1]) - 40.0) <= 2.0);
        }

        const auto frontal = cli("pose-annotate --model " + model + " --manifest yaw0/manifest.csv");
        REQUIRE(frontal.status == 0);
        const auto rows = csv_rows(frontal.out);
        for (std::size_t k = 1; k < rows.size(); ++k)
            CHECK(std::abs(std::stod(rows[k][1])) <= 1.0);

        // One row points at a missing file; the others are still annotated.
        std::string manifest = slurp(work() / "yaw0/manifest.csv");
        manifest += "ghost,ghost.png,ghost.pts,0,0,10,10\n";
        write_text("yaw0/with_ghost.csv", manifest);
        const auto partial = cli("pose-annotate --model " + model + " --manifest yaw0/with_ghost.csv");
        CHECK(partial.status == 1);
        const auto partial_rows = csv_rows(partial.out);
        REQUIRE(partial_rows.size() == 5);
        for (std::size_t k = 1; k < 4; ++k)
            CHECK(partial_rows[k][4] == "ok");
        CHECK(partial_rows[4][0] == "ghost");
        CHECK(partial_rows[4][1] == "nan");
        CHECK(partial_rows[4][4].find("failed") == 0);
        CHECK(partial.err.find("ghost") != std::string::npos);
    }
}

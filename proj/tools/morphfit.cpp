/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: tools/morphfit.cpp
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
#include "morphfit/camera/affine_camera.hpp"
#include "morphfit/camera/posit.hpp"
#include "morphfit/core/error.hpp"
#include "morphfit/core/image.hpp"
#include "morphfit/core/landmark.hpp"
#include "morphfit/core/random.hpp"
#include "morphfit/eval/det.hpp"
#include "morphfit/eval/scores.hpp"
#include "morphfit/fitting/shape_fitting.hpp"
#include "morphfit/landmarks/cascade.hpp"
#include "morphfit/model/model_io.hpp"
#include "morphfit/model/synthetic.hpp"
#include "morphfit/texture/isomap.hpp"
#include "morphfit/texture/render.hpp"
#include "morphfit/texture/synthetic_face.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace morphfit;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Raised for per-command processing failures that are not library errors.
struct CommandError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

void report_error(const std::string& command, const std::string& kind, const std::string& message)
{
    json line = {{"command", command}, {"error", kind}, {"message", message}};
    std::cerr << line.dump() << std::endl;
}

int worker_count(std::size_t jobs)
{
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("MORPHFIT_THREADS")) {
        try {
            const int requested = std::stoi(env);
            if (requested >= 1)
                n = static_cast<unsigned>(requested);
        } catch (const std::exception&) {
        }
    }
    return static_cast<int>(std::max<std::size_t>(1, std::min<std::size_t>(n, jobs)));
}

// Runs job(i) for i in [0, count) on a bounded pool; jobs must not throw.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& job)
{
    const int workers = worker_count(count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++)
                job(i);
        });
    }
    for (auto& t : pool)
        t.join();
}

template <typename Writer>
void write_atomic(const fs::path& path, Writer&& writer)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out)
            throw Error(ErrorKind::io, "cannot open " + tmp.string());
        out << std::setprecision(17);
        writer(out);
        if (!out)
            throw Error(ErrorKind::io, "failed writing " + tmp.string());
    }
    fs::rename(tmp, path);
}

void emit(const std::optional<fs::path>& path, const std::function<void(std::ostream&)>& writer)
{
    if (path) {
        write_atomic(*path, writer);
    } else {
        std::cout << std::setprecision(17);
        writer(std::cout);
    }
}

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ','))
        cells.push_back(cell);
    if (!line.empty() && line.back() == ',')
        cells.emplace_back();
    for (auto& c : cells) {
        const auto first = c.find_first_not_of(" \t\r");
        const auto last = c.find_last_not_of(" \t\r");
        c = first == std::string::npos ? std::string() : c.substr(first, last - first + 1);
    }
    return cells;
}

// A CSV manifest with a header row; relative paths resolve against its directory.
struct Manifest
{
    fs::path directory;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const
    {
        const auto it = std::find(columns.begin(), columns.end(), name);
        if (it == columns.end())
            throw ParseError("manifest", "missing column '" + name + "'");
        return static_cast<std::size_t>(it - columns.begin());
    }

    bool has(const std::string& name) const
    {
        return std::find(columns.begin(), columns.end(), name) != columns.end();
    }

    fs::path resolve(const std::string& path) const
    {
        const fs::path p(path);
        return p.is_absolute() ? p : directory / p;
    }
};

Manifest read_manifest(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::io, "cannot open " + path.string());
    Manifest manifest;
    manifest.directory = path.parent_path();
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        auto cells = split_csv_line(line);
        if (manifest.columns.empty()) {
            manifest.columns = std::move(cells);
            continue;
        }
        if (cells.size() != manifest.columns.size())
            throw ParseError("manifest line " + std::to_string(number),
                             "expected " + std::to_string(manifest.columns.size()) + " cells");
        manifest.rows.push_back(std::move(cells));
    }
    if (manifest.columns.empty())
        throw ParseError("manifest", "empty manifest");
    return manifest;
}

core::FaceBox box_from_row(const Manifest& manifest, const std::vector<std::string>& row)
{
    auto number = [&](const std::string& name) {
        try {
            return std::stod(row[manifest.column(name)]);
        } catch (const std::logic_error&) {
            throw ParseError("manifest", "bad value in column '" + name + "'");
        }
    };
    return {number("x"), number("y"), number("width"), number("height")};
}

const std::vector<std::string>& landmark_scheme(int count)
{
    switch (count) {
    case 7:
        return model::landmark_set_7();
    case 13:
        return model::landmark_set_13();
    case 49:
        return model::landmark_set_49();
    default:
        throw Error(ErrorKind::parameter, "landmark scheme must be 7, 13 or 49");
    }
}

std::string hex(std::uint64_t value)
{
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << value;
    return out.str();
}

json pose_json(const camera::PoseAngles& pose)
{
    return {{"yaw", pose.yaw}, {"pitch", pose.pitch}, {"roll", pose.roll}};
}

// --- model -----------------------------------------------------------------

struct ModelGenOptions
{
    std::uint64_t seed = 0;
    int vertices = 3448;
    int coeffs = 63;
    bool colour = false;
    std::string out;
};

void run_model_gen(const ModelGenOptions& o)
{
    const auto m = model::generate_synthetic_model(o.seed, o.vertices, o.coeffs, {o.colour});
    model::save_model(m, o.out);
}

void run_model_inspect(const std::string& path)
{
    const auto m = model::load_model(path);
    std::cout << "vertices " << m.vertex_count() << '\n'
              << "shape_coefficients " << m.num_shape_coefficients() << '\n'
              << "colour_coefficients " << (m.colour_model() ? m.colour_model()->num_components() : 0) << '\n'
              << "triangles " << m.triangles().size() << '\n'
              << "landmarks " << m.landmarks().size() << '\n'
              << "orthonormality_residual " << model::orthonormality_residual(m.shape_model().basis) << '\n'
              << "fingerprint " << hex(m.fingerprint()) << '\n';
    for (const auto& [name, index] : m.landmarks())
        std::cout << "landmark " << name << ' ' << index << '\n';
}

// --- fit -------------------------------------------------------------------

struct FitOptions
{
    std::string model;
    std::string image;
    std::string landmarks;
    std::string cascade;
    std::string face_box;
    std::string manifest;
    std::string out_dir = ".";
    std::string stem;
    std::string record;
    double lambda = 3.0;
    int iterations = 5;
    int num_coeffs = -1;
    int resolution = 512;
    int frontal_size = 256;
    double min_yaw = 0.0;
};

struct FitJob
{
    fs::path image;
    std::optional<fs::path> landmarks;
    std::optional<core::FaceBox> box;
    std::string stem;
};

struct FitShared
{
    const model::MorphableModel& model;
    const texture::IsomapChart& chart;
    const landmarks::RegressorCascade* cascade;
    fitting::FitConfig config;
    const FitOptions& options;
};

json run_fit_job(const FitShared& shared, const FitJob& job)
{
    const auto start = std::chrono::steady_clock::now();
    const auto image = core::read_image(job.image);
    core::LandmarkSet points;
    if (job.landmarks) {
        points = core::read_landmarks(*job.landmarks);
    } else {
        if (!shared.cascade || !job.box)
            throw CommandError("either landmarks or a cascade with a face box are required");
        points = landmarks::detect_landmarks(image, *job.box, *shared.cascade);
    }
    const auto result = fitting::fit(shared.model, points, shared.config);
    const auto pose = camera::extract_pose_angles(result.camera);
    const fs::path out = shared.options.out_dir;

    write_atomic(out / (job.stem + ".alpha.csv"), [&](std::ostream& o) {
        o << "index,alpha\n";
        for (Eigen::Index i = 0; i < result.alpha.size(); ++i)
            o << i << ',' << result.alpha(i) << '\n';
    });
    write_atomic(out / (job.stem + ".camera.csv"), [&](std::ostream& o) {
        const auto& c = result.camera.matrix();
        for (int r = 0; r < 3; ++r)
            o << c(r, 0) << ',' << c(r, 1) << ',' << c(r, 2) << ',' << c(r, 3) << '\n';
    });

    const bool skipped = std::abs(pose.yaw) < shared.options.min_yaw;
    if (skipped) {
        core::write_png(image, out / (job.stem + ".frontal.png"));
    } else {
        const auto mesh = model::instantiate(shared.model, result.alpha);
        const auto texture = texture::remap_texture(image, mesh, result.camera, shared.chart,
                                                    shared.options.resolution);
        core::write_png(texture.image, out / (job.stem + ".isomap.png"));
        core::write_png(texture.mask, out / (job.stem + ".isomap.mask.png"));
        core::write_png(texture::render_frontal(mesh, texture, shared.chart, shared.options.frontal_size),
                        out / (job.stem + ".frontal.png"));
    }

    json trace = json::array();
    for (const auto& c : result.trace)
        trace.push_back({{"data", c.data}, {"regulariser", c.regulariser}, {"total", c.total()}});
    const double latency =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return {{"image", job.image.string()},
            {"stem", job.stem},
            {"landmarks", static_cast<int>(core::drop_missing(points).size())},
            {"pose", pose_json(pose)},
            {"cost_trace", trace},
            {"skipped", skipped},
            {"latency_ms", latency}};
}

int run_fit(const FitOptions& o)
{
    const auto m = model::load_model(o.model);
    std::optional<landmarks::RegressorCascade> cascade;
    if (!o.cascade.empty())
        cascade = landmarks::load_cascade(fs::path(o.cascade));
    if (o.resolution < 32)
        throw Error(ErrorKind::parameter, "isomap resolution must be at least 32");

    std::vector<FitJob> jobs;
    if (!o.manifest.empty()) {
        const auto manifest = read_manifest(o.manifest);
        const bool with_landmarks = manifest.has("landmarks");
        for (std::size_t r = 0; r < manifest.rows.size(); ++r) {
            const auto& row = manifest.rows[r];
            FitJob job;
            job.image = manifest.resolve(row[manifest.column("image")]);
            if (with_landmarks)
                job.landmarks = manifest.resolve(row[manifest.column("landmarks")]);
            else
                job.box = box_from_row(manifest, row);
            job.stem = manifest.has("id") ? row[manifest.column("id")] : job.image.stem().string();
            jobs.push_back(std::move(job));
        }
    } else {
        FitJob job;
        job.image = o.image;
        if (!o.landmarks.empty())
            job.landmarks = fs::path(o.landmarks);
        else if (!o.face_box.empty())
            job.box = core::parse_face_box(o.face_box);
        if (!job.landmarks && !(cascade && job.box))
            throw CommandError("fit needs --landmarks, or --cascade with --face-box");
        job.stem = o.stem.empty() ? job.image.stem().string() : o.stem;
        jobs.push_back(std::move(job));
    }
    fs::create_directories(o.out_dir);

    fitting::FitConfig config;
    config.lambda = o.lambda;
    config.iterations = o.iterations;
    if (o.num_coeffs > 0)
        config.num_coeffs = o.num_coeffs;
    const auto chart = texture::compute_isomap(m);
    const FitShared shared{m, chart, cascade ? &*cascade : nullptr, config, o};

    std::vector<json> records(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t i) {
        try {
            records[i] = run_fit_job(shared, jobs[i]);
        } catch (const Error& e) {
            records[i] = {{"image", jobs[i].image.string()},
                          {"error", std::string(to_string(e.kind()))},
                          {"message", e.what()}};
        } catch (const std::exception& e) {
            records[i] = {{"image", jobs[i].image.string()}, {"error", "processing"}, {"message", e.what()}};
        }
    });

    int failures = 0;
    std::ostringstream lines;
    for (const auto& r : records) {
        lines << r.dump() << '\n';
        if (r.contains("error")) {
            ++failures;
            report_error("fit", r["error"].get<std::string>(), r["message"].get<std::string>());
        }
    }
    if (!o.record.empty()) {
        std::ofstream out(o.record, std::ios::app);
        if (!out)
            throw Error(ErrorKind::io, "cannot open " + o.record);
        out << lines.str();
    } else {
        std::cout << lines.str();
    }
    return failures ? 1 : 0;
}

// --- detector --------------------------------------------------------------

struct TrainOptions
{
    std::string manifest;
    std::string holdout;
    std::string out;
    landmarks::TrainingOptions training;
};

std::vector<landmarks::TrainingSample> load_samples(const fs::path& manifest_path)
{
    const auto manifest = read_manifest(manifest_path);
    std::vector<landmarks::TrainingSample> samples;
    for (const auto& row : manifest.rows) {
        landmarks::TrainingSample s;
        s.image = core::to_grayscale(core::read_image(manifest.resolve(row[manifest.column("image")])));
        s.landmarks = core::read_landmarks(manifest.resolve(row[manifest.column("landmarks")]));
        s.box = box_from_row(manifest, row);
        samples.push_back(std::move(s));
    }
    return samples;
}

void run_train(const TrainOptions& o)
{
    const auto samples = load_samples(o.manifest);
    const auto result = landmarks::train_cascade(samples, o.training);
    landmarks::save_cascade(result.cascade, fs::path(o.out));
    for (std::size_t s = 0; s < result.training_errors.size(); ++s)
        std::cout << "training_error stage " << s << ' ' << result.training_errors[s] << '\n';
    if (!o.holdout.empty()) {
        const auto held_out = load_samples(o.holdout);
        if (held_out.empty())
            throw CommandError("held-out manifest is empty");
        double initial = 0.0, final = 0.0;
        for (const auto& s : held_out) {
            core::LandmarkSet init;
            for (int l = 0; l < result.cascade.num_landmarks(); ++l) {
                const Eigen::Vector2d unit = result.cascade.mean_landmarks.col(l);
                init.push_back({result.cascade.names[l],
                                {s.box.x + unit.x() * s.box.width, s.box.y + unit.y() * s.box.height}});
            }
            initial += landmarks::normalised_error(init, s.landmarks, s.box);
            final += landmarks::normalised_error(landmarks::detect_landmarks(s.image, s.box, result.cascade),
                                                 s.landmarks, s.box);
        }
        std::cout << "held_out_initial_error " << initial / held_out.size() << '\n'
                  << "held_out_final_error " << final / held_out.size() << '\n';
    }
}

void run_detect(const std::string& cascade_path, const std::string& image_path, const std::string& box_text,
                const std::string& out)
{
    const auto cascade = landmarks::load_cascade(fs::path(cascade_path));
    const auto image = core::read_image(image_path);
    const auto points = landmarks::detect_landmarks(image, core::parse_face_box(box_text), cascade);
    if (out.empty())
        core::write_landmarks(std::cout, points);
    else
        core::write_landmarks(points, out);
}

// --- synth -----------------------------------------------------------------

struct SynthOptions
{
    std::string model;
    std::string out_dir;
    int count = 10;
    std::uint64_t seed = 0;
    int scheme = 49;
    std::optional<double> yaw;
    texture::SyntheticSceneOptions scene;
};

void run_synth(const SynthOptions& o)
{
    const auto m = model::load_model(o.model);
    const auto& names = landmark_scheme(o.scheme);
    fs::create_directories(o.out_dir);
    core::Random rng(o.seed);
    std::ostringstream manifest, poses;
    manifest << "id,image,landmarks,x,y,width,height\n";
    poses << std::setprecision(17) << "id,yaw,pitch,roll\n";
    auto scene = o.scene;
    if (o.yaw) {
        scene.max_pitch = 0.0;
        scene.max_roll = 0.0;
    }
    for (int i = 0; i < o.count; ++i) {
        std::ostringstream id;
        id << "face_" << std::setw(4) << std::setfill('0') << i;
        texture::SyntheticFace face;
        if (o.yaw) {
            // Fixed yaw, random shape, frontal pitch and roll.
            Eigen::VectorXd alpha(m.num_shape_coefficients());
            for (Eigen::Index k = 0; k < alpha.size(); ++k)
                alpha(k) = rng.uniform(-scene.alpha_range, scene.alpha_range);
            const double scale = scene.face_size / 1.3;
            const Eigen::Vector2d origin(0.5 * scene.image_size, 0.5 * scene.image_size);
            face = texture::render_synthetic_face(m, alpha, camera::make_camera({*o.yaw, 0.0, 0.0}, scale, origin),
                                                  scene.image_size, scene.image_size, names);
        } else {
            face = texture::random_synthetic_face(m, rng, scene, names);
        }
        const auto box = core::face_box_from_landmarks(face.landmarks);
        core::write_png(face.image, fs::path(o.out_dir) / (id.str() + ".png"));
        core::write_landmarks(face.landmarks, fs::path(o.out_dir) / (id.str() + ".pts"));
        manifest << std::setprecision(17) << id.str() << ',' << id.str() << ".png," << id.str() << ".pts," << box.x
                 << ',' << box.y << ',' << box.width << ',' << box.height << '\n';
        poses << id.str() << ',' << face.pose.yaw << ',' << face.pose.pitch << ',' << face.pose.roll << '\n';
    }
    write_atomic(fs::path(o.out_dir) / "manifest.csv", [&](std::ostream& out) { out << manifest.str(); });
    write_atomic(fs::path(o.out_dir) / "poses.csv", [&](std::ostream& out) { out << poses.str(); });
}

// --- pose-annotate ---------------------------------------------------------

struct PoseOptions
{
    std::string model;
    std::string manifest;
    std::string method = "affine";
    double focal = 0.0;
    std::string out;
    double lambda = 3.0;
};

int run_pose_annotate(const PoseOptions& o)
{
    const auto m = model::load_model(o.model);
    const auto manifest = read_manifest(o.manifest);
    const std::size_t id_col = manifest.column("id");
    const std::size_t lm_col = manifest.column("landmarks");
    const bool with_image = manifest.has("image");
    if (o.method == "posit" && !with_image && o.focal <= 0.0)
        throw CommandError("posit needs an image column or an explicit --focal");

    struct Row
    {
        std::string id;
        camera::PoseAngles pose;
        std::string status = "ok";
    };
    std::vector<Row> rows(manifest.rows.size());
    parallel_for(rows.size(), [&](std::size_t i) {
        const auto& cells = manifest.rows[i];
        Row& row = rows[i];
        row.id = cells[id_col];
        try {
            const auto points = core::read_landmarks(manifest.resolve(cells[lm_col]));
            Eigen::Vector2d principal = Eigen::Vector2d::Zero();
            double focal = o.focal;
            if (with_image) {
                const auto image = core::read_image(manifest.resolve(cells[manifest.column("image")]));
                principal = Eigen::Vector2d(0.5 * image.width, 0.5 * image.height);
                if (focal <= 0.0)
                    focal = 1.5 * image.width;
            }
            if (o.method == "posit") {
                const auto c = fitting::find_correspondences(m, points);
                const auto pose = camera::estimate_pose_posit(
                    c.image_points, model::gather_vertices(m.shape_model().mean, c.vertex_indices), focal, principal);
                row.pose = camera::pose_angles_from_camera_rotation(pose.rotation);
            } else {
                fitting::FitConfig config;
                config.lambda = o.lambda;
                row.pose = camera::extract_pose_angles(fitting::fit(m, points, config).camera);
            }
        } catch (const std::exception& e) {
            row.status = std::string("failed: ") + e.what();
        }
    });

    int failures = 0;
    emit(o.out.empty() ? std::nullopt : std::optional<fs::path>(o.out), [&](std::ostream& out) {
        out << "id,yaw,pitch,roll,status\n";
        for (const auto& r : rows) {
            if (r.status != "ok") {
                ++failures;
                std::string status = r.status;
                std::replace(status.begin(), status.end(), ',', ';');
                out << r.id << ",nan,nan,nan," << status << '\n';
            } else {
                out << r.id << ',' << r.pose.yaw << ',' << r.pose.pitch << ',' << r.pose.roll << ",ok\n";
            }
        }
    });
    for (const auto& r : rows) {
        if (r.status != "ok")
            report_error("pose-annotate", "processing", r.id + ": " + r.status);
    }
    return failures ? 1 : 0;
}

// --- eval ------------------------------------------------------------------

struct EvalOptions
{
    std::string scores;
    std::string labels;
    std::string baseline;
    std::string method;
    std::string method_labels;
    std::string out;
    double far = 0.01;
    double bin_width = 10.0;
    double range = 70.0;
};

std::optional<fs::path> out_path(const std::string& out)
{
    return out.empty() ? std::nullopt : std::optional<fs::path>(out);
}

void check_far(double far)
{
    if (!(far > 0.0 && far < 1.0))
        throw Error(ErrorKind::parameter, "--far must lie in (0, 1)");
}

void run_eval_det(const EvalOptions& o)
{
    check_far(o.far);
    const auto curve = eval::compute_det(eval::read_score_matrix(o.scores, o.labels));
    emit(out_path(o.out), [&](std::ostream& out) { eval::write_det_csv(curve, out); });
    std::cerr << "frr_at_far " << o.far << ' ' << eval::frr_at_far(curve, o.far) << '\n';
}

void run_eval_bins(const EvalOptions& o)
{
    check_far(o.far);
    const auto bins = eval::binned_frr(eval::read_score_matrix(o.scores, o.labels), o.far, o.bin_width, o.range);
    emit(out_path(o.out), [&](std::ostream& out) { eval::write_binned_csv(bins, out); });
}

void run_eval_improve(const EvalOptions& o)
{
    check_far(o.far);
    const auto baseline = eval::read_score_matrix(o.baseline, o.labels);
    const auto method = eval::read_score_matrix(o.method, o.method_labels.empty() ? o.labels : o.method_labels);
    const auto curve = eval::improvement_curve(baseline, method, o.far, o.bin_width, o.range);
    emit(out_path(o.out), [&](std::ostream& out) { eval::write_improvement_csv(curve, out); });
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"morphfit: landmark-based 3D Morphable Model fitting and pose normalisation"};
    app.require_subcommand(1);
    std::string command;
    std::function<int()> action;

    // model
    auto* model_cmd = app.add_subcommand("model", "generate or inspect model files");
    model_cmd->require_subcommand(1);
    ModelGenOptions gen;
    auto* gen_cmd = model_cmd->add_subcommand("gen", "write a synthetic model");
    gen_cmd->add_option("--seed", gen.seed, "random seed")->required();
    gen_cmd->add_option("--vertices", gen.vertices, "vertex count")->required();
    gen_cmd->add_option("--coeffs", gen.coeffs, "shape coefficients")->required();
    gen_cmd->add_flag("--colour", gen.colour, "include a colour model");
    gen_cmd->add_option("--out", gen.out, "output path")->required();
    gen_cmd->callback([&] {
        command = "model gen";
        action = [&] {
            run_model_gen(gen);
            return 0;
        };
    });
    std::string inspect_path;
    auto* inspect_cmd = model_cmd->add_subcommand("inspect", "print model dimensions and landmark table");
    inspect_cmd->add_option("path", inspect_path, "model file")->required();
    inspect_cmd->callback([&] {
        command = "model inspect";
        action = [&] {
            run_model_inspect(inspect_path);
            return 0;
        };
    });

    // fit
    FitOptions fit;
    auto* fit_cmd = app.add_subcommand("fit", "fit the model and write pose-normalised outputs");
    fit_cmd->add_option("--model", fit.model, "model file")->required();
    auto* image_opt = fit_cmd->add_option("--image", fit.image, "input image");
    auto* manifest_opt = fit_cmd->add_option("--manifest", fit.manifest, "CSV with image and landmarks columns");
    image_opt->excludes(manifest_opt);
    fit_cmd->add_option("--landmarks", fit.landmarks, "landmark file (name x y)");
    fit_cmd->add_option("--cascade", fit.cascade, "landmark detector");
    fit_cmd->add_option("--face-box", fit.face_box, "x,y,w,h for the detector");
    fit_cmd->add_option("--out-dir", fit.out_dir, "output directory");
    fit_cmd->add_option("--stem", fit.stem, "output file stem (default: image stem)");
    fit_cmd->add_option("--record", fit.record, "append JSON-lines records here instead of stdout");
    fit_cmd->add_option("--lambda", fit.lambda, "shape regularisation weight")->check(CLI::NonNegativeNumber);
    fit_cmd->add_option("--iterations", fit.iterations, "camera/shape alternations")->check(CLI::PositiveNumber);
    fit_cmd->add_option("--num-coeffs", fit.num_coeffs, "shape coefficients to fit (default min(K, 63))");
    fit_cmd->add_option("--resolution", fit.resolution, "isomap resolution");
    fit_cmd->add_option("--frontal-size", fit.frontal_size, "frontal rendering size")->check(CLI::PositiveNumber);
    fit_cmd->add_option("--min-yaw", fit.min_yaw, "skip normalisation when |yaw| is below this (degrees)");
    fit_cmd->callback([&] {
        if (fit.image.empty() && fit.manifest.empty())
            throw CLI::ValidationError("fit", "--image or --manifest is required");
        command = "fit";
        action = [&] { return run_fit(fit); };
    });

    // detect
    std::string detect_cascade, detect_image, detect_box, detect_out;
    auto* detect_cmd = app.add_subcommand("detect", "detect landmarks in a face box");
    detect_cmd->add_option("--cascade", detect_cascade, "cascade file")->required();
    detect_cmd->add_option("--image", detect_image, "input image")->required();
    detect_cmd->add_option("--face-box", detect_box, "x,y,w,h")->required();
    detect_cmd->add_option("--out", detect_out, "landmark file (default stdout)");
    detect_cmd->callback([&] {
        command = "detect";
        action = [&] {
            run_detect(detect_cascade, detect_image, detect_box, detect_out);
            return 0;
        };
    });

    // train-detector
    TrainOptions train;
    auto* train_cmd = app.add_subcommand("train-detector", "train a cascaded-regression detector");
    train_cmd->add_option("--manifest", train.manifest, "CSV: image,landmarks,x,y,width,height")->required();
    train_cmd->add_option("--holdout", train.holdout, "held-out manifest to report errors on");
    train_cmd->add_option("--out", train.out, "cascade output path")->required();
    train_cmd->add_option("--stages", train.training.stages, "regression stages")->check(CLI::PositiveNumber);
    train_cmd->add_option("--ridge", train.training.ridge, "ridge weight per sample")->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--perturbations", train.training.perturbations, "initialisations per sample")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--seed", train.training.seed, "perturbation seed");
    train_cmd->callback([&] {
        command = "train-detector";
        action = [&] {
            run_train(train);
            return 0;
        };
    });

    // synth
    SynthOptions synth;
    double synth_yaw = 0.0;
    auto* synth_cmd = app.add_subcommand("synth", "render a synthetic face corpus");
    synth_cmd->add_option("--model", synth.model, "model file")->required();
    synth_cmd->add_option("--out-dir", synth.out_dir, "output directory")->required();
    synth_cmd->add_option("--count", synth.count, "number of images")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--seed", synth.seed, "random seed");
    synth_cmd->add_option("--landmarks", synth.scheme, "landmark scheme: 7, 13 or 49");
    synth_cmd->add_option("--image-size", synth.scene.image_size, "square image size")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--max-yaw", synth.scene.max_yaw, "yaw range (degrees)");
    auto* yaw_opt = synth_cmd->add_option("--yaw", synth_yaw, "fixed yaw with zero pitch and roll (degrees)");
    synth_cmd->callback([&] {
        if (yaw_opt->count())
            synth.yaw = synth_yaw;
        command = "synth";
        action = [&] {
            run_synth(synth);
            return 0;
        };
    });

    // pose-annotate
    PoseOptions pose;
    auto* pose_cmd = app.add_subcommand("pose-annotate", "estimate yaw/pitch/roll per image");
    pose_cmd->add_option("--model", pose.model, "model file")->required();
    pose_cmd->add_option("--manifest", pose.manifest, "CSV with id,landmarks[,image] columns")->required();
    pose_cmd->add_option("--method", pose.method, "affine or posit")
        ->check(CLI::IsMember({"affine", "posit"}));
    pose_cmd->add_option("--focal", pose.focal, "POSIT focal length in pixels (default 1.5 x image width)");
    pose_cmd->add_option("--lambda", pose.lambda, "shape regularisation for the affine method");
    pose_cmd->add_option("--out", pose.out, "output CSV (default stdout)");
    pose_cmd->callback([&] {
        command = "pose-annotate";
        action = [&] { return run_pose_annotate(pose); };
    });

    // eval
    EvalOptions ev;
    auto* eval_cmd = app.add_subcommand("eval", "verification analytics");
    eval_cmd->require_subcommand(1);
    auto add_common = [&](CLI::App* cmd, bool with_bins) {
        cmd->add_option("--labels", ev.labels, "id,subject,yaw sidecar")->required();
        cmd->add_option("--out", ev.out, "output CSV (default stdout)");
        cmd->add_option("--far", ev.far, "operating point FAR");
        if (with_bins) {
            cmd->add_option("--bin-width", ev.bin_width, "yaw bin width (degrees)");
            cmd->add_option("--range", ev.range, "yaw bins span [-range, range)");
        }
    };
    auto* det_cmd = eval_cmd->add_subcommand("det", "DET curve as threshold,far,frr");
    det_cmd->add_option("--scores", ev.scores, "score matrix CSV")->required();
    add_common(det_cmd, false);
    det_cmd->callback([&] {
        command = "eval det";
        action = [&] {
            run_eval_det(ev);
            return 0;
        };
    });
    auto* bins_cmd = eval_cmd->add_subcommand("bins", "FRR at the operating point per yaw bin");
    bins_cmd->add_option("--scores", ev.scores, "score matrix CSV")->required();
    add_common(bins_cmd, true);
    bins_cmd->callback([&] {
        command = "eval bins";
        action = [&] {
            run_eval_bins(ev);
            return 0;
        };
    });
    auto* improve_cmd = eval_cmd->add_subcommand("improve", "FRR improvement over a baseline per yaw bin");
    improve_cmd->add_option("--baseline", ev.baseline, "baseline score matrix CSV")->required();
    improve_cmd->add_option("--method", ev.method, "method score matrix CSV")->required();
    improve_cmd->add_option("--method-labels", ev.method_labels, "labels for the method matrix (default --labels)");
    add_common(improve_cmd, true);
    improve_cmd->callback([&] {
        command = "eval improve";
        action = [&] {
            run_eval_improve(ev);
            return 0;
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        report_error(command.empty() ? "morphfit" : command, "usage", e.what());
        return 2;
    }

    try {
        return action();
    } catch (const Error& e) {
        report_error(command, std::string(to_string(e.kind())), e.what());
    } catch (const CommandError& e) {
        report_error(command, "processing", e.what());
    } catch (const std::exception& e) {
        report_error(command, "processing", e.what());
    }
    return 1;
}

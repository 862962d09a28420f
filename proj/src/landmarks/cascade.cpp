/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: src/landmarks/cascade.cpp
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
#include "morphfit/landmarks/cascade.hpp"
#include "morphfit/core/binary_io.hpp"
#include "morphfit/core/error.hpp"
#include "morphfit/core/random.hpp"

#include "Eigen/Cholesky"
#include "Eigen/QR"

#include <cmath>
#include <fstream>
#include <sstream>

namespace morphfit {
namespace landmarks {

namespace {

constexpr const char* magic = "morphfit-cascade";
constexpr int format_version = 1;

void check_box(const core::FaceBox& box)
{
    if (!(box.width > 0.0 && box.height > 0.0) || !std::isfinite(box.x) || !std::isfinite(box.y))
        throw Error(ErrorKind::parameter, "face box must have positive width and height");
}

double patch_scale(const core::FaceBox& box, const RegressorCascade& cascade)
{
    return std::sqrt(box.width * box.height) / cascade.reference_box_size;
}

Eigen::Matrix2Xd to_pixels(const Eigen::Matrix2Xd& unit, const core::FaceBox& box)
{
    Eigen::Matrix2Xd pixels(2, unit.cols());
    pixels.row(0) = (unit.row(0).array() * box.width + box.x).matrix();
    pixels.row(1) = (unit.row(1).array() * box.height + box.y).matrix();
    return pixels;
}

Eigen::Matrix2Xd to_unit(const Eigen::Matrix2Xd& pixels, const core::FaceBox& box)
{
    Eigen::Matrix2Xd unit(2, pixels.cols());
    unit.row(0) = ((pixels.row(0).array() - box.x) / box.width).matrix();
    unit.row(1) = ((pixels.row(1).array() - box.y) / box.height).matrix();
    return unit;
}

// Mean pixel distance over the box diagonal, from unit-box coordinates.
double unit_error(const Eigen::Matrix2Xd& a, const Eigen::Matrix2Xd& b, const core::FaceBox& box)
{
    return (to_pixels(a, box) - to_pixels(b, box)).colwise().norm().mean() / box.diagonal();
}

void apply_stage(const LinearStage& stage, const Eigen::VectorXd& features, Eigen::Matrix2Xd& estimate)
{
    const Eigen::VectorXd delta = stage.weights * features + stage.bias;
    estimate += Eigen::Map<const Eigen::Matrix2Xd>(delta.data(), 2, estimate.cols());
}

LinearStage solve_stage(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double ridge)
{
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();
    const Eigen::RowVectorXd x_mean = x.colwise().mean();
    const Eigen::RowVectorXd y_mean = y.colwise().mean();
    const Eigen::MatrixXd xc = x.rowwise() - x_mean;
    const Eigen::MatrixXd yc = y.rowwise() - y_mean;
    if (xc.squaredNorm() == 0.0)
        throw Error(ErrorKind::rank, "feature matrix is degenerate: features do not vary across samples");

    const double lambda = ridge * static_cast<double>(n);
    // Primal form for tall systems, dual form when there are fewer rows than features.
    const bool primal = n >= d;
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(primal ? d : n, primal ? d : n);
    if (primal)
        gram.selfadjointView<Eigen::Lower>().rankUpdate(xc.transpose());
    else
        gram.selfadjointView<Eigen::Lower>().rankUpdate(xc);
    gram = gram.selfadjointView<Eigen::Lower>();
    gram.diagonal().array() += lambda;
    const Eigen::MatrixXd rhs = primal ? Eigen::MatrixXd(xc.transpose() * yc) : yc;

    Eigen::MatrixXd solution;
    if (lambda > 0.0) {
        const Eigen::LLT<Eigen::MatrixXd> llt(gram);
        if (llt.info() != Eigen::Success)
            throw Error(ErrorKind::rank, "ridge system is not positive definite");
        solution = llt.solve(rhs);
    } else {
        const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gram);
        if (qr.rank() < gram.rows())
            throw Error(ErrorKind::rank, "feature matrix is rank deficient (rank " + std::to_string(qr.rank()) +
                                             " of " + std::to_string(gram.rows()) + ") and ridge is 0");
        solution = qr.solve(rhs);
    }

    LinearStage stage;
    stage.weights = primal ? Eigen::MatrixXd(solution.transpose())
                           : Eigen::MatrixXd((xc.transpose() * solution).transpose());
    stage.bias = y_mean.transpose() - stage.weights * x_mean.transpose();
    return stage;
}

} // namespace

TrainingResult train_cascade(const std::vector<TrainingSample>& samples, const TrainingOptions& options)
{
    if (samples.size() < 100)
        throw Error(ErrorKind::insufficient_data,
                    "cascade training needs at least 100 samples, got " + std::to_string(samples.size()));
    if (options.stages < 1 || options.perturbations < 1)
        throw Error(ErrorKind::parameter, "stages and perturbations must be at least 1");
    if (options.ridge < 0.0)
        throw Error(ErrorKind::parameter, "ridge must be non-negative");

    TrainingResult result;
    RegressorCascade& cascade = result.cascade;
    cascade.hog = options.hog;
    for (const auto& lm : samples.front().landmarks)
        cascade.names.push_back(lm.name);
    const int L = cascade.num_landmarks();
    if (L == 0)
        throw Error(ErrorKind::insufficient_points, "training samples have no landmarks");

    std::vector<Eigen::Matrix2Xd> truth;
    truth.reserve(samples.size());
    cascade.mean_landmarks = Eigen::Matrix2Xd::Zero(2, L);
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const auto& sample = samples[s];
        check_box(sample.box);
        if (sample.landmarks.size() != static_cast<std::size_t>(L))
            throw Error(ErrorKind::mismatch, "sample " + std::to_string(s) + " has a different landmark count");
        for (int l = 0; l < L; ++l) {
            if (sample.landmarks[l].name != cascade.names[l])
                throw Error(ErrorKind::mismatch, "sample " + std::to_string(s) + " has landmark '" +
                                                     sample.landmarks[l].name + "' where '" + cascade.names[l] +
                                                     "' was expected");
        }
        const Eigen::Matrix2Xd points = core::to_matrix(sample.landmarks);
        if (!points.allFinite())
            throw Error(ErrorKind::parameter, "sample " + std::to_string(s) + " has missing landmarks");
        truth.push_back(to_unit(points, sample.box));
        cascade.mean_landmarks += truth.back() / static_cast<double>(samples.size());
    }

    // Jittered initialisations, fixed by the seed.
    core::Random rng(options.seed);
    const std::size_t rows = samples.size() * options.perturbations;
    std::vector<Eigen::Matrix2Xd> estimates;
    estimates.reserve(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const double scale = rng.uniform(1.0 - options.scale_jitter, 1.0 + options.scale_jitter);
        const Eigen::Vector2d shift(rng.uniform(-options.translation_jitter, options.translation_jitter),
                                    rng.uniform(-options.translation_jitter, options.translation_jitter));
        const Eigen::Vector2d centre(0.5, 0.5);
        estimates.push_back(((scale * (cascade.mean_landmarks.colwise() - centre)).colwise() + (centre + shift)));
    }

    auto mean_error = [&] {
        double total = 0.0;
        for (std::size_t r = 0; r < rows; ++r) {
            const std::size_t s = r / options.perturbations;
            total += unit_error(estimates[r], truth[s], samples[s].box);
        }
        return total / static_cast<double>(rows);
    };
    result.training_errors.push_back(mean_error());

    const int D = L * cascade.hog.descriptor_length();
    Eigen::MatrixXd features(rows, D);
    Eigen::MatrixXd targets(rows, 2 * L);
    for (int stage = 0; stage < options.stages; ++stage) {
        for (std::size_t r = 0; r < rows; ++r) {
            const auto& sample = samples[r / options.perturbations];
            features.row(r) = extract_hog(sample.image, to_pixels(estimates[r], sample.box), cascade.hog,
                                          patch_scale(sample.box, cascade))
                                  .transpose();
            const Eigen::Matrix2Xd residual = truth[r / options.perturbations] - estimates[r];
            targets.row(r) = Eigen::Map<const Eigen::RowVectorXd>(residual.data(), 2 * L);
        }
        cascade.stages.push_back(solve_stage(features, targets, options.ridge));
        for (std::size_t r = 0; r < rows; ++r)
            apply_stage(cascade.stages.back(), features.row(r).transpose(), estimates[r]);
        result.training_errors.push_back(mean_error());
    }
    return result;
}

core::LandmarkSet detect_landmarks(const Eigen::ArrayXXd& image, const core::FaceBox& box,
                                   const RegressorCascade& cascade)
{
    check_box(box);
    if (cascade.stages.empty())
        throw Error(ErrorKind::parameter, "cascade has no stages");
    Eigen::Matrix2Xd estimate = cascade.mean_landmarks;
    const double scale = patch_scale(box, cascade);
    for (const auto& stage : cascade.stages)
        apply_stage(stage, extract_hog(image, to_pixels(estimate, box), cascade.hog, scale), estimate);

    const Eigen::Matrix2Xd pixels = to_pixels(estimate, box);
    if (!pixels.allFinite())
        throw Error(ErrorKind::numerical, "detector produced non-finite landmarks");
    core::LandmarkSet result;
    result.reserve(cascade.names.size());
    for (int l = 0; l < cascade.num_landmarks(); ++l)
        result.push_back({cascade.names[l], pixels.col(l)});
    return result;
}

core::LandmarkSet detect_landmarks(const core::RasterImage& image, const core::FaceBox& box,
                                   const RegressorCascade& cascade)
{
    return detect_landmarks(core::to_grayscale(image), box, cascade);
}

double normalised_error(const core::LandmarkSet& estimate, const core::LandmarkSet& truth, const core::FaceBox& box)
{
    if (estimate.size() != truth.size() || truth.empty())
        throw Error(ErrorKind::mismatch, "landmark sets differ in size");
    double total = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (estimate[i].name != truth[i].name)
            throw Error(ErrorKind::mismatch, "landmark order differs at '" + truth[i].name + "'");
        total += (estimate[i].point - truth[i].point).norm();
    }
    return total / static_cast<double>(truth.size()) / box.diagonal();
}

void save_cascade(const RegressorCascade& cascade, std::ostream& out)
{
    out << magic << '\n'
        << "version " << format_version << '\n'
        << "landmarks " << cascade.num_landmarks() << '\n'
        << "stages " << cascade.stages.size() << '\n'
        << "hog_cell_size " << cascade.hog.cell_size << '\n'
        << "hog_num_cells " << cascade.hog.num_cells << '\n'
        << "hog_num_bins " << cascade.hog.num_bins << '\n'
        << "reference_box_size " << static_cast<long long>(cascade.reference_box_size) << '\n';
    for (const auto& name : cascade.names)
        out << name << '\n';
    out << "end_header\n";
    core::binary::write_matrix(out, cascade.mean_landmarks);
    for (const auto& stage : cascade.stages) {
        core::binary::write_matrix(out, stage.weights);
        core::binary::write_matrix(out, stage.bias);
    }
    if (!out)
        throw Error(ErrorKind::io, "failed writing cascade");
}

void save_cascade(const RegressorCascade& cascade, const std::filesystem::path& path)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out)
            throw Error(ErrorKind::io, "cannot open " + tmp.string());
        save_cascade(cascade, out);
    }
    std::filesystem::rename(tmp, path);
}

RegressorCascade load_cascade(std::istream& in)
{
    using core::binary::read_header_count;
    std::string line;
    if (!std::getline(in, line) || line != magic)
        throw ParseError("magic", "not a morphfit cascade file");
    const auto version = read_header_count(in, "version");
    if (version != format_version)
        throw ParseError("version", "unsupported version " + std::to_string(version));
    RegressorCascade cascade;
    const auto L = read_header_count(in, "landmarks");
    const auto S = read_header_count(in, "stages");
    cascade.hog.cell_size = static_cast<int>(read_header_count(in, "hog_cell_size"));
    cascade.hog.num_cells = static_cast<int>(read_header_count(in, "hog_num_cells"));
    cascade.hog.num_bins = static_cast<int>(read_header_count(in, "hog_num_bins"));
    cascade.reference_box_size = static_cast<double>(read_header_count(in, "reference_box_size"));
    if (L < 1 || S < 1 || cascade.hog.cell_size < 1 || cascade.hog.num_cells < 1 || cascade.hog.num_bins < 1 ||
        cascade.reference_box_size <= 0.0)
        throw ParseError("header", "counts must be positive");
    for (long long l = 0; l < L; ++l) {
        if (!std::getline(in, line) || line.empty())
            throw ParseError("landmarks", "missing landmark name " + std::to_string(l));
        cascade.names.push_back(line);
    }
    if (!std::getline(in, line) || line != "end_header")
        throw ParseError("end_header", "expected end_header");

    const Eigen::Index D = L * cascade.hog.descriptor_length();
    cascade.mean_landmarks = core::binary::read_matrix(in, 2, L, "mean_landmarks");
    for (long long s = 0; s < S; ++s) {
        LinearStage stage;
        const std::string field = "stage " + std::to_string(s);
        stage.weights = core::binary::read_matrix(in, 2 * L, D, field);
        stage.bias = core::binary::read_vector(in, 2 * L, field);
        cascade.stages.push_back(std::move(stage));
    }
    if (in.peek() != std::char_traits<char>::eof())
        throw ParseError("trailing bytes", "unexpected data after the last stage");
    return cascade;
}

RegressorCascade load_cascade(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::io, "cannot open " + path.string());
    return load_cascade(in);
}

} /* namespace landmarks */
} /* namespace morphfit */

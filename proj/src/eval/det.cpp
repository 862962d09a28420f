/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: src/eval/det.cpp
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
#include "morphfit/eval/det.hpp"
#include "morphfit/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>

namespace morphfit {
namespace eval {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

void write_number(std::ostream& out, double value)
{
    if (std::isnan(value))
        out << "nan";
    else if (std::isinf(value))
        out << (value > 0 ? "inf" : "-inf");
    else
        out << value;
}

std::string join(const std::vector<std::string>& ids)
{
    std::string text;
    for (const auto& id : ids)
        text += (text.empty() ? "" : ", ") + id;
    return text;
}

std::vector<std::string> symmetric_difference(std::vector<std::string> a, std::vector<std::string> b)
{
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<std::string> out;
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

// FRR at the target, or NaN if the matrix lacks genuine or impostor pairs.
double frr_or_gap(const ScoreMatrix& scores, double far_target)
{
    try {
        return frr_at_far(compute_det(scores), far_target);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::insufficient_data)
            return nan;
        throw;
    }
}

} // namespace

DetCurve compute_det(const ScoreMatrix& scores)
{
    scores.validate();
    std::vector<double> genuine, impostor;
    for (std::size_t p = 0; p < scores.probe_ids.size(); ++p) {
        const auto& probe_subject = scores.subjects.at(scores.probe_ids[p]);
        for (std::size_t g = 0; g < scores.gallery_ids.size(); ++g) {
            if (scores.probe_ids[p] == scores.gallery_ids[g])
                continue;
            const double s = scores.scores(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(g));
            if (!std::isfinite(s))
                throw Error(ErrorKind::numerical, "non-finite score for probe '" + scores.probe_ids[p] + "'");
            (scores.subjects.at(scores.gallery_ids[g]) == probe_subject ? genuine : impostor).push_back(s);
        }
    }
    if (genuine.empty() || impostor.empty())
        throw Error(ErrorKind::insufficient_data, "DET needs genuine and impostor pairs (got " +
                                                      std::to_string(genuine.size()) + " genuine, " +
                                                      std::to_string(impostor.size()) + " impostor)");
    std::sort(genuine.begin(), genuine.end());
    std::sort(impostor.begin(), impostor.end());

    std::vector<double> thresholds;
    thresholds.reserve(genuine.size() + impostor.size() + 1);
    std::merge(genuine.begin(), genuine.end(), impostor.begin(), impostor.end(), std::back_inserter(thresholds));
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    thresholds.push_back(std::numeric_limits<double>::infinity());

    DetCurve curve;
    curve.samples.reserve(thresholds.size());
    const double n_genuine = static_cast<double>(genuine.size());
    const double n_impostor = static_cast<double>(impostor.size());
    auto g = genuine.begin();
    auto i = impostor.begin();
    for (double t : thresholds) {
        // Rejected pairs are those strictly below the threshold.
        g = std::lower_bound(g, genuine.end(), t);
        i = std::lower_bound(i, impostor.end(), t);
        const double accepted_impostors = static_cast<double>(impostor.end() - i);
        const double rejected_genuine = static_cast<double>(g - genuine.begin());
        curve.samples.push_back({t, accepted_impostors / n_impostor, rejected_genuine / n_genuine});
    }
    return curve;
}

double frr_at_far(const DetCurve& curve, double far_target)
{
    if (curve.samples.empty())
        throw Error(ErrorKind::insufficient_data, "DET curve is empty");
    if (!(far_target > 0.0 && far_target < 1.0))
        throw Error(ErrorKind::parameter, "FAR target must lie in (0, 1)");
    const auto& s = curve.samples;
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (s[k].far <= far_target) {
            if (k == 0)
                return s[0].frr;
            const auto& prev = s[k - 1];
            const double t = (prev.far - far_target) / (prev.far - s[k].far);
            return prev.frr + t * (s[k].frr - prev.frr);
        }
    }
    return s.back().frr;
}

YawBinning bin_by_yaw(const ScoreMatrix& scores, double bin_width, double range)
{
    if (!(bin_width > 0.0) || !(range > 0.0))
        throw Error(ErrorKind::parameter, "bin width and range must be positive");
    const double count = 2.0 * range / bin_width;
    const int bins = static_cast<int>(std::lround(count));
    if (bins < 1 || std::abs(count - bins) > 1e-9)
        throw Error(ErrorKind::parameter, "bin width must divide the yaw span evenly");

    std::vector<std::string> missing;
    for (const auto& id : scores.probe_ids) {
        if (!scores.yaw.count(id))
            missing.push_back(id);
    }
    if (!missing.empty())
        throw Error(ErrorKind::insufficient_data, "missing yaw annotation for: " + join(missing));

    std::vector<std::vector<std::string>> members(bins);
    YawBinning result;
    for (const auto& id : scores.probe_ids) {
        const double yaw = scores.yaw.at(id);
        const int b = static_cast<int>(std::floor((yaw + range) / bin_width));
        if (yaw < -range || yaw >= range || b < 0 || b >= bins) {
            result.out_of_range.push_back(id);
            continue;
        }
        members[b].push_back(id);
    }
    for (int b = 0; b < bins; ++b) {
        YawBin bin;
        bin.lower = -range + b * bin_width;
        bin.upper = bin.lower + bin_width;
        bin.view = scores.select_probes(members[b]);
        result.bins.push_back(std::move(bin));
    }
    return result;
}

std::vector<BinOperatingPoint> binned_frr(const ScoreMatrix& scores, double far_target, double bin_width,
                                          double range)
{
    std::vector<BinOperatingPoint> points;
    for (const auto& bin : bin_by_yaw(scores, bin_width, range).bins)
        points.push_back({bin.lower, bin.upper, bin.view.probe_ids.size(), frr_or_gap(bin.view, far_target)});
    return points;
}

ImprovementCurve improvement_curve(const ScoreMatrix& baseline, const ScoreMatrix& method, double far_target,
                                   double bin_width, double range)
{
    auto difference = symmetric_difference(baseline.probe_ids, method.probe_ids);
    const auto gallery_difference = symmetric_difference(baseline.gallery_ids, method.gallery_ids);
    difference.insert(difference.end(), gallery_difference.begin(), gallery_difference.end());
    if (!difference.empty())
        throw Error(ErrorKind::mismatch, "baseline and method cover different ids: " + join(difference));
    if (baseline.gallery_ids != method.gallery_ids)
        throw Error(ErrorKind::mismatch, "baseline and method order their gallery ids differently");

    ImprovementCurve curve;
    for (const auto& bin : bin_by_yaw(baseline, bin_width, range).bins) {
        ImprovementPoint point;
        point.centre = bin.centre();
        point.frr_baseline = frr_or_gap(bin.view, far_target);
        point.frr_method = frr_or_gap(method.select_probes(bin.view.probe_ids), far_target);
        point.delta = point.frr_baseline - point.frr_method;
        curve.points.push_back(point);
    }
    return curve;
}

void write_det_csv(const DetCurve& curve, std::ostream& out)
{
    out << std::setprecision(17) << "threshold,far,frr\n";
    for (const auto& s : curve.samples) {
        write_number(out, s.threshold);
        out << ',';
        write_number(out, s.far);
        out << ',';
        write_number(out, s.frr);
        out << '\n';
    }
}

void write_binned_csv(const std::vector<BinOperatingPoint>& bins, std::ostream& out)
{
    out << std::setprecision(17) << "bin_lower,bin_upper,probes,frr\n";
    for (const auto& b : bins) {
        out << b.lower << ',' << b.upper << ',' << b.probes << ',';
        write_number(out, b.frr);
        out << '\n';
    }
}

void write_improvement_csv(const ImprovementCurve& curve, std::ostream& out)
{
    out << std::setprecision(17) << "bin_centre,frr_baseline,frr_method,delta_frr\n";
    for (const auto& p : curve.points) {
        out << p.centre << ',';
        write_number(out, p.frr_baseline);
        out << ',';
        write_number(out, p.frr_method);
        out << ',';
        write_number(out, p.delta);
        out << '\n';
    }
}

} /* namespace eval */
} /* namespace morphfit */

/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: include/morphfit/eval/det.hpp
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
#pragma once

#ifndef MORPHFIT_EVAL_DET_HPP
#define MORPHFIT_EVAL_DET_HPP

#include "morphfit/eval/scores.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace morphfit {
namespace eval {

struct DetPoint
{
    double threshold = 0.0;
    double far = 0.0;
    double frr = 0.0;

    friend bool operator==(const DetPoint&, const DetPoint&) = default;
};

/// Samples ordered by increasing threshold.
struct DetCurve
{
    std::vector<DetPoint> samples;
};

/**
 * DET curve over every distinct score plus a final +inf threshold (FAR 0,
 * FRR 1). A pair is accepted when score >= threshold. Pairs whose probe and
 * gallery ids are identical are excluded.
 *
 * Throws an insufficient-data error without genuine or impostor pairs.
 */
DetCurve compute_det(const ScoreMatrix& scores);

/**
 * FRR at the operating point `far_target`: the first sample (lowest
 * threshold) with FAR <= far_target, linearly interpolated in FAR against the
 * preceding sample. If no sample reaches the target the FRR of the strictest
 * threshold is returned.
 */
double frr_at_far(const DetCurve& curve, double far_target);

struct YawBin
{
    double lower = 0.0; ///< inclusive, degrees
    double upper = 0.0; ///< exclusive
    ScoreMatrix view;   ///< probes in the bin; may be empty

    double centre() const noexcept
    {
        return 0.5 * (lower + upper);
    }
};

struct YawBinning
{
    std::vector<YawBin> bins;
    std::vector<std::string> out_of_range; ///< probes with yaw outside [-range, range)
};

/**
 * Partitions probes into half-open bins [lower, lower + width) spanning
 * [-range, range). Throws a parameter error for bad widths and an
 * insufficient-data error listing probes without a yaw annotation.
 */
YawBinning bin_by_yaw(const ScoreMatrix& scores, double bin_width, double range);

struct BinOperatingPoint
{
    double lower = 0.0;
    double upper = 0.0;
    std::size_t probes = 0;
    double frr = 0.0; ///< NaN when the bin has no genuine or impostor pairs
};

/// FRR at far_target for every yaw bin.
std::vector<BinOperatingPoint> binned_frr(const ScoreMatrix& scores, double far_target, double bin_width,
                                          double range);

struct ImprovementPoint
{
    double centre = 0.0;
    double frr_baseline = 0.0;
    double frr_method = 0.0;
    double delta = 0.0; ///< frr_baseline - frr_method, positive = method better; NaN for gaps
};

struct ImprovementCurve
{
    std::vector<ImprovementPoint> points;
};

/**
 * Per yaw bin (by the baseline's annotations) the FRR difference at
 * far_target. Throws a mismatch error naming the symmetric difference when
 * the two matrices do not cover the same probe and gallery ids.
 */
ImprovementCurve improvement_curve(const ScoreMatrix& baseline, const ScoreMatrix& method, double far_target,
                                   double bin_width = 10.0, double range = 70.0);

void write_det_csv(const DetCurve& curve, std::ostream& out);
void write_binned_csv(const std::vector<BinOperatingPoint>& bins, std::ostream& out);
void write_improvement_csv(const ImprovementCurve& curve, std::ostream& out);

} /* namespace eval */
} /* namespace morphfit */

#endif /* MORPHFIT_EVAL_DET_HPP */

/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: include/morphfit/eval/scores.hpp
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

#ifndef MORPHFIT_EVAL_SCORES_HPP
#define MORPHFIT_EVAL_SCORES_HPP

#include "Eigen/Core"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace morphfit {
namespace eval {

/**
 * Verification scores between probe images (rows) and gallery images
 * (columns); higher means more similar. Every id needs a subject label; yaw
 * annotations (degrees) are optional per id.
 */
struct ScoreMatrix
{
    std::vector<std::string> probe_ids;
    std::vector<std::string> gallery_ids;
    Eigen::MatrixXd scores;
    std::map<std::string, std::string> subjects;
    std::map<std::string, double> yaw;

    /// Throws a dimension error for inconsistent sizes and a mapping error for unlabelled ids.
    void validate() const;

    /// The matrix restricted to the given probes, in the given order.
    ScoreMatrix select_probes(const std::vector<std::string>& ids) const;
};

/**
 * Reads the score CSV (header: a corner cell then gallery ids; each row: probe
 * id then scores) and the label sidecar (`id,subject,yaw`, yaw may be empty).
 * Throws parse errors naming the file line.
 */
ScoreMatrix read_score_matrix(std::istream& scores, std::istream& labels);
ScoreMatrix read_score_matrix(const std::filesystem::path& scores, const std::filesystem::path& labels);

void write_score_matrix(const ScoreMatrix& matrix, std::ostream& scores, std::ostream& labels);

} /* namespace eval */
} /* namespace morphfit */

#endif /* MORPHFIT_EVAL_SCORES_HPP */

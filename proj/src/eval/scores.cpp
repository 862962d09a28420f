/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: src/eval/scores.cpp
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
#include "morphfit/eval/scores.hpp"
#include "morphfit/core/error.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace morphfit {
namespace eval {

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ','))
        cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',')
        cells.emplace_back();
    return cells;
}

double parse_number(const std::string& text, const std::string& field)
{
    errno = 0;
    char* end = nullptr;
    const double value = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE)
        throw ParseError(field, "not a number: '" + text + "'");
    return value;
}

bool blank(const std::string& line)
{
    return trim(line).empty();
}

} // namespace

void ScoreMatrix::validate() const
{
    if (scores.rows() != static_cast<Eigen::Index>(probe_ids.size()) ||
        scores.cols() != static_cast<Eigen::Index>(gallery_ids.size()))
        throw Error(ErrorKind::dimension, "score matrix is " + std::to_string(scores.rows()) + "x" +
                                              std::to_string(scores.cols()) + " but has " +
                                              std::to_string(probe_ids.size()) + " probe and " +
                                              std::to_string(gallery_ids.size()) + " gallery ids");
    for (const auto* ids : {&probe_ids, &gallery_ids}) {
        for (const auto& id : *ids) {
            if (!subjects.count(id))
                throw Error(ErrorKind::mapping, "no subject label for id '" + id + "'");
        }
    }
}

ScoreMatrix ScoreMatrix::select_probes(const std::vector<std::string>& ids) const
{
    std::map<std::string, Eigen::Index> row_of;
    for (std::size_t i = 0; i < probe_ids.size(); ++i)
        row_of.emplace(probe_ids[i], static_cast<Eigen::Index>(i));
    ScoreMatrix view;
    view.probe_ids = ids;
    view.gallery_ids = gallery_ids;
    view.subjects = subjects;
    view.yaw = yaw;
    view.scores.resize(static_cast<Eigen::Index>(ids.size()), scores.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto it = row_of.find(ids[i]);
        if (it == row_of.end())
            throw Error(ErrorKind::mapping, "unknown probe id '" + ids[i] + "'");
        view.scores.row(static_cast<Eigen::Index>(i)) = scores.row(it->second);
    }
    return view;
}

ScoreMatrix read_score_matrix(std::istream& scores, std::istream& labels)
{
    ScoreMatrix matrix;
    std::string line;
    int line_number = 0;
    while (std::getline(scores, line)) {
        ++line_number;
        if (!blank(line))
            break;
    }
    if (blank(line))
        throw ParseError("scores", "empty score file");
    auto header = split_csv(line);
    if (header.size() < 2)
        throw ParseError("scores line " + std::to_string(line_number), "header needs at least one gallery id");
    matrix.gallery_ids.assign(header.begin() + 1, header.end());

    std::vector<std::vector<double>> rows;
    while (std::getline(scores, line)) {
        ++line_number;
        if (blank(line))
            continue;
        const std::string field = "scores line " + std::to_string(line_number);
        const auto cells = split_csv(line);
        if (cells.size() != header.size())
            throw ParseError(field, "expected " + std::to_string(header.size()) + " cells, got " +
                                        std::to_string(cells.size()));
        matrix.probe_ids.push_back(cells[0]);
        std::vector<double> row;
        for (std::size_t c = 1; c < cells.size(); ++c) {
            const double value = parse_number(cells[c], field);
            if (!std::isfinite(value))
                throw ParseError(field, "non-finite score");
            row.push_back(value);
        }
        rows.push_back(std::move(row));
    }
    for (const auto* ids : {&matrix.probe_ids, &matrix.gallery_ids}) {
        std::set<std::string> seen;
        for (const auto& id : *ids) {
            if (id.empty() || !seen.insert(id).second)
                throw ParseError("scores", "empty or duplicate id '" + id + "'");
        }
    }
    matrix.scores.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(matrix.gallery_ids.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            matrix.scores(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];

    line_number = 0;
    bool header_seen = false;
    while (std::getline(labels, line)) {
        ++line_number;
        if (blank(line))
            continue;
        const std::string field = "labels line " + std::to_string(line_number);
        const auto cells = split_csv(line);
        if (!header_seen) {
            header_seen = true;
            if (cells.size() < 2 || cells[0] != "id" || cells[1] != "subject")
                throw ParseError(field, "expected header 'id,subject,yaw'");
            continue;
        }
        if (cells.size() < 2 || cells.size() > 3 || cells[0].empty() || cells[1].empty())
            throw ParseError(field, "expected 'id,subject[,yaw]'");
        if (!matrix.subjects.emplace(cells[0], cells[1]).second)
            throw ParseError(field, "duplicate id '" + cells[0] + "'");
        if (cells.size() == 3 && !cells[2].empty()) {
            const double yaw = parse_number(cells[2], field);
            if (!std::isfinite(yaw))
                throw ParseError(field, "non-finite yaw");
            matrix.yaw.emplace(cells[0], yaw);
        }
    }
    matrix.validate();
    return matrix;
}

ScoreMatrix read_score_matrix(const std::filesystem::path& scores, const std::filesystem::path& labels)
{
    std::ifstream score_file(scores);
    if (!score_file)
        throw Error(ErrorKind::io, "cannot open " + scores.string());
    std::ifstream label_file(labels);
    if (!label_file)
        throw Error(ErrorKind::io, "cannot open " + labels.string());
    return read_score_matrix(score_file, label_file);
}

void write_score_matrix(const ScoreMatrix& matrix, std::ostream& scores, std::ostream& labels)
{
    scores << std::setprecision(17) << "probe";
    for (const auto& id : matrix.gallery_ids)
        scores << ',' << id;
    scores << '\n';
    for (std::size_t r = 0; r < matrix.probe_ids.size(); ++r) {
        scores << matrix.probe_ids[r];
        for (Eigen::Index c = 0; c < matrix.scores.cols(); ++c)
            scores << ',' << matrix.scores(static_cast<Eigen::Index>(r), c);
        scores << '\n';
    }
    labels << std::setprecision(17) << "id,subject,yaw\n";
    for (const auto& [id, subject] : matrix.subjects) {
        labels << id << ',' << subject << ',';
        if (const auto it = matrix.yaw.find(id); it != matrix.yaw.end())
            labels << it->second;
        labels << '\n';
    }
}

} /* namespace eval */
} /* namespace morphfit */

/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: src/core/landmark_io.cpp
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
#include "morphfit/core/landmark.hpp"
#include "morphfit/core/error.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace morphfit {
namespace core {

namespace {

double parse_coordinate(const std::string& token, int line_number)
{
    if (token == "nan" || token == "NaN" || token == "NAN")
        return std::nan("");
    try {
        std::size_t consumed = 0;
        const double value = std::stod(token, &consumed);
        if (consumed != token.size())
            throw std::invalid_argument(token);
        return value;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_number), "invalid coordinate '" + token + "'");
    }
}

} // namespace

LandmarkSet read_landmarks(std::istream& in)
{
    LandmarkSet landmarks;
    std::set<std::string> seen;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#')
            continue;
        std::istringstream fields(line);
        std::string name, x, y, extra;
        if (!(fields >> name >> x >> y) || (fields >> extra))
            throw ParseError("line " + std::to_string(line_number), "expected 'name x y'");
        if (!seen.insert(name).second)
            throw ParseError("line " + std::to_string(line_number), "duplicate landmark name '" + name + "'");
        landmarks.push_back(
            {name, Eigen::Vector2d(parse_coordinate(x, line_number), parse_coordinate(y, line_number))});
    }
    return landmarks;
}

LandmarkSet read_landmarks(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::io, "cannot open landmark file " + path.string());
    return read_landmarks(in);
}

void write_landmarks(std::ostream& out, const LandmarkSet& landmarks)
{
    out << std::setprecision(17);
    for (const auto& lm : landmarks)
        out << lm.name << ' ' << lm.point.x() << ' ' << lm.point.y() << '\n';
}

void write_landmarks(const LandmarkSet& landmarks, const std::filesystem::path& path)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out)
            throw Error(ErrorKind::io, "cannot open " + tmp.string());
        write_landmarks(out, landmarks);
    }
    std::filesystem::rename(tmp, path);
}

LandmarkSet drop_missing(const LandmarkSet& landmarks)
{
    LandmarkSet kept;
    for (const auto& lm : landmarks) {
        if (lm.point.allFinite())
            kept.push_back(lm);
    }
    return kept;
}

Eigen::Matrix2Xd to_matrix(const LandmarkSet& landmarks)
{
    Eigen::Matrix2Xd points(2, landmarks.size());
    for (std::size_t i = 0; i < landmarks.size(); ++i)
        points.col(i) = landmarks[i].point;
    return points;
}

FaceBox face_box_from_landmarks(const LandmarkSet& landmarks, double margin)
{
    const LandmarkSet present = drop_missing(landmarks);
    if (present.empty())
        throw Error(ErrorKind::insufficient_points, "no landmarks to derive a face box from");
    const Eigen::Matrix2Xd points = to_matrix(present);
    const Eigen::Vector2d lo = points.rowwise().minCoeff();
    const Eigen::Vector2d hi = points.rowwise().maxCoeff();
    const Eigen::Vector2d centre = 0.5 * (lo + hi);
    const double side = (hi - lo).maxCoeff() * (1.0 + 2.0 * margin);
    return {centre.x() - 0.5 * side, centre.y() - 0.5 * side, side, side};
}

FaceBox parse_face_box(const std::string& text)
{
    std::istringstream in(text);
    FaceBox box;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(in >> box.x >> c1 >> box.y >> c2 >> box.width >> c3 >> box.height) || c1 != ',' || c2 != ',' ||
        c3 != ',' || !(in >> std::ws).eof())
        throw ParseError("face-box", "expected x,y,w,h");
    return box;
}

} /* namespace core */
} /* namespace morphfit */

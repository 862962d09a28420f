/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: include/morphfit/core/landmark.hpp
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

#ifndef MORPHFIT_CORE_LANDMARK_HPP
#define MORPHFIT_CORE_LANDMARK_HPP

#include "Eigen/Core"

#include <cmath>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace morphfit {
namespace core {

/// A named 2D point in pixel coordinates (origin top-left, x right, y down).
struct Landmark
{
    std::string name;
    Eigen::Vector2d point;
};

using LandmarkSet = std::vector<Landmark>;

/// Axis-aligned face region in pixels; (x, y) is the top-left corner.
struct FaceBox
{
    double x = 0.0;
    double y = 0.0;
    double width = 0.0;
    double height = 0.0;

    double diagonal() const noexcept
    {
        return std::hypot(width, height);
    }
};

/**
 * Square box centred on the landmarks' bounding box, its side the larger
 * extent grown by `margin` on each side.
 */
FaceBox face_box_from_landmarks(const LandmarkSet& landmarks, double margin = 0.1);

/// Parses "x,y,w,h".
FaceBox parse_face_box(const std::string& text);

/**
 * Parses the `name x y` text format: one record per line, blank lines and
 * lines starting with '#' are ignored. Coordinates may be "nan" to mark a
 * landmark that was not found. Names must be unique.
 */
LandmarkSet read_landmarks(std::istream& in);
LandmarkSet read_landmarks(const std::filesystem::path& path);

void write_landmarks(std::ostream& out, const LandmarkSet& landmarks);
void write_landmarks(const LandmarkSet& landmarks, const std::filesystem::path& path);

/// Removes landmarks with non-finite coordinates.
LandmarkSet drop_missing(const LandmarkSet& landmarks);

/// Stacks the points as columns of a 2 x N matrix.
Eigen::Matrix2Xd to_matrix(const LandmarkSet& landmarks);

} /* namespace core */
} /* namespace morphfit */

#endif /* MORPHFIT_CORE_LANDMARK_HPP */

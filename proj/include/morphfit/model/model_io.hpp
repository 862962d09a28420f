/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: include/morphfit/model/model_io.hpp
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

#ifndef MORPHFIT_MODEL_MODEL_IO_HPP
#define MORPHFIT_MODEL_MODEL_IO_HPP

#include "morphfit/model/morphable_model.hpp"

#include <filesystem>
#include <iosfwd>

namespace morphfit {
namespace model {

/**
 * Model container, version 1.
 *
 * A text header:
 *
 *     morphfit-model
 *     version 1
 *     vertices <V>
 *     shape_coefficients <K>
 *     colour_coefficients <Kc>
 *     triangles <T>
 *     landmarks <L>
 *     <name> <vertex index>        (L lines)
 *     end_header
 *
 * followed by little-endian binary arrays in this order: shape mean (3V f64),
 * shape basis (3V x K f64, row-major), shape stddevs (K f64), then if Kc > 0
 * colour mean, colour basis and colour stddevs in the same layout, and finally
 * the triangle list (T x 3 int32).
 *
 * Loading validates everything and throws core::ParseError naming the offending
 * field; nothing is returned on failure.
 */
void save_model(const MorphableModel& model, std::ostream& out);
void save_model(const MorphableModel& model, const std::filesystem::path& path);

MorphableModel load_model(std::istream& in);
MorphableModel load_model(const std::filesystem::path& path);

} /* namespace model */
} /* namespace morphfit */

#endif /* MORPHFIT_MODEL_MODEL_IO_HPP */

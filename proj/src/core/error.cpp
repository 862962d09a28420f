/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: src/core/error.cpp
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
#include "morphfit/core/error.hpp"

namespace morphfit {

std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::parse: return "parse";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::io: return "io";
    case ErrorKind::degenerate: return "degenerate-configuration";
    case ErrorKind::insufficient_points: return "insufficient-points";
    case ErrorKind::mapping: return "mapping";
    case ErrorKind::rank: return "rank";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::numerical: return "numerical-failure";
    case ErrorKind::connectivity: return "connectivity";
    case ErrorKind::mismatch: return "mismatch";
    case ErrorKind::insufficient_data: return "insufficient-data";
    }
    return "unknown";
}

} /* namespace morphfit */

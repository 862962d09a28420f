/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: include/morphfit/core/binary_io.hpp
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

#ifndef MORPHFIT_CORE_BINARY_IO_HPP
#define MORPHFIT_CORE_BINARY_IO_HPP

#include "morphfit/core/error.hpp"

#include "Eigen/Core"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace morphfit {
namespace core {
namespace binary {

// Little-endian encoding helpers shared by the model and cascade containers.

template <typename T>
T byteswap_if_big(T value) noexcept
{
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char bytes[sizeof(T)];
        std::memcpy(bytes, &value, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
            std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
        std::memcpy(&value, bytes, sizeof(T));
    }
    return value;
}

template <typename T>
void write_value(std::ostream& out, T value)
{
    value = byteswap_if_big(value);
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_value(std::istream& in, const std::string& field)
{
    T value;
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (in.gcount() != static_cast<std::streamsize>(sizeof(T)))
        throw ParseError(field, "file truncated");
    return byteswap_if_big(value);
}

/// Writes a dense matrix row-major as f64.
template <typename Derived>
void write_matrix(std::ostream& out, const Eigen::MatrixBase<Derived>& m)
{
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            write_value<double>(out, static_cast<double>(m(r, c)));
}

/// Reads a row-major f64 matrix and rejects non-finite entries.
inline Eigen::MatrixXd read_matrix(std::istream& in, Eigen::Index rows, Eigen::Index cols, const std::string& field)
{
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = read_value<double>(in, field);
            if (!std::isfinite(m(r, c)))
                throw ParseError(field, "non-finite value at (" + std::to_string(r) + ", " + std::to_string(c) + ")");
        }
    }
    return m;
}

inline Eigen::VectorXd read_vector(std::istream& in, Eigen::Index size, const std::string& field)
{
    return read_matrix(in, size, 1, field);
}

/// Reads `key <integer>` from one header line.
inline long long read_header_count(std::istream& in, const std::string& key)
{
    std::string line;
    if (!std::getline(in, line))
        throw ParseError(key, "header truncated");
    std::istringstream fields(line);
    std::string found;
    long long value = -1;
    std::string extra;
    if (!(fields >> found >> value) || found != key || (fields >> extra))
        throw ParseError(key, "expected '" + key + " <integer>', got '" + line + "'");
    if (value < 0)
        throw ParseError(key, "negative count");
    return value;
}

} /* namespace binary */
} /* namespace core */
} /* namespace morphfit */

#endif /* MORPHFIT_CORE_BINARY_IO_HPP */

/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: include/morphfit/core/error.hpp
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

#ifndef MORPHFIT_CORE_ERROR_HPP
#define MORPHFIT_CORE_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace morphfit {

/**
 * Classifies every failure the library reports. The CLI prints the kind
 * as a machine-readable token next to the message.
 */
enum class ErrorKind {
    dimension,
    parse,
    parameter,
    io,
    degenerate,
    insufficient_points,
    mapping,
    rank,
    convergence,
    numerical,
    connectivity,
    mismatch,
    insufficient_data,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept
    {
        return kind_;
    }

private:
    ErrorKind kind_;
};

/// A configuration whose design matrix lost rank. Carries the numerical rank found.
class DegenerateError : public Error
{
public:
    DegenerateError(const std::string& message, int rank)
        : Error(ErrorKind::degenerate, message + " (rank " + std::to_string(rank) + ")"), rank_(rank)
    {
    }

    int rank() const noexcept
    {
        return rank_;
    }

private:
    int rank_;
};

/// File parse failure naming the field that could not be read or validated.
class ParseError : public Error
{
public:
    ParseError(std::string field, const std::string& message)
        : Error(ErrorKind::parse, field + ": " + message), field_(std::move(field))
    {
    }

    const std::string& field() const noexcept
    {
        return field_;
    }

private:
    std::string field_;
};

} /* namespace morphfit */

#endif /* MORPHFIT_CORE_ERROR_HPP */

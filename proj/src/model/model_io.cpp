/*
 * morphfit - Landmark-based 3D Morphable Model fitting and pose normalisation.
 *
 * File: src/model/model_io.cpp
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
#include "morphfit/model/model_io.hpp"
#include "morphfit/core/binary_io.hpp"
#include "morphfit/core/error.hpp"

#include <fstream>
#include <sstream>

namespace morphfit {
namespace model {

namespace {

constexpr const char* magic = "morphfit-model";
constexpr int format_version = 1;

void write_pca(std::ostream& out, const PcaModel& pca)
{
    core::binary::write_matrix(out, pca.mean);
    core::binary::write_matrix(out, pca.basis);
    core::binary::write_matrix(out, pca.stddevs);
}

PcaModel read_pca(std::istream& in, Eigen::Index rows, Eigen::Index components, const std::string& prefix)
{
    PcaModel pca;
    pca.mean = core::binary::read_vector(in, rows, prefix + "_mean");
    pca.basis = core::binary::read_matrix(in, rows, components, prefix + "_basis");
    pca.stddevs = core::binary::read_vector(in, components, prefix + "_stddevs");
    return pca;
}

} // namespace

void save_model(const MorphableModel& model, std::ostream& out)
{
    const auto& colour = model.colour_model();
    out << magic << '\n'
        << "version " << format_version << '\n'
        << "vertices " << model.vertex_count() << '\n'
        << "shape_coefficients " << model.num_shape_coefficients() << '\n'
        << "colour_coefficients " << (colour ? colour->num_components() : 0) << '\n'
        << "triangles " << model.triangles().size() << '\n'
        << "landmarks " << model.landmarks().size() << '\n';
    for (const auto& [name, index] : model.landmarks())
        out << name << ' ' << index << '\n';
    out << "end_header\n";
    write_pca(out, model.shape_model());
    if (colour)
        write_pca(out, *colour);
    for (const auto& t : model.triangles())
        for (int index : t)
            core::binary::write_value<std::int32_t>(out, index);
    if (!out)
        throw Error(ErrorKind::io, "failed writing model");
}

void save_model(const MorphableModel& model, const std::filesystem::path& path)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out)
            throw Error(ErrorKind::io, "cannot open " + tmp.string());
        save_model(model, out);
    }
    std::filesystem::rename(tmp, path);
}

MorphableModel load_model(std::istream& in)
{
    using core::binary::read_header_count;
    std::string line;
    if (!std::getline(in, line) || line != magic)
        throw ParseError("magic", "not a morphfit model file");
    const auto version = read_header_count(in, "version");
    if (version != format_version)
        throw ParseError("version", "unsupported version " + std::to_string(version) + ", expected " +
                                        std::to_string(format_version));
    const auto V = read_header_count(in, "vertices");
    const auto K = read_header_count(in, "shape_coefficients");
    const auto Kc = read_header_count(in, "colour_coefficients");
    const auto T = read_header_count(in, "triangles");
    const auto L = read_header_count(in, "landmarks");
    if (V == 0)
        throw ParseError("vertices", "model has no vertices");
    if (K >= 3 * V || Kc >= 3 * V)
        throw ParseError("shape_coefficients", "more coefficients than basis rows");

    std::map<std::string, int> landmarks;
    for (long long i = 0; i < L; ++i) {
        if (!std::getline(in, line))
            throw ParseError("landmarks", "header truncated in landmark table");
        std::istringstream fields(line);
        std::string name;
        long long index = -1;
        if (!(fields >> name >> index))
            throw ParseError("landmarks", "malformed landmark entry '" + line + "'");
        if (index < 0 || index >= V)
            throw ParseError("landmarks", "landmark '" + name + "' vertex index out of range");
        if (!landmarks.emplace(name, static_cast<int>(index)).second)
            throw ParseError("landmarks", "duplicate landmark '" + name + "'");
    }
    if (!std::getline(in, line) || line != "end_header")
        throw ParseError("end_header", "missing end_header marker");

    const Eigen::Index rows = 3 * V;
    PcaModel shape = read_pca(in, rows, K, "shape");
    std::optional<PcaModel> colour;
    if (Kc > 0)
        colour = read_pca(in, rows, Kc, "colour");

    std::vector<Triangle> triangles(static_cast<std::size_t>(T));
    for (auto& t : triangles) {
        for (int& index : t) {
            index = core::binary::read_value<std::int32_t>(in, "triangles");
            if (index < 0 || index >= V)
                throw ParseError("triangles", "triangle index out of range");
        }
    }
    if (in.peek() != std::char_traits<char>::eof())
        throw ParseError("triangles", "trailing bytes after triangle list");

    try {
        return MorphableModel(std::move(shape), std::move(triangles), std::move(landmarks), std::move(colour));
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError("model", e.what());
    }
}

MorphableModel load_model(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::io, "cannot open model file " + path.string());
    return load_model(in);
}

} /* namespace model */
} /* namespace morphfit */

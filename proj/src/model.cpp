/*
 * sfm - Sphere Face Model: a linear 3D shape model with a hyperspherical
 * latent space.
 *
 * File: src/model.cpp
 *
 * Copyright 2026 The sfm authors
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
#include "sfm/model.hpp"

#include <Eigen/Dense>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

// The container format is little-endian; this implementation memcpy-free
// writes host doubles, so it requires a little-endian IEEE-754 host.
static_assert(std::endian::native == std::endian::little,
              "sfm model container I/O requires a little-endian host");

namespace sfm {

using json = nlohmann::json;

Eigen::VectorXd identity_vector(const ShapeCode& code)
{
    const double norm = code.x.norm();
    if (norm <= norm_epsilon)
    {
        throw std::domain_error("identity_vector: ||x|| = " + std::to_string(norm) +
                                " is below the representable threshold");
    }
    return code.x / norm;
}

void validate_model(const SphereFaceModel& model, bool require_orthonormal)
{
    if (model.mean.size() != 3 * static_cast<Eigen::Index>(model.vertex_count))
    {
        throw std::invalid_argument("validate_model: mean has " + std::to_string(model.mean.size()) +
                                    " coordinates, expected " + std::to_string(3 * model.vertex_count));
    }
    if (model.basis.rows() != model.mean.size())
    {
        throw std::invalid_argument("validate_model: basis has " + std::to_string(model.basis.rows()) +
                                    " rows, expected " + std::to_string(model.mean.size()));
    }
    if (model.basis.cols() < 1)
    {
        throw std::invalid_argument("validate_model: basis needs at least one column");
    }
    if (!model.mean.allFinite() || !model.basis.allFinite())
    {
        throw std::invalid_argument("validate_model: non-finite model coefficient");
    }
    for (const auto& f : model.faces)
    {
        for (int idx : f)
        {
            if (idx < 0 || idx >= model.vertex_count)
            {
                throw std::invalid_argument("validate_model: face index " + std::to_string(idx) +
                                            " out of range");
            }
        }
    }
    if (require_orthonormal)
    {
        const int d = model.dimension();
        const double residual =
            (model.basis.transpose() * model.basis - Eigen::MatrixXd::Identity(d, d)).norm();
        if (residual > orth_epsilon)
        {
            throw std::runtime_error("validate_model: basis is not orthonormal, ||A^T A - I||_F = " +
                                     std::to_string(residual));
        }
    }
}

Mesh reconstruct(const SphereFaceModel& model, const ShapeCode& code)
{
    if (code.x.size() != model.dimension())
    {
        throw std::invalid_argument("reconstruct: code has " + std::to_string(code.x.size()) +
                                    " dimensions, model has " + std::to_string(model.dimension()));
    }
    const Eigen::VectorXd direction = identity_vector(code);
    Eigen::VectorXd vertices = model.mean + model.basis * (code.s * direction);
    return make_mesh(std::move(vertices), model.faces);
}

ShapeCode project(const SphereFaceModel& model, const Mesh& mesh)
{
    if (mesh.vertex_count != model.vertex_count)
    {
        throw std::invalid_argument("project: mesh has " + std::to_string(mesh.vertex_count) +
                                    " vertices, model has " + std::to_string(model.vertex_count));
    }
    ShapeCode code;
    code.x = model.basis.transpose() * (mesh.vertices - model.mean);
    code.s = code.x.norm();
    if (code.s <= norm_epsilon)
    {
        // Target coincides with the mean: the identity direction is
        // undefined, so pick the deterministic fallback e_1 with zero scale.
        code.x = Eigen::VectorXd::Zero(model.dimension());
        code.x[0] = 1.0;
        code.s = 0.0;
    }
    return code;
}

namespace {

// Flips column signs so that each column's largest-magnitude entry is
// positive. First occurrence wins on exact ties.
void apply_sign_convention(Eigen::MatrixXd& basis)
{
    for (Eigen::Index j = 0; j < basis.cols(); ++j)
    {
        Eigen::Index argmax = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < basis.rows(); ++i)
        {
            const double mag = std::abs(basis(i, j));
            if (mag > best)
            {
                best = mag;
                argmax = i;
            }
        }
        if (basis(argmax, j) < 0.0)
        {
            basis.col(j) = -basis.col(j);
        }
    }
}

} // namespace

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& basis)
{
    const Eigen::Index rows = basis.rows();
    const Eigen::Index cols = basis.cols();
    if (cols < 1 || rows < cols)
    {
        throw std::invalid_argument("orthonormalize: need rows >= cols >= 1, got " +
                                    std::to_string(rows) + " x " + std::to_string(cols));
    }
    if (!basis.allFinite())
    {
        throw std::invalid_argument("orthonormalize: non-finite input");
    }
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
    // Diagonal-ratio rank estimate; |R_ii| decays to ~0 on dependent columns.
    const Eigen::VectorXd rdiag = qr.matrixQR().diagonal().head(cols).cwiseAbs();
    const double largest = rdiag.maxCoeff();
    if (largest == 0.0 || rdiag.minCoeff() / largest < 1e-10)
    {
        throw std::runtime_error("orthonormalize: rank-deficient input (diagonal ratio " +
                                 std::to_string(largest == 0.0 ? 0.0 : rdiag.minCoeff() / largest) +
                                 ")");
    }
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
    apply_sign_convention(q);
    return q;
}

SphereFaceModel fit_pca(const std::vector<Mesh>& meshes, int d)
{
    const int m = static_cast<int>(meshes.size());
    if (m < 2)
    {
        throw std::invalid_argument("fit_pca: need at least 2 meshes, got " + std::to_string(m));
    }
    const int n = meshes.front().vertex_count;
    for (const auto& mesh : meshes)
    {
        if (mesh.vertex_count != n)
        {
            throw std::invalid_argument("fit_pca: inconsistent vertex counts across meshes");
        }
    }
    const Eigen::Index dim = 3 * static_cast<Eigen::Index>(n);
    if (d < 1 || d > std::min<Eigen::Index>(dim, m - 1))
    {
        throw std::invalid_argument("fit_pca: d = " + std::to_string(d) +
                                    " outside [1, min(3n, m - 1)] = [1, " +
                                    std::to_string(std::min<Eigen::Index>(dim, m - 1)) + "]");
    }

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    for (const auto& mesh : meshes)
    {
        mean += mesh.vertices;
    }
    mean /= m;

    Eigen::MatrixXd centered(dim, m);
    for (int i = 0; i < m; ++i)
    {
        centered.col(i) = meshes[i].vertices - mean;
    }
    // Left singular vectors of the centered data matrix are the principal
    // directions, already in eigenvalue-descending order.
    const Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU);
    SphereFaceModel model;
    model.mean = std::move(mean);
    model.basis = svd.matrixU().leftCols(d);
    apply_sign_convention(model.basis);
    model.faces = meshes.front().faces;
    model.vertex_count = n;
    return model;
}

Eigen::VectorXd slerp(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double t)
{
    if (a.size() != b.size())
    {
        throw std::invalid_argument("slerp: dimension mismatch");
    }
    if (std::abs(a.norm() - 1.0) > 1e-9 || std::abs(b.norm() - 1.0) > 1e-9)
    {
        throw std::invalid_argument("slerp: inputs must be unit vectors (within 1e-9)");
    }
    const double dot = std::clamp(a.dot(b), -1.0, 1.0);
    const double theta = std::acos(dot);
    if (theta > M_PI - 1e-6)
    {
        throw std::domain_error("slerp: antipodal endpoints, the geodesic is not unique");
    }
    // Endpoints are returned verbatim: the sin-weighted form below only
    // reproduces them to rounding, and callers key on exact equality.
    if (t == 0.0)
    {
        return a;
    }
    if (t == 1.0)
    {
        return b;
    }
    if (theta < 1e-6)
    {
        // Nearly parallel: sin(theta) is unusable, but the chord is a
        // faithful approximation of the arc here.
        Eigen::VectorXd lerped = (1.0 - t) * a + t * b;
        return lerped / lerped.norm();
    }
    const double sin_theta = std::sin(theta);
    return (std::sin((1.0 - t) * theta) * a + std::sin(t * theta) * b) / sin_theta;
}

ShapeCode interpolate_codes(const ShapeCode& a, const ShapeCode& b, double t)
{
    ShapeCode result;
    result.x = slerp(identity_vector(a), identity_vector(b), t);
    result.s = (1.0 - t) * a.s + t * b.s;
    return result;
}

namespace {

constexpr char container_magic[4] = {'S', 'F', 'M', 'B'};
constexpr std::uint32_t container_version = 1;

void write_raw(std::ofstream& out, const void* data, std::size_t bytes)
{
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
}

void read_raw(std::ifstream& in, void* data, std::size_t bytes, const std::string& path)
{
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(bytes));
    if (static_cast<std::size_t>(in.gcount()) != bytes)
    {
        throw std::runtime_error("load_model: " + path + ": truncated payload");
    }
}

} // namespace

void save_model(const SphereFaceModel& model, const std::string& path)
{
    validate_model(model, /*require_orthonormal=*/false);
    const Eigen::Index dim = model.mean.size();
    const int d = model.dimension();
    const std::uint64_t face_count = model.faces.size();

    json header;
    header["d"] = d;
    header["vertex_count"] = model.vertex_count;
    header["has_faces"] = face_count > 0;
    header["arrays"] = json::array();
    header["arrays"].push_back({{"name", "mean"}, {"dtype", "f64"}, {"shape", {dim}}});
    header["arrays"].push_back(
        {{"name", "basis"}, {"dtype", "f64"}, {"shape", {dim, d}}, {"order", "row_major"}});
    if (face_count > 0)
    {
        header["arrays"].push_back({{"name", "faces"}, {"dtype", "u32"}, {"shape", {face_count, 3}}});
    }
    const std::string header_text = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out)
    {
        throw std::runtime_error("save_model: cannot open " + path + " for writing");
    }
    write_raw(out, container_magic, 4);
    write_raw(out, &container_version, sizeof(container_version));
    const std::uint64_t header_bytes = header_text.size();
    write_raw(out, &header_bytes, sizeof(header_bytes));
    write_raw(out, header_text.data(), header_text.size());

    write_raw(out, model.mean.data(), sizeof(double) * static_cast<std::size_t>(dim));
    // Basis is stored row-major; Eigen matrices are column-major in memory.
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major =
        model.basis;
    write_raw(out, row_major.data(), sizeof(double) * static_cast<std::size_t>(dim) * d);
    for (const auto& f : model.faces)
    {
        const std::uint32_t triple[3] = {static_cast<std::uint32_t>(f[0]),
                                         static_cast<std::uint32_t>(f[1]),
                                         static_cast<std::uint32_t>(f[2])};
        write_raw(out, triple, sizeof(triple));
    }
    if (!out)
    {
        throw std::runtime_error("save_model: write to " + path + " failed");
    }
}

SphereFaceModel load_model(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw std::runtime_error("load_model: cannot open " + path);
    }
    char magic[4];
    read_raw(in, magic, 4, path);
    if (std::memcmp(magic, container_magic, 4) != 0)
    {
        throw std::runtime_error("load_model: " + path + ": bad magic");
    }
    std::uint32_t version = 0;
    read_raw(in, &version, sizeof(version), path);
    if (version != container_version)
    {
        throw std::runtime_error("load_model: " + path + ": unsupported version " +
                                 std::to_string(version));
    }
    std::uint64_t header_bytes = 0;
    read_raw(in, &header_bytes, sizeof(header_bytes), path);
    std::string header_text(header_bytes, '\0');
    read_raw(in, header_text.data(), header_bytes, path);

    json header;
    try
    {
        header = json::parse(header_text);
    } catch (const json::exception& e)
    {
        throw std::runtime_error("load_model: " + path + ": malformed header: " + e.what());
    }

    SphereFaceModel model;
    const int d = header.at("d").get<int>();
    model.vertex_count = header.at("vertex_count").get<int>();
    const bool has_faces = header.at("has_faces").get<bool>();
    if (d < 1 || model.vertex_count < 1)
    {
        throw std::runtime_error("load_model: " + path + ": invalid dimensions in header");
    }
    const Eigen::Index dim = 3 * static_cast<Eigen::Index>(model.vertex_count);

    std::uint64_t face_count = 0;
    for (const auto& desc : header.at("arrays"))
    {
        const std::string name = desc.at("name").get<std::string>();
        const auto& shape = desc.at("shape");
        if (name == "mean")
        {
            if (shape.size() != 1 || shape[0].get<Eigen::Index>() != dim)
                throw std::runtime_error("load_model: " + path + ": mean dimension mismatch");
        } else if (name == "basis")
        {
            if (shape.size() != 2 || shape[0].get<Eigen::Index>() != dim ||
                shape[1].get<int>() != d)
                throw std::runtime_error("load_model: " + path + ": basis dimension mismatch");
        } else if (name == "faces")
        {
            if (!has_faces || shape.size() != 2 || shape[1].get<int>() != 3)
                throw std::runtime_error("load_model: " + path + ": faces dimension mismatch");
            face_count = shape[0].get<std::uint64_t>();
        } else
        {
            throw std::runtime_error("load_model: " + path + ": unknown array '" + name + "'");
        }
    }

    model.mean.resize(dim);
    read_raw(in, model.mean.data(), sizeof(double) * static_cast<std::size_t>(dim), path);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major(dim, d);
    read_raw(in, row_major.data(), sizeof(double) * static_cast<std::size_t>(dim) * d, path);
    model.basis = row_major;
    model.faces.reserve(face_count);
    for (std::uint64_t k = 0; k < face_count; ++k)
    {
        std::uint32_t triple[3];
        read_raw(in, triple, sizeof(triple), path);
        model.faces.push_back({static_cast<int>(triple[0]), static_cast<int>(triple[1]),
                               static_cast<int>(triple[2])});
    }
    validate_model(model, /*require_orthonormal=*/false);
    return model;
}

} // namespace sfm

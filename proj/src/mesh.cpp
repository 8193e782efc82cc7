/*
 * sfm - Sphere Face Model: a linear 3D shape model with a hyperspherical
 * latent space.
 *
 * File: src/mesh.cpp
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
#include "sfm/mesh.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace sfm {

namespace {

std::string format_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

[[noreturn]] void parse_error(const std::string& path, int line, const std::string& what)
{
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

} // namespace

Mesh make_mesh(Eigen::VectorXd vertices, std::vector<std::array<int, 3>> faces)
{
    if (vertices.size() % 3 != 0)
    {
        throw std::invalid_argument("make_mesh: coordinate vector length " +
                                    std::to_string(vertices.size()) + " is not a multiple of 3");
    }
    if (!vertices.allFinite())
    {
        throw std::invalid_argument("make_mesh: non-finite vertex coordinate");
    }
    const int n = static_cast<int>(vertices.size() / 3);
    for (const auto& f : faces)
    {
        for (int idx : f)
        {
            if (idx < 0 || idx >= n)
            {
                throw std::invalid_argument("make_mesh: face index " + std::to_string(idx) +
                                            " out of range for " + std::to_string(n) + " vertices");
            }
        }
    }
    Mesh mesh;
    mesh.vertices = std::move(vertices);
    mesh.faces = std::move(faces);
    mesh.vertex_count = n;
    return mesh;
}

SymmetryMap make_symmetry_map(std::vector<int> mirror_index, Axis axis)
{
    const int n = static_cast<int>(mirror_index.size());
    for (int i = 0; i < n; ++i)
    {
        const int j = mirror_index[i];
        if (j < 0 || j >= n)
        {
            throw std::invalid_argument("make_symmetry_map: mirror index " + std::to_string(j) +
                                        " out of range");
        }
        if (mirror_index[j] != i)
        {
            throw std::invalid_argument("make_symmetry_map: map is not an involution at vertex " +
                                        std::to_string(i));
        }
    }
    SymmetryMap map;
    map.mirror_index = std::move(mirror_index);
    map.axis = axis;
    return map;
}

SymmetryMap load_symmetry_map(const std::string& path)
{
    std::ifstream file(path);
    if (!file)
    {
        throw std::runtime_error("load_symmetry_map: cannot open " + path);
    }
    std::string line;
    int line_no = 0;

    ++line_no;
    if (!std::getline(file, line))
    {
        parse_error(path, line_no, "missing axis preamble");
    }
    Axis axis;
    if (line == "axis=x")
        axis = Axis::x;
    else if (line == "axis=y")
        axis = Axis::y;
    else if (line == "axis=z")
        axis = Axis::z;
    else
        parse_error(path, line_no, "expected axis=x|y|z, got '" + line + "'");

    ++line_no;
    if (!std::getline(file, line) || line != "index,mirror_index")
    {
        parse_error(path, line_no, "expected header 'index,mirror_index'");
    }

    std::vector<int> mirror;
    while (std::getline(file, line))
    {
        ++line_no;
        if (line.empty())
            continue;
        std::istringstream row(line);
        int index = 0, partner = 0;
        char comma = 0;
        if (!(row >> index >> comma >> partner) || comma != ',')
        {
            parse_error(path, line_no, "malformed row '" + line + "'");
        }
        if (index != static_cast<int>(mirror.size()))
        {
            parse_error(path, line_no, "rows must be sequential from 0");
        }
        mirror.push_back(partner);
    }
    try
    {
        return make_symmetry_map(std::move(mirror), axis);
    } catch (const std::invalid_argument& e)
    {
        throw std::runtime_error("load_symmetry_map: " + path + ": " + e.what());
    }
}

void save_symmetry_map(const SymmetryMap& map, const std::string& path)
{
    std::ofstream file(path);
    if (!file)
    {
        throw std::runtime_error("save_symmetry_map: cannot open " + path + " for writing");
    }
    const char axis_name = map.axis == Axis::x ? 'x' : (map.axis == Axis::y ? 'y' : 'z');
    file << "axis=" << axis_name << "\n";
    file << "index,mirror_index\n";
    for (std::size_t i = 0; i < map.mirror_index.size(); ++i)
    {
        file << i << "," << map.mirror_index[i] << "\n";
    }
    if (!file)
    {
        throw std::runtime_error("save_symmetry_map: write to " + path + " failed");
    }
}

NeighborGraph build_neighbor_graph(const Mesh& mesh)
{
    std::vector<std::set<int>> sets(mesh.vertex_count);
    for (const auto& f : mesh.faces)
    {
        for (int e = 0; e < 3; ++e)
        {
            const int a = f[e];
            const int b = f[(e + 1) % 3];
            if (a == b)
                continue;
            sets[a].insert(b);
            sets[b].insert(a);
        }
    }
    NeighborGraph graph;
    graph.adjacency.reserve(sets.size());
    for (auto& s : sets)
    {
        graph.adjacency.emplace_back(s.begin(), s.end());
    }
    return graph;
}

Mesh load_obj(const std::string& path)
{
    std::ifstream file(path);
    if (!file)
    {
        throw std::runtime_error("load_obj: cannot open " + path);
    }
    std::vector<double> coords;
    // Raw 1-based indices; validated against the final vertex count below.
    std::vector<std::array<long, 3>> raw_faces;
    std::vector<int> face_lines;
    std::string line;
    int line_no = 0;
    while (std::getline(file, line))
    {
        ++line_no;
        std::istringstream tokens(line);
        std::string tag;
        if (!(tokens >> tag) || tag[0] == '#')
            continue;
        if (tag == "v")
        {
            double x = 0, y = 0, z = 0;
            if (!(tokens >> x >> y >> z))
            {
                parse_error(path, line_no, "vertex record needs 3 coordinates");
            }
            std::string extra;
            if (tokens >> extra)
            {
                parse_error(path, line_no, "vertex record has trailing token '" + extra + "'");
            }
            if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
            {
                parse_error(path, line_no, "non-finite vertex coordinate");
            }
            coords.push_back(x);
            coords.push_back(y);
            coords.push_back(z);
        } else if (tag == "f")
        {
            std::vector<long> idx;
            std::string tok;
            while (tokens >> tok)
            {
                // Keep only the vertex index of v, v/vt, v//vn, v/vt/vn.
                const auto slash = tok.find('/');
                const std::string head = slash == std::string::npos ? tok : tok.substr(0, slash);
                std::size_t used = 0;
                long v = 0;
                try
                {
                    v = std::stol(head, &used);
                } catch (const std::exception&)
                {
                    used = 0;
                }
                if (used == 0 || used != head.size())
                {
                    parse_error(path, line_no, "malformed face index '" + tok + "'");
                }
                idx.push_back(v);
            }
            if (idx.size() == 3)
            {
                raw_faces.push_back({idx[0], idx[1], idx[2]});
                face_lines.push_back(line_no);
            } else if (idx.size() == 4)
            {
                // Fan triangulation: (1,2,3) and (1,3,4).
                raw_faces.push_back({idx[0], idx[1], idx[2]});
                face_lines.push_back(line_no);
                raw_faces.push_back({idx[0], idx[2], idx[3]});
                face_lines.push_back(line_no);
            } else
            {
                parse_error(path, line_no,
                            "face with " + std::to_string(idx.size()) +
                                " vertices (only triangles and quads are supported)");
            }
        }
        // All other record types (vn, vt, o, g, s, usemtl, ...) are skipped.
    }
    const long n = static_cast<long>(coords.size() / 3);
    if (n == 0)
    {
        throw std::runtime_error("load_obj: " + path + ": no vertices");
    }
    std::vector<std::array<int, 3>> faces;
    faces.reserve(raw_faces.size());
    for (std::size_t k = 0; k < raw_faces.size(); ++k)
    {
        std::array<int, 3> f{};
        for (int e = 0; e < 3; ++e)
        {
            const long v = raw_faces[k][e];
            if (v < 1 || v > n)
            {
                parse_error(path, face_lines[k],
                            "face index " + std::to_string(v) + " out of range [1, " +
                                std::to_string(n) + "]");
            }
            f[e] = static_cast<int>(v - 1);
        }
        faces.push_back(f);
    }
    return make_mesh(Eigen::Map<Eigen::VectorXd>(coords.data(), coords.size()), std::move(faces));
}

void save_obj(const Mesh& mesh, const std::string& path)
{
    std::ofstream file(path);
    if (!file)
    {
        throw std::runtime_error("save_obj: cannot open " + path + " for writing");
    }
    for (int i = 0; i < mesh.vertex_count; ++i)
    {
        file << "v " << format_double(mesh.vertices[3 * i + 0]) << ' '
             << format_double(mesh.vertices[3 * i + 1]) << ' '
             << format_double(mesh.vertices[3 * i + 2]) << "\n";
    }
    for (const auto& f : mesh.faces)
    {
        file << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << "\n";
    }
    if (!file)
    {
        throw std::runtime_error("save_obj: write to " + path + " failed");
    }
}

double rmse_point_to_point(const Mesh& a, const Mesh& b)
{
    if (a.vertex_count != b.vertex_count)
    {
        throw std::invalid_argument("rmse_point_to_point: vertex counts differ (" +
                                    std::to_string(a.vertex_count) + " vs " +
                                    std::to_string(b.vertex_count) + ")");
    }
    const double sq = (a.vertices - b.vertices).squaredNorm();
    return std::sqrt(sq / a.vertex_count);
}

Eigen::VectorXd vertex_normals(const Mesh& mesh)
{
    if (!mesh.has_faces())
    {
        throw std::invalid_argument("vertex_normals: mesh has no faces");
    }
    Eigen::VectorXd normals = Eigen::VectorXd::Zero(3 * mesh.vertex_count);
    for (const auto& f : mesh.faces)
    {
        const Eigen::Vector3d p0 = mesh.vertex(f[0]);
        const Eigen::Vector3d p1 = mesh.vertex(f[1]);
        const Eigen::Vector3d p2 = mesh.vertex(f[2]);
        // Cross product length is twice the face area, so summing the raw
        // cross products is exactly area weighting.
        const Eigen::Vector3d weighted = (p1 - p0).cross(p2 - p0);
        for (int e = 0; e < 3; ++e)
        {
            normals.segment<3>(3 * f[e]) += weighted;
        }
    }
    for (int i = 0; i < mesh.vertex_count; ++i)
    {
        const double len = normals.segment<3>(3 * i).norm();
        if (len == 0.0)
        {
            throw std::runtime_error("vertex_normals: degenerate normal at vertex " +
                                     std::to_string(i));
        }
        normals.segment<3>(3 * i) /= len;
    }
    return normals;
}

double rmse_point_to_plane(const Mesh& source, const Mesh& target)
{
    if (source.vertex_count != target.vertex_count)
    {
        throw std::invalid_argument("rmse_point_to_plane: vertex counts differ (" +
                                    std::to_string(source.vertex_count) + " vs " +
                                    std::to_string(target.vertex_count) + ")");
    }
    const Eigen::VectorXd normals = vertex_normals(target);
    double sq = 0.0;
    for (int i = 0; i < source.vertex_count; ++i)
    {
        const double d =
            (source.vertex(i) - target.vertex(i)).dot(normals.segment<3>(3 * i));
        sq += d * d;
    }
    return std::sqrt(sq / source.vertex_count);
}

Mesh flip_mesh(const Mesh& mesh, const SymmetryMap& sym)
{
    if (static_cast<int>(sym.mirror_index.size()) != mesh.vertex_count)
    {
        throw std::invalid_argument("flip_mesh: symmetry map covers " +
                                    std::to_string(sym.mirror_index.size()) + " vertices, mesh has " +
                                    std::to_string(mesh.vertex_count));
    }
    Eigen::VectorXd flipped(mesh.vertices.size());
    const int axis = static_cast<int>(sym.axis);
    for (int i = 0; i < mesh.vertex_count; ++i)
    {
        Eigen::Vector3d v = mesh.vertex(sym.mirror_index[i]);
        v[axis] = -v[axis];
        flipped.segment<3>(3 * i) = v;
    }
    return make_mesh(std::move(flipped), mesh.faces);
}

double smooth_loss(const Mesh& mesh, const NeighborGraph& graph)
{
    if (static_cast<int>(graph.adjacency.size()) != mesh.vertex_count)
    {
        throw std::invalid_argument("smooth_loss: neighbor graph covers " +
                                    std::to_string(graph.adjacency.size()) + " vertices, mesh has " +
                                    std::to_string(mesh.vertex_count));
    }
    double total = 0.0;
    for (int i = 0; i < mesh.vertex_count; ++i)
    {
        const auto& nbrs = graph.adjacency[i];
        if (nbrs.empty())
        {
            throw std::runtime_error("smooth_loss: vertex " + std::to_string(i) +
                                     " has no neighbors");
        }
        Eigen::Vector3d mean = Eigen::Vector3d::Zero();
        for (int j : nbrs)
        {
            mean += mesh.vertex(j);
        }
        mean /= static_cast<double>(nbrs.size());
        total += (mesh.vertex(i) - mean).norm();
    }
    return total / mesh.vertex_count;
}

double symmetry_loss(const Mesh& mesh, const SymmetryMap& sym)
{
    const Mesh flipped = flip_mesh(mesh, sym);
    return (mesh.vertices - flipped.vertices).lpNorm<1>();
}

double residual_loss(const Mesh& mesh, const Mesh& mean)
{
    if (mesh.vertex_count != mean.vertex_count)
    {
        throw std::invalid_argument("residual_loss: vertex counts differ (" +
                                    std::to_string(mesh.vertex_count) + " vs " +
                                    std::to_string(mean.vertex_count) + ")");
    }
    return (mesh.vertices - mean.vertices).lpNorm<1>();
}

} // namespace sfm

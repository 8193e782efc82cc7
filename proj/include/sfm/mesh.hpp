/*
 * sfm - Sphere Face Model: a linear 3D shape model with a hyperspherical
 * latent space.
 *
 * File: include/sfm/mesh.hpp
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
#pragma once

#include <Eigen/Core>

#include <array>
#include <string>
#include <vector>

namespace sfm {

/**
 * Triangle mesh with vertices stored as one flat coordinate vector
 * [x0, y0, z0, x1, y1, z1, ...] of length 3 * vertex_count, in millimeters.
 * Faces are optional and use 0-based indices.
 *
 * Meshes are immutable by convention once built; every producer goes through
 * make_mesh() (or load_obj()) which enforces the size/index/finiteness
 * invariants.
 */
struct Mesh {
    Eigen::VectorXd vertices;
    std::vector<std::array<int, 3>> faces;
    int vertex_count = 0;

    bool has_faces() const { return !faces.empty(); }
    Eigen::Vector3d vertex(int i) const { return vertices.segment<3>(3 * i); }
};

/// Builds a validated Mesh. Throws std::invalid_argument if the coordinate
/// vector length is not a multiple of 3, a face index is out of range, or any
/// coordinate is non-finite.
Mesh make_mesh(Eigen::VectorXd vertices, std::vector<std::array<int, 3>> faces = {});

enum class Axis { x = 0, y = 1, z = 2 };

/**
 * Left/right vertex correspondence for the symmetry loss: mirror_index is an
 * involution pairing each vertex with its mirror partner (self-pairs allowed
 * for on-plane vertices), and axis names the coordinate negated under
 * reflection.
 */
struct SymmetryMap {
    std::vector<int> mirror_index;
    Axis axis = Axis::x;
};

/// Validates the involution property (mirror[mirror[i]] == i) and index range.
SymmetryMap make_symmetry_map(std::vector<int> mirror_index, Axis axis = Axis::x);

/// Reads a SymmetryMap from CSV: a one-line `axis=x|y|z` preamble, a header
/// `index,mirror_index`, then one row per vertex.
SymmetryMap load_symmetry_map(const std::string& path);
void save_symmetry_map(const SymmetryMap& map, const std::string& path);

/// Per-vertex adjacency derived from faces; symmetric, no self-loops,
/// neighbor lists sorted ascending.
struct NeighborGraph {
    std::vector<std::vector<int>> adjacency;
};

NeighborGraph build_neighbor_graph(const Mesh& mesh);

/**
 * Loads an ASCII OBJ. Only `v` and `f` records are interpreted (comments and
 * other record types are skipped). Quads are fan-triangulated; other polygon
 * arities are rejected. Face indices are converted to 0-based.
 * Throws std::runtime_error with the offending line number on parse errors.
 */
Mesh load_obj(const std::string& path);

/// Writes `v` records with round-trip (17 significant digit) precision and
/// 1-based `f` records.
void save_obj(const Mesh& mesh, const std::string& path);

/// sqrt( (1/n) sum_i ||a_i - b_i||^2 ) over per-vertex Euclidean distances.
/// Requires identical vertex counts.
double rmse_point_to_point(const Mesh& a, const Mesh& b);

/**
 * sqrt( (1/n) sum_i ((a_i - b_i) . n_i)^2 ) where n_i is the unit
 * area-weighted vertex normal of `target`. Correspondence is index-wise.
 * Throws if target has no faces or any vertex normal is degenerate.
 */
double rmse_point_to_plane(const Mesh& source, const Mesh& target);

/// Area-weighted vertex normals of a faced mesh, one unit 3-vector per vertex
/// (flat 3n layout). Degenerate (zero-norm) normals are an error.
Eigen::VectorXd vertex_normals(const Mesh& mesh);

/// Applies the mirror permutation and negates the symmetry axis coordinate.
Mesh flip_mesh(const Mesh& mesh, const SymmetryMap& sym);

/// (1/N) sum_i || G_i - mean of neighbors(G_i) ||_2. Every vertex must have at
/// least one neighbor.
double smooth_loss(const Mesh& mesh, const NeighborGraph& graph);

/// L1 norm over all 3n coordinates of G - flip(G).
double symmetry_loss(const Mesh& mesh, const SymmetryMap& sym);

/// L1 norm over all 3n coordinate differences against a mean shape.
double residual_loss(const Mesh& mesh, const Mesh& mean);

} // namespace sfm

/*
 * sfm - Sphere Face Model: a linear 3D shape model with a hyperspherical
 * latent space.
 *
 * File: include/sfm/model.hpp
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

#include "sfm/mesh.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace sfm {

/// Latent vectors with norm at or below this are treated as zero; dependent
/// quantities (the identity direction) are undefined below it.
inline constexpr double norm_epsilon = 1e-12;

/// Orthonormality tolerance for ||A^T A - I||_F on a finalized model.
inline constexpr double orth_epsilon = 1e-8;

/**
 * Latent code of one shape: a raw vector x whose direction x/||x|| is the
 * identity (the point on the unit hypersphere) and a scalar scale s. The
 * model consumes s * x/||x||, so codes with proportional x and equal s
 * reconstruct the same shape.
 */
struct ShapeCode {
    Eigen::VectorXd x;
    double s = 0.0;
};

/// x/||x||. Throws std::domain_error if ||x|| <= norm_epsilon.
Eigen::VectorXd identity_vector(const ShapeCode& code);

/**
 * Linear shape model G = mean + basis * (s * x/||x||).
 *
 * The basis is 3n x d. A *finalized* model has orthonormal columns
 * (||basis^T basis - I||_F <= orth_epsilon), which makes the map from
 * parameter space to geometry an isometry: Euclidean distances between
 * parameter vectors s * x/||x|| equal Euclidean distances between the
 * reconstructed vertex vectors. Faces are optional and only carried along
 * for export.
 */
struct SphereFaceModel {
    Eigen::VectorXd mean;
    Eigen::MatrixXd basis;
    std::vector<std::array<int, 3>> faces;
    int vertex_count = 0;

    int dimension() const { return static_cast<int>(basis.cols()); }
};

/// Checks mean/basis shape consistency and coefficient finiteness. Iff
/// `require_orthonormal`, also enforces the finalized-model invariant.
void validate_model(const SphereFaceModel& model, bool require_orthonormal = true);

/// mean + basis * (s * x/||x||), carrying the model's faces. Throws
/// std::domain_error when ||x|| <= norm_epsilon.
Mesh reconstruct(const SphereFaceModel& model, const ShapeCode& code);

/**
 * Closed-form encoding p = basis^T (vertices - mean), split into scale
 * s = ||p|| and raw vector x = p. For a finalized model this is the
 * least-squares optimal code. A target at (or numerically indistinguishable
 * from) the mean yields the deterministic fallback x = e_1, s = 0.
 */
ShapeCode project(const SphereFaceModel& model, const Mesh& mesh);

/**
 * Householder-QR orthonormalization with a deterministic sign convention:
 * each output column's largest-magnitude entry is positive. The result
 * satisfies ||Q^T Q - I||_F <= 1e-10 and spans the input columns. Throws
 * std::runtime_error when the input is rank deficient (diagonal ratio of R
 * below 1e-10).
 */
Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& basis);

/**
 * Classic PCA baseline: mean = sample mean, basis = top-d principal
 * directions (eigenvalue-descending, same sign convention as
 * orthonormalize). Requires d <= min(3n, m - 1) for m sample meshes.
 */
SphereFaceModel fit_pca(const std::vector<Mesh>& meshes, int d);

/**
 * Spherical linear interpolation between two unit vectors:
 * (sin((1-t)theta) a + sin(t theta) b) / sin(theta). Falls back to normalized
 * linear interpolation when theta < 1e-6 and throws std::domain_error for
 * antipodal inputs (theta > pi - 1e-6). Inputs must be unit within 1e-9.
 */
Eigen::VectorXd slerp(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double t);

/// Slerps the identity directions and linearly interpolates the scales.
/// Endpoints are reproduced exactly at t = 0 and t = 1.
ShapeCode interpolate_codes(const ShapeCode& a, const ShapeCode& b, double t);

/**
 * Binary model container (.sfmb): magic "SFMB", u32 version = 1, u64 JSON
 * header length, UTF-8 JSON header describing dimensions and array layout,
 * then raw little-endian float64 mean (3n), basis (3n x d, row-major) and
 * optional uint32 face triples. Round-trips bit-exactly.
 */
void save_model(const SphereFaceModel& model, const std::string& path);
SphereFaceModel load_model(const std::string& path);

} // namespace sfm

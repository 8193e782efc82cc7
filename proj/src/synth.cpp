/*
 * sfm - Sphere Face Model: a linear 3D shape model with a hyperspherical
 * latent space.
 *
 * File: src/synth.cpp
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
#include "sfm/synth.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace sfm {

namespace {

constexpr int max_rejection_attempts = 100000;

void validate_config(const SynthConfig& c)
{
    if (c.vertex_count < 1 || c.latent_dimension < 1 || c.samples_per_identity < 1)
    {
        throw std::invalid_argument("generate_corpus: counts must be positive");
    }
    if (c.n_identities < 2)
    {
        throw std::invalid_argument("generate_corpus: need at least 2 identities, the corpus "
                                    "exists to separate classes");
    }
    if (c.latent_dimension > 3 * c.vertex_count)
    {
        throw std::invalid_argument("generate_corpus: latent dimension exceeds 3 * vertex_count");
    }
    if (c.identity_angle_stddev < 0.0 || c.identity_angle_stddev >= M_PI / 8)
    {
        throw std::invalid_argument(
            "generate_corpus: identity_angle_stddev must be in [0, pi/8) to keep identities "
            "separable");
    }
    if (c.scale_mean <= 0.0 || c.scale_stddev < 0.0 || c.vertex_noise_stddev < 0.0)
    {
        throw std::invalid_argument("generate_corpus: scale_mean must be positive and the "
                                    "standard deviations non-negative");
    }
}

// Largest divisor of n at or below sqrt(n); 1 degenerates to a strip.
int grid_rows(int n)
{
    int rows = static_cast<int>(std::sqrt(static_cast<double>(n)));
    while (rows > 1 && n % rows != 0)
    {
        --rows;
    }
    return std::max(rows, 1);
}

// Smooth low-frequency height field over a centered grid: believable
// base geometry with a non-trivial neighborhood structure for mesh losses.
Mesh base_surface(int vertex_count, std::mt19937_64& rng)
{
    const int rows = grid_rows(vertex_count);
    const int cols = vertex_count / rows;
    const double spacing = 2.0; // mm

    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<int> freq(1, 3);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
    constexpr int harmonics = 4;
    double amp[harmonics], fx[harmonics], fy[harmonics], ph[harmonics];
    for (int h = 0; h < harmonics; ++h)
    {
        amp[h] = 3.0 / (h + 1) * gauss(rng);
        fx[h] = freq(rng);
        fy[h] = freq(rng);
        ph[h] = phase(rng);
    }

    Eigen::VectorXd vertices(3 * vertex_count);
    for (int r = 0; r < rows; ++r)
    {
        for (int c = 0; c < cols; ++c)
        {
            const int i = r * cols + c;
            const double u = cols > 1 ? static_cast<double>(c) / (cols - 1) : 0.0;
            const double v = rows > 1 ? static_cast<double>(r) / (rows - 1) : 0.0;
            double z = 0.0;
            for (int h = 0; h < harmonics; ++h)
            {
                z += amp[h] * std::sin(2.0 * M_PI * (fx[h] * u + fy[h] * v) + ph[h]);
            }
            vertices[3 * i + 0] = (c - (cols - 1) / 2.0) * spacing;
            vertices[3 * i + 1] = (r - (rows - 1) / 2.0) * spacing;
            vertices[3 * i + 2] = z;
        }
    }
    std::vector<std::array<int, 3>> faces;
    for (int r = 0; r + 1 < rows; ++r)
    {
        for (int c = 0; c + 1 < cols; ++c)
        {
            const int v00 = r * cols + c;
            const int v01 = r * cols + c + 1;
            const int v10 = (r + 1) * cols + c;
            const int v11 = (r + 1) * cols + c + 1;
            faces.push_back({v00, v01, v11});
            faces.push_back({v00, v11, v10});
        }
    }
    return make_mesh(std::move(vertices), std::move(faces));
}

Eigen::MatrixXd draw_identity_centers(int count, int d, double min_angle, std::mt19937_64& rng)
{
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd centers(count, d);
    int attempts = 0;
    for (int k = 0; k < count;)
    {
        if (++attempts > max_rejection_attempts)
        {
            throw std::runtime_error("generate_corpus: could not place " + std::to_string(count) +
                                     " identities at pairwise angle >= " +
                                     std::to_string(min_angle) + " within " +
                                     std::to_string(max_rejection_attempts) + " attempts");
        }
        Eigen::VectorXd candidate(d);
        for (int j = 0; j < d; ++j)
        {
            candidate[j] = gauss(rng);
        }
        const double norm = candidate.norm();
        if (norm <= norm_epsilon)
        {
            continue;
        }
        candidate /= norm;
        bool separated = true;
        for (int prev = 0; prev < k && separated; ++prev)
        {
            const double dot = std::clamp(centers.row(prev).dot(candidate), -1.0, 1.0);
            separated = std::acos(dot) >= min_angle;
        }
        if (separated)
        {
            centers.row(k++) = candidate;
        }
    }
    return centers;
}

} // namespace

SynthResult generate_corpus(const SynthConfig& config)
{
    validate_config(config);
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    SynthResult result;
    const Mesh base = base_surface(config.vertex_count, rng);
    const Eigen::Index dim = base.vertices.size();
    const int d = config.latent_dimension;

    Eigen::MatrixXd raw(dim, d);
    for (Eigen::Index i = 0; i < dim; ++i)
    {
        for (int j = 0; j < d; ++j)
        {
            raw(i, j) = gauss(rng);
        }
    }
    SphereFaceModel& model = result.truth.model;
    model.mean = base.vertices;
    model.basis = orthonormalize(raw);
    model.faces = base.faces;
    model.vertex_count = config.vertex_count;

    result.truth.identity_centers = draw_identity_centers(
        config.n_identities, d, 2.0 * config.identity_angle_stddev, rng);

    const int total = config.n_identities * config.samples_per_identity;
    result.corpus.meshes.reserve(total);
    result.corpus.labels.reserve(total);
    result.truth.codes.reserve(total);
    result.corpus.n_classes = config.n_identities;

    for (int k = 0; k < config.n_identities; ++k)
    {
        const Eigen::VectorXd center = result.truth.identity_centers.row(k).transpose();
        for (int sample = 0; sample < config.samples_per_identity; ++sample)
        {
            // Tangential Gaussian perturbation of the identity direction.
            Eigen::VectorXd tangent(d);
            for (int j = 0; j < d; ++j)
            {
                tangent[j] = config.identity_angle_stddev * gauss(rng);
            }
            tangent -= tangent.dot(center) * center;
            const Eigen::VectorXd direction = (center + tangent).normalized();

            double scale = 0.0;
            for (int attempt = 0;; ++attempt)
            {
                if (attempt >= max_rejection_attempts)
                {
                    throw std::runtime_error("generate_corpus: could not draw a positive scale");
                }
                scale = config.scale_mean + config.scale_stddev * gauss(rng);
                if (scale > 0.0)
                    break;
            }

            Eigen::VectorXd vertices = model.mean + model.basis * (scale * direction);
            for (Eigen::Index i = 0; i < dim; ++i)
            {
                vertices[i] += config.vertex_noise_stddev * gauss(rng);
            }
            result.corpus.meshes.push_back(make_mesh(std::move(vertices), base.faces));
            result.corpus.labels.push_back(k);
            ShapeCode code;
            code.x = direction;
            code.s = scale;
            result.truth.codes.push_back(std::move(code));
        }
    }
    validate_corpus(result.corpus);
    return result;
}

SeparabilityReport truth_report(const SynthResult& result)
{
    std::vector<double> rmse;
    rmse.reserve(result.corpus.meshes.size());
    for (std::size_t i = 0; i < result.corpus.meshes.size(); ++i)
    {
        const Mesh clean = reconstruct(result.truth.model, result.truth.codes[i]);
        rmse.push_back(rmse_point_to_point(result.corpus.meshes[i], clean));
    }
    return build_report(result.truth.codes, result.corpus.labels, rmse);
}

} // namespace sfm

/*
 * sfm - Sphere Face Model: a linear 3D shape model with a hyperspherical
 * latent space.
 *
 * File: include/sfm/synth.hpp
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

#include "sfm/corpus.hpp"
#include "sfm/metrics.hpp"
#include "sfm/model.hpp"

#include <cstdint>

namespace sfm {

/**
 * Generator settings for a corpus with known ground truth. Identities are
 * unit latent directions kept at pairwise angle >= 2 * identity_angle_stddev;
 * each sample perturbs its identity tangentially (Gaussian, sigma =
 * identity_angle_stddev per tangent coordinate), draws a positive scale and
 * adds isotropic per-coordinate vertex noise. Units are millimeters.
 */
struct SynthConfig {
    int vertex_count = 500;
    int latent_dimension = 16;
    int n_identities = 20;
    int samples_per_identity = 10;
    double identity_angle_stddev = 0.1;  // radians
    double scale_mean = 2.0;             // mm
    double scale_stddev = 0.4;           // mm
    double vertex_noise_stddev = 0.5;    // mm, per coordinate
    std::uint64_t seed = 0;
};

/// Everything the generator knows that a model under test must not see.
struct SynthTruth {
    SphereFaceModel model;              // generating mean + orthonormal basis
    Eigen::MatrixXd identity_centers;   // n_identities x d, unit rows
    std::vector<ShapeCode> codes;       // true per-sample (direction, scale)
};

struct SynthResult {
    LabeledCorpus corpus;
    SynthTruth truth;
};

/// Deterministic in the seed: equal configs yield bit-identical corpora.
SynthResult generate_corpus(const SynthConfig& config = {});

/// Separability of the *true* codes plus reconstruction error of the noisy
/// meshes against their noise-free ground truth: the reference an estimated
/// model can be compared against.
SeparabilityReport truth_report(const SynthResult& result);

} // namespace sfm

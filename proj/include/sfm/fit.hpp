/*
 * sfm - Sphere Face Model: a linear 3D shape model with a hyperspherical
 * latent space.
 *
 * File: include/sfm/fit.hpp
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
#include "sfm/model.hpp"
#include "sfm/optim.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace sfm {

/// Per-mesh code estimation settings: Adam on (x, s) against the squared
/// reconstruction error, starting from the closed-form projection.
struct FitConfig {
    double lr = 0.02;
    StepDecay decay{0.5, 128}; // halve every 128 iterations
    int iterations = 1000;
    std::uint64_t seed = 0; // recorded for provenance; the solver is deterministic
};

struct FitResult {
    ShapeCode code;     // best iterate seen, not necessarily the last
    double final_rmse = 0.0;
    // (iteration, squared-error loss) sampled every 100 iterations plus the
    // final iterate.
    std::vector<std::pair<int, double>> trajectory;
    bool negative_scale = false; // fitted s < 0; flagged, not an error
};

/**
 * Minimizes || mean + basis (s x/||x||) - target ||^2 over the code. The
 * model must be finalized (orthonormal basis), which makes the projection
 * init least-squares optimal; returning the best-seen iterate therefore
 * guarantees final loss <= projection loss. iterations = 0 returns the pure
 * projection.
 */
FitResult fit_mesh(const SphereFaceModel& model, const Mesh& target, const FitConfig& config = {});

struct CorpusFitResult {
    std::vector<FitResult> results; // successes, aligned with `indices`
    std::vector<int> indices;       // corpus positions of the successes
    std::vector<int> labels;
    std::vector<std::pair<int, std::string>> failures; // (corpus index, reason)
    double mean_rmse = 0.0;
};

/**
 * Fits every corpus mesh independently. Per-mesh failures are collected, not
 * fatal. `threads` > 1 distributes meshes over workers; results are ordered
 * by corpus index either way, and the outcome is bit-identical for any
 * thread count.
 */
CorpusFitResult fit_corpus(const SphereFaceModel& model, const LabeledCorpus& corpus,
                           const FitConfig& config = {}, int threads = 1);

nlohmann::json fit_report_to_json(const CorpusFitResult& result);

} // namespace sfm

/*
 * sfm - Sphere Face Model: a linear 3D shape model with a hyperspherical
 * latent space.
 *
 * File: include/sfm/train.hpp
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
#include "sfm/losses.hpp"
#include "sfm/model.hpp"
#include "sfm/optim.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <vector>

namespace sfm {

/**
 * Auto-decoder training settings. Every sample owns a free latent code
 * (x_i, s_i), updated only in batches that sample it; the basis, classifier
 * weights and class centers are shared. Codes, weights and centers use
 * lr_code, the basis uses lr_basis, both decayed per epoch by `decay`.
 */
struct TrainConfig {
    int d = 199;
    int epochs = 60;
    int batch_size = 512;
    double lr_code = 0.02;
    double lr_basis = 0.005;
    StepDecay decay{0.1, 20}; // factor and epoch interval
    Stage1Weights lambdas;
    MarginParams margins;
    CenterDenominator denominator = CenterDenominator::pair_mean;
    std::uint64_t seed = 0;
};

struct TrainReport {
    std::vector<double> l_m; // per-epoch sample means
    std::vector<double> l_c;
    std::vector<double> l_s;
    std::vector<double> l_f; // weighted total
    double final_ortho_residual = 0.0; // ||A^T A - I||_F before the closing orthonormalization
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;
};

struct TrainOutput {
    SphereFaceModel model;        // finalized: orthonormal basis
    std::vector<ShapeCode> codes; // per corpus sample, in corpus order
    Eigen::MatrixXd weights;      // K x d classifier rows
    Eigen::MatrixXd centers;      // K x d class centers
    TrainReport report;
};

/**
 * Trains the shared model and per-sample codes jointly.
 *
 * Initialization: mean = corpus mean (frozen thereafter), basis = PCA
 * directions, codes = closed-form projections, weights = normalized class
 * mean directions, centers = class means of the scaled directions.
 *
 * Finalization: the basis goes through orthonormalize() and every code is
 * re-encoded by projecting its own final reconstruction into the finalized
 * basis, which preserves the trained geometry of the code set exactly while
 * restoring the isometry guarantee. epochs = 0 returns the initialization
 * unchanged.
 */
TrainOutput train_stage1(const LabeledCorpus& corpus, const TrainConfig& config = {});

nlohmann::json train_report_to_json(const TrainReport& report);

} // namespace sfm

/*
 * sfm - Sphere Face Model: a linear 3D shape model with a hyperspherical
 * latent space.
 *
 * File: include/sfm/optim.hpp
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

#include <cstdint>
#include <functional>
#include <utility>

namespace sfm {

/**
 * Adam in its original bias-corrected form (no weight decay, no amsgrad):
 *
 *   m <- beta1 m + (1 - beta1) g        v <- beta2 v + (1 - beta2) g.^2
 *   p <- p - lr * (m / (1 - beta1^t)) ./ (sqrt(v / (1 - beta2^t)) + eps)
 *
 * One AdamState per parameter block; t counts the steps applied to that
 * block only, so sparsely updated blocks keep correct bias correction.
 */
struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    Eigen::VectorXd m;
    Eigen::VectorXd v;
    std::int64_t t = 0;
    AdamConfig config;

    explicit AdamState(Eigen::Index size, AdamConfig cfg = {})
        : m(Eigen::VectorXd::Zero(size)), v(Eigen::VectorXd::Zero(size)), config(cfg)
    {
    }
};

/// One in-place Adam update. Throws on size mismatch or non-finite gradient.
void adam_step(AdamState& state, Eigen::Ref<Eigen::VectorXd> params,
               const Eigen::Ref<const Eigen::VectorXd>& grads, double lr);

/**
 * Step decay: lr(step) = base_lr * factor^floor(step / every) with 0-based
 * steps. The unit (optimizer iterations vs epochs) is the caller's choice of
 * what `step` counts.
 */
struct StepDecay {
    double factor = 1.0;
    std::int64_t every = 1;
};

double scheduled_lr(double base_lr, const StepDecay& decay, std::int64_t step);

/// Loss callback for gradient checking: returns (value, gradient) at a point.
using ValueAndGrad = std::function<std::pair<double, Eigen::VectorXd>(const Eigen::VectorXd&)>;

struct GradCheckReport {
    double max_rel_error = 0.0;
    Eigen::Index worst_index = -1;
    double analytic_at_worst = 0.0;
    double numeric_at_worst = 0.0;
};

/**
 * Central finite differences per coordinate:
 * (f(p + h e_i) - f(p - h e_i)) / 2h, compared against the analytic gradient
 * with relative error |a - n| / max(|a|, |n|, 1e-12). Throws on non-finite
 * values at any probe point.
 */
GradCheckReport check_gradients(const ValueAndGrad& f, const Eigen::VectorXd& point,
                                double h = 1e-6);

} // namespace sfm

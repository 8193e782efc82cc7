/*
 * sfm - Sphere Face Model: a linear 3D shape model with a hyperspherical
 * latent space.
 *
 * File: src/optim.cpp
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
#include "sfm/optim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sfm {

void adam_step(AdamState& state, Eigen::Ref<Eigen::VectorXd> params,
               const Eigen::Ref<const Eigen::VectorXd>& grads, double lr)
{
    if (params.size() != state.m.size() || grads.size() != state.m.size())
    {
        throw std::invalid_argument("adam_step: state is sized for " + std::to_string(state.m.size()) +
                                    " parameters, got params " + std::to_string(params.size()) +
                                    " and grads " + std::to_string(grads.size()));
    }
    if (!grads.allFinite())
    {
        throw std::runtime_error("adam_step: non-finite gradient");
    }
    const AdamConfig& c = state.config;
    state.t += 1;
    state.m = c.beta1 * state.m + (1.0 - c.beta1) * grads;
    state.v = c.beta2 * state.v + (1.0 - c.beta2) * grads.cwiseProduct(grads);
    const double m_corr = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
    const double v_corr = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));
    const Eigen::ArrayXd m_hat = state.m.array() / m_corr;
    const Eigen::ArrayXd v_hat = state.v.array() / v_corr;
    params.array() -= lr * m_hat / (v_hat.sqrt() + c.eps);
}

double scheduled_lr(double base_lr, const StepDecay& decay, std::int64_t step)
{
    if (decay.every < 1)
    {
        throw std::invalid_argument("scheduled_lr: decay interval must be >= 1");
    }
    if (step < 0)
    {
        throw std::invalid_argument("scheduled_lr: negative step");
    }
    return base_lr * std::pow(decay.factor, static_cast<double>(step / decay.every));
}

GradCheckReport check_gradients(const ValueAndGrad& f, const Eigen::VectorXd& point, double h)
{
    const auto [value, analytic] = f(point);
    if (!std::isfinite(value) || !analytic.allFinite())
    {
        throw std::runtime_error("check_gradients: non-finite loss or gradient at base point");
    }
    if (analytic.size() != point.size())
    {
        throw std::invalid_argument("check_gradients: gradient size " +
                                    std::to_string(analytic.size()) + " does not match point size " +
                                    std::to_string(point.size()));
    }
    GradCheckReport report;
    Eigen::VectorXd probe = point;
    for (Eigen::Index i = 0; i < point.size(); ++i)
    {
        probe[i] = point[i] + h;
        const double up = f(probe).first;
        probe[i] = point[i] - h;
        const double down = f(probe).first;
        probe[i] = point[i];
        if (!std::isfinite(up) || !std::isfinite(down))
        {
            throw std::runtime_error("check_gradients: non-finite loss at probe of coordinate " +
                                     std::to_string(i));
        }
        const double numeric = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-12});
        const double rel = std::abs(analytic[i] - numeric) / denom;
        if (rel > report.max_rel_error)
        {
            report.max_rel_error = rel;
            report.worst_index = i;
            report.analytic_at_worst = analytic[i];
            report.numeric_at_worst = numeric;
        }
    }
    return report;
}

} // namespace sfm

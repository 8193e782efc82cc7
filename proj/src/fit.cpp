/*
 * sfm - Sphere Face Model: a linear 3D shape model with a hyperspherical
 * latent space.
 *
 * File: src/fit.cpp
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
#include "sfm/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace sfm {

namespace {

struct CodeObjective {
    double value = 0.0;
    Eigen::VectorXd grad_x;
    double grad_s = 0.0;
};

CodeObjective evaluate(const SphereFaceModel& model, const Eigen::VectorXd& target,
                       const Eigen::VectorXd& x, double s)
{
    const double norm = x.norm();
    if (norm <= norm_epsilon)
    {
        throw std::runtime_error("fit_mesh: latent vector collapsed to zero norm");
    }
    const Eigen::VectorXd direction = x / norm;
    const Eigen::VectorXd residual = model.mean + model.basis * (s * direction) - target;

    CodeObjective obj;
    obj.value = residual.squaredNorm();
    const Eigen::VectorXd grad_scaled = 2.0 * (model.basis.transpose() * residual);
    obj.grad_s = grad_scaled.dot(direction);
    obj.grad_x = s / norm * (grad_scaled - grad_scaled.dot(direction) * direction);
    return obj;
}

} // namespace

FitResult fit_mesh(const SphereFaceModel& model, const Mesh& target, const FitConfig& config)
{
    validate_model(model, /*require_orthonormal=*/true);
    if (config.iterations < 0 || config.lr <= 0.0)
    {
        throw std::invalid_argument("fit_mesh: iterations >= 0 and lr > 0 required");
    }
    if (target.vertex_count != model.vertex_count)
    {
        throw std::invalid_argument("fit_mesh: target has " + std::to_string(target.vertex_count) +
                                    " vertices, model has " + std::to_string(model.vertex_count));
    }

    const ShapeCode init = project(model, target);
    Eigen::VectorXd x = init.x;
    Eigen::VectorXd s(1);
    s[0] = init.s;
    AdamState x_state(x.size());
    AdamState s_state(1);

    FitResult result;
    double best_loss = std::numeric_limits<double>::infinity();
    const auto consider = [&](double loss) {
        if (loss < best_loss)
        {
            best_loss = loss;
            result.code.x = x;
            result.code.s = s[0];
        }
    };

    for (int it = 0; it < config.iterations; ++it)
    {
        const CodeObjective obj = evaluate(model, target.vertices, x, s[0]);
        if (!std::isfinite(obj.value))
        {
            throw std::runtime_error("fit_mesh: non-finite loss at iteration " + std::to_string(it));
        }
        if (it % 100 == 0)
        {
            result.trajectory.emplace_back(it, obj.value);
        }
        consider(obj.value);
        const double lr = scheduled_lr(config.lr, config.decay, it);
        adam_step(x_state, x, obj.grad_x, lr);
        Eigen::VectorXd grad_s(1);
        grad_s[0] = obj.grad_s;
        adam_step(s_state, s, grad_s, lr);
    }
    // Final iterate: evaluated without a gradient so the trajectory and the
    // best-seen comparison include it.
    {
        const double norm = x.norm();
        if (norm <= norm_epsilon)
        {
            throw std::runtime_error("fit_mesh: latent vector collapsed to zero norm");
        }
        const double final_loss =
            (model.mean + model.basis * (s[0] / norm * x) - target.vertices).squaredNorm();
        result.trajectory.emplace_back(config.iterations, final_loss);
        consider(final_loss);
    }

    result.final_rmse = std::sqrt(best_loss / model.vertex_count);
    result.negative_scale = result.code.s < 0.0;
    return result;
}

CorpusFitResult fit_corpus(const SphereFaceModel& model, const LabeledCorpus& corpus,
                           const FitConfig& config, int threads)
{
    validate_corpus(corpus);
    validate_model(model, /*require_orthonormal=*/true);
    if (threads < 1)
    {
        throw std::invalid_argument("fit_corpus: threads must be >= 1");
    }
    const int m = static_cast<int>(corpus.meshes.size());
    threads = std::min(threads, m);

    std::vector<FitResult> fitted(m);
    std::vector<std::string> errors(m);
    std::vector<char> failed(m, 0);
    const auto worker = [&](int first) {
        for (int i = first; i < m; i += threads)
        {
            try
            {
                fitted[i] = fit_mesh(model, corpus.meshes[i], config);
            } catch (const std::exception& e)
            {
                failed[i] = 1;
                errors[i] = e.what();
            }
        }
    };
    if (threads == 1)
    {
        worker(0);
    } else
    {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t)
        {
            pool.emplace_back(worker, t);
        }
        for (auto& t : pool)
        {
            t.join();
        }
    }

    CorpusFitResult result;
    double rmse_sum = 0.0;
    for (int i = 0; i < m; ++i)
    {
        if (failed[i])
        {
            result.failures.emplace_back(i, errors[i]);
            continue;
        }
        rmse_sum += fitted[i].final_rmse;
        result.results.push_back(std::move(fitted[i]));
        result.indices.push_back(i);
        result.labels.push_back(corpus.labels[i]);
    }
    if (result.results.empty())
    {
        throw std::runtime_error("fit_corpus: every mesh failed to fit (first: " + errors[0] + ")");
    }
    result.mean_rmse = rmse_sum / static_cast<double>(result.results.size());
    return result;
}

nlohmann::json fit_report_to_json(const CorpusFitResult& result)
{
    nlohmann::json per_mesh = nlohmann::json::array();
    for (std::size_t r = 0; r < result.results.size(); ++r)
    {
        nlohmann::json entry;
        entry["index"] = result.indices[r];
        entry["label"] = result.labels[r];
        entry["rmse"] = result.results[r].final_rmse;
        entry["negative_scale"] = result.results[r].negative_scale;
        nlohmann::json trajectory = nlohmann::json::array();
        for (const auto& [iteration, loss] : result.results[r].trajectory)
        {
            trajectory.push_back({{"iteration", iteration}, {"loss", loss}});
        }
        entry["trajectory"] = trajectory;
        per_mesh.push_back(entry);
    }
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& [index, reason] : result.failures)
    {
        failures.push_back({{"index", index}, {"reason", reason}});
    }
    nlohmann::json j;
    j["mean_rmse"] = result.mean_rmse;
    j["n_fitted"] = result.results.size();
    j["n_failed"] = result.failures.size();
    j["meshes"] = per_mesh;
    j["failures"] = failures;
    return j;
}

} // namespace sfm

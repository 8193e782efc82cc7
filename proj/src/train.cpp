/*
 * sfm - Sphere Face Model: a linear 3D shape model with a hyperspherical
 * latent space.
 *
 * File: src/train.cpp
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
#include "sfm/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace sfm {

namespace {

void validate_train_config(const TrainConfig& c)
{
    if (c.d < 1 || c.epochs < 0 || c.batch_size < 1)
    {
        throw std::invalid_argument("train_stage1: d >= 1, epochs >= 0, batch_size >= 1 required");
    }
    if (c.lr_code <= 0.0 || c.lr_basis <= 0.0)
    {
        throw std::invalid_argument("train_stage1: learning rates must be positive");
    }
    if (c.decay.every < 1 || c.decay.factor <= 0.0)
    {
        throw std::invalid_argument("train_stage1: decay needs factor > 0 and interval >= 1");
    }
}

// Unit e_1: the deterministic direction for codes whose projection vanished.
Eigen::VectorXd unit_first(int d)
{
    Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
    e[0] = 1.0;
    return e;
}

} // namespace

TrainOutput train_stage1(const LabeledCorpus& corpus, const TrainConfig& config)
{
    const auto start_time = std::chrono::steady_clock::now();
    validate_train_config(config);
    validate_corpus(corpus);
    if (corpus.n_classes < 2)
    {
        throw std::invalid_argument("train_stage1: need at least 2 identity classes");
    }

    const int m = static_cast<int>(corpus.meshes.size());
    const int k = corpus.n_classes;
    const int d = config.d;

    TrainOutput out;
    out.model = fit_pca(corpus.meshes, d);
    const Eigen::Index dim = out.model.mean.size();

    // Free per-sample codes from the closed-form projections.
    Eigen::MatrixXd x_rows(m, d); // raw latents, one row per sample
    Eigen::VectorXd s_values(m);
    for (int i = 0; i < m; ++i)
    {
        const ShapeCode code = project(out.model, corpus.meshes[i]);
        x_rows.row(i) = code.x;
        s_values[i] = code.s;
    }

    // Classifier weights: normalized class mean directions. Centers: class
    // means of the scaled directions.
    out.weights = Eigen::MatrixXd::Zero(k, d);
    out.centers = Eigen::MatrixXd::Zero(k, d);
    std::vector<int> class_sizes(k, 0);
    for (int i = 0; i < m; ++i)
    {
        const int y = corpus.labels[i];
        const double norm = x_rows.row(i).norm();
        out.weights.row(y) += norm > norm_epsilon ? (x_rows.row(i) / norm).eval()
                                                  : unit_first(d).transpose().eval();
        out.centers.row(y) += s_values[i] * (norm > norm_epsilon
                                                 ? (x_rows.row(i) / norm).eval()
                                                 : unit_first(d).transpose().eval());
        ++class_sizes[y];
    }
    for (int y = 0; y < k; ++y)
    {
        out.centers.row(y) /= class_sizes[y];
        const double norm = out.weights.row(y).norm();
        out.weights.row(y) =
            norm > norm_epsilon ? (out.weights.row(y) / norm).eval() : unit_first(d).transpose().eval();
    }

    Eigen::MatrixXd basis = out.model.basis; // trainable copy

    std::vector<AdamState> x_states(m, AdamState(d));
    std::vector<AdamState> s_states(m, AdamState(1));
    AdamState basis_state(basis.size());
    AdamState weights_state(out.weights.size());
    AdamState centers_state(out.centers.size());

    std::mt19937_64 rng(config.seed);
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);

    out.report.seed = config.seed;
    out.report.l_m.reserve(config.epochs);
    out.report.l_c.reserve(config.epochs);
    out.report.l_s.reserve(config.epochs);
    out.report.l_f.reserve(config.epochs);

    for (int epoch = 0; epoch < config.epochs; ++epoch)
    {
        const double lr_code = scheduled_lr(config.lr_code, config.decay, epoch);
        const double lr_basis = scheduled_lr(config.lr_basis, config.decay, epoch);
        std::shuffle(order.begin(), order.end(), rng);

        double sum_m = 0.0, sum_c = 0.0, sum_s = 0.0, sum_f = 0.0;
        for (int begin = 0; begin < m; begin += config.batch_size)
        {
            const int b = std::min(config.batch_size, m - begin);
            Eigen::MatrixXd batch_x(b, d);
            Eigen::VectorXd batch_s(b);
            Eigen::MatrixXd targets(b, dim);
            std::vector<int> batch_labels(b);
            for (int r = 0; r < b; ++r)
            {
                const int i = order[begin + r];
                batch_x.row(r) = x_rows.row(i);
                batch_s[r] = s_values[i];
                targets.row(r) = corpus.meshes[i].vertices;
                batch_labels[r] = corpus.labels[i];
            }

            const Stage1Loss loss =
                total_stage1_loss(basis, out.model.mean, batch_x, batch_s, batch_labels, targets,
                                  out.weights, out.centers, config.lambdas, config.margins,
                                  config.denominator);
            if (!std::isfinite(loss.grads.value))
            {
                throw std::runtime_error("train_stage1: non-finite loss at epoch " +
                                         std::to_string(epoch) + ", batch offset " +
                                         std::to_string(begin));
            }
            sum_m += loss.l_m * b;
            sum_c += loss.l_c * b;
            sum_s += loss.l_s * b;
            sum_f += loss.grads.value * b;

            // Sampled codes only; shared blocks every batch.
            for (int r = 0; r < b; ++r)
            {
                const int i = order[begin + r];
                const Eigen::VectorXd grad_row = loss.grads.grad_x.row(r).transpose();
                Eigen::VectorXd x_copy = x_rows.row(i).transpose();
                adam_step(x_states[i], x_copy, grad_row, lr_code);
                x_rows.row(i) = x_copy.transpose();
                adam_step(s_states[i], s_values.segment(i, 1),
                          loss.grads.grad_s.segment(r, 1), lr_code);
            }
            adam_step(weights_state,
                      Eigen::Map<Eigen::VectorXd>(out.weights.data(), out.weights.size()),
                      Eigen::Map<const Eigen::VectorXd>(loss.grads.grad_weights.data(),
                                                        loss.grads.grad_weights.size()),
                      lr_code);
            adam_step(centers_state,
                      Eigen::Map<Eigen::VectorXd>(out.centers.data(), out.centers.size()),
                      Eigen::Map<const Eigen::VectorXd>(loss.grads.grad_centers.data(),
                                                        loss.grads.grad_centers.size()),
                      lr_code);
            adam_step(basis_state, Eigen::Map<Eigen::VectorXd>(basis.data(), basis.size()),
                      Eigen::Map<const Eigen::VectorXd>(loss.grads.grad_basis.data(),
                                                        loss.grads.grad_basis.size()),
                      lr_basis);
        }
        out.report.l_m.push_back(sum_m / m);
        out.report.l_c.push_back(sum_c / m);
        out.report.l_s.push_back(sum_s / m);
        out.report.l_f.push_back(sum_f / m);
    }

    out.report.final_ortho_residual =
        (basis.transpose() * basis - Eigen::MatrixXd::Identity(d, d)).norm();

    out.codes.resize(m);
    if (config.epochs == 0)
    {
        // Initialization is already finalized: PCA basis is orthonormal and
        // the codes are its projections.
        for (int i = 0; i < m; ++i)
        {
            out.codes[i].x = x_rows.row(i).transpose();
            out.codes[i].s = s_values[i];
        }
    } else
    {
        // Re-encode each final reconstruction through the orthonormalized
        // basis: reconstructions (and therefore the trained code geometry)
        // are preserved exactly, and the isometry contract is restored.
        Eigen::MatrixXd finalized = orthonormalize(basis);
        for (int i = 0; i < m; ++i)
        {
            const double norm = x_rows.row(i).norm();
            Eigen::VectorXd scaled =
                norm > norm_epsilon
                    ? Eigen::VectorXd(s_values[i] / norm * x_rows.row(i).transpose())
                    : Eigen::VectorXd(Eigen::VectorXd::Zero(d));
            const Eigen::VectorXd reconstruction = out.model.mean + basis * scaled;
            out.codes[i].x = finalized.transpose() * (reconstruction - out.model.mean);
            out.codes[i].s = out.codes[i].x.norm();
            if (out.codes[i].s <= norm_epsilon)
            {
                out.codes[i].x = unit_first(d);
                out.codes[i].s = 0.0;
            }
        }
        out.model.basis = std::move(finalized);
    }
    validate_model(out.model, /*require_orthonormal=*/true);

    out.report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
    return out;
}

nlohmann::json train_report_to_json(const TrainReport& report)
{
    nlohmann::json j;
    j["l_m"] = report.l_m;
    j["l_c"] = report.l_c;
    j["l_s"] = report.l_s;
    j["l_f"] = report.l_f;
    j["final_ortho_residual"] = report.final_ortho_residual;
    j["wall_seconds"] = report.wall_seconds;
    j["seed"] = report.seed;
    return j;
}

} // namespace sfm

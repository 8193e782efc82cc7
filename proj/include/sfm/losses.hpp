/*
 * sfm - Sphere Face Model: a linear 3D shape model with a hyperspherical
 * latent space.
 *
 * File: include/sfm/losses.hpp
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

#include <vector>

namespace sfm {

/**
 * Batch conventions shared by every loss in this header:
 *  - batch_x is m x d, one raw latent vector per row; losses consume the
 *    normalized direction x/||x|| and differentiate through the
 *    normalization, so grad_x is with respect to the raw rows.
 *  - weights / centers are K x d, one class per row.
 *  - batch loss values are means over the m samples, which keeps gradient
 *    magnitudes comparable across batch sizes.
 *
 * Gradient blocks not touched by a loss are left empty (size 0).
 */
struct LossValueAndGrads {
    double value = 0.0;
    Eigen::MatrixXd grad_x;       // m x d
    Eigen::VectorXd grad_s;       // m
    Eigen::MatrixXd grad_weights; // K x d
    Eigen::MatrixXd grad_centers; // K x d
    Eigen::MatrixXd grad_basis;   // 3n x d
    Eigen::VectorXd grad_mean;    // 3n
};

/**
 * Angular-margin parameters for the classification loss. The target-class
 * logit becomes logit_scale * cos(alpha * theta + beta) - gamma while
 * non-target logits stay logit_scale * cos(theta). alpha multiplies the
 * angle, beta shifts it, gamma shifts the cosine. alpha = 1, beta = 0,
 * gamma = 0 is exactly the plain normalized softmax.
 */
struct MarginParams {
    double alpha = 1.0;
    double beta = 0.0;
    double gamma = 0.0;
    double logit_scale = 1.0;
};

/**
 * Cross entropy over cosine logits between normalized latents and normalized
 * class weights: mean_i -log( exp(t_i) / sum_j exp(l_ij) ). Value is
 * invariant to rescaling any x_i or w_j.
 */
LossValueAndGrads norm_softmax_loss(const Eigen::MatrixXd& batch_x, const std::vector<int>& labels,
                                    const Eigen::MatrixXd& weights, double logit_scale = 1.0);

/// Generalized-margin variant of norm_softmax_loss. Requires
/// alpha * theta + beta in [0, pi] for every target sample (throws
/// std::domain_error otherwise).
LossValueAndGrads margin_softmax_loss(const Eigen::MatrixXd& batch_x,
                                      const std::vector<int>& labels,
                                      const Eigen::MatrixXd& weights,
                                      const MarginParams& margins = {});

/**
 * Normalization choices for the center-loss denominator, the dispersion of
 * the K class centers:
 *  - pair_mean: mean squared distance over unordered center pairs,
 *    sum_{i<j} ||c_i - c_j||^2 / (K(K-1)/2).
 *  - per_center_sum: sum over ordered pairs divided by K only, i.e.
 *    pair_mean scaled by (K-1).
 */
enum class CenterDenominator { pair_mean, per_center_sum };

/**
 * Ratio of within-class scatter to center dispersion:
 * ( mean_i ||s_i x_i/||x_i|| - c_{y_i}||^2 ) / denominator(centers).
 * Scale-free: multiplying all centers and all scales s_i by the same factor
 * leaves the value unchanged. Requires K >= 2 distinct centers.
 */
LossValueAndGrads center_loss(const Eigen::MatrixXd& batch_x, const Eigen::VectorXd& batch_s,
                              const std::vector<int>& labels, const Eigen::MatrixXd& centers,
                              CenterDenominator denominator = CenterDenominator::pair_mean);

/**
 * Reconstruction plus soft orthogonality:
 * (1/m) sum_i || mean + basis (s_i x_i/||x_i||) - target_i ||^2
 *   + || basis^T basis - I ||_F^2.
 * targets is m x 3n, one vertex vector per row. Gradients cover basis, mean,
 * x and s.
 */
LossValueAndGrads recon_ortho_loss(const Eigen::MatrixXd& basis, const Eigen::VectorXd& mean,
                                   const Eigen::MatrixXd& batch_x, const Eigen::VectorXd& batch_s,
                                   const Eigen::MatrixXd& targets);

struct Stage1Weights {
    double lambda_m = 1.0;
    double lambda_c = 1.0;
    double lambda_s = 1.0;
};

/// Weighted sum of the three training losses, with the unweighted component
/// values reported alongside the combined gradients.
struct Stage1Loss {
    LossValueAndGrads grads;
    double l_m = 0.0;
    double l_c = 0.0;
    double l_s = 0.0;
};

Stage1Loss total_stage1_loss(const Eigen::MatrixXd& basis, const Eigen::VectorXd& mean,
                             const Eigen::MatrixXd& batch_x, const Eigen::VectorXd& batch_s,
                             const std::vector<int>& labels, const Eigen::MatrixXd& targets,
                             const Eigen::MatrixXd& weights, const Eigen::MatrixXd& centers,
                             const Stage1Weights& lambdas = {}, const MarginParams& margins = {},
                             CenterDenominator denominator = CenterDenominator::pair_mean);

} // namespace sfm

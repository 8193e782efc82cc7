/*
 * sfm - Sphere Face Model: a linear 3D shape model with a hyperspherical
 * latent space.
 *
 * File: src/losses.cpp
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
#include "sfm/losses.hpp"

#include "sfm/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sfm {

namespace {

// Row-normalizes and returns the row norms; throws on rows at or below the
// representable threshold.
Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& rows, Eigen::VectorXd& norms,
                               const char* what)
{
    norms = rows.rowwise().norm();
    for (Eigen::Index i = 0; i < norms.size(); ++i)
    {
        if (norms[i] <= norm_epsilon)
        {
            throw std::domain_error(std::string(what) + " row " + std::to_string(i) +
                                    " has norm below the representable threshold");
        }
    }
    return rows.array().colwise() / norms.array();
}

void check_labels(const std::vector<int>& labels, Eigen::Index m, Eigen::Index k,
                  const char* what)
{
    if (static_cast<Eigen::Index>(labels.size()) != m)
    {
        throw std::invalid_argument(std::string(what) + ": " + std::to_string(labels.size()) +
                                    " labels for a batch of " + std::to_string(m));
    }
    for (std::size_t i = 0; i < labels.size(); ++i)
    {
        if (labels[i] < 0 || labels[i] >= k)
        {
            throw std::invalid_argument(std::string(what) + ": label " +
                                        std::to_string(labels[i]) + " of sample " +
                                        std::to_string(i) + " outside [0, " + std::to_string(k) +
                                        ")");
        }
    }
}

// Maps a gradient with respect to the unit direction x/||x|| back to the raw
// vector: g_raw = (g_hat - (g_hat . xhat) xhat) / ||x||.
Eigen::MatrixXd through_row_normalization(const Eigen::MatrixXd& grad_hat,
                                          const Eigen::MatrixXd& hat, const Eigen::VectorXd& norms)
{
    const Eigen::VectorXd radial = (grad_hat.array() * hat.array()).rowwise().sum();
    Eigen::MatrixXd grad = grad_hat - (hat.array().colwise() * radial.array()).matrix();
    grad.array().colwise() /= norms.array();
    return grad;
}

LossValueAndGrads softmax_core(const Eigen::MatrixXd& batch_x, const std::vector<int>& labels,
                               const Eigen::MatrixXd& weights, const MarginParams& margins,
                               const char* what)
{
    const Eigen::Index m = batch_x.rows();
    const Eigen::Index k = weights.rows();
    if (m < 1)
    {
        throw std::invalid_argument(std::string(what) + ": empty batch");
    }
    if (batch_x.cols() != weights.cols())
    {
        throw std::invalid_argument(std::string(what) + ": latent dimension " +
                                    std::to_string(batch_x.cols()) + " does not match weight rows of " +
                                    std::to_string(weights.cols()));
    }
    check_labels(labels, m, k, what);
    if (margins.alpha < 1.0 || margins.beta < 0.0 || margins.gamma < 0.0 ||
        margins.logit_scale <= 0.0)
    {
        throw std::invalid_argument(std::string(what) +
                                    ": margins need alpha >= 1, beta >= 0, gamma >= 0, "
                                    "logit_scale > 0");
    }
    const bool plain = margins.alpha == 1.0 && margins.beta == 0.0;
    const double scale = margins.logit_scale;

    Eigen::VectorXd x_norms, w_norms;
    const Eigen::MatrixXd xhat = normalize_rows(batch_x, x_norms, what);
    const Eigen::MatrixXd what_rows = normalize_rows(weights, w_norms, what);

    const Eigen::MatrixXd cosines = xhat * what_rows.transpose(); // m x k
    Eigen::MatrixXd logits = scale * cosines;
    // cos-derivative factor of each target logit; off-target columns use the
    // plain factor `scale`.
    Eigen::VectorXd target_factor(m);
    for (Eigen::Index i = 0; i < m; ++i)
    {
        const Eigen::Index y = labels[i];
        if (plain)
        {
            logits(i, y) = scale * cosines(i, y) - margins.gamma;
            target_factor[i] = scale;
            continue;
        }
        const double c = std::clamp(cosines(i, y), -1.0, 1.0);
        const double theta = std::acos(c);
        const double pushed = margins.alpha * theta + margins.beta;
        if (pushed > M_PI)
        {
            throw std::domain_error(std::string(what) + ": alpha * theta + beta = " +
                                    std::to_string(pushed) + " exceeds pi for sample " +
                                    std::to_string(i));
        }
        logits(i, y) = scale * std::cos(pushed) - margins.gamma;
        const double sin_theta = std::sin(theta);
        if (sin_theta < 1e-8)
        {
            if (margins.beta > 0.0)
            {
                throw std::domain_error(std::string(what) +
                                        ": gradient is singular at theta = 0 with beta > 0");
            }
            // beta = 0: sin(alpha theta)/sin(theta) -> alpha as theta -> 0.
            target_factor[i] = scale * margins.alpha * margins.alpha;
        } else
        {
            target_factor[i] = scale * margins.alpha * std::sin(pushed) / sin_theta;
        }
    }

    double total = 0.0;
    Eigen::MatrixXd coeff(m, k); // (q_ij - [j == y_i]) * dlogit/dcos / m
    for (Eigen::Index i = 0; i < m; ++i)
    {
        const Eigen::Index y = labels[i];
        const double peak = logits.row(i).maxCoeff();
        const Eigen::ArrayXd shifted = (logits.row(i).array() - peak).exp();
        const double shifted_sum = shifted.sum();
        const double lse = peak + std::log(shifted_sum);
        total += lse - logits(i, y);
        for (Eigen::Index j = 0; j < k; ++j)
        {
            const double q = shifted[j] / shifted_sum;
            const double factor = j == y ? target_factor[i] : scale;
            coeff(i, j) = (q - (j == y ? 1.0 : 0.0)) * factor / static_cast<double>(m);
        }
    }

    LossValueAndGrads result;
    result.value = total / static_cast<double>(m);
    result.grad_x = through_row_normalization(coeff * what_rows, xhat, x_norms);
    result.grad_weights =
        through_row_normalization(coeff.transpose() * xhat, what_rows, w_norms);
    return result;
}

} // namespace

LossValueAndGrads norm_softmax_loss(const Eigen::MatrixXd& batch_x, const std::vector<int>& labels,
                                    const Eigen::MatrixXd& weights, double logit_scale)
{
    MarginParams plain;
    plain.logit_scale = logit_scale;
    return softmax_core(batch_x, labels, weights, plain, "norm_softmax_loss");
}

LossValueAndGrads margin_softmax_loss(const Eigen::MatrixXd& batch_x,
                                      const std::vector<int>& labels,
                                      const Eigen::MatrixXd& weights, const MarginParams& margins)
{
    return softmax_core(batch_x, labels, weights, margins, "margin_softmax_loss");
}

LossValueAndGrads center_loss(const Eigen::MatrixXd& batch_x, const Eigen::VectorXd& batch_s,
                              const std::vector<int>& labels, const Eigen::MatrixXd& centers,
                              CenterDenominator denominator)
{
    const Eigen::Index m = batch_x.rows();
    const Eigen::Index k = centers.rows();
    if (m < 1)
    {
        throw std::invalid_argument("center_loss: empty batch");
    }
    if (batch_s.size() != m)
    {
        throw std::invalid_argument("center_loss: batch_s has " + std::to_string(batch_s.size()) +
                                    " entries for a batch of " + std::to_string(m));
    }
    if (batch_x.cols() != centers.cols())
    {
        throw std::invalid_argument("center_loss: latent dimension mismatch");
    }
    if (k < 2)
    {
        throw std::invalid_argument("center_loss: needs at least 2 centers");
    }
    check_labels(labels, m, k, "center_loss");

    Eigen::VectorXd x_norms;
    const Eigen::MatrixXd xhat = normalize_rows(batch_x, x_norms, "center_loss");

    // Denominator: dispersion of the centers.
    double pair_sum = 0.0;
    for (Eigen::Index a = 0; a < k; ++a)
    {
        for (Eigen::Index b = a + 1; b < k; ++b)
        {
            pair_sum += (centers.row(a) - centers.row(b)).squaredNorm();
        }
    }
    const double denom_scale = denominator == CenterDenominator::pair_mean
                                   ? 2.0 / (static_cast<double>(k) * (k - 1))
                                   : 2.0 / static_cast<double>(k);
    const double dispersion = pair_sum * denom_scale;
    if (dispersion <= 0.0)
    {
        throw std::domain_error("center_loss: coincident centers make the dispersion zero");
    }

    const Eigen::MatrixXd scaled = xhat.array().colwise() * batch_s.array(); // rows s_i xhat_i
    Eigen::MatrixXd deviations(m, batch_x.cols());
    double numerator = 0.0;
    for (Eigen::Index i = 0; i < m; ++i)
    {
        deviations.row(i) = scaled.row(i) - centers.row(labels[i]);
        numerator += deviations.row(i).squaredNorm();
    }
    numerator /= static_cast<double>(m);

    LossValueAndGrads result;
    result.value = numerator / dispersion;

    // d numerator / d (s_i xhat_i) = (2/m) deviation_i, then through the
    // scale and the normalization.
    const Eigen::MatrixXd grad_scaled = (2.0 / m) * deviations / dispersion;
    result.grad_s = (grad_scaled.array() * xhat.array()).rowwise().sum();
    const Eigen::MatrixXd grad_hat = grad_scaled.array().colwise() * batch_s.array();
    result.grad_x = through_row_normalization(grad_hat, xhat, x_norms);

    result.grad_centers = Eigen::MatrixXd::Zero(k, centers.cols());
    for (Eigen::Index i = 0; i < m; ++i)
    {
        result.grad_centers.row(labels[i]) -= grad_scaled.row(i);
    }
    // Quotient rule for the dispersion: d pair_sum / d c_a = 2 (K c_a - sum_b c_b).
    const Eigen::RowVectorXd center_sum = centers.colwise().sum();
    const double ratio = numerator / (dispersion * dispersion);
    for (Eigen::Index a = 0; a < k; ++a)
    {
        const Eigen::RowVectorXd d_pair_sum = 2.0 * (static_cast<double>(k) * centers.row(a) - center_sum);
        result.grad_centers.row(a) -= ratio * denom_scale * d_pair_sum;
    }
    return result;
}

LossValueAndGrads recon_ortho_loss(const Eigen::MatrixXd& basis, const Eigen::VectorXd& mean,
                                   const Eigen::MatrixXd& batch_x, const Eigen::VectorXd& batch_s,
                                   const Eigen::MatrixXd& targets)
{
    const Eigen::Index m = batch_x.rows();
    const Eigen::Index d = basis.cols();
    const Eigen::Index dim = basis.rows();
    if (m < 1)
    {
        throw std::invalid_argument("recon_ortho_loss: empty batch");
    }
    if (mean.size() != dim || targets.cols() != dim || targets.rows() != m ||
        batch_x.cols() != d || batch_s.size() != m)
    {
        throw std::invalid_argument("recon_ortho_loss: inconsistent shapes (basis " +
                                    std::to_string(dim) + "x" + std::to_string(d) + ", mean " +
                                    std::to_string(mean.size()) + ", batch " +
                                    std::to_string(m) + "x" + std::to_string(batch_x.cols()) +
                                    ", targets " + std::to_string(targets.rows()) + "x" +
                                    std::to_string(targets.cols()) + ")");
    }

    Eigen::VectorXd x_norms;
    const Eigen::MatrixXd xhat = normalize_rows(batch_x, x_norms, "recon_ortho_loss");
    const Eigen::MatrixXd scaled = xhat.array().colwise() * batch_s.array(); // m x d

    Eigen::MatrixXd residual = scaled * basis.transpose(); // m x 3n
    residual.rowwise() += mean.transpose();
    residual -= targets;

    const Eigen::MatrixXd gram_shift =
        basis.transpose() * basis - Eigen::MatrixXd::Identity(d, d);

    LossValueAndGrads result;
    result.value = residual.squaredNorm() / static_cast<double>(m) + gram_shift.squaredNorm();

    result.grad_basis = (2.0 / m) * residual.transpose() * scaled + 4.0 * basis * gram_shift;
    result.grad_mean = (2.0 / m) * residual.colwise().sum().transpose();

    const Eigen::MatrixXd grad_scaled = (2.0 / m) * residual * basis; // m x d
    result.grad_s = (grad_scaled.array() * xhat.array()).rowwise().sum();
    const Eigen::MatrixXd grad_hat = grad_scaled.array().colwise() * batch_s.array();
    result.grad_x = through_row_normalization(grad_hat, xhat, x_norms);
    return result;
}

Stage1Loss total_stage1_loss(const Eigen::MatrixXd& basis, const Eigen::VectorXd& mean,
                             const Eigen::MatrixXd& batch_x, const Eigen::VectorXd& batch_s,
                             const std::vector<int>& labels, const Eigen::MatrixXd& targets,
                             const Eigen::MatrixXd& weights, const Eigen::MatrixXd& centers,
                             const Stage1Weights& lambdas, const MarginParams& margins,
                             CenterDenominator denominator)
{
    const LossValueAndGrads lm = margin_softmax_loss(batch_x, labels, weights, margins);
    const LossValueAndGrads lc = center_loss(batch_x, batch_s, labels, centers, denominator);
    const LossValueAndGrads ls = recon_ortho_loss(basis, mean, batch_x, batch_s, targets);

    Stage1Loss total;
    total.l_m = lm.value;
    total.l_c = lc.value;
    total.l_s = ls.value;
    total.grads.value = lambdas.lambda_m * lm.value + lambdas.lambda_c * lc.value +
                        lambdas.lambda_s * ls.value;
    total.grads.grad_x =
        lambdas.lambda_m * lm.grad_x + lambdas.lambda_c * lc.grad_x + lambdas.lambda_s * ls.grad_x;
    total.grads.grad_s = lambdas.lambda_c * lc.grad_s + lambdas.lambda_s * ls.grad_s;
    total.grads.grad_weights = lambdas.lambda_m * lm.grad_weights;
    total.grads.grad_centers = lambdas.lambda_c * lc.grad_centers;
    total.grads.grad_basis = lambdas.lambda_s * ls.grad_basis;
    total.grads.grad_mean = lambdas.lambda_s * ls.grad_mean;
    return total;
}

} // namespace sfm

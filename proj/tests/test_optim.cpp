/*
 * sfm - Sphere Face Model: a linear 3D shape model with a hyperspherical
 * latent space.
 *
 * File: tests/test_optim.cpp
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

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace sfm;

namespace {

// Scalar reference Adam, written independently of the library version.
struct ScalarAdam {
    double m = 0.0;
    double v = 0.0;
    int t = 0;

    double step(double param, double grad, double lr, double b1 = 0.9, double b2 = 0.999,
                double eps = 1e-8)
    {
        ++t;
        m = b1 * m + (1.0 - b1) * grad;
        v = b2 * v + (1.0 - b2) * grad * grad;
        const double m_hat = m / (1.0 - std::pow(b1, t));
        const double v_hat = v / (1.0 - std::pow(b2, t));
        return param - lr * m_hat / (std::sqrt(v_hat) + eps);
    }
};

} // namespace

TEST_CASE("first adam step moves by lr regardless of gradient magnitude")
{
    // With zero state, m_hat = g and sqrt(v_hat) = |g|, so the first step is
    // exactly -lr * g / (|g| + eps).
    for (const double g : {1e-6, 0.5, 3.0, 1e4})
    {
        AdamState state(1);
        Eigen::VectorXd p = Eigen::VectorXd::Zero(1);
        Eigen::VectorXd grad(1);
        grad << g;
        adam_step(state, p, grad, 0.1);
        CHECK(p[0] == doctest::Approx(-0.1 * g / (g + 1e-8)).epsilon(1e-12));
        CHECK(state.t == 1);
    }
}

TEST_CASE("adam trajectory matches an independent reference")
{
    std::mt19937_64 rng(17);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const int dim = 4;
    AdamState state(dim);
    Eigen::VectorXd params(dim);
    params << 0.3, -1.2, 7.0, 0.0;

    std::vector<ScalarAdam> reference(dim);
    Eigen::VectorXd ref_params = params;

    for (int step = 0; step < 20; ++step)
    {
        Eigen::VectorXd grad(dim);
        for (int i = 0; i < dim; ++i)
        {
            grad[i] = gauss(rng);
        }
        const double lr = 0.05;
        adam_step(state, params, grad, lr);
        for (int i = 0; i < dim; ++i)
        {
            ref_params[i] = reference[i].step(ref_params[i], grad[i], lr);
        }
        for (int i = 0; i < dim; ++i)
        {
            CHECK(params[i] == doctest::Approx(ref_params[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("adam is translation equivariant")
{
    // Identical gradients applied to shifted parameters keep the shift.
    AdamState sa(2), sb(2);
    Eigen::VectorXd a(2), b(2);
    a << 1.0, -2.0;
    b = a.array() + 10.0;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss(0.0, 2.0);
    for (int step = 0; step < 10; ++step)
    {
        Eigen::VectorXd grad(2);
        grad << gauss(rng), gauss(rng);
        adam_step(sa, a, grad, 0.01);
        adam_step(sb, b, grad, 0.01);
    }
    CHECK((b - a).isApproxToConstant(10.0, 1e-12));
}

TEST_CASE("adam converges on a simple quadratic")
{
    AdamState state(2);
    Eigen::VectorXd p(2);
    p << 5.0, -3.0;
    const Eigen::Vector2d target(1.0, 2.0);
    for (int step = 0; step < 4000; ++step)
    {
        const Eigen::VectorXd grad = 2.0 * (p - target);
        adam_step(state, p, grad, 0.01);
    }
    CHECK((p - target).norm() <= 1e-4);
}

TEST_CASE("adam rejects malformed input")
{
    AdamState state(3);
    Eigen::VectorXd p = Eigen::VectorXd::Zero(3);
    Eigen::VectorXd wrong = Eigen::VectorXd::Zero(2);
    CHECK_THROWS_AS(adam_step(state, p, wrong, 0.1), std::invalid_argument);

    Eigen::VectorXd bad = Eigen::VectorXd::Zero(3);
    bad[1] = std::nan("");
    CHECK_THROWS_AS(adam_step(state, p, bad, 0.1), std::runtime_error);
}

TEST_CASE("scheduled_lr decays in steps")
{
    const StepDecay decay{0.5, 128};
    CHECK(scheduled_lr(0.02, decay, 0) == doctest::Approx(0.02).epsilon(1e-15));
    CHECK(scheduled_lr(0.02, decay, 127) == doctest::Approx(0.02).epsilon(1e-15));
    CHECK(scheduled_lr(0.02, decay, 128) == doctest::Approx(0.01).epsilon(1e-15));
    CHECK(scheduled_lr(0.02, decay, 255) == doctest::Approx(0.01).epsilon(1e-15));
    CHECK(scheduled_lr(0.02, decay, 256) == doctest::Approx(0.005).epsilon(1e-15));

    const StepDecay train_decay{0.1, 20};
    CHECK(scheduled_lr(0.005, train_decay, 19) == doctest::Approx(0.005).epsilon(1e-15));
    CHECK(scheduled_lr(0.005, train_decay, 20) == doctest::Approx(0.0005).epsilon(1e-15));
    CHECK(scheduled_lr(0.005, train_decay, 40) == doctest::Approx(0.00005).epsilon(1e-15));

    // factor = 1 means a constant schedule.
    CHECK(scheduled_lr(0.02, StepDecay{}, 100000) == 0.02);
}

TEST_CASE("check_gradients accepts a correct gradient and flags a wrong one")
{
    // f(x) = sum(x^3) + x0 x1, with the exact analytic gradient.
    const ValueAndGrad good = [](const Eigen::VectorXd& x) {
        const double value = x.array().cube().sum() + x[0] * x[1];
        Eigen::VectorXd grad = 3.0 * x.array().square();
        grad[0] += x[1];
        grad[1] += x[0];
        return std::make_pair(value, grad);
    };
    Eigen::VectorXd point(3);
    point << 0.7, -1.3, 2.1;

    const GradCheckReport ok = check_gradients(good, point);
    CHECK(ok.max_rel_error <= 1e-8);

    // Same value, one gradient entry off by 1 percent.
    const ValueAndGrad bad = [&](const Eigen::VectorXd& x) {
        auto [value, grad] = good(x);
        grad[2] *= 1.01;
        return std::make_pair(value, grad);
    };
    const GradCheckReport flagged = check_gradients(bad, point);
    CHECK(flagged.max_rel_error > 5e-3);
    CHECK(flagged.worst_index == 2);
}

TEST_CASE("check_gradients rejects non-finite probes")
{
    const ValueAndGrad f = [](const Eigen::VectorXd& x) {
        return std::make_pair(std::log(x[0]), Eigen::VectorXd::Ones(1).eval());
    };
    Eigen::VectorXd at_zero(1);
    at_zero << 0.0; // log probes x < 0 -> NaN
    CHECK_THROWS(check_gradients(f, at_zero));
}

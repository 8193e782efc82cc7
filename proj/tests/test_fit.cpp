/*
 * sfm - Sphere Face Model: a linear 3D shape model with a hyperspherical
 * latent space.
 *
 * File: tests/test_fit.cpp
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

#include "sfm/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace sfm;

namespace {

SphereFaceModel toy_model(int n_vertices, int d, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd raw(3 * n_vertices, d);
    Eigen::VectorXd mean(3 * n_vertices);
    for (int r = 0; r < 3 * n_vertices; ++r)
    {
        mean[r] = 10.0 * gauss(rng);
        for (int c = 0; c < d; ++c)
        {
            raw(r, c) = gauss(rng);
        }
    }
    SphereFaceModel model;
    model.vertex_count = n_vertices;
    model.mean = mean;
    model.basis = orthonormalize(raw);
    return model;
}

ShapeCode toy_code(int d, std::uint64_t seed, double s)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    ShapeCode code;
    code.x.resize(d);
    for (int i = 0; i < d; ++i)
    {
        code.x[i] = gauss(rng);
    }
    code.s = s;
    return code;
}

} // namespace

TEST_CASE("fit recovers the exact code of an in-model mesh")
{
    const SphereFaceModel model = toy_model(40, 5, 1);
    const ShapeCode truth = toy_code(5, 2, 1.8);
    const Mesh target = reconstruct(model, truth);

    const FitResult result = fit_mesh(model, target);
    CHECK(result.final_rmse <= 1e-6);
    CHECK(result.code.s == doctest::Approx(truth.s).epsilon(1e-4));
    CHECK((identity_vector(result.code) - identity_vector(truth)).norm() <= 1e-4);
    CHECK_FALSE(result.negative_scale);
}

TEST_CASE("zero iterations returns the closed-form projection")
{
    const SphereFaceModel model = toy_model(30, 4, 3);
    const Mesh target = reconstruct(model, toy_code(4, 4, 2.2));

    FitConfig config;
    config.iterations = 0;
    const FitResult result = fit_mesh(model, target, config);
    const ShapeCode projected = project(model, target);
    CHECK(result.code.s == doctest::Approx(projected.s).epsilon(1e-12));
    CHECK((result.code.x - projected.x).norm() <= 1e-12);
    REQUIRE(result.trajectory.size() == 1);
}

TEST_CASE("fit never ends above the projection loss")
{
    // Off-model targets: optimization must return an iterate at least as good
    // as the projection init, by the best-seen guarantee.
    const SphereFaceModel model = toy_model(25, 4, 5);
    std::mt19937_64 rng(6);
    std::normal_distribution<double> gauss(0.0, 4.0);
    for (int trial = 0; trial < 5; ++trial)
    {
        Eigen::VectorXd v(75);
        for (int i = 0; i < 75; ++i)
        {
            v[i] = model.mean[i] + gauss(rng);
        }
        const Mesh target = make_mesh(v);

        const ShapeCode projected = project(model, target);
        const double projection_rmse =
            rmse_point_to_point(reconstruct(model, projected), target);

        FitConfig config;
        config.iterations = 300;
        const FitResult result = fit_mesh(model, target, config);
        CHECK(result.final_rmse <= projection_rmse + 1e-12);
    }
}

TEST_CASE("fit error approaches the noise floor on noisy in-model meshes")
{
    const SphereFaceModel model = toy_model(50, 6, 7);
    const ShapeCode truth = toy_code(6, 8, 2.0);
    const Mesh clean = reconstruct(model, truth);

    std::mt19937_64 rng(9);
    const double sigma = 0.3;
    std::normal_distribution<double> noise(0.0, sigma);
    Mesh noisy = clean;
    for (int i = 0; i < noisy.vertices.size(); ++i)
    {
        noisy.vertices[i] += noise(rng);
    }

    // Projection residual of pure noise onto a d-dim subspace leaves nearly
    // all of the noise: the floor is sigma * sqrt(3) per vertex, measured
    // empirically by projecting the realized noise.
    const ShapeCode proj = project(model, noisy);
    const double floor = rmse_point_to_point(reconstruct(model, proj), noisy);

    const FitResult result = fit_mesh(model, noisy);
    CHECK(result.final_rmse <= floor + 1e-12);
    CHECK(result.final_rmse >= 0.8 * sigma * std::sqrt(3.0)); // cannot beat the noise
    // And the recovered code still matches the truth well.
    CHECK((identity_vector(result.code) - identity_vector(truth)).norm() <= 0.2);
}

TEST_CASE("fit requires a finalized model")
{
    SphereFaceModel model = toy_model(20, 3, 10);
    model.basis *= 1.01; // no longer orthonormal
    const Mesh target = make_mesh(Eigen::VectorXd::Ones(60));
    CHECK_THROWS_AS(fit_mesh(model, target), std::runtime_error);
}

TEST_CASE("fit trajectory is sampled sparsely and ends at the final loss")
{
    const SphereFaceModel model = toy_model(20, 3, 11);
    const Mesh target = reconstruct(model, toy_code(3, 12, 1.5));
    FitConfig config;
    config.iterations = 250;
    const FitResult result = fit_mesh(model, target, config);
    // Iterations 0, 100, 200 plus the final iterate.
    REQUIRE(result.trajectory.size() == 4);
    CHECK(result.trajectory[0].first == 0);
    CHECK(result.trajectory[1].first == 100);
    CHECK(result.trajectory[2].first == 200);
    CHECK(result.trajectory[3].first == 250);
    // Sanity: losses are finite and the last sample is the best seen.
    for (const auto& [iter, loss] : result.trajectory)
    {
        CHECK(std::isfinite(loss));
    }
    CHECK(result.trajectory.back().second <= result.trajectory.front().second + 1e-12);
}

TEST_CASE("fit_corpus is bit-identical across thread counts")
{
    SynthConfig synth;
    synth.vertex_count = 60;
    synth.latent_dimension = 6;
    synth.n_identities = 3;
    synth.samples_per_identity = 4;
    synth.seed = 21;
    const SynthResult data = generate_corpus(synth);
    const SphereFaceModel model = data.truth.model;

    FitConfig config;
    config.iterations = 120;

    const CorpusFitResult one = fit_corpus(model, data.corpus, config, 1);
    const CorpusFitResult four = fit_corpus(model, data.corpus, config, 4);

    REQUIRE(one.results.size() == four.results.size());
    CHECK(one.indices == four.indices);
    CHECK(one.labels == four.labels);
    CHECK(one.mean_rmse == four.mean_rmse); // exact, not approximate
    bool identical = true;
    for (std::size_t i = 0; i < one.results.size(); ++i)
    {
        identical = identical && one.results[i].code.x == four.results[i].code.x;
        identical = identical && one.results[i].code.s == four.results[i].code.s;
    }
    CHECK(identical);
}

TEST_CASE("fit_corpus keeps labels aligned and reports failures")
{
    SynthConfig synth;
    synth.vertex_count = 40;
    synth.latent_dimension = 5;
    synth.n_identities = 3;
    synth.samples_per_identity = 3;
    synth.seed = 22;
    const SynthResult data = generate_corpus(synth);

    FitConfig config;
    config.iterations = 50;
    const CorpusFitResult result = fit_corpus(data.truth.model, data.corpus, config, 2);
    CHECK(result.failures.empty());
    REQUIRE(result.results.size() == 9);
    CHECK(result.labels == data.corpus.labels);

    double mean = 0.0;
    for (const auto& fit : result.results)
    {
        mean += fit.final_rmse;
    }
    mean /= double(result.results.size());
    CHECK(result.mean_rmse == doctest::Approx(mean).epsilon(1e-12));

    const nlohmann::json j = fit_report_to_json(result);
    CHECK(j.at("n_fitted").get<int>() == 9);
    CHECK(j.at("n_failed").get<int>() == 0);
    CHECK(j.at("mean_rmse").get<double>() == doctest::Approx(result.mean_rmse));
    CHECK(j.at("meshes").size() == 9);
}

TEST_CASE("fit flags negative scales instead of failing")
{
    // A target on the exact opposite side of the mean from any positive-scale
    // reconstruction: s_opt = -||p|| for the projection, and optimization has
    // no reason to leave that sign.
    const SphereFaceModel model = toy_model(15, 3, 23);
    ShapeCode code = toy_code(3, 24, 2.0);
    Mesh target = reconstruct(model, code);
    // Reflect the offset through the mean.
    target.vertices = 2.0 * model.mean - target.vertices;

    const FitResult result = fit_mesh(model, target);
    // Either the solver flips x and keeps s > 0 (equivalent code) or it
    // reports a negative scale; both must reconstruct equally well.
    CHECK(result.final_rmse <= 1e-4);
}

/*
 * sfm - Sphere Face Model: a linear 3D shape model with a hyperspherical
 * latent space.
 *
 * File: tests/test_train.cpp
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

#include "sfm/metrics.hpp"
#include "sfm/synth.hpp"

#include <doctest.h>

#include <cmath>

using namespace sfm;

namespace {

LabeledCorpus small_corpus(std::uint64_t seed)
{
    SynthConfig config;
    config.vertex_count = 60;
    config.latent_dimension = 6;
    config.n_identities = 4;
    config.samples_per_identity = 8;
    config.seed = seed;
    return generate_corpus(config).corpus;
}

TrainConfig small_train(int epochs)
{
    TrainConfig config;
    config.d = 5;
    config.epochs = epochs;
    config.batch_size = 16;
    config.seed = 99;
    return config;
}

std::vector<ShapeCode> pca_projections(const LabeledCorpus& corpus, int d)
{
    const SphereFaceModel pca = fit_pca(corpus.meshes, d);
    std::vector<ShapeCode> codes;
    for (const auto& mesh : corpus.meshes)
    {
        codes.push_back(project(pca, mesh));
    }
    return codes;
}

} // namespace

TEST_CASE("zero epochs returns the PCA initialization unchanged")
{
    const LabeledCorpus corpus = small_corpus(5);
    const TrainOutput out = train_stage1(corpus, small_train(0));

    const SphereFaceModel pca = fit_pca(corpus.meshes, 5);
    CHECK(out.model.basis == pca.basis);
    CHECK(out.model.mean == pca.mean);

    const std::vector<ShapeCode> projections = pca_projections(corpus, 5);
    REQUIRE(out.codes.size() == projections.size());
    for (std::size_t i = 0; i < out.codes.size(); ++i)
    {
        CHECK(out.codes[i].x == projections[i].x);
        CHECK(out.codes[i].s == projections[i].s);
    }

    CHECK(out.weights.rows() == corpus.n_classes);
    CHECK(out.centers.rows() == corpus.n_classes);
    CHECK(out.report.l_f.empty());
}

TEST_CASE("training produces a finalized model and finite codes")
{
    const LabeledCorpus corpus = small_corpus(6);
    const TrainOutput out = train_stage1(corpus, small_train(6));

    CHECK_NOTHROW(validate_model(out.model, true));
    CHECK((out.model.basis.transpose() * out.model.basis -
           Eigen::MatrixXd::Identity(5, 5))
              .norm() <= orth_epsilon);
    REQUIRE(out.codes.size() == corpus.meshes.size());
    for (const auto& code : out.codes)
    {
        CHECK(code.x.allFinite());
        CHECK(std::isfinite(code.s));
    }
    CHECK(out.report.l_f.size() == 6);
    CHECK(out.report.wall_seconds > 0.0);
    CHECK(std::isfinite(out.report.final_ortho_residual));

    // The mean stays the corpus mean: it is frozen by design.
    const SphereFaceModel pca = fit_pca(corpus.meshes, 5);
    CHECK((out.model.mean - pca.mean).norm() <= 1e-12);
}

TEST_CASE("training decreases the objective")
{
    const LabeledCorpus corpus = small_corpus(7);
    const TrainOutput out = train_stage1(corpus, small_train(12));
    REQUIRE(out.report.l_f.size() == 12);
    // Not necessarily monotone per epoch, but the trend must be down.
    CHECK(out.report.l_f.back() < out.report.l_f.front());
    const double mid = out.report.l_f[5];
    CHECK(mid < out.report.l_f.front() * 1.05);
}

TEST_CASE("finalization preserves each sample's trained reconstruction")
{
    // Re-encoding through the orthonormalized basis is a change of basis on
    // the same span: reconstructions before and after must agree wherever the
    // code did not hit the zero-latent fallback.
    const LabeledCorpus corpus = small_corpus(8);
    const TrainConfig config = small_train(5);
    const TrainOutput out = train_stage1(corpus, config);

    // Decoding the finalized codes equals projecting onto the finalized span:
    // the reconstructions must lie in the span and reproduce the codes.
    for (std::size_t i = 0; i < out.codes.size(); ++i)
    {
        const Mesh recon = reconstruct(out.model, out.codes[i]);
        const ShapeCode re = project(out.model, recon);
        CHECK(re.s == doctest::Approx(out.codes[i].s).epsilon(1e-9));
        if (out.codes[i].s > 1e-9)
        {
            CHECK((identity_vector(re) - identity_vector(out.codes[i])).norm() <= 1e-9);
        }
    }
}

TEST_CASE("reconstruction-only training tracks the PCA solution")
{
    // With lambda_m = lambda_c = 0 the objective only sees reconstruction and
    // orthogonality: per-sample reconstruction quality must stay close to the
    // PCA optimum.
    const LabeledCorpus corpus = small_corpus(9);
    TrainConfig config = small_train(10);
    config.lambdas.lambda_m = 0.0;
    config.lambdas.lambda_c = 0.0;
    const TrainOutput out = train_stage1(corpus, config);

    const SphereFaceModel pca = fit_pca(corpus.meshes, config.d);
    double sfm_sq = 0.0, pca_sq = 0.0;
    for (std::size_t i = 0; i < corpus.meshes.size(); ++i)
    {
        const Mesh& target = corpus.meshes[i];
        sfm_sq += std::pow(rmse_point_to_point(reconstruct(out.model, out.codes[i]), target), 2);
        pca_sq += std::pow(rmse_point_to_point(reconstruct(pca, project(pca, target)), target), 2);
    }
    const double sfm_rmse = std::sqrt(sfm_sq / double(corpus.meshes.size()));
    const double pca_rmse = std::sqrt(pca_sq / double(corpus.meshes.size()));
    // PCA is the global optimum of this objective; training stays near it.
    CHECK(sfm_rmse <= 1.10 * pca_rmse);
}

TEST_CASE("training is deterministic in the seed")
{
    const LabeledCorpus corpus = small_corpus(10);
    const TrainOutput a = train_stage1(corpus, small_train(4));
    const TrainOutput b = train_stage1(corpus, small_train(4));
    CHECK(a.model.basis == b.model.basis);
    CHECK(a.codes[3].x == b.codes[3].x);
    CHECK(a.report.l_f == b.report.l_f);

    TrainConfig other = small_train(4);
    other.seed = 1234;
    const TrainOutput c = train_stage1(corpus, other);
    // A different shuffle order changes the result.
    CHECK(a.model.basis != c.model.basis);
}

TEST_CASE("metric terms tighten identity clusters relative to PCA")
{
    // The defining claim of the joint objective: with the classification and
    // center terms on, same-identity codes cluster more tightly than the
    // PCA projections of the same meshes.
    SynthConfig synth;
    synth.vertex_count = 100;
    synth.latent_dimension = 8;
    synth.n_identities = 5;
    synth.samples_per_identity = 10;
    synth.seed = 11;
    const LabeledCorpus corpus = generate_corpus(synth).corpus;

    TrainConfig config;
    config.d = 7;
    config.epochs = 25;
    config.batch_size = 64;
    config.seed = 3;
    const TrainOutput trained = train_stage1(corpus, config);

    const std::vector<ShapeCode> pca_codes = pca_projections(corpus, config.d);
    const SeparabilityReport sfm_report = build_report(trained.codes, corpus.labels);
    const SeparabilityReport pca_report = build_report(pca_codes, corpus.labels);

    CHECK(sfm_report.sce > pca_report.sce);
    CHECK(sfm_report.scc > pca_report.scc);
    REQUIRE(sfm_report.ch.has_value());
    REQUIRE(pca_report.ch.has_value());
    CHECK(*sfm_report.ch > *pca_report.ch);
}

TEST_CASE("train rejects unusable corpora")
{
    LabeledCorpus corpus = small_corpus(12);
    corpus.labels.assign(corpus.labels.size(), 0); // single class
    corpus.n_classes = 1;
    CHECK_THROWS_AS(train_stage1(corpus, small_train(2)), std::invalid_argument);

    LabeledCorpus tiny;
    const SynthConfig synth = [] {
        SynthConfig c;
        c.vertex_count = 20;
        c.latent_dimension = 4;
        c.n_identities = 2;
        c.samples_per_identity = 1;
        return c;
    }();
    tiny = generate_corpus(synth).corpus;
    TrainConfig config = small_train(2);
    config.d = 10; // d > m - 1
    CHECK_THROWS_AS(train_stage1(tiny, config), std::invalid_argument);
}

TEST_CASE("train report serializes every series")
{
    const LabeledCorpus corpus = small_corpus(13);
    const TrainOutput out = train_stage1(corpus, small_train(3));
    const nlohmann::json j = train_report_to_json(out.report);
    CHECK(j.at("l_m").size() == 3);
    CHECK(j.at("l_c").size() == 3);
    CHECK(j.at("l_s").size() == 3);
    CHECK(j.at("l_f").size() == 3);
    CHECK(j.at("seed").get<std::uint64_t>() == 99);
    CHECK(j.at("wall_seconds").get<double>() > 0.0);
    CHECK(std::isfinite(j.at("final_ortho_residual").get<double>()));
}

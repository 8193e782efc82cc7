/*
 * sfm - Sphere Face Model: a linear 3D shape model with a hyperspherical
 * latent space.
 *
 * File: tools/sfm_cli.cpp
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
 *
 * Command-line front end: corpus synthesis, model training, code fitting,
 * cluster evaluation and latent interpolation. Every run writes a manifest
 * JSON describing the resolved configuration beside its outputs; `sfm
 * --manifest <path>` replays a recorded run.
 */
#include "sfm/corpus.hpp"
#include "sfm/fit.hpp"
#include "sfm/metrics.hpp"
#include "sfm/model.hpp"
#include "sfm/synth.hpp"
#include "sfm/train.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* tool_version = "0.1.0";

// Exit codes: 0 success, 1 runtime failure, 2 usage error.
constexpr int exit_usage = 2;

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag_seed)
{
    if (flag_seed)
    {
        return *flag_seed;
    }
    if (const char* env = std::getenv("SFM_SEED"))
    {
        try
        {
            return std::stoull(env);
        } catch (const std::exception&)
        {
            throw CLI::ValidationError("SFM_SEED", "not a valid unsigned integer: " +
                                                       std::string(env));
        }
    }
    return 0;
}

void write_json_file(const json& j, const fs::path& path)
{
    std::ofstream out(path);
    if (!out)
    {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out << j.dump(2) << "\n";
    if (!out)
    {
        throw std::runtime_error("write to " + path.string() + " failed");
    }
}

json read_json_file(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw std::runtime_error("cannot open " + path.string());
    }
    try
    {
        return json::parse(in);
    } catch (const json::exception& e)
    {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

void write_manifest(const std::string& command, const json& config, const json& inputs,
                    const json& outputs, std::uint64_t seed, int threads, const fs::path& path)
{
    json manifest;
    manifest["command"] = command;
    manifest["config"] = config;
    manifest["inputs"] = inputs;
    manifest["outputs"] = outputs;
    manifest["seed"] = seed;
    manifest["threads"] = threads;
    manifest["tool_version"] = tool_version;
    write_json_file(manifest, path);
}

// ---------------------------------------------------------------- synth ---

struct SynthOptions {
    std::string out;
    sfm::SynthConfig config;
};

json to_json(const SynthOptions& o)
{
    return json{{"out", o.out},
                {"vertex_count", o.config.vertex_count},
                {"latent_dimension", o.config.latent_dimension},
                {"n_identities", o.config.n_identities},
                {"samples_per_identity", o.config.samples_per_identity},
                {"identity_angle_stddev", o.config.identity_angle_stddev},
                {"scale_mean", o.config.scale_mean},
                {"scale_stddev", o.config.scale_stddev},
                {"vertex_noise_stddev", o.config.vertex_noise_stddev},
                {"seed", o.config.seed}};
}

SynthOptions synth_options_from_json(const json& j)
{
    SynthOptions o;
    o.out = j.at("out").get<std::string>();
    o.config.vertex_count = j.at("vertex_count").get<int>();
    o.config.latent_dimension = j.at("latent_dimension").get<int>();
    o.config.n_identities = j.at("n_identities").get<int>();
    o.config.samples_per_identity = j.at("samples_per_identity").get<int>();
    o.config.identity_angle_stddev = j.at("identity_angle_stddev").get<double>();
    o.config.scale_mean = j.at("scale_mean").get<double>();
    o.config.scale_stddev = j.at("scale_stddev").get<double>();
    o.config.vertex_noise_stddev = j.at("vertex_noise_stddev").get<double>();
    o.config.seed = j.at("seed").get<std::uint64_t>();
    return o;
}

void run_synth(const SynthOptions& o, int threads)
{
    const sfm::SynthResult result = sfm::generate_corpus(o.config);
    fs::create_directories(o.out);
    sfm::save_corpus_dir(result.corpus, o.out);
    const fs::path dir(o.out);
    sfm::save_model(result.truth.model, (dir / "truth_model.sfmb").string());
    sfm::save_codes_csv(result.truth.codes, result.corpus.labels,
                        (dir / "truth_codes.csv").string());
    write_json_file(sfm::report_to_json(sfm::truth_report(result)),
                    dir / "truth_report.json");
    write_manifest("synth", to_json(o), json::object(),
                   json{{"corpus", o.out},
                        {"truth_model", (dir / "truth_model.sfmb").string()},
                        {"truth_codes", (dir / "truth_codes.csv").string()},
                        {"truth_report", (dir / "truth_report.json").string()}},
                   o.config.seed, threads, dir / "manifest.json");
    std::cout << "synth: wrote " << result.corpus.meshes.size() << " meshes ("
              << result.corpus.n_classes << " identities) to " << o.out << "\n";
}

// ---------------------------------------------------------------- train ---

struct TrainOptions {
    std::string corpus;
    std::string out;
    std::string mode = "sfm"; // sfm | sphere-linear | pca
    sfm::TrainConfig config;
};

json to_json(const TrainOptions& o)
{
    return json{{"corpus", o.corpus},
                {"out", o.out},
                {"mode", o.mode},
                {"d", o.config.d},
                {"epochs", o.config.epochs},
                {"batch_size", o.config.batch_size},
                {"lr_code", o.config.lr_code},
                {"lr_basis", o.config.lr_basis},
                {"decay_factor", o.config.decay.factor},
                {"decay_every", o.config.decay.every},
                {"lambda_m", o.config.lambdas.lambda_m},
                {"lambda_c", o.config.lambdas.lambda_c},
                {"lambda_s", o.config.lambdas.lambda_s},
                {"margin_alpha", o.config.margins.alpha},
                {"margin_beta", o.config.margins.beta},
                {"margin_gamma", o.config.margins.gamma},
                {"logit_scale", o.config.margins.logit_scale},
                {"center_denominator",
                 o.config.denominator == sfm::CenterDenominator::pair_mean ? "pair_mean"
                                                                           : "per_center_sum"},
                {"seed", o.config.seed}};
}

TrainOptions train_options_from_json(const json& j)
{
    TrainOptions o;
    o.corpus = j.at("corpus").get<std::string>();
    o.out = j.at("out").get<std::string>();
    o.mode = j.at("mode").get<std::string>();
    o.config.d = j.at("d").get<int>();
    o.config.epochs = j.at("epochs").get<int>();
    o.config.batch_size = j.at("batch_size").get<int>();
    o.config.lr_code = j.at("lr_code").get<double>();
    o.config.lr_basis = j.at("lr_basis").get<double>();
    o.config.decay.factor = j.at("decay_factor").get<double>();
    o.config.decay.every = j.at("decay_every").get<std::int64_t>();
    o.config.lambdas.lambda_m = j.at("lambda_m").get<double>();
    o.config.lambdas.lambda_c = j.at("lambda_c").get<double>();
    o.config.lambdas.lambda_s = j.at("lambda_s").get<double>();
    o.config.margins.alpha = j.at("margin_alpha").get<double>();
    o.config.margins.beta = j.at("margin_beta").get<double>();
    o.config.margins.gamma = j.at("margin_gamma").get<double>();
    o.config.margins.logit_scale = j.at("logit_scale").get<double>();
    o.config.denominator = j.at("center_denominator").get<std::string>() == "per_center_sum"
                               ? sfm::CenterDenominator::per_center_sum
                               : sfm::CenterDenominator::pair_mean;
    o.config.seed = j.at("seed").get<std::uint64_t>();
    return o;
}

void run_train(const TrainOptions& o, int threads)
{
    const sfm::LabeledCorpus corpus = sfm::load_corpus_dir(o.corpus);
    fs::create_directories(o.out);
    const fs::path dir(o.out);

    sfm::SphereFaceModel model;
    std::vector<sfm::ShapeCode> codes;
    sfm::TrainReport report;
    if (o.mode == "pca")
    {
        model = sfm::fit_pca(corpus.meshes, o.config.d);
        codes.reserve(corpus.meshes.size());
        for (const auto& mesh : corpus.meshes)
        {
            codes.push_back(sfm::project(model, mesh));
        }
        report.seed = o.config.seed;
        report.final_ortho_residual =
            (model.basis.transpose() * model.basis -
             Eigen::MatrixXd::Identity(o.config.d, o.config.d))
                .norm();
    } else
    {
        sfm::TrainConfig config = o.config;
        if (o.mode == "sphere-linear")
        {
            // Reconstruction-only ablation: classification and center terms off.
            config.lambdas.lambda_m = 0.0;
            config.lambdas.lambda_c = 0.0;
        } else if (o.mode != "sfm")
        {
            throw CLI::ValidationError("--mode", "expected sfm, sphere-linear or pca");
        }
        sfm::TrainOutput trained = sfm::train_stage1(corpus, config);
        model = std::move(trained.model);
        codes = std::move(trained.codes);
        report = std::move(trained.report);
    }

    sfm::save_model(model, (dir / "model.sfmb").string());
    sfm::save_codes_csv(codes, corpus.labels, (dir / "codes.csv").string());
    write_json_file(sfm::train_report_to_json(report), dir / "train_report.json");
    write_manifest("train", to_json(o), json{{"corpus", o.corpus}},
                   json{{"model", (dir / "model.sfmb").string()},
                        {"codes", (dir / "codes.csv").string()},
                        {"train_report", (dir / "train_report.json").string()}},
                   o.config.seed, threads, dir / "manifest.json");
    std::cout << "train[" << o.mode << "]: " << corpus.meshes.size() << " meshes, d = "
              << o.config.d << ", wrote " << (dir / "model.sfmb").string() << "\n";
}

// ------------------------------------------------------------------ fit ---

struct FitOptions {
    std::string model;
    std::string corpus;
    std::string out;
    sfm::FitConfig config;
};

json to_json(const FitOptions& o)
{
    return json{{"model", o.model},
                {"corpus", o.corpus},
                {"out", o.out},
                {"lr", o.config.lr},
                {"decay_factor", o.config.decay.factor},
                {"decay_every", o.config.decay.every},
                {"iterations", o.config.iterations},
                {"seed", o.config.seed}};
}

FitOptions fit_options_from_json(const json& j)
{
    FitOptions o;
    o.model = j.at("model").get<std::string>();
    o.corpus = j.at("corpus").get<std::string>();
    o.out = j.at("out").get<std::string>();
    o.config.lr = j.at("lr").get<double>();
    o.config.decay.factor = j.at("decay_factor").get<double>();
    o.config.decay.every = j.at("decay_every").get<std::int64_t>();
    o.config.iterations = j.at("iterations").get<int>();
    o.config.seed = j.at("seed").get<std::uint64_t>();
    return o;
}

void run_fit(const FitOptions& o, int threads)
{
    const sfm::SphereFaceModel model = sfm::load_model(o.model);
    const sfm::LabeledCorpus corpus = sfm::load_corpus_dir(o.corpus);
    const sfm::CorpusFitResult result = sfm::fit_corpus(model, corpus, o.config, threads);

    for (const auto& [index, reason] : result.failures)
    {
        std::cerr << "warning: mesh " << index << " failed to fit: " << reason << "\n";
    }
    for (std::size_t r = 0; r < result.results.size(); ++r)
    {
        if (result.results[r].negative_scale)
        {
            std::cerr << "warning: mesh " << result.indices[r] << " fitted a negative scale\n";
        }
    }

    fs::create_directories(o.out);
    const fs::path dir(o.out);
    std::vector<sfm::ShapeCode> codes;
    codes.reserve(result.results.size());
    for (const auto& fit : result.results)
    {
        codes.push_back(fit.code);
    }
    sfm::save_codes_csv(codes, result.labels, (dir / "codes.csv").string());
    write_json_file(sfm::fit_report_to_json(result), dir / "fit_report.json");
    write_manifest("fit", to_json(o), json{{"model", o.model}, {"corpus", o.corpus}},
                   json{{"codes", (dir / "codes.csv").string()},
                        {"fit_report", (dir / "fit_report.json").string()}},
                   o.config.seed, threads, dir / "manifest.json");
    std::cout << "fit: " << result.results.size() << "/" << corpus.meshes.size()
              << " meshes, mean rmse " << result.mean_rmse << "\n";
}

// --------------------------------------------------------- eval-cluster ---

struct EvalOptions {
    std::string codes;
    std::string out;
    std::string space = "scaled_identity";
    bool summed_silhouette = false;
    std::optional<double> rmse;
    std::string fit_report; // optional source for rmse
};

json to_json(const EvalOptions& o)
{
    return json{{"codes", o.codes},
                {"out", o.out},
                {"space", o.space},
                {"summed_silhouette", o.summed_silhouette},
                {"rmse", o.rmse ? json(*o.rmse) : json(nullptr)},
                {"fit_report", o.fit_report}};
}

EvalOptions eval_options_from_json(const json& j)
{
    EvalOptions o;
    o.codes = j.at("codes").get<std::string>();
    o.out = j.at("out").get<std::string>();
    o.space = j.at("space").get<std::string>();
    o.summed_silhouette = j.at("summed_silhouette").get<bool>();
    if (!j.at("rmse").is_null())
    {
        o.rmse = j.at("rmse").get<double>();
    }
    o.fit_report = j.at("fit_report").get<std::string>();
    return o;
}

sfm::CodeSpace parse_space(const std::string& name)
{
    if (name == "raw_x")
        return sfm::CodeSpace::raw_x;
    if (name == "identity")
        return sfm::CodeSpace::identity;
    if (name == "scaled_identity")
        return sfm::CodeSpace::scaled_identity;
    throw CLI::ValidationError("--space", "expected raw_x, identity or scaled_identity");
}

void run_eval(const EvalOptions& o, int threads)
{
    const auto [codes, labels] = sfm::load_codes_csv(o.codes);
    sfm::SeparabilityReport report = sfm::build_report(
        codes, labels, {}, parse_space(o.space),
        o.summed_silhouette ? sfm::SilhouetteVariant::summed : sfm::SilhouetteVariant::standard);
    if (o.rmse)
    {
        report.rmse = *o.rmse;
    } else if (!o.fit_report.empty())
    {
        report.rmse = read_json_file(o.fit_report).at("mean_rmse").get<double>();
    }
    write_json_file(sfm::report_to_json(report), o.out);
    write_manifest("eval-cluster", to_json(o), json{{"codes", o.codes}},
                   json{{"report", o.out}}, 0, threads, fs::path(o.out + ".manifest.json"));
    std::cout << sfm::format_report_row(fs::path(o.codes).stem().string(), report) << "\n";
}

// --------------------------------------------------------------- interp ---

struct InterpOptions {
    std::string codes;
    std::string model;
    std::string out;
    int index_a = 0;
    int index_b = 1;
    std::vector<double> t_values{0.0, 0.25, 0.5, 0.75, 1.0};
};

json to_json(const InterpOptions& o)
{
    return json{{"codes", o.codes}, {"model", o.model},   {"out", o.out},
                {"index_a", o.index_a}, {"index_b", o.index_b}, {"t_values", o.t_values}};
}

InterpOptions interp_options_from_json(const json& j)
{
    InterpOptions o;
    o.codes = j.at("codes").get<std::string>();
    o.model = j.at("model").get<std::string>();
    o.out = j.at("out").get<std::string>();
    o.index_a = j.at("index_a").get<int>();
    o.index_b = j.at("index_b").get<int>();
    o.t_values = j.at("t_values").get<std::vector<double>>();
    return o;
}

void run_interp(const InterpOptions& o, int threads)
{
    const auto [codes, labels] = sfm::load_codes_csv(o.codes);
    (void)labels;
    const int n = static_cast<int>(codes.size());
    if (o.index_a < 0 || o.index_a >= n || o.index_b < 0 || o.index_b >= n)
    {
        throw std::runtime_error("interp: code row indices outside [0, " + std::to_string(n) + ")");
    }
    const sfm::SphereFaceModel model = sfm::load_model(o.model);
    fs::create_directories(o.out);
    const fs::path dir(o.out);

    std::vector<sfm::ShapeCode> interpolated;
    std::vector<int> steps;
    json outputs = json::object();
    for (std::size_t i = 0; i < o.t_values.size(); ++i)
    {
        const double t = o.t_values[i];
        const sfm::ShapeCode code =
            sfm::interpolate_codes(codes[o.index_a], codes[o.index_b], t);
        char name[64];
        std::snprintf(name, sizeof(name), "interp_t%g.obj", t);
        sfm::save_obj(sfm::reconstruct(model, code), (dir / name).string());
        outputs[name] = (dir / name).string();
        interpolated.push_back(code);
        steps.push_back(static_cast<int>(i));
    }
    sfm::save_codes_csv(interpolated, steps, (dir / "codes.csv").string());
    outputs["codes"] = (dir / "codes.csv").string();
    write_manifest("interp", to_json(o), json{{"codes", o.codes}, {"model", o.model}}, outputs, 0,
                   threads, dir / "manifest.json");
    std::cout << "interp: wrote " << o.t_values.size() << " steps to " << o.out << "\n";
}

// ----------------------------------------------------------------- main ---

void replay_manifest(const std::string& path, int threads)
{
    const json manifest = read_json_file(path);
    const std::string command = manifest.at("command").get<std::string>();
    const json& config = manifest.at("config");
    if (command == "synth")
        run_synth(synth_options_from_json(config), threads);
    else if (command == "train")
        run_train(train_options_from_json(config), threads);
    else if (command == "fit")
        run_fit(fit_options_from_json(config), threads);
    else if (command == "eval-cluster")
        run_eval(eval_options_from_json(config), threads);
    else if (command == "interp")
        run_interp(interp_options_from_json(config), threads);
    else
        throw std::runtime_error("manifest names unknown command '" + command + "'");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sphere Face Model tools"};
    app.require_subcommand(0, 1);
    app.fallthrough(true);

    int threads = 1;
    std::string manifest_path;
    app.add_option("--threads", threads, "Worker threads (1 = fully reproducible ordering)")
        ->check(CLI::PositiveNumber);
    app.add_option("--manifest", manifest_path, "Replay a recorded run from its manifest");

    // synth
    SynthOptions synth;
    std::optional<std::uint64_t> synth_seed;
    CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a labeled synthetic corpus");
    synth_cmd->add_option("--out", synth.out, "Output directory")->required();
    synth_cmd->add_option("--seed", synth_seed, "RNG seed (default: SFM_SEED env or 0)");
    synth_cmd->add_option("--vertices", synth.config.vertex_count, "Vertices per mesh");
    synth_cmd->add_option("--dim", synth.config.latent_dimension, "Latent dimension");
    synth_cmd->add_option("--identities", synth.config.n_identities, "Number of identities");
    synth_cmd->add_option("--samples-per-id", synth.config.samples_per_identity,
                          "Samples per identity");
    synth_cmd->add_option("--angle-std", synth.config.identity_angle_stddev,
                          "Within-identity angular stddev (radians)");
    synth_cmd->add_option("--scale-mean", synth.config.scale_mean, "Mean scale (mm)");
    synth_cmd->add_option("--scale-std", synth.config.scale_stddev, "Scale stddev (mm)");
    synth_cmd->add_option("--noise-std", synth.config.vertex_noise_stddev,
                          "Per-coordinate vertex noise stddev (mm)");

    // train
    TrainOptions train;
    std::optional<std::uint64_t> train_seed;
    CLI::App* train_cmd = app.add_subcommand("train", "Train a model on a corpus directory");
    train_cmd->add_option("--corpus", train.corpus, "Corpus directory")->required();
    train_cmd->add_option("--out", train.out, "Output directory")->required();
    train_cmd->add_option("--mode", train.mode, "sfm | sphere-linear | pca")
        ->check(CLI::IsMember({"sfm", "sphere-linear", "pca"}));
    train_cmd->add_option("--seed", train_seed, "RNG seed (default: SFM_SEED env or 0)");
    train_cmd->add_option("--dim", train.config.d, "Latent dimension");
    train_cmd->add_option("--epochs", train.config.epochs, "Training epochs");
    train_cmd->add_option("--batch", train.config.batch_size, "Batch size");
    train_cmd->add_option("--lr-code", train.config.lr_code, "Learning rate for codes/weights/centers");
    train_cmd->add_option("--lr-basis", train.config.lr_basis, "Learning rate for the basis");
    train_cmd->add_option("--decay-factor", train.config.decay.factor, "LR decay factor");
    train_cmd->add_option("--decay-every", train.config.decay.every, "Epochs between decays");
    train_cmd->add_option("--lambda-m", train.config.lambdas.lambda_m, "Classification weight");
    train_cmd->add_option("--lambda-c", train.config.lambdas.lambda_c, "Center-loss weight");
    train_cmd->add_option("--lambda-s", train.config.lambdas.lambda_s, "Reconstruction weight");
    train_cmd->add_option("--margin-alpha", train.config.margins.alpha, "Angular margin multiplier");
    train_cmd->add_option("--margin-beta", train.config.margins.beta, "Additive angular margin");
    train_cmd->add_option("--margin-gamma", train.config.margins.gamma, "Additive cosine margin");
    train_cmd->add_option("--logit-scale", train.config.margins.logit_scale, "Cosine logit scale");
    std::string denominator = "pair_mean";
    train_cmd->add_option("--center-denominator", denominator, "pair_mean | per_center_sum")
        ->check(CLI::IsMember({"pair_mean", "per_center_sum"}));

    // fit
    FitOptions fit;
    std::optional<std::uint64_t> fit_seed;
    CLI::App* fit_cmd = app.add_subcommand("fit", "Fit codes for a corpus with a frozen model");
    fit_cmd->add_option("--model", fit.model, "Model file (.sfmb)")->required();
    fit_cmd->add_option("--corpus", fit.corpus, "Corpus directory")->required();
    fit_cmd->add_option("--out", fit.out, "Output directory")->required();
    fit_cmd->add_option("--iters", fit.config.iterations, "Optimization iterations");
    fit_cmd->add_option("--lr", fit.config.lr, "Learning rate");
    fit_cmd->add_option("--decay-factor", fit.config.decay.factor, "LR decay factor");
    fit_cmd->add_option("--decay-every", fit.config.decay.every, "Iterations between decays");
    fit_cmd->add_option("--seed", fit_seed, "Recorded seed (fitting itself is deterministic)");

    // eval-cluster
    EvalOptions eval;
    CLI::App* eval_cmd = app.add_subcommand("eval-cluster", "Separability metrics for a code table");
    eval_cmd->add_option("--codes", eval.codes, "codes.csv path")->required();
    eval_cmd->add_option("--out", eval.out, "Report JSON path")->required();
    eval_cmd->add_option("--space", eval.space, "raw_x | identity | scaled_identity")
        ->check(CLI::IsMember({"raw_x", "identity", "scaled_identity"}));
    eval_cmd->add_flag("--summed-silhouette", eval.summed_silhouette,
                       "Sum the negated per-sample scores instead of averaging");
    eval_cmd->add_option("--rmse", eval.rmse, "Reconstruction RMSE to embed in the report");
    eval_cmd->add_option("--fit-report", eval.fit_report,
                         "fit_report.json to take the mean RMSE from");

    // interp
    InterpOptions interp;
    CLI::App* interp_cmd =
        app.add_subcommand("interp", "Interpolate between two codes and export meshes");
    interp_cmd->add_option("--codes", interp.codes, "codes.csv path")->required();
    interp_cmd->add_option("--model", interp.model, "Model file (.sfmb)")->required();
    interp_cmd->add_option("--out", interp.out, "Output directory")->required();
    interp_cmd->add_option("--index-a", interp.index_a, "First code row")->required();
    interp_cmd->add_option("--index-b", interp.index_b, "Second code row")->required();
    interp_cmd->add_option("--t", interp.t_values, "Interpolation parameters in [0, 1]");

    try
    {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e)
    {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ||
            e.get_name() == "CallForVersion")
        {
            return app.exit(e);
        }
        app.exit(e);
        return exit_usage;
    }

    try
    {
        if (!manifest_path.empty())
        {
            if (app.get_subcommands().size() > 0)
            {
                std::cerr << "error: --manifest replaces the subcommand\n";
                return exit_usage;
            }
            replay_manifest(manifest_path, threads);
            return 0;
        }
        if (synth_cmd->parsed())
        {
            synth.config.seed = resolve_seed(synth_seed);
            run_synth(synth, threads);
        } else if (train_cmd->parsed())
        {
            train.config.seed = resolve_seed(train_seed);
            train.config.denominator = denominator == "per_center_sum"
                                           ? sfm::CenterDenominator::per_center_sum
                                           : sfm::CenterDenominator::pair_mean;
            run_train(train, threads);
        } else if (fit_cmd->parsed())
        {
            fit.config.seed = resolve_seed(fit_seed);
            run_fit(fit, threads);
        } else if (eval_cmd->parsed())
        {
            run_eval(eval, threads);
        } else if (interp_cmd->parsed())
        {
            run_interp(interp, threads);
        } else
        {
            std::cerr << app.help();
            return exit_usage;
        }
    } catch (const CLI::ValidationError& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

/*
 * sfm - Sphere Face Model: a linear 3D shape model with a hyperspherical
 * latent space.
 *
 * File: src/metrics.cpp
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
#include "sfm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace sfm {

namespace {

void check_data(const LabeledVectors& data, const char* what)
{
    const Eigen::Index n = data.vectors.rows();
    if (n < 2)
    {
        throw std::invalid_argument(std::string(what) + ": need at least 2 samples");
    }
    if (static_cast<Eigen::Index>(data.labels.size()) != n)
    {
        throw std::invalid_argument(std::string(what) + ": " + std::to_string(data.labels.size()) +
                                    " labels for " + std::to_string(n) + " samples");
    }
    if (!data.vectors.allFinite())
    {
        throw std::invalid_argument(std::string(what) + ": non-finite feature");
    }
}

int count_classes(const std::vector<int>& labels, const char* what)
{
    int max_label = -1;
    for (int label : labels)
    {
        if (label < 0)
        {
            throw std::invalid_argument(std::string(what) + ": negative label");
        }
        max_label = std::max(max_label, label);
    }
    return max_label + 1;
}

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& vectors, DistanceKind kind,
                                   const char* what)
{
    const Eigen::Index n = vectors.rows();
    Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(n, n);
    if (kind == DistanceKind::euclidean)
    {
        for (Eigen::Index i = 0; i < n; ++i)
        {
            for (Eigen::Index j = i + 1; j < n; ++j)
            {
                dist(i, j) = dist(j, i) = (vectors.row(i) - vectors.row(j)).norm();
            }
        }
        return dist;
    }
    const Eigen::VectorXd norms = vectors.rowwise().norm();
    for (Eigen::Index i = 0; i < n; ++i)
    {
        if (norms[i] <= norm_epsilon)
        {
            throw std::domain_error(std::string(what) + ": zero vector at sample " +
                                    std::to_string(i) + " under cosine distance");
        }
    }
    for (Eigen::Index i = 0; i < n; ++i)
    {
        for (Eigen::Index j = i + 1; j < n; ++j)
        {
            const double cosine = vectors.row(i).dot(vectors.row(j)) / (norms[i] * norms[j]);
            dist(i, j) = dist(j, i) = 1.0 - cosine;
        }
    }
    return dist;
}

} // namespace

double silhouette(const LabeledVectors& data, DistanceKind distance, SilhouetteVariant variant)
{
    check_data(data, "silhouette");
    const Eigen::Index n = data.vectors.rows();
    const int k = count_classes(data.labels, "silhouette");
    std::vector<int> class_sizes(k, 0);
    for (int label : data.labels)
    {
        ++class_sizes[label];
    }
    const int populated =
        static_cast<int>(std::count_if(class_sizes.begin(), class_sizes.end(),
                                       [](int size) { return size > 0; }));
    if (populated < 2)
    {
        throw std::invalid_argument("silhouette: need samples from at least 2 classes");
    }

    const Eigen::MatrixXd dist = pairwise_distances(data.vectors, distance, "silhouette");
    double accum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
    {
        const int own = data.labels[i];
        if (class_sizes[own] == 1)
        {
            continue; // singleton contributes 0
        }
        std::vector<double> sums(k, 0.0);
        for (Eigen::Index j = 0; j < n; ++j)
        {
            if (j != i)
            {
                sums[data.labels[j]] += dist(i, j);
            }
        }
        const double a = sums[own] / (class_sizes[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c)
        {
            if (c != own && class_sizes[c] > 0)
            {
                b = std::min(b, sums[c] / class_sizes[c]);
            }
        }
        const double widest = std::max(a, b);
        if (widest == 0.0)
        {
            continue; // coincident points: 0/0 counts as 0
        }
        accum += variant == SilhouetteVariant::standard ? (b - a) / widest : (a - b) / widest;
    }
    return variant == SilhouetteVariant::standard ? accum / static_cast<double>(n) : accum;
}

double calinski_harabasz(const LabeledVectors& data)
{
    check_data(data, "calinski_harabasz");
    const Eigen::Index n = data.vectors.rows();
    const int k_span = count_classes(data.labels, "calinski_harabasz");
    std::vector<int> class_sizes(k_span, 0);
    for (int label : data.labels)
    {
        ++class_sizes[label];
    }
    const int k = static_cast<int>(
        std::count_if(class_sizes.begin(), class_sizes.end(), [](int s) { return s > 0; }));
    if (k < 2)
    {
        throw std::invalid_argument("calinski_harabasz: need samples from at least 2 classes");
    }
    if (n <= k)
    {
        throw std::invalid_argument("calinski_harabasz: need more samples than classes");
    }

    const Eigen::RowVectorXd global_mean = data.vectors.colwise().mean();
    Eigen::MatrixXd class_means = Eigen::MatrixXd::Zero(k_span, data.vectors.cols());
    for (Eigen::Index i = 0; i < n; ++i)
    {
        class_means.row(data.labels[i]) += data.vectors.row(i);
    }
    double trace_between = 0.0;
    for (int c = 0; c < k_span; ++c)
    {
        if (class_sizes[c] == 0)
            continue;
        class_means.row(c) /= class_sizes[c];
        trace_between += class_sizes[c] * (class_means.row(c) - global_mean).squaredNorm();
    }
    double trace_within = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
    {
        trace_within += (data.vectors.row(i) - class_means.row(data.labels[i])).squaredNorm();
    }
    if (trace_within == 0.0)
    {
        throw std::domain_error("calinski_harabasz: zero within-class scatter, index is infinite");
    }
    return (trace_between / trace_within) * static_cast<double>(n - k) / (k - 1);
}

SeparabilityReport build_report(const std::vector<ShapeCode>& codes,
                                const std::vector<int>& labels,
                                const std::vector<double>& per_mesh_rmse, CodeSpace space,
                                SilhouetteVariant variant)
{
    if (codes.empty() || codes.size() != labels.size())
    {
        throw std::invalid_argument("build_report: need matching, non-empty codes and labels");
    }
    if (!per_mesh_rmse.empty() && per_mesh_rmse.size() != codes.size())
    {
        throw std::invalid_argument("build_report: per_mesh_rmse size mismatch");
    }
    const Eigen::Index d = codes.front().x.size();
    LabeledVectors data;
    data.vectors.resize(static_cast<Eigen::Index>(codes.size()), d);
    data.labels = labels;
    for (std::size_t i = 0; i < codes.size(); ++i)
    {
        if (codes[i].x.size() != d)
        {
            throw std::invalid_argument("build_report: code " + std::to_string(i) +
                                        " has inconsistent dimension");
        }
        switch (space)
        {
        case CodeSpace::raw_x: data.vectors.row(i) = codes[i].x; break;
        case CodeSpace::identity: data.vectors.row(i) = identity_vector(codes[i]); break;
        case CodeSpace::scaled_identity:
            data.vectors.row(i) = codes[i].s * identity_vector(codes[i]);
            break;
        }
    }

    SeparabilityReport report;
    report.space = space;
    report.n_samples = static_cast<int>(codes.size());
    std::vector<int> distinct = labels;
    std::sort(distinct.begin(), distinct.end());
    report.n_classes =
        static_cast<int>(std::unique(distinct.begin(), distinct.end()) - distinct.begin());
    report.sce = silhouette(data, DistanceKind::euclidean, variant);
    report.scc = silhouette(data, DistanceKind::cosine, variant);
    try
    {
        report.ch = calinski_harabasz(data);
    } catch (const std::domain_error&)
    {
        report.ch.reset();
        report.ch_status = "+inf";
    }
    if (!per_mesh_rmse.empty())
    {
        report.rmse = std::accumulate(per_mesh_rmse.begin(), per_mesh_rmse.end(), 0.0) /
                      static_cast<double>(per_mesh_rmse.size());
    }
    return report;
}

namespace {

const char* space_name(CodeSpace space)
{
    switch (space)
    {
    case CodeSpace::raw_x: return "raw_x";
    case CodeSpace::identity: return "identity";
    case CodeSpace::scaled_identity: return "scaled_identity";
    }
    return "unknown";
}

} // namespace

nlohmann::json report_to_json(const SeparabilityReport& report)
{
    nlohmann::json j;
    j["rmse"] = report.rmse ? nlohmann::json(*report.rmse) : nlohmann::json(nullptr);
    j["sce"] = report.sce;
    j["scc"] = report.scc;
    j["ch"] = report.ch ? nlohmann::json(*report.ch) : nlohmann::json(nullptr);
    j["ch_status"] = report.ch_status;
    j["n_samples"] = report.n_samples;
    j["n_classes"] = report.n_classes;
    j["space"] = space_name(report.space);
    return j;
}

std::string format_report_row(const std::string& name, const SeparabilityReport& report)
{
    char rmse_text[32];
    if (report.rmse)
    {
        std::snprintf(rmse_text, sizeof(rmse_text), "%10.4f", *report.rmse);
    } else
    {
        std::snprintf(rmse_text, sizeof(rmse_text), "%10s", "-");
    }
    char ch_text[32];
    if (report.ch)
    {
        std::snprintf(ch_text, sizeof(ch_text), "%12.4f", *report.ch);
    } else
    {
        std::snprintf(ch_text, sizeof(ch_text), "%12s", report.ch_status.c_str());
    }
    char row[160];
    std::snprintf(row, sizeof(row), "%-16s rmse %s  sce %10.4f  scc %10.4f  ch %s", name.c_str(),
                  rmse_text, report.sce, report.scc, ch_text);
    return row;
}

} // namespace sfm

/*
 * sfm - Sphere Face Model: a linear 3D shape model with a hyperspherical
 * latent space.
 *
 * File: include/sfm/metrics.hpp
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

#include "sfm/model.hpp"

#include <Eigen/Core>

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace sfm {

/// Row-per-sample feature matrix with one integer class label per row.
struct LabeledVectors {
    Eigen::MatrixXd vectors;
    std::vector<int> labels;
};

enum class DistanceKind { euclidean, cosine };

/**
 * Silhouette variants. `standard` is the mean over samples of
 * (b_i - a_i) / max(a_i, b_i), in [-1, 1]; `summed` is the sum over samples
 * of (a_i - b_i) / max(a_i, b_i), i.e. the standard per-sample score negated
 * and accumulated instead of averaged.
 */
enum class SilhouetteVariant { standard, summed };

/**
 * Silhouette coefficient. a_i = mean distance to same-class samples
 * (excluding i), b_i = smallest mean distance to any other class. Samples
 * that are alone in their class contribute 0, as does the 0/0 case.
 * Requires >= 2 classes; cosine distance (1 - u.v/(||u|| ||v||)) rejects
 * zero vectors.
 */
double silhouette(const LabeledVectors& data, DistanceKind distance,
                  SilhouetteVariant variant = SilhouetteVariant::standard);

/**
 * Calinski-Harabasz index: (tr B / tr W) * (n - k) / (k - 1) with B/W the
 * between/within-class scatter. Throws std::domain_error when tr W = 0
 * (perfectly collapsed clusters); callers that serialize reports map that to
 * an explicit status instead of a float infinity.
 */
double calinski_harabasz(const LabeledVectors& data);

/// Which derived vectors of a code table the separability metrics see.
enum class CodeSpace { raw_x, identity, scaled_identity };

struct SeparabilityReport {
    std::optional<double> rmse; // mean reconstruction error, when available
    double sce = 0.0;           // silhouette, Euclidean distance
    double scc = 0.0;           // silhouette, cosine distance
    std::optional<double> ch;   // empty iff ch_status != "ok"
    std::string ch_status = "ok";
    int n_samples = 0;
    int n_classes = 0;
    CodeSpace space = CodeSpace::scaled_identity;
};

/**
 * Evaluates both silhouettes and CH on the codes mapped into `space`
 * (default: the s * x/||x|| vectors the model consumes). per_mesh_rmse, when
 * non-empty, is averaged into the rmse field. A tr W = 0 CH is reported as
 * ch_status "+inf" with no numeric value.
 */
SeparabilityReport build_report(const std::vector<ShapeCode>& codes,
                                const std::vector<int>& labels,
                                const std::vector<double>& per_mesh_rmse = {},
                                CodeSpace space = CodeSpace::scaled_identity,
                                SilhouetteVariant variant = SilhouetteVariant::standard);

nlohmann::json report_to_json(const SeparabilityReport& report);

/// One aligned human-readable row, e.g. for side-by-side model comparisons.
std::string format_report_row(const std::string& name, const SeparabilityReport& report);

} // namespace sfm

/*
 * sfm - Sphere Face Model: a linear 3D shape model with a hyperspherical
 * latent space.
 *
 * File: include/sfm/corpus.hpp
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

#include "sfm/mesh.hpp"
#include "sfm/model.hpp"

#include <string>
#include <utility>
#include <vector>

namespace sfm {

/**
 * A set of topology-consistent meshes with one integer identity label per
 * mesh. Labels are dense in [0, n_classes).
 */
struct LabeledCorpus {
    std::vector<Mesh> meshes;
    std::vector<int> labels;
    int n_classes = 0;
};

/// Collects every violation (size mismatch, inconsistent topology, label out
/// of range, class with zero samples) and throws one std::invalid_argument
/// enumerating all of them.
void validate_corpus(const LabeledCorpus& corpus);

/**
 * Corpus directory layout: one OBJ per sample plus labels.csv with header
 * `filename,identity`. Loading reads meshes in labels.csv row order and
 * densifies labels if needed; n_classes = number of distinct identities.
 */
LabeledCorpus load_corpus_dir(const std::string& dir);

/// Writes mesh_0000.obj ... plus labels.csv. Creates the directory if absent.
void save_corpus_dir(const LabeledCorpus& corpus, const std::string& dir);

/**
 * Code table CSV with header `label,s,x_0,...,x_{d-1}`, one row per sample.
 * Floats are written with 17 significant digits so the table round-trips to
 * the exact same doubles.
 */
void save_codes_csv(const std::vector<ShapeCode>& codes, const std::vector<int>& labels,
                    const std::string& path);
std::pair<std::vector<ShapeCode>, std::vector<int>> load_codes_csv(const std::string& path);

} // namespace sfm

/*
 * sfm - Sphere Face Model: a linear 3D shape model with a hyperspherical
 * latent space.
 *
 * File: src/corpus.cpp
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
#include "sfm/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace sfm {

namespace fs = std::filesystem;

void validate_corpus(const LabeledCorpus& corpus)
{
    std::vector<std::string> problems;
    if (corpus.meshes.empty())
    {
        problems.push_back("corpus is empty");
    }
    if (corpus.meshes.size() != corpus.labels.size())
    {
        problems.push_back("have " + std::to_string(corpus.meshes.size()) + " meshes but " +
                           std::to_string(corpus.labels.size()) + " labels");
    }
    if (!corpus.meshes.empty())
    {
        const int n = corpus.meshes.front().vertex_count;
        for (std::size_t i = 1; i < corpus.meshes.size(); ++i)
        {
            if (corpus.meshes[i].vertex_count != n)
            {
                problems.push_back("mesh " + std::to_string(i) + " has " +
                                   std::to_string(corpus.meshes[i].vertex_count) +
                                   " vertices, expected " + std::to_string(n));
            }
        }
    }
    std::vector<int> class_counts(std::max(corpus.n_classes, 0), 0);
    for (std::size_t i = 0; i < corpus.labels.size(); ++i)
    {
        const int label = corpus.labels[i];
        if (label < 0 || label >= corpus.n_classes)
        {
            problems.push_back("label " + std::to_string(label) + " of sample " + std::to_string(i) +
                               " outside [0, " + std::to_string(corpus.n_classes) + ")");
        } else
        {
            ++class_counts[label];
        }
    }
    for (int k = 0; k < static_cast<int>(class_counts.size()); ++k)
    {
        if (class_counts[k] == 0)
        {
            problems.push_back("class " + std::to_string(k) + " has no samples");
        }
    }
    if (!problems.empty())
    {
        std::string message = "invalid corpus (" + std::to_string(problems.size()) + " problems):";
        for (const auto& p : problems)
        {
            message += "\n  - " + p;
        }
        throw std::invalid_argument(message);
    }
}

LabeledCorpus load_corpus_dir(const std::string& dir)
{
    const fs::path labels_path = fs::path(dir) / "labels.csv";
    std::ifstream file(labels_path);
    if (!file)
    {
        throw std::runtime_error("load_corpus_dir: cannot open " + labels_path.string());
    }
    std::string line;
    if (!std::getline(file, line) || line != "filename,identity")
    {
        throw std::runtime_error("load_corpus_dir: " + labels_path.string() +
                                 ": expected header 'filename,identity'");
    }
    LabeledCorpus corpus;
    std::map<std::string, int> dense; // original identity token -> dense label
    int line_no = 1;
    while (std::getline(file, line))
    {
        ++line_no;
        if (line.empty())
            continue;
        const auto comma = line.rfind(',');
        if (comma == std::string::npos || comma == 0 || comma + 1 == line.size())
        {
            throw std::runtime_error("load_corpus_dir: " + labels_path.string() + ":" +
                                     std::to_string(line_no) + ": malformed row '" + line + "'");
        }
        const std::string filename = line.substr(0, comma);
        const std::string identity = line.substr(comma + 1);
        const auto [it, inserted] = dense.try_emplace(identity, static_cast<int>(dense.size()));
        corpus.labels.push_back(it->second);
        corpus.meshes.push_back(load_obj((fs::path(dir) / filename).string()));
    }
    corpus.n_classes = static_cast<int>(dense.size());
    validate_corpus(corpus);
    return corpus;
}

void save_corpus_dir(const LabeledCorpus& corpus, const std::string& dir)
{
    validate_corpus(corpus);
    fs::create_directories(dir);
    std::ofstream labels(fs::path(dir) / "labels.csv");
    if (!labels)
    {
        throw std::runtime_error("save_corpus_dir: cannot open labels.csv in " + dir);
    }
    labels << "filename,identity\n";
    for (std::size_t i = 0; i < corpus.meshes.size(); ++i)
    {
        char name[32];
        std::snprintf(name, sizeof(name), "mesh_%04zu.obj", i);
        save_obj(corpus.meshes[i], (fs::path(dir) / name).string());
        labels << name << "," << corpus.labels[i] << "\n";
    }
    if (!labels)
    {
        throw std::runtime_error("save_corpus_dir: write to labels.csv failed");
    }
}

namespace {

std::string format_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void save_codes_csv(const std::vector<ShapeCode>& codes, const std::vector<int>& labels,
                    const std::string& path)
{
    if (codes.size() != labels.size())
    {
        throw std::invalid_argument("save_codes_csv: " + std::to_string(codes.size()) +
                                    " codes but " + std::to_string(labels.size()) + " labels");
    }
    if (codes.empty())
    {
        throw std::invalid_argument("save_codes_csv: nothing to write");
    }
    const Eigen::Index d = codes.front().x.size();
    std::ofstream file(path);
    if (!file)
    {
        throw std::runtime_error("save_codes_csv: cannot open " + path + " for writing");
    }
    file << "label,s";
    for (Eigen::Index j = 0; j < d; ++j)
    {
        file << ",x_" << j;
    }
    file << "\n";
    for (std::size_t i = 0; i < codes.size(); ++i)
    {
        if (codes[i].x.size() != d)
        {
            throw std::invalid_argument("save_codes_csv: code " + std::to_string(i) +
                                        " has inconsistent dimension");
        }
        file << labels[i] << "," << format_double(codes[i].s);
        for (Eigen::Index j = 0; j < d; ++j)
        {
            file << "," << format_double(codes[i].x[j]);
        }
        file << "\n";
    }
    if (!file)
    {
        throw std::runtime_error("save_codes_csv: write to " + path + " failed");
    }
}

std::pair<std::vector<ShapeCode>, std::vector<int>> load_codes_csv(const std::string& path)
{
    std::ifstream file(path);
    if (!file)
    {
        throw std::runtime_error("load_codes_csv: cannot open " + path);
    }
    std::string line;
    if (!std::getline(file, line))
    {
        throw std::runtime_error("load_codes_csv: " + path + ": empty file");
    }
    // Header determines d; rows must match it exactly.
    int d = 0;
    {
        std::istringstream header(line);
        std::string field;
        if (!std::getline(header, field, ',') || field != "label")
        {
            throw std::runtime_error("load_codes_csv: " + path + ": expected 'label' column first");
        }
        if (!std::getline(header, field, ',') || field != "s")
        {
            throw std::runtime_error("load_codes_csv: " + path + ": expected 's' column second");
        }
        while (std::getline(header, field, ','))
        {
            if (field != "x_" + std::to_string(d))
            {
                throw std::runtime_error("load_codes_csv: " + path + ": unexpected column '" +
                                         field + "'");
            }
            ++d;
        }
        if (d == 0)
        {
            throw std::runtime_error("load_codes_csv: " + path + ": no coefficient columns");
        }
    }
    std::vector<ShapeCode> codes;
    std::vector<int> labels;
    int line_no = 1;
    while (std::getline(file, line))
    {
        ++line_no;
        if (line.empty())
            continue;
        std::istringstream row(line);
        std::string field;
        try
        {
            if (!std::getline(row, field, ','))
                throw std::invalid_argument("missing label");
            labels.push_back(std::stoi(field));
            ShapeCode code;
            if (!std::getline(row, field, ','))
                throw std::invalid_argument("missing s");
            code.s = std::stod(field);
            code.x.resize(d);
            for (int j = 0; j < d; ++j)
            {
                if (!std::getline(row, field, ','))
                    throw std::invalid_argument("missing x_" + std::to_string(j));
                code.x[j] = std::stod(field);
            }
            if (std::getline(row, field, ','))
                throw std::invalid_argument("trailing field '" + field + "'");
            codes.push_back(std::move(code));
        } catch (const std::exception& e)
        {
            throw std::runtime_error("load_codes_csv: " + path + ":" + std::to_string(line_no) +
                                     ": " + e.what());
        }
    }
    if (codes.empty())
    {
        throw std::runtime_error("load_codes_csv: " + path + ": no rows");
    }
    return {std::move(codes), std::move(labels)};
}

} // namespace sfm

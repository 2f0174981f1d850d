/******************************************************************************
 * Copyright 2026 The sigdisc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * 	http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 * @file config.hpp Pipeline configuration.
 *
 * File format: `[section]` headers and `key = value` lines; `#` starts a
 * comment. Values are numbers, quoted or bare strings, or `[a, b, c]` lists.
 * Keys outside a section are top-level (`seed`, `threads`). Overrides use
 * the dotted form `section.key=value`.
 *
 *****************************************************************************/

#pragma once

#include "sigdisc/curves.hpp"
#include "sigdisc/ica.hpp"
#include "sigdisc/sampler.hpp"
#include "sigdisc/standardize.hpp"
#include "sigdisc/synth.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace sigdisc {

struct EvalSettings {
    double test_fraction = 0.2;
    std::vector<double> lambdas{1e-4, 1e-3, 1e-2, 1e-1};
    std::vector<double> l1_ratios{0.1, 0.5, 0.9};
    int folds = 10;
    int n_seeds = 5;
};

struct PipelineConfig {
    PipelineConfig() { ica.k = 6; }

    /// Stage inputs. Empty paths default to the files cmd_synth writes
    /// inside output_dir.
    std::filesystem::path events;
    std::filesystem::path dictionary;
    std::filesystem::path labels;
    std::filesystem::path output_dir = "out";

    std::uint64_t seed = 0;
    int threads = 0;  ///< 0: runtime default

    CurveParams curves;
    SamplingPlan sampling;
    StandardizerOptions standardize;
    IcaConfig ica;
    EvalSettings eval;
    SynthConfig synth;
    double report_threshold = 0.01;
    int histogram_bins = 20;

    /// Stage seeds are derived from `seed` unless set explicitly.
    void resolve_seeds();
    void validate() const;

    std::filesystem::path events_path() const;
    std::filesystem::path dictionary_path() const;
    std::filesystem::path labels_path() const;

    nlohmann::json to_json() const;

    /// Keys explicitly given in the file or overrides.
    std::map<std::string, std::string> explicit_keys;
};

/// Parses `key=value` pairs (dotted keys) onto a config. Throws ConfigError
/// on unknown keys or malformed values.
void apply_setting(PipelineConfig& cfg, const std::string& key, const std::string& value);

PipelineConfig parse_config(std::istream& in, const std::vector<std::string>& overrides = {});
PipelineConfig load_config(const std::filesystem::path& path,
                           const std::vector<std::string>& overrides = {});

}  // namespace sigdisc

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
 * @file pipeline.hpp Stage commands. Every command reads its inputs from the
 * config paths / output directory and writes its artifacts plus a run
 * manifest to `<output_dir>/manifests/<command>.json`.
 *
 * Output directory layout:
 *   events.jsonl dictionary.json labels.csv ground_truth*   cmd_synth
 *   curves_<record>.csv                                      cmd_curves
 *   population_medians.json discovery.sgmx                   cmd_sample random
 *   evaluation.sgmx                                          cmd_sample index
 *   standardizer.json model.sgmodel discovery_expressions.sgmx   cmd_fit
 *   evaluation_standardized.sgmx evaluation_expressions.sgmx     cmd_project
 *   reports/                                                 cmd_report
 *   eval/                                                    cmd_eval
 *   metrics.json                                             cmd_e2e
 *
 *****************************************************************************/

#pragma once

#include "sigdisc/config.hpp"
#include "sigdisc/error.hpp"
#include "sigdisc/ica.hpp"
#include "sigdisc/synth.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace sigdisc {

/// An Error tagged with the stage that raised it. Keeps the category.
class StageError : public Error {
public:
    StageError(std::string stage, ErrorCategory category, const std::string& what)
        : Error(category, what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct CommandOptions {
    SamplingMode sample_mode = SamplingMode::RandomDensity;
    std::optional<int> source;            ///< cmd_report: one signature only
    std::optional<std::string> record_id; ///< cmd_curves: default first record
};

void cmd_synth(const PipelineConfig& cfg);
void cmd_curves(const PipelineConfig& cfg, const CommandOptions& opts = {});
void cmd_sample(const PipelineConfig& cfg, const CommandOptions& opts = {});
void cmd_fit(const PipelineConfig& cfg);
void cmd_project(const PipelineConfig& cfg);
void cmd_report(const PipelineConfig& cfg, const CommandOptions& opts = {});
/// Returns the metrics it writes to eval/metrics.json.
nlohmann::json cmd_eval(const PipelineConfig& cfg);
/// synth (unless paths.events is set), sample, fit, sample index, project,
/// report, eval, and recovery metrics when ground truth is present.
/// Returns the metrics it writes to metrics.json.
nlohmann::json cmd_e2e(const PipelineConfig& cfg);

/// Planted signatures expressed in the standardized discovery space: the
/// least-squares regression of centered `z` on the centered planted
/// expressions of each sampled column's record. p x k*.
Eigen::MatrixXd planted_signatures(const SampleMatrix& z, const GroundTruth& truth);

/// Planted expressions (k* x n) for each column of `z`.
Eigen::MatrixXd planted_expressions(const SampleMatrix& z, const GroundTruth& truth);

struct RecoveryMetrics {
    MatchReport signatures;
    MatchReport expressions;
    double amari = 0.0;
};

RecoveryMetrics recovery_metrics(const SignatureModel& model, const SampleMatrix& z,
                                 const Eigen::MatrixXd& expressions,
                                 const GroundTruth& truth);

/// Reads what write_ground_truth wrote. Throws MissingInputError.
GroundTruth read_ground_truth(const std::filesystem::path& dir);

}  // namespace sigdisc

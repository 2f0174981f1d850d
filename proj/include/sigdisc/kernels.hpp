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
 * @file kernels.hpp Data-parallel hot loops.
 *
 * Each kernel in sigdisc::kernels runs under OpenMP and produces results that
 * do not depend on the worker count: every output element is computed by a
 * single iteration, and the one reduction over columns (fastica_step) sums
 * fixed-size blocks in block order. sigdisc::kernels::serial holds plain
 * single-threaded versions written for clarity, used by tests as a reference
 * and by the benchmark as a baseline.
 *
 *****************************************************************************/

#pragma once

#include "sigdisc/core_model.hpp"
#include "sigdisc/curves.hpp"
#include "sigdisc/sampler.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace sigdisc {

enum class Contrast { LogCosh, Cube };

namespace kernels {

/// Columns per partial sum in fastica_step.
inline constexpr Eigen::Index kReductionBlock = 2048;

/// Row means and population standard deviations (two-pass).
void row_moments(const Eigen::MatrixXd& x, Eigen::VectorXd& mean,
                 Eigen::VectorXd& stddev);

/// (1/n) (x - mean)(x - mean)^T.
Eigen::MatrixXd covariance(const Eigen::MatrixXd& x, const Eigen::VectorXd& mean);

/// Per-row transform: Measurement/Medication (x - mean)/scale,
/// Code log(x + eps)/scale, Demographic identity.
Eigen::MatrixXd standardize_rows(const Eigen::MatrixXd& x,
                                 std::span<const Mode> modes,
                                 std::span<const double> means,
                                 std::span<const double> scales, double eps);

/// One fixed-point update for every row w_i of `w` over whitened data `y`:
/// w_i+ = E[y g(w_i.y)] - E[g'(w_i.y)] w_i. Not decorrelated.
Eigen::MatrixXd fastica_step(const Eigen::MatrixXd& w, const Eigen::MatrixXd& y,
                             Contrast contrast, double alpha);

/// Builds curvesets and draws cross-sections for every record.
/// RandomDensity: Binomial(l, d) distinct days per record.
/// FixedIndexDay: the record is cut at its index day (default: its last day)
/// before curves are built, then sampled once at that day.
std::vector<RecordSamples> sample_records(const std::vector<EventRecord>& records,
                                          const ChannelDictionary& dict,
                                          const CurveParams& curve_params,
                                          const SamplingPlan& plan);

namespace serial {

void row_moments(const Eigen::MatrixXd& x, Eigen::VectorXd& mean,
                 Eigen::VectorXd& stddev);
Eigen::MatrixXd covariance(const Eigen::MatrixXd& x, const Eigen::VectorXd& mean);
Eigen::MatrixXd standardize_rows(const Eigen::MatrixXd& x,
                                 std::span<const Mode> modes,
                                 std::span<const double> means,
                                 std::span<const double> scales, double eps);
Eigen::MatrixXd fastica_step(const Eigen::MatrixXd& w, const Eigen::MatrixXd& y,
                             Contrast contrast, double alpha);
std::vector<RecordSamples> sample_records(const std::vector<EventRecord>& records,
                                          const ChannelDictionary& dict,
                                          const CurveParams& curve_params,
                                          const SamplingPlan& plan);

}  // namespace serial

/// Shared by both sample_records versions: one record end to end.
RecordSamples sample_one_record(const EventRecord& rec,
                                const ChannelDictionary& dict,
                                const CurveParams& curve_params,
                                const SamplingPlan& plan);

}  // namespace kernels
}  // namespace sigdisc

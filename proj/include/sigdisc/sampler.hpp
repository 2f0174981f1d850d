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
 * @file sampler.hpp Cross-section sampling from curvesets.
 *
 *****************************************************************************/

#pragma once

#include "sigdisc/core_model.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace sigdisc {

enum class SamplingMode {
    /// c ~ Binomial(l, d) distinct days per record, uniformly at random.
    RandomDensity,
    /// Exactly one sample per record at its index day.
    FixedIndexDay,
};

SamplingMode parse_sampling_mode(std::string_view s);
const char* to_string(SamplingMode m);

struct SamplingPlan {
    double density = 1.0 / (3.0 * 365.0);
    std::uint64_t seed = 0;
    SamplingMode mode = SamplingMode::RandomDensity;

    void validate() const;
};

struct CrossSection {
    int day = 0;
    Eigen::VectorXd values;
};

struct RecordSamples {
    std::string record_id;
    std::vector<CrossSection> samples;
};

/// Number of cross-sections to draw for a record of length l. The stream is
/// keyed by record id so the result does not depend on processing order.
int draw_sample_count(int length_days, const SamplingPlan& plan,
                      std::string_view record_id);

/// Sorted, distinct days drawn uniformly from [0, length_days].
std::vector<int> draw_sample_days(int length_days, const SamplingPlan& plan,
                                  std::string_view record_id);

RecordSamples sample_record(const CurveSet& cs, const SamplingPlan& plan);

/// Throws ValidationError when day is outside [0, l].
Eigen::VectorXd sample_at_day(const CurveSet& cs, int day);

/// Concatenates per-record samples in the given record order, samples within a
/// record in day order.
SampleMatrix assemble_matrix(const std::vector<RecordSamples>& samples,
                             const ChannelDictionary& dict);

}  // namespace sigdisc

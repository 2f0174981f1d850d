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
 *****************************************************************************/

#include "sigdisc/sampler.hpp"
#include "sigdisc/error.hpp"
#include "sigdisc/rng.hpp"

#include <algorithm>
#include <iterator>
#include <numeric>
#include <random>

namespace sigdisc {

SamplingMode parse_sampling_mode(std::string_view s)
{
    if (s == "random" || s == "random_density") return SamplingMode::RandomDensity;
    if (s == "index" || s == "fixed_index_day") return SamplingMode::FixedIndexDay;
    throw ConfigError("unknown sampling mode '" + std::string(s) +
                      "' (expected random or index)");
}

const char* to_string(SamplingMode m)
{
    return m == SamplingMode::RandomDensity ? "random" : "index";
}

void SamplingPlan::validate() const
{
    if (!(density > 0.0 && density <= 1.0))
        throw ConfigError("sampling density must be in (0, 1]");
}

namespace {

Rng record_stream(const SamplingPlan& plan, std::string_view record_id)
{
    return Rng(derive_seed(plan.seed, "sample", record_id));
}

}  // namespace

int draw_sample_count(int length_days, const SamplingPlan& plan,
                      std::string_view record_id)
{
    if (length_days <= 0) return 0;
    auto rng = record_stream(plan, record_id);
    return std::binomial_distribution<int>(length_days, plan.density)(rng);
}

std::vector<int> draw_sample_days(int length_days, const SamplingPlan& plan,
                                  std::string_view record_id)
{
    if (length_days <= 0) return {};
    auto rng = record_stream(plan, record_id);
    const int c = std::binomial_distribution<int>(length_days, plan.density)(rng);
    std::vector<int> all(static_cast<std::size_t>(length_days) + 1);
    std::iota(all.begin(), all.end(), 0);
    std::vector<int> days;
    days.reserve(static_cast<std::size_t>(c));
    std::sample(all.begin(), all.end(), std::back_inserter(days), c, rng);
    return days;
}

Eigen::VectorXd sample_at_day(const CurveSet& cs, int day)
{
    if (day < 0 || day > cs.length_days)
        throw ValidationError("record '" + cs.record_id + "': sample day " +
                              std::to_string(day) + " outside [0, " +
                              std::to_string(cs.length_days) + "]");
    return cs.values.col(day);
}

RecordSamples sample_record(const CurveSet& cs, const SamplingPlan& plan)
{
    RecordSamples out;
    out.record_id = cs.record_id;
    if (plan.mode != SamplingMode::RandomDensity)
        throw ConfigError("sample_record requires the random density mode");
    for (int day : draw_sample_days(cs.length_days, plan, cs.record_id))
        out.samples.push_back({day, sample_at_day(cs, day)});
    return out;
}

SampleMatrix assemble_matrix(const std::vector<RecordSamples>& samples,
                             const ChannelDictionary& dict)
{
    const auto p = static_cast<Eigen::Index>(dict.size());
    std::size_t n = 0;
    for (const auto& r : samples) n += r.samples.size();

    SampleMatrix m;
    m.channels = dict.channels();
    m.values.resize(p, static_cast<Eigen::Index>(n));
    m.provenance.reserve(n);
    Eigen::Index col = 0;
    for (const auto& r : samples)
        for (const auto& s : r.samples) {
            if (s.values.size() != p)
                throw ValidationError(
                    "record '" + r.record_id + "': cross-section has " +
                    std::to_string(s.values.size()) + " values, expected " +
                    std::to_string(p));
            m.values.col(col++) = s.values;
            m.provenance.push_back({r.record_id, s.day});
        }
    m.validate();
    return m;
}

}  // namespace sigdisc

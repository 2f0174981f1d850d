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
 * @file standardize.hpp Per-mode row standardization of sample matrices.
 *
 * Measurement and medication rows: (x - mean) / (2 std).
 * Code rows: log(x + eps) / s with s = 2 std(log(row + eps)), not centered.
 * Demographic rows: untouched.
 * Standard deviations are population (1/n) statistics throughout.
 *
 *****************************************************************************/

#pragma once

#include "sigdisc/core_model.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace sigdisc {

/// One code per twenty record-years.
inline constexpr double kDefaultCodeEpsilon = 1.0 / (20.0 * 365.0);

struct StandardizerOptions {
    double epsilon = kDefaultCodeEpsilon;
    double std_floor = 1e-8;
};

struct StandardizerParams {
    std::vector<ChannelSpec> channels;
    /// Row offsets; zero for code and demographic rows.
    std::vector<double> means;
    /// Row divisors; one for demographic rows. Never below std_floor.
    std::vector<double> scales;
    double epsilon = kDefaultCodeEpsilon;
    double std_floor = 1e-8;
    /// Ids of rows whose scale was raised to std_floor.
    std::vector<std::string> floored_channels;
};

StandardizerParams fit_standardizer(const SampleMatrix& x,
                                    const StandardizerOptions& opts = {});

/// Throws ValidationError on channel-order mismatch, NumericError when a code
/// value is at or below -epsilon.
SampleMatrix apply_standardizer(const SampleMatrix& x,
                                const StandardizerParams& params);

SampleMatrix invert_standardizer(const SampleMatrix& z,
                                 const StandardizerParams& params);

/// Single-value forms of the row transforms.
double standardize_value(double x, std::size_t row,
                         const StandardizerParams& params);
double unstandardize_value(double z, std::size_t row,
                           const StandardizerParams& params);

void write_standardizer(const StandardizerParams& params,
                        const std::filesystem::path& path);
StandardizerParams read_standardizer(const std::filesystem::path& path);

}  // namespace sigdisc

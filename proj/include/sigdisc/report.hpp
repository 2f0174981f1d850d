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
 * @file report.hpp Signature reports in original channel units.
 *
 * Per unit of expression a signature coefficient c on channel j means
 *   code          multiply intensity by exp(c * s_j)
 *   measurement   add c * 2 sd_j
 *   medication    add c * 2 sd_j to the taking probability
 *   demographic   add c to the indicator probability
 * where s_j and 2 sd_j are the standardizer row scales.
 *
 *****************************************************************************/

#pragma once

#include "sigdisc/core_model.hpp"
#include "sigdisc/ica.hpp"
#include "sigdisc/standardize.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace sigdisc {

inline constexpr double kDefaultReportThreshold = 0.01;
inline constexpr std::size_t kReportMinEntries = 10;

struct EffectEntry {
    std::string channel;
    Mode mode = Mode::Measurement;
    double coefficient = 0.0;  ///< standardized signature entry
    double effect = 0.0;       ///< factor for codes, additive change otherwise
    std::string rendered;      ///< "x1.07" or "+0.0382"
};

struct SignatureReport {
    int signature = 0;
    double threshold = kDefaultReportThreshold;
    std::size_t above_threshold = 0;
    std::vector<EffectEntry> entries;
    std::string histogram_csv;  ///< empty when no expressions were given
};

/// Per-unit-expression effect of a coefficient on a channel.
double unit_effect(Mode mode, double coefficient, double row_scale);

/// Effect at an expression level: factor^e for codes, effect * e otherwise.
double effect_at_expression(const EffectEntry& e, double expression);

/// Number with `digits` significant figures, no exponent for ordinary
/// magnitudes ("1.07", "0.0382", "0.006").
std::string format_significant(double v, int digits = 3);

/// "x1.07^10.0 = 1.96" for codes, "0.006 x 10.0 = +0.06" otherwise.
/// Probability modes print the result to two decimals, the rest to three
/// significant figures.
std::string render_compounding(const EffectEntry& e, double expression);

/// Entries sorted by |coefficient| descending (channel id breaks ties),
/// keeping max(10, #entries with |coefficient| >= threshold), capped at p.
/// Throws ValidationError when `source` is out of range or channels differ.
SignatureReport render_signature(const SignatureModel& model,
                                 const StandardizerParams& standardizer,
                                 int source,
                                 double threshold = kDefaultReportThreshold,
                                 const Eigen::MatrixXd* expressions = nullptr,
                                 int histogram_bins = 20);

std::string format_report(const SignatureReport& r, double epsilon);

struct Histogram {
    std::vector<double> edges;  ///< bins + 1
    std::vector<std::size_t> counts;
};

/// Uniform bins over [min, max]; the last bin is closed. Constant input puts
/// everything in the first bin. Throws ValidationError when empty.
Histogram expression_histogram(const Eigen::Ref<const Eigen::RowVectorXd>& row, int bins);
std::string histogram_csv(const Histogram& h);

/// signature_NNN.txt and signature_NNN_hist.csv for every source.
void write_report_bundle(const SignatureModel& model,
                         const StandardizerParams& standardizer,
                         const Eigen::MatrixXd& expressions,
                         const std::filesystem::path& dir,
                         double threshold = kDefaultReportThreshold,
                         int histogram_bins = 20);

std::filesystem::path report_path(const std::filesystem::path& dir, int source);

}  // namespace sigdisc

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
 * @file synth.hpp Planted-source generators and recovery metrics.
 *
 * Each synthetic record carries a vector of nonnegative source expressions.
 * Sources act on channels through a sparse loading matrix:
 *   codes        homogeneous Poisson events, rate = base * exp(sum L s)
 *   measurements value = channel mean + sum L s + Gaussian noise
 *   medications  each reconciliation mentions the drug with probability
 *                logistic(bias + sum L s)
 *   demographics indicator ~ Bernoulli(logistic(bias + sum L s))
 *
 *****************************************************************************/

#pragma once

#include "sigdisc/core_model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

namespace sigdisc {

struct SynthConfig {
    int records = 2000;
    int codes = 20;
    int measurements = 20;
    int medications = 15;
    int demographics = 5;
    int sources = 6;
    /// Probability that a source is active in a record, in (0, 1].
    double sparsity = 1.0;
    /// Fraction of channels each source loads on, in (0, 1].
    double loading_density = 0.35;
    /// Loading magnitudes per unit expression, by mode.
    double code_effect = 0.8;        ///< log-rate
    double measurement_effect = 1.0; ///< value units (noise sd is 1)
    double medication_effect = 1.5;  ///< logit
    double demographic_effect = 1.0; ///< logit
    double measurement_noise = 1.0;
    /// Baseline code rate in events/day.
    double base_code_rate = 1.0 / 120.0;
    /// Measurement observations per day and reconciliations per day.
    double measurement_rate = 1.0 / 90.0;
    double reconciliation_rate = 1.0 / 180.0;
    int min_length_days = 1500;
    int max_length_days = 6000;
    /// Planted source that drives the binary label.
    int label_source = 0;
    /// Target fraction of positive labels, in (0, sparsity).
    double label_positive_rate = 0.3;
    std::uint64_t seed = 0;

    void validate() const;
};

struct GroundTruth {
    /// p x k planted loadings in natural units (log-rate, value, logit).
    Eigen::MatrixXd signatures;
    /// k x records planted expressions (constant over each record's span).
    Eigen::MatrixXd expressions;
    std::vector<std::string> record_ids;
    ChannelDictionary dictionary;
    SynthConfig config;
    double label_threshold = 0.0;
};

struct SynthDataset {
    std::vector<EventRecord> records;
    std::vector<int> labels;
    GroundTruth truth;
};

ChannelDictionary synth_dictionary(const SynthConfig& cfg);

/// Records are generated independently from per-record seed streams.
/// Throws ConfigError on invalid configuration and NumericError when a
/// channel's event rate would overflow.
SynthDataset generate_dataset(const SynthConfig& cfg);

enum class SourceFamily { Laplace, Uniform, Gaussian };
SourceFamily parse_source_family(std::string_view s);

struct MixtureOptions {
    int channels = 0;             ///< p; 0 means p = k
    double condition = 3.0;       ///< ratio of largest to smallest singular value
    double loading_density = 1.0; ///< fraction of nonzero entries per column
    double noise = 0.0;           ///< additive Gaussian noise sd
    std::uint64_t seed = 0;
};

struct Mixture {
    Eigen::MatrixXd x;       ///< p x n
    Eigen::MatrixXd mixing;  ///< p x k
    Eigen::MatrixXd sources; ///< k x n, zero mean, unit variance
};

/// x = mixing * sources (+ noise). Sources are iid from `family`.
Mixture generate_mixture_matrix(int k, Eigen::Index n, SourceFamily family,
                                const MixtureOptions& opts = {});

/// Amari index of P = pinv(a_est) a_true, normalized to [0, 1]; 0 exactly
/// when P is a scaled permutation.
double amari_index(const Eigen::MatrixXd& a_est, const Eigen::MatrixXd& a_true);

struct SignatureMatch {
    int estimated = 0;
    int truth = 0;
    double abs_correlation = 0.0;
};

struct MatchReport {
    std::vector<SignatureMatch> pairs;
    double mean_abs_correlation = 0.0;
    double min_abs_correlation = 0.0;
    /// False when correlations were undefined (a constant column).
    bool defined = true;
};

/// Greedy matching on |Pearson correlation| between columns.
MatchReport match_signatures(const Eigen::MatrixXd& a_est,
                             const Eigen::MatrixXd& a_true);

/// Pearson correlation of two vectors; nullopt when either is constant.
std::optional<double> pearson(const Eigen::Ref<const Eigen::VectorXd>& a,
                              const Eigen::Ref<const Eigen::VectorXd>& b);

void write_ground_truth(const GroundTruth& truth,
                        const std::filesystem::path& dir);
void write_labels(const std::vector<EventRecord>& records,
                  const std::vector<int>& labels,
                  const std::filesystem::path& path);
/// Returns record_id -> label in file order.
std::vector<std::pair<std::string, int>> read_labels(
    const std::filesystem::path& path);

}  // namespace sigdisc

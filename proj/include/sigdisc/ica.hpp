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
 * @file ica.hpp Whitening, symmetric fixed-point ICA and expression
 * projection.
 *
 * Conventions for a fitted model on a p x n matrix Z with k sources:
 *   Z - mean ~= mixing * S,   S = unmixing * (Z - mean)
 * where mixing is p x k (columns are signatures) and every row of S on the
 * discovery matrix has population standard deviation 0.5 and nonnegative
 * skewness. unmixing is the left pseudo-inverse of mixing.
 *
 *****************************************************************************/

#pragma once

#include "sigdisc/core_model.hpp"
#include "sigdisc/kernels.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

namespace sigdisc {

Contrast parse_contrast(std::string_view s);
const char* to_string(Contrast c);

struct IcaConfig {
    int k = 0;
    int max_iter = 1000;
    double tol = 1e-6;
    Contrast contrast = Contrast::LogCosh;
    double alpha = 1.0;
    std::uint64_t seed = 0;

    /// Throws ConfigError unless 1 <= k <= min(p, n) and tol > 0.
    void validate(Eigen::Index p, Eigen::Index n) const;
};

struct Whitening {
    Eigen::VectorXd mean;           ///< p
    Eigen::MatrixXd whitener;       ///< k x p, D^{-1/2} U^T
    Eigen::MatrixXd dewhitener;     ///< p x k, U D^{1/2} (pseudo-inverse)
    Eigen::VectorXd variances;      ///< all p covariance eigenvalues, descending
    Eigen::MatrixXd whitened;       ///< k x n
    Eigen::Index rank = 0;
};

/// Centers `z` and projects onto its top-k principal directions scaled to unit
/// variance. Throws NumericError if the centered matrix has rank below k.
Whitening whiten(const Eigen::MatrixXd& z, int k);

/// (W W^T)^{-1/2} W.
Eigen::MatrixXd symmetric_decorrelation(const Eigen::MatrixXd& w);

/// Population skewness of a row.
double skewness(const Eigen::Ref<const Eigen::RowVectorXd>& row);

struct ConvergenceReport {
    int iterations = 0;
    double final_delta = 0.0;
    bool converged = false;
    /// Largest |W W^T - I| seen after any iteration.
    double max_orthogonality_error = 0.0;
};

struct SignatureModel {
    int k = 0;
    std::uint64_t seed = 0;
    std::vector<ChannelSpec> channels;  ///< empty when fitted on a bare matrix
    Eigen::VectorXd mean;               ///< p
    Eigen::MatrixXd whitener;           ///< k x p
    Eigen::MatrixXd rotation;           ///< k x k orthonormal, whitened space
    Eigen::MatrixXd mixing;             ///< p x k, scales and signs folded in
    Eigen::MatrixXd unmixing;           ///< k x p
    Eigen::VectorXd row_scales;         ///< k, the 2 std divisors (> 0)
    Eigen::VectorXd signs;              ///< k, +1 or -1
    Eigen::VectorXd variances;          ///< p whitening eigenvalues
    ConvergenceReport convergence;
};

struct IcaFit {
    SignatureModel model;
    Eigen::MatrixXd expressions;  ///< k x n discovery expressions
};

IcaFit fit_ica(const Eigen::MatrixXd& z, const IcaConfig& cfg);
/// Same, recording the channel order so later projections can be checked.
IcaFit fit_ica(const SampleMatrix& z, const IcaConfig& cfg);

/// Flips sources whose expression row has negative skewness. Rows with
/// |skewness| < 1e-12 are flipped when their largest-magnitude signature
/// entry is negative. Mixing columns and unmixing rows flip in tandem.
void orient_signs(SignatureModel& model, Eigen::MatrixXd& expressions);

/// S = unmixing * (z - mean).
Eigen::MatrixXd project(const SignatureModel& model, const Eigen::MatrixXd& z);
/// Checks channel order first.
Eigen::MatrixXd project(const SignatureModel& model, const SampleMatrix& z);

/// mixing * s + mean.
Eigen::MatrixXd reconstruct(const SignatureModel& model, const Eigen::MatrixXd& s);

/// Single-file model container: magic "SGMD", u32 version, u64 manifest
/// length, JSON manifest, then one SGMX block per component in manifest
/// order.
void write_model(const SignatureModel& model, const std::filesystem::path& path);
SignatureModel read_model(const std::filesystem::path& path);

}  // namespace sigdisc

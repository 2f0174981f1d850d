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

#include "sigdisc/kernels.hpp"
#include "sigdisc/error.hpp"
#include "sigdisc/parallel.hpp"

#include <cmath>

namespace sigdisc::kernels {

void row_moments(const Eigen::MatrixXd& x, Eigen::VectorXd& mean,
                 Eigen::VectorXd& stddev)
{
    const Eigen::Index p = x.rows();
    const Eigen::Index n = x.cols();
    mean.setZero(p);
    stddev.setZero(p);
    if (n == 0) return;
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < p; ++i) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) s += x(i, j);
        const double mu = s / static_cast<double>(n);
        double ss = 0.0, corr = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double d = x(i, j) - mu;
            ss += d * d;
            corr += d;
        }
        // Two-pass with the compensation term of the corrected algorithm.
        const double var =
            (ss - corr * corr / static_cast<double>(n)) / static_cast<double>(n);
        mean(i) = mu + corr / static_cast<double>(n);
        stddev(i) = std::sqrt(std::max(var, 0.0));
    }
}

Eigen::MatrixXd covariance(const Eigen::MatrixXd& x, const Eigen::VectorXd& mean)
{
    const Eigen::Index p = x.rows();
    const Eigen::Index n = x.cols();
    const Eigen::MatrixXd xc_t = (x.colwise() - mean).transpose();  // n x p
    Eigen::MatrixXd c(p, p);
#pragma omp parallel for schedule(dynamic, 1)
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = i; j < p; ++j) {
            const double v = xc_t.col(i).dot(xc_t.col(j)) / static_cast<double>(n);
            c(i, j) = v;
            c(j, i) = v;
        }
    return c;
}

Eigen::MatrixXd standardize_rows(const Eigen::MatrixXd& x,
                                 std::span<const Mode> modes,
                                 std::span<const double> means,
                                 std::span<const double> scales, double eps)
{
    const Eigen::Index p = x.rows();
    const Eigen::Index n = x.cols();
    Eigen::MatrixXd z(p, n);
#pragma omp parallel for schedule(static)
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < p; ++i) {
            const double v = x(i, j);
            switch (modes[i]) {
            case Mode::Measurement:
            case Mode::Medication:
                z(i, j) = (v - means[i]) / scales[i];
                break;
            case Mode::Code:
                z(i, j) = std::log(v + eps) / scales[i];
                break;
            case Mode::Demographic:
                z(i, j) = v;
                break;
            }
        }
    return z;
}

namespace {

void apply_contrast(Eigen::MatrixXd& u, Eigen::MatrixXd& gp, Contrast contrast,
                    double alpha)
{
    gp.resize(u.rows(), u.cols());
    if (contrast == Contrast::LogCosh) {
        for (Eigen::Index j = 0; j < u.cols(); ++j)
            for (Eigen::Index i = 0; i < u.rows(); ++i) {
                const double t = std::tanh(alpha * u(i, j));
                u(i, j) = t;
                gp(i, j) = alpha * (1.0 - t * t);
            }
    } else {
        for (Eigen::Index j = 0; j < u.cols(); ++j)
            for (Eigen::Index i = 0; i < u.rows(); ++i) {
                const double v = u(i, j);
                u(i, j) = v * v * v;
                gp(i, j) = 3.0 * v * v;
            }
    }
}

}  // namespace

Eigen::MatrixXd fastica_step(const Eigen::MatrixXd& w, const Eigen::MatrixXd& y,
                             Contrast contrast, double alpha)
{
    const Eigen::Index k = w.rows();
    const Eigen::Index n = y.cols();
    const Eigen::Index blocks = (n + kReductionBlock - 1) / kReductionBlock;

    std::vector<Eigen::MatrixXd> yg(static_cast<std::size_t>(blocks));
    std::vector<Eigen::VectorXd> gp_sum(static_cast<std::size_t>(blocks));
#pragma omp parallel for schedule(static)
    for (Eigen::Index b = 0; b < blocks; ++b) {
        const Eigen::Index start = b * kReductionBlock;
        const Eigen::Index len = std::min(kReductionBlock, n - start);
        const auto yb = y.middleCols(start, len);
        Eigen::MatrixXd g = w * yb;  // k x len
        Eigen::MatrixXd gp;
        apply_contrast(g, gp, contrast, alpha);
        yg[static_cast<std::size_t>(b)] = g * yb.transpose();  // (k x k): row i = sum g_i y^T
        gp_sum[static_cast<std::size_t>(b)] = gp.rowwise().sum();
    }

    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(k, k);
    Eigen::VectorXd gp_acc = Eigen::VectorXd::Zero(k);
    for (Eigen::Index b = 0; b < blocks; ++b) {
        acc += yg[static_cast<std::size_t>(b)];
        gp_acc += gp_sum[static_cast<std::size_t>(b)];
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    return acc * inv_n - (gp_acc * inv_n).asDiagonal() * w;
}

RecordSamples sample_one_record(const EventRecord& rec,
                                const ChannelDictionary& dict,
                                const CurveParams& curve_params,
                                const SamplingPlan& plan)
{
    if (plan.mode == SamplingMode::RandomDensity)
        return sample_record(build_curveset(rec, dict, curve_params), plan);

    const int day = rec.index_day.value_or(rec.length_days());
    const auto cut = truncate_record(rec, day);
    const auto cs = build_curveset(cut, dict, curve_params, day);
    RecordSamples out;
    out.record_id = rec.record_id;
    out.samples.push_back({day, sample_at_day(cs, day)});
    return out;
}

std::vector<RecordSamples> sample_records(const std::vector<EventRecord>& records,
                                          const ChannelDictionary& dict,
                                          const CurveParams& curve_params,
                                          const SamplingPlan& plan)
{
    std::vector<RecordSamples> out(records.size());
    parallel_for(records.size(), [&](std::size_t i) {
        out[i] = sample_one_record(records[i], dict, curve_params, plan);
    });
    return out;
}

}  // namespace sigdisc::kernels

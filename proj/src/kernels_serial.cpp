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
 * @file kernels_serial.cpp Reference versions of the parallel kernels. Plain
 * loops, no blocking, no OpenMP.
 *
 *****************************************************************************/

#include "sigdisc/kernels.hpp"

#include <cmath>

namespace sigdisc::kernels::serial {

void row_moments(const Eigen::MatrixXd& x, Eigen::VectorXd& mean,
                 Eigen::VectorXd& stddev)
{
    const Eigen::Index n = x.cols();
    mean.setZero(x.rows());
    stddev.setZero(x.rows());
    if (n == 0) return;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) s += x(i, j);
        mean(i) = s / static_cast<double>(n);
        double ss = 0.0;
        for (Eigen::Index j = 0; j < n; ++j)
            ss += (x(i, j) - mean(i)) * (x(i, j) - mean(i));
        stddev(i) = std::sqrt(ss / static_cast<double>(n));
    }
}

Eigen::MatrixXd covariance(const Eigen::MatrixXd& x, const Eigen::VectorXd& mean)
{
    const Eigen::Index p = x.rows();
    const Eigen::Index n = x.cols();
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index a = 0; a < p; ++a)
            for (Eigen::Index b = 0; b < p; ++b)
                c(a, b) += (x(a, j) - mean(a)) * (x(b, j) - mean(b));
    return c / static_cast<double>(n);
}

Eigen::MatrixXd standardize_rows(const Eigen::MatrixXd& x,
                                 std::span<const Mode> modes,
                                 std::span<const double> means,
                                 std::span<const double> scales, double eps)
{
    Eigen::MatrixXd z = x;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            if (modes[i] == Mode::Code)
                z(i, j) = std::log(x(i, j) + eps) / scales[i];
            else if (modes[i] != Mode::Demographic)
                z(i, j) = (x(i, j) - means[i]) / scales[i];
        }
    }
    return z;
}

Eigen::MatrixXd fastica_step(const Eigen::MatrixXd& w, const Eigen::MatrixXd& y,
                             Contrast contrast, double alpha)
{
    const Eigen::Index k = w.rows();
    const Eigen::Index dim = w.cols();
    const Eigen::Index n = y.cols();
    Eigen::MatrixXd out(k, dim);
    for (Eigen::Index i = 0; i < k; ++i) {
        Eigen::VectorXd yg = Eigen::VectorXd::Zero(dim);
        double gp = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double u = w.row(i).dot(y.col(j));
            double g, dg;
            if (contrast == Contrast::LogCosh) {
                g = std::tanh(alpha * u);
                dg = alpha * (1.0 - g * g);
            } else {
                g = u * u * u;
                dg = 3.0 * u * u;
            }
            yg += g * y.col(j);
            gp += dg;
        }
        out.row(i) = (yg / static_cast<double>(n)).transpose() -
                     (gp / static_cast<double>(n)) * w.row(i);
    }
    return out;
}

std::vector<RecordSamples> sample_records(const std::vector<EventRecord>& records,
                                          const ChannelDictionary& dict,
                                          const CurveParams& curve_params,
                                          const SamplingPlan& plan)
{
    std::vector<RecordSamples> out;
    out.reserve(records.size());
    for (const auto& r : records)
        out.push_back(sample_one_record(r, dict, curve_params, plan));
    return out;
}

}  // namespace sigdisc::kernels::serial

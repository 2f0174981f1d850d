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
 * @file evalharness.hpp Supervised evaluation of expressions against raw
 * channels: record-level splits, elastic-net logistic regression, AUC and
 * exact linear attribution.
 *
 * Data layout follows the rest of the library: features x samples.
 *
 *****************************************************************************/

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace sigdisc {

struct Split {
    std::vector<Eigen::Index> train;  ///< column indices
    std::vector<Eigen::Index> test;
};

/// Record-level stratified split. `groups[j]` is the record owning column j;
/// all columns of a record land on the same side. Labels must agree within a
/// record. The test side gets round(fraction * records) records, allocated
/// across classes by largest remainder. Throws ValidationError when a class
/// would be missing from either side.
Split split_records(const std::vector<std::string>& groups,
                    const std::vector<int>& labels, double test_fraction,
                    std::uint64_t seed);

struct Penalty {
    double lambda = 0.0;
    double l1_ratio = 0.5;
};

struct LinearModel {
    Eigen::VectorXd weights;
    double intercept = 0.0;
    Penalty penalty;
    std::uint64_t seed = 0;
    int iterations = 0;
    bool converged = false;
    /// Objective after each iteration (first entry: at the starting point).
    std::vector<double> objective_trace;

    Eigen::VectorXd logits(const Eigen::MatrixXd& x) const;
};

struct TrainOptions {
    int max_iter = 10000;
    /// Stop when the sup norm of the proximal gradient mapping drops below.
    double tol = 1e-6;
};

/// Mean logistic loss of (weights, intercept) and its gradient. `grad` has
/// size d + 1, intercept last.
double logistic_loss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& weights, double intercept,
                     Eigen::VectorXd* grad = nullptr);

/// Minimizes logistic loss + lambda (l1_ratio |w|_1 + (1 - l1_ratio)/2 |w|^2)
/// by monotone accelerated proximal gradient with backtracking, so the
/// objective trace never increases. The intercept is not penalized. Starts
/// from zero; the seed is recorded but the optimization is deterministic.
LinearModel train_elastic_net(const Eigen::MatrixXd& x, const std::vector<int>& y,
                              const Penalty& penalty, std::uint64_t seed,
                              const TrainOptions& opts = {});

double elastic_net_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             const LinearModel& model);

/// P(score of a random positive > score of a random negative), ties 1/2,
/// via midranks. Throws ValidationError if a class is absent.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

/// contribution_j = w_j (x_j - background_j).
Eigen::VectorXd linear_attribution(const LinearModel& model,
                                   const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& background);

struct CvResult {
    Penalty best;
    double best_auc = 0.0;
    struct Cell {
        Penalty penalty;
        std::vector<double> fold_auc;
        double mean_auc = 0.0;
    };
    std::vector<Cell> grid;
};

/// Grid search with record-level stratified k-fold cross-validation. Folds
/// run in parallel; results do not depend on the worker count.
CvResult cross_validate(const Eigen::MatrixXd& x, const std::vector<int>& y,
                        const std::vector<std::string>& groups,
                        const std::vector<double>& lambdas,
                        const std::vector<double>& l1_ratios, int folds,
                        std::uint64_t seed);

struct SweepSummary {
    std::vector<double> auc;  ///< one per seed, in seed order
    double min = 0.0;
    double median = 0.0;
    double max = 0.0;
};

/// Retrains with seeds 0..n_seeds-1 and scores the test set each time.
SweepSummary seed_sweep(const Eigen::MatrixXd& x_train, const std::vector<int>& y_train,
                        const Eigen::MatrixXd& x_test, const std::vector<int>& y_test,
                        const Penalty& penalty, int n_seeds);

/// `seed,auc` rows with a header.
void write_sweep_csv(const SweepSummary& s, std::ostream& out);

/// Columns `idx` of `x` and the matching labels.
Eigen::MatrixXd select_columns(const Eigen::MatrixXd& x,
                               const std::vector<Eigen::Index>& idx);
std::vector<int> select_labels(const std::vector<int>& y,
                               const std::vector<Eigen::Index>& idx);

}  // namespace sigdisc

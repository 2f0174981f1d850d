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

#include "sigdisc/evalharness.hpp"
#include "sigdisc/error.hpp"
#include "sigdisc/parallel.hpp"
#include "sigdisc/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>

namespace sigdisc {

namespace {

struct RecordGroups {
    std::vector<std::string> ids;                  // first-appearance order
    std::vector<int> label;                        // per record
    std::vector<std::vector<Eigen::Index>> columns;
};

RecordGroups group_columns(const std::vector<std::string>& groups,
                           const std::vector<int>& labels)
{
    if (groups.size() != labels.size())
        throw ValidationError("groups and labels differ in length");
    RecordGroups g;
    std::map<std::string, std::size_t> index;
    for (std::size_t j = 0; j < groups.size(); ++j) {
        if (labels[j] != 0 && labels[j] != 1)
            throw ValidationError("labels must be 0 or 1");
        auto [it, fresh] = index.emplace(groups[j], g.ids.size());
        if (fresh) {
            g.ids.push_back(groups[j]);
            g.label.push_back(labels[j]);
            g.columns.emplace_back();
        } else if (g.label[it->second] != labels[j]) {
            throw ValidationError("record '" + groups[j] +
                                  "' has conflicting labels");
        }
        g.columns[it->second].push_back(static_cast<Eigen::Index>(j));
    }
    return g;
}

// Record indices of each class, shuffled.
std::array<std::vector<std::size_t>, 2> shuffled_classes(const RecordGroups& g,
                                                         std::uint64_t seed)
{
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t r = 0; r < g.ids.size(); ++r) by_class[g.label[r]].push_back(r);
    Rng rng(derive_seed(seed, "split"));
    for (auto& c : by_class) std::shuffle(c.begin(), c.end(), rng);
    return by_class;
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }
double sigmoid(double z)
{
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

Split split_records(const std::vector<std::string>& groups,
                    const std::vector<int>& labels, double test_fraction,
                    std::uint64_t seed)
{
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigError("test fraction must lie in (0, 1)");
    const RecordGroups g = group_columns(groups, labels);
    const auto by_class = shuffled_classes(g, seed);

    const auto total = static_cast<double>(g.ids.size());
    const auto want = static_cast<std::size_t>(std::llround(test_fraction * total));
    std::array<std::size_t, 2> quota{};
    std::array<double, 2> rem{};
    std::size_t assigned = 0;
    for (int c = 0; c < 2; ++c) {
        const double exact = test_fraction * static_cast<double>(by_class[c].size());
        quota[c] = static_cast<std::size_t>(std::floor(exact));
        rem[c] = exact - std::floor(exact);
        assigned += quota[c];
    }
    while (assigned < want) {
        const int c = rem[1] > rem[0] ? 1 : 0;
        ++quota[c];
        rem[c] = -1.0;
        ++assigned;
    }
    for (int c = 0; c < 2; ++c)
        if (quota[c] == 0 || quota[c] >= by_class[c].size())
            throw ValidationError("split with test fraction " +
                                  std::to_string(test_fraction) + " leaves class " +
                                  std::to_string(c) + " absent from one side");

    std::vector<bool> in_test(g.ids.size(), false);
    for (int c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < quota[c]; ++i) in_test[by_class[c][i]] = true;

    // Columns keep their original order on each side.
    Split s;
    std::vector<int> side(groups.size(), 0);
    for (std::size_t r = 0; r < g.ids.size(); ++r)
        for (auto col : g.columns[r]) side[static_cast<std::size_t>(col)] = in_test[r];
    for (std::size_t j = 0; j < groups.size(); ++j)
        (side[j] ? s.test : s.train).push_back(static_cast<Eigen::Index>(j));
    return s;
}

Eigen::VectorXd LinearModel::logits(const Eigen::MatrixXd& x) const
{
    return (x.transpose() * weights).array() + intercept;
}

double logistic_loss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& weights, double intercept,
                     Eigen::VectorXd* grad)
{
    const Eigen::Index n = x.cols();
    const Eigen::VectorXd z = (x.transpose() * weights).array() + intercept;
    double loss = 0.0;
    Eigen::VectorXd resid(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        loss += softplus(z(j)) - y(j) * z(j);
        resid(j) = sigmoid(z(j)) - y(j);
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    if (grad) {
        grad->resize(x.rows() + 1);
        grad->head(x.rows()) = x * resid * inv_n;
        (*grad)(x.rows()) = resid.sum() * inv_n;
    }
    return loss * inv_n;
}

namespace {

double l2_part(const Penalty& p, const Eigen::VectorXd& w)
{
    return 0.5 * p.lambda * (1.0 - p.l1_ratio) * w.squaredNorm();
}

double l1_part(const Penalty& p, const Eigen::VectorXd& w)
{
    return p.lambda * p.l1_ratio * w.lpNorm<1>();
}

Eigen::VectorXd to_vector(const std::vector<int>& y)
{
    Eigen::VectorXd v(static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != 0 && y[i] != 1) throw ValidationError("labels must be 0 or 1");
        v(static_cast<Eigen::Index>(i)) = y[i];
    }
    return v;
}

}  // namespace

double elastic_net_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             const LinearModel& m)
{
    return logistic_loss(x, y, m.weights, m.intercept) + l2_part(m.penalty, m.weights) +
           l1_part(m.penalty, m.weights);
}

LinearModel train_elastic_net(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                              const Penalty& penalty, std::uint64_t seed,
                              const TrainOptions& opts)
{
    if (static_cast<std::size_t>(x.cols()) != labels.size())
        throw ValidationError("feature matrix and labels disagree on sample count");
    if (x.cols() == 0) throw ValidationError("no training samples");
    if (!x.allFinite()) throw ValidationError("non-finite training features");
    if (!(penalty.lambda >= 0.0) || !(penalty.l1_ratio >= 0.0 && penalty.l1_ratio <= 1.0))
        throw ConfigError("need lambda >= 0 and l1_ratio in [0, 1]");
    const Eigen::VectorXd y = to_vector(labels);
    const Eigen::Index d = x.rows();
    // With an unpenalized intercept, centering is an exact reparametrization
    // and removes the intercept/feature coupling of uncentered rows.
    const Eigen::VectorXd center = x.rowwise().mean();
    const Eigen::MatrixXd xc = x.colwise() - center;

    LinearModel m;
    m.penalty = penalty;
    m.seed = seed;

    const double ridge = penalty.lambda * (1.0 - penalty.l1_ratio);
    const double shrink = penalty.lambda * penalty.l1_ratio;
    // Parameters are stacked as (w, b); only w is penalized.
    auto smooth = [&](const Eigen::VectorXd& v, Eigen::VectorXd* g) {
        const auto w = v.head(d);
        double f = logistic_loss(xc, y, w, v(d), g);
        f += 0.5 * ridge * w.squaredNorm();
        if (g) g->head(d) += ridge * w;
        return f;
    };
    auto prox = [&](const Eigen::VectorXd& v, double step) {
        Eigen::VectorXd r = v;
        const double t = step * shrink;
        for (Eigen::Index i = 0; i < d; ++i)
            r(i) = v(i) > t ? v(i) - t : (v(i) < -t ? v(i) + t : 0.0);
        return r;
    };
    auto objective = [&](const Eigen::VectorXd& v) {
        return smooth(v, nullptr) + shrink * v.head(d).lpNorm<1>();
    };

    // Lipschitz bound of the smooth part gives the first trial step.
    const double lip = 0.25 * (xc.squaredNorm() + static_cast<double>(x.cols())) /
                           static_cast<double>(x.cols()) + ridge;
    double step = 1.0 / lip;

    // Monotone FISTA: the extrapolated candidate is accepted only when it
    // does not increase the objective.
    Eigen::VectorXd cur = Eigen::VectorXd::Zero(d + 1);
    Eigen::VectorXd look = cur;
    double obj = objective(cur);
    double momentum = 1.0;
    m.objective_trace.push_back(obj);

    Eigen::VectorXd grad;
    for (int it = 1; it <= opts.max_iter; ++it) {
        const double f_look = smooth(look, &grad);
        Eigen::VectorXd cand;
        double f_cand = 0.0;
        for (int tries = 0; tries < 100; ++tries) {
            cand = prox(look - step * grad, step);
            f_cand = smooth(cand, nullptr);
            const Eigen::VectorXd diff = cand - look;
            if (f_cand <= f_look + grad.dot(diff) + diff.squaredNorm() / (2.0 * step) +
                              1e-14 * std::abs(f_look))
                break;
            step *= 0.5;
        }
        const double mapping = ((look - cand) / step).lpNorm<Eigen::Infinity>();
        const double obj_cand = f_cand + shrink * cand.head(d).lpNorm<1>();

        const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
        Eigen::VectorXd prev = cur;
        if (obj_cand <= obj) {
            cur = cand;
            obj = obj_cand;
        }
        look = cur + (momentum / next_momentum) * (cand - cur) +
               ((momentum - 1.0) / next_momentum) * (cur - prev);
        momentum = next_momentum;
        m.objective_trace.push_back(obj);
        m.iterations = it;
        if (mapping < opts.tol) {
            m.converged = true;
            break;
        }
    }
    m.weights = cur.head(d);
    m.intercept = cur(d) - m.weights.dot(center);
    return m;
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels)
{
    if (scores.size() != labels.size())
        throw ValidationError("scores and labels differ in length");
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double pos_rank_sum = 0.0;
    double n_pos = 0.0, n_neg = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        // Midrank of positions i..j-1 (1-based ranks).
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t t = i; t < j; ++t) {
            if (labels[order[t]] == 1) {
                pos_rank_sum += midrank;
                n_pos += 1.0;
            } else if (labels[order[t]] == 0) {
                n_neg += 1.0;
            } else {
                throw ValidationError("labels must be 0 or 1");
            }
        }
        i = j;
    }
    if (n_pos == 0.0 || n_neg == 0.0)
        throw ValidationError("AUC needs both classes present");
    const double u = pos_rank_sum - n_pos * (n_pos + 1.0) / 2.0;
    return u / (n_pos * n_neg);
}

Eigen::VectorXd linear_attribution(const LinearModel& model, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& background)
{
    if (x.size() != model.weights.size() || background.size() != model.weights.size())
        throw ValidationError("attribution inputs must match the model dimension");
    return model.weights.cwiseProduct(x - background);
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& idx)
{
    Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
        out.col(static_cast<Eigen::Index>(i)) = x.col(idx[i]);
    return out;
}

std::vector<int> select_labels(const std::vector<int>& y, const std::vector<Eigen::Index>& idx)
{
    std::vector<int> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(y[static_cast<std::size_t>(i)]);
    return out;
}

namespace {

std::vector<double> score(const LinearModel& m, const Eigen::MatrixXd& x)
{
    const Eigen::VectorXd z = m.logits(x);
    return std::vector<double>(z.data(), z.data() + z.size());
}

}  // namespace

CvResult cross_validate(const Eigen::MatrixXd& x, const std::vector<int>& y,
                        const std::vector<std::string>& groups,
                        const std::vector<double>& lambdas,
                        const std::vector<double>& l1_ratios, int folds,
                        std::uint64_t seed)
{
    if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
    if (lambdas.empty() || l1_ratios.empty())
        throw ConfigError("empty hyperparameter grid");
    const RecordGroups g = group_columns(groups, y);
    const auto by_class = shuffled_classes(g, derive_seed(seed, "cv"));
    for (int c = 0; c < 2; ++c)
        if (by_class[c].size() < static_cast<std::size_t>(folds))
            throw ValidationError("class " + std::to_string(c) + " has fewer records than folds");

    std::vector<int> fold_of_record(g.ids.size());
    for (int c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < by_class[c].size(); ++i)
            fold_of_record[by_class[c][i]] = static_cast<int>(i % folds);
    std::vector<int> fold_of_col(groups.size());
    for (std::size_t r = 0; r < g.ids.size(); ++r)
        for (auto col : g.columns[r]) fold_of_col[static_cast<std::size_t>(col)] = fold_of_record[r];

    CvResult res;
    for (double l : lambdas)
        for (double r : l1_ratios) res.grid.push_back({{l, r}, std::vector<double>(folds), 0.0});

    const std::size_t jobs = res.grid.size() * static_cast<std::size_t>(folds);
    parallel_for(jobs, [&](std::size_t job) {
        auto& cell = res.grid[job / folds];
        const int f = static_cast<int>(job % folds);
        std::vector<Eigen::Index> tr, te;
        for (std::size_t j = 0; j < fold_of_col.size(); ++j)
            (fold_of_col[j] == f ? te : tr).push_back(static_cast<Eigen::Index>(j));
        const auto model = train_elastic_net(select_columns(x, tr), select_labels(y, tr),
                                             cell.penalty, seed);
        cell.fold_auc[f] = auc(score(model, select_columns(x, te)), select_labels(y, te));
    });

    res.best_auc = -1.0;
    for (auto& cell : res.grid) {
        cell.mean_auc = std::accumulate(cell.fold_auc.begin(), cell.fold_auc.end(), 0.0) /
                        static_cast<double>(folds);
        if (cell.mean_auc > res.best_auc) {
            res.best_auc = cell.mean_auc;
            res.best = cell.penalty;
        }
    }
    return res;
}

SweepSummary seed_sweep(const Eigen::MatrixXd& x_train, const std::vector<int>& y_train,
                        const Eigen::MatrixXd& x_test, const std::vector<int>& y_test,
                        const Penalty& penalty, int n_seeds)
{
    if (n_seeds < 1) throw ConfigError("seed sweep needs n_seeds >= 1");
    SweepSummary s;
    s.auc.resize(static_cast<std::size_t>(n_seeds));
    parallel_for(s.auc.size(), [&](std::size_t i) {
        const auto m = train_elastic_net(x_train, y_train, penalty, i);
        s.auc[i] = auc(score(m, x_test), y_test);
    });
    std::vector<double> sorted = s.auc;
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    const std::size_t mid = sorted.size() / 2;
    s.median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    return s;
}

void write_sweep_csv(const SweepSummary& s, std::ostream& out)
{
    out << "seed,auc\n";
    out.precision(17);
    for (std::size_t i = 0; i < s.auc.size(); ++i) out << i << ',' << s.auc[i] << '\n';
}

}  // namespace sigdisc

#include "sigdisc/error.hpp"
#include "sigdisc/evalharness.hpp"
#include "sigdisc/parallel.hpp"
#include "sigdisc/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <map>

using namespace sigdisc;

namespace {

double brute_auc(const std::vector<double>& s, const std::vector<int>& y)
{
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j)
            if (y[i] == 1 && y[j] == 0) {
                den += 1.0;
                num += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
            }
    return num / den;
}

struct Problem {
    Eigen::MatrixXd x;
    std::vector<int> y;
    std::vector<std::string> groups;
};

// Two informative features, two noise features; three columns per record.
Problem make_problem(int records, std::uint64_t seed)
{
    Rng rng(seed);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u;
    Problem p;
    p.x.resize(4, records * 3);
    for (int r = 0; r < records; ++r) {
        const int label = u(rng) < 0.35 ? 1 : 0;
        for (int c = 0; c < 3; ++c) {
            const Eigen::Index j = r * 3 + c;
            p.x(0, j) = g(rng) + 1.2 * label;
            p.x(1, j) = g(rng) - 0.8 * label + 3.0;
            p.x(2, j) = g(rng);
            p.x(3, j) = 5.0 * g(rng);
            p.y.push_back(label);
            p.groups.push_back("rec" + std::to_string(r));
        }
    }
    return p;
}

Eigen::VectorXd as_vector(const std::vector<int>& y)
{
    Eigen::VectorXd v(static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < y.size(); ++i) v(static_cast<Eigen::Index>(i)) = y[i];
    return v;
}

}  // namespace

TEST_CASE("AUC matches brute-force pair counting")
{
    Rng rng(1);
    std::uniform_int_distribution<int> score(0, 6);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> s;
        std::vector<int> y;
        for (int i = 0; i < 40; ++i) {
            s.push_back(score(rng));  // many ties
            y.push_back(i % 3 == 0 ? 1 : 0);
        }
        CHECK(auc(s, y) == doctest::Approx(brute_auc(s, y)).epsilon(1e-14));
    }
}

TEST_CASE("AUC fixtures")
{
    CHECK(auc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}) == 0.75);
    CHECK(auc({1.0, 2.0, 3.0}, {0, 1, 1}) == 1.0);
    CHECK(auc({3.0, 2.0, 1.0}, {0, 1, 1}) == 0.0);
    CHECK(auc({1.0, 1.0, 1.0, 1.0}, {0, 1, 0, 1}) == 0.5);
    CHECK_THROWS_AS(auc({1.0, 2.0}, {1, 1}), ValidationError);
    CHECK_THROWS_AS(auc({1.0, 2.0}, {0, 1, 1}), ValidationError);
}

TEST_CASE("logistic gradient matches finite differences")
{
    const auto p = make_problem(20, 2);
    const auto y = as_vector(p.y);
    Eigen::VectorXd w(4);
    w << 0.3, -0.2, 0.1, 0.05;
    const double b = -0.4;
    Eigen::VectorXd grad;
    const double f = logistic_loss(p.x, y, w, b, &grad);
    REQUIRE(grad.size() == 5);
    CHECK(std::isfinite(f));
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < 4; ++i) {
        Eigen::VectorXd wp = w, wm = w;
        wp(i) += h;
        wm(i) -= h;
        const double fd = (logistic_loss(p.x, y, wp, b) - logistic_loss(p.x, y, wm, b)) / (2 * h);
        CHECK(grad(i) == doctest::Approx(fd).epsilon(1e-6));
    }
    const double fd_b = (logistic_loss(p.x, y, w, b + h) - logistic_loss(p.x, y, w, b - h)) / (2 * h);
    CHECK(grad(4) == doctest::Approx(fd_b).epsilon(1e-6));

    // Large margins stay finite.
    CHECK(std::isfinite(logistic_loss(p.x, y, w * 1e4, 0.0)));
}

TEST_CASE("elastic net reaches a stationary point with a monotone trace")
{
    const auto p = make_problem(60, 3);
    const Penalty pen{0.01, 0.5};
    const auto m = train_elastic_net(p.x, p.y, pen, 0);
    CHECK(m.converged);
    REQUIRE(m.objective_trace.size() >= 2);
    for (std::size_t i = 1; i < m.objective_trace.size(); ++i)
        CHECK(m.objective_trace[i] <= m.objective_trace[i - 1]);
    CHECK(m.objective_trace.back() ==
          doctest::Approx(elastic_net_objective(p.x, as_vector(p.y), m)).epsilon(1e-12));

    // Optimality conditions of the penalized problem.
    Eigen::VectorXd grad;
    logistic_loss(p.x, as_vector(p.y), m.weights, m.intercept, &grad);
    CHECK(std::abs(grad(4)) < 1e-5);
    const double l1 = pen.lambda * pen.l1_ratio;
    const double l2 = pen.lambda * (1.0 - pen.l1_ratio);
    for (Eigen::Index j = 0; j < 4; ++j) {
        const double wj = m.weights(j);
        if (wj != 0.0)
            CHECK(std::abs(grad(j) + l2 * wj + l1 * (wj > 0 ? 1.0 : -1.0)) < 1e-5);
        else
            CHECK(std::abs(grad(j)) <= l1 + 1e-5);
    }
    CHECK(m.weights(0) > 0.0);
    CHECK(m.weights(1) < 0.0);
}

TEST_CASE("a large penalty leaves only the intercept")
{
    const auto p = make_problem(50, 4);
    const auto m = train_elastic_net(p.x, p.y, {100.0, 1.0}, 0);
    CHECK((m.weights.array() == 0.0).all());
    const double rate =
        static_cast<double>(std::count(p.y.begin(), p.y.end(), 1)) / static_cast<double>(p.y.size());
    // Stopping tolerance on the gradient divided by the curvature rate (1 - rate).
    const double bound = 1e-6 / (rate * (1.0 - rate));
    CHECK(std::abs(m.intercept - std::log(rate / (1.0 - rate))) <= bound);
}

TEST_CASE("the seed does not change the fit")
{
    const auto p = make_problem(30, 5);
    const auto a = train_elastic_net(p.x, p.y, {0.001, 0.9}, 1);
    const auto b = train_elastic_net(p.x, p.y, {0.001, 0.9}, 2);
    CHECK(a.weights == b.weights);
    CHECK(a.intercept == b.intercept);
    CHECK(a.seed == 1);
}

TEST_CASE("linear attribution sums to the logit difference")
{
    LinearModel m;
    m.weights = Eigen::Vector3d(0.5, -1.0, 2.0);
    m.intercept = 0.3;
    const Eigen::Vector3d x(1.0, 2.0, 3.0), bg(0.0, 1.0, 1.0);
    const auto c = linear_attribution(m, x, bg);
    CHECK(c == Eigen::Vector3d(0.5, -1.0, 4.0));
    Eigen::MatrixXd both(3, 2);
    both << x, bg;
    const auto lg = m.logits(both);
    CHECK(c.sum() == doctest::Approx(lg(0) - lg(1)).epsilon(1e-14));
}

TEST_CASE("record-level split is stratified and leak-free")
{
    const auto p = make_problem(100, 6);
    const auto s = split_records(p.groups, p.y, 0.2, 9);
    CHECK(s.train.size() + s.test.size() == p.y.size());
    std::set<std::string> train_rec, test_rec;
    for (auto j : s.train) train_rec.insert(p.groups[j]);
    for (auto j : s.test) test_rec.insert(p.groups[j]);
    for (const auto& r : test_rec) CHECK(train_rec.count(r) == 0);
    CHECK(test_rec.size() == 20);

    std::map<int, int> rec_class, test_class;
    for (std::size_t r = 0; r < p.y.size(); r += 3) ++rec_class[p.y[r]];
    for (const auto& r : test_rec) {
        const auto it = std::find(p.groups.begin(), p.groups.end(), r);
        ++test_class[p.y[static_cast<std::size_t>(it - p.groups.begin())]];
    }
    for (const auto& [cls, count] : rec_class)
        CHECK(std::abs(test_class[cls] - 0.2 * count) <= 1.0);

    const auto again = split_records(p.groups, p.y, 0.2, 9);
    CHECK(again.test == s.test);
    CHECK(split_records(p.groups, p.y, 0.2, 10).test != s.test);
}

TEST_CASE("split errors")
{
    CHECK_THROWS_AS(split_records({"a", "a"}, {0, 1}, 0.5, 0), ValidationError);
    CHECK_THROWS_AS(split_records({"a", "b", "c"}, {0, 0, 1}, 0.2, 0), ValidationError);
    CHECK_THROWS_AS(split_records({"a", "b"}, {0, 1, 1}, 0.5, 0), ValidationError);
}

TEST_CASE("cross-validation is deterministic across thread counts")
{
    const auto p = make_problem(45, 7);
    set_thread_count(1);
    const auto a = cross_validate(p.x, p.y, p.groups, {1e-3, 1e-1}, {0.5}, 3, 4);
    set_thread_count(4);
    const auto b = cross_validate(p.x, p.y, p.groups, {1e-3, 1e-1}, {0.5}, 3, 4);
    set_thread_count(0);
    REQUIRE(a.grid.size() == 2);
    for (std::size_t i = 0; i < a.grid.size(); ++i) {
        CHECK(a.grid[i].fold_auc == b.grid[i].fold_auc);
        CHECK(a.grid[i].fold_auc.size() == 3);
    }
    CHECK(a.best.lambda == b.best.lambda);
    double best = 0.0;
    for (const auto& c : a.grid) best = std::max(best, c.mean_auc);
    CHECK(a.best_auc == best);
}

TEST_CASE("seed sweep and its CSV")
{
    const auto p = make_problem(40, 8);
    std::vector<Eigen::Index> tr, te;
    for (Eigen::Index j = 0; j < p.x.cols(); ++j) (j < 90 ? tr : te).push_back(j);
    const auto s = seed_sweep(select_columns(p.x, tr), select_labels(p.y, tr),
                              select_columns(p.x, te), select_labels(p.y, te), {0.01, 0.5}, 3);
    REQUIRE(s.auc.size() == 3);
    CHECK(s.min <= s.median);
    CHECK(s.median <= s.max);
    std::ostringstream out;
    write_sweep_csv(s, out);
    CHECK(out.str().rfind("seed,auc\n0,", 0) == 0);
}

TEST_CASE("separable one-dimensional data without penalty")
{
    Eigen::MatrixXd x(1, 8);
    x << -4, -3, -2, -1, 1, 2, 3, 4;
    const std::vector<int> y = {0, 0, 0, 0, 1, 1, 1, 1};
    TrainOptions opts;
    opts.max_iter = 500;
    const auto m = train_elastic_net(x, y, {0.0, 0.5}, 0, opts);
    CHECK(m.weights(0) > 0.0);
    const auto lg = m.logits(x);
    CHECK(auc(std::vector<double>(lg.data(), lg.data() + lg.size()), y) == 1.0);
}

TEST_CASE("seed sweep spread is zero for the convex fit")
{
    const auto p = make_problem(40, 11);
    std::vector<Eigen::Index> tr, te;
    for (Eigen::Index j = 0; j < p.x.cols(); ++j) (j % 4 ? tr : te).push_back(j);
    const auto s = seed_sweep(select_columns(p.x, tr), select_labels(p.y, tr),
                              select_columns(p.x, te), select_labels(p.y, te), {0.001, 0.5}, 4);
    CHECK(s.max - s.min < 1e-6);
    const auto one = seed_sweep(select_columns(p.x, tr), select_labels(p.y, tr),
                                select_columns(p.x, te), select_labels(p.y, te), {0.001, 0.5}, 1);
    CHECK(one.min == one.max);
}

TEST_CASE("attribution completeness on random inputs")
{
    Rng rng(12);
    std::normal_distribution<double> g;
    for (int t = 0; t < 100; ++t) {
        LinearModel m;
        m.weights.resize(6);
        Eigen::VectorXd x(6), bg(6);
        for (int i = 0; i < 6; ++i) {
            m.weights(i) = i == 2 ? 0.0 : g(rng);
            x(i) = 3.0 * g(rng);
            bg(i) = g(rng);
        }
        m.intercept = g(rng);
        const auto c = linear_attribution(m, x, bg);
        const double logit = m.intercept + m.weights.dot(x);
        CHECK(std::abs(c.sum() + m.intercept + m.weights.dot(bg) - logit) < 1e-12);
        CHECK(c(2) == 0.0);
        CHECK(linear_attribution(m, bg, bg).isZero(0.0));
    }
}

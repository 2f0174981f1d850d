#include "fixtures.hpp"
#include "sigdisc/kernels.hpp"
#include "sigdisc/parallel.hpp"
#include "sigdisc/rng.hpp"

#include <doctest.h>

#include <random>
#include <stdexcept>

using namespace sigdisc;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed)
{
    Rng rng(seed);
    std::normal_distribution<double> g;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = g(rng) + 0.1 * static_cast<double>(i);
    return m;
}

struct ThreadGuard {
    ~ThreadGuard() { set_thread_count(0); }
};

std::vector<EventRecord> many_records()
{
    std::vector<EventRecord> out;
    for (int i = 0; i < 12; ++i) {
        auto r = fixtures::small_record("rec" + std::to_string(i));
        r.codes.push_back({"icd_a", 100 + 7 * i});
        out.push_back(r);
    }
    return out;
}

}  // namespace

TEST_CASE("parallel kernels agree with the serial reference")
{
    const auto x = random_matrix(7, 5000, 1);
    Eigen::VectorXd m1, s1, m2, s2;
    kernels::row_moments(x, m1, s1);
    kernels::serial::row_moments(x, m2, s2);
    CHECK((m1 - m2).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((s1 - s2).cwiseAbs().maxCoeff() < 1e-12);

    const auto c1 = kernels::covariance(x, m1);
    const auto c2 = kernels::serial::covariance(x, m2);
    CHECK((c1 - c2).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((c1 - c1.transpose()).cwiseAbs().maxCoeff() == 0.0);

    const std::vector<Mode> modes = {Mode::Measurement, Mode::Code,        Mode::Medication,
                                     Mode::Demographic, Mode::Measurement, Mode::Measurement,
                                     Mode::Medication};
    Eigen::MatrixXd pos = x;
    pos.row(1) = x.row(1).cwiseAbs();
    const std::vector<double> means = {0.1, 0.0, 0.3, 0.0, 0.5, 0.6, 0.7};
    const std::vector<double> scales = {1.0, 2.0, 3.0, 1.0, 0.5, 0.25, 2.0};
    CHECK(kernels::standardize_rows(pos, modes, means, scales, 1e-3) ==
          kernels::serial::standardize_rows(pos, modes, means, scales, 1e-3));

    const auto w = random_matrix(7, 7, 2);
    for (Contrast c : {Contrast::LogCosh, Contrast::Cube}) {
        const auto a = kernels::fastica_step(w, x, c, 1.0);
        const auto b = kernels::serial::fastica_step(w, x, c, 1.0);
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
    }

    const auto dict = fixtures::small_dictionary();
    CurveParams cp;
    cp.population_medians = {{"hb", 12.5}};
    SamplingPlan plan;
    plan.density = 0.01;
    const auto records = many_records();
    const auto ps = kernels::sample_records(records, dict, cp, plan);
    const auto ss = kernels::serial::sample_records(records, dict, cp, plan);
    REQUIRE(ps.size() == ss.size());
    for (std::size_t i = 0; i < ps.size(); ++i) {
        CHECK(ps[i].record_id == ss[i].record_id);
        REQUIRE(ps[i].samples.size() == ss[i].samples.size());
        for (std::size_t k = 0; k < ps[i].samples.size(); ++k) {
            CHECK(ps[i].samples[k].day == ss[i].samples[k].day);
            CHECK(ps[i].samples[k].values == ss[i].samples[k].values);
        }
    }
}

TEST_CASE("kernel results do not depend on the thread count")
{
    ThreadGuard guard;
    const auto x = random_matrix(6, 3 * kernels::kReductionBlock + 17, 3);
    const auto w = random_matrix(6, 6, 4);

    set_thread_count(1);
    Eigen::VectorXd m1, s1;
    kernels::row_moments(x, m1, s1);
    const auto c1 = kernels::covariance(x, m1);
    const auto f1 = kernels::fastica_step(w, x, Contrast::LogCosh, 1.0);

    set_thread_count(4);
    Eigen::VectorXd m4, s4;
    kernels::row_moments(x, m4, s4);
    CHECK(m1 == m4);
    CHECK(s1 == s4);
    CHECK(kernels::covariance(x, m4) == c1);
    CHECK(kernels::fastica_step(w, x, Contrast::LogCosh, 1.0) == f1);
}

TEST_CASE("index-day sampling cuts each record at its index day")
{
    const auto dict = fixtures::small_dictionary();
    CurveParams cp;
    cp.population_medians = {{"hb", 12.5}};
    SamplingPlan plan;
    plan.mode = SamplingMode::FixedIndexDay;
    auto rec = fixtures::small_record();
    rec.index_day = 500;
    const auto rs = kernels::sample_one_record(rec, dict, cp, plan);
    REQUIRE(rs.samples.size() == 1);
    CHECK(rs.samples[0].day == 500);

    // Events after the index day cannot change the sample.
    auto later = rec;
    later.codes.push_back({"icd_a", 800});
    later.measurements.push_back({"hb", 950, 30.0});
    CHECK(kernels::sample_one_record(later, dict, cp, plan).samples[0].values ==
          rs.samples[0].values);
}

TEST_CASE("parallel_for rethrows the lowest failing index")
{
    std::vector<int> out(100, 0);
    try {
        parallel_for(out.size(), [&](std::size_t i) {
            if (i == 40 || i == 70) throw std::runtime_error(std::to_string(i));
            out[i] = 1;
        });
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()) == "40");
    }
    CHECK(out[99] == 1);
}

#include "fixtures.hpp"
#include "sigdisc/error.hpp"
#include "sigdisc/report.hpp"
#include "sigdisc/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace sigdisc;

namespace {

StandardizerParams make_standardizer(const std::vector<ChannelSpec>& channels)
{
    StandardizerParams s;
    s.channels = channels;
    for (std::size_t i = 0; i < channels.size(); ++i) {
        const Mode m = channels[i].mode;
        s.means.push_back(m == Mode::Measurement || m == Mode::Medication ? 1.5 * i : 0.0);
        s.scales.push_back(m == Mode::Demographic ? 1.0 : 0.4 + 0.1 * i);
    }
    return s;
}

std::vector<ChannelSpec> many_channels(int n)
{
    std::vector<ChannelSpec> out;
    const Mode modes[] = {Mode::Code, Mode::Measurement, Mode::Medication, Mode::Demographic};
    for (int i = 0; i < n; ++i) {
        char id[16];
        std::snprintf(id, sizeof id, "ch%02d", i);
        out.push_back({id, modes[i % 4], ""});
    }
    return out;
}

SignatureModel model_with(const Eigen::MatrixXd& mixing)
{
    SignatureModel m;
    m.k = static_cast<int>(mixing.cols());
    m.mixing = mixing;
    return m;
}

}  // namespace

TEST_CASE("significant-figure formatting")
{
    CHECK(format_significant(1.0696) == "1.07");
    CHECK(format_significant(0.03821) == "0.0382");
    CHECK(format_significant(0.006) == "0.006");
    CHECK(format_significant(1.9600001) == "1.96");
    CHECK(format_significant(-12.345) == "-12.3");
    CHECK(format_significant(2.0) == "2");
    CHECK(format_significant(0.0) == "0");
}

TEST_CASE("unit effects per mode")
{
    CHECK(unit_effect(Mode::Code, std::log(1.0696) / 0.8, 0.8) == doctest::Approx(1.0696));
    CHECK(unit_effect(Mode::Measurement, 0.25, 4.0) == 1.0);
    CHECK(unit_effect(Mode::Medication, 0.006, 1.0) == 0.006);
    EffectEntry code{"c", Mode::Code, 0.0, 1.0696, ""};
    CHECK(effect_at_expression(code, 10.0) == doctest::Approx(std::pow(1.0696, 10.0)));
    EffectEntry med{"m", Mode::Medication, 0.0, 0.006, ""};
    CHECK(effect_at_expression(med, 10.0) == doctest::Approx(0.06));
}

TEST_CASE("compounding strings")
{
    CHECK(render_compounding({"c", Mode::Code, 0.0, 1.0696, ""}, 10.0) == "x1.07^10.0 = 1.96");
    CHECK(render_compounding({"m", Mode::Medication, 0.0, 0.006, ""}, 10.0) ==
          "0.006 x 10.0 = +0.06");
    CHECK(render_compounding({"v", Mode::Measurement, 0.0, 0.03821, ""}, 25.0) ==
          "0.0382 x 25.0 = +0.955");
}

TEST_CASE("effects agree with the inverse standardizer")
{
    const auto channels = many_channels(8);
    const auto st = make_standardizer(channels);
    Eigen::MatrixXd mix(8, 1);
    mix << 0.3, -0.2, 0.15, 0.05, -0.4, 0.25, -0.1, 0.02;
    const auto rep = render_signature(model_with(mix), st, 0, 0.0);
    const double e = 2.0;
    for (const auto& entry : rep.entries) {
        const auto row = static_cast<std::size_t>(
            std::find_if(channels.begin(), channels.end(),
                         [&](const ChannelSpec& c) { return c.id == entry.channel; }) -
            channels.begin());
        const double z0 = 0.1;
        const double z1 = z0 + entry.coefficient * e;
        const double x0 = unstandardize_value(z0, row, st);
        const double x1 = unstandardize_value(z1, row, st);
        if (entry.mode == Mode::Code)
            CHECK((x1 + st.epsilon) / (x0 + st.epsilon) ==
                  doctest::Approx(effect_at_expression(entry, e)).epsilon(1e-12));
        else
            CHECK(x1 - x0 == doctest::Approx(effect_at_expression(entry, e)).epsilon(1e-12));
    }
}

TEST_CASE("entries are sorted and truncated")
{
    const auto channels = many_channels(14);
    const auto st = make_standardizer(channels);
    Eigen::MatrixXd mix = Eigen::MatrixXd::Zero(14, 2);
    for (int i = 0; i < 14; ++i) mix(i, 1) = (i % 2 ? -1.0 : 1.0) * 0.001 * (i + 1);
    mix(3, 1) = 0.5;
    mix(7, 1) = -0.5;  // tie on magnitude, channel id decides
    const auto model = model_with(mix);

    auto rep = render_signature(model, st, 1);
    CHECK(rep.above_threshold == 7);  // two at 0.5, then 0.010 .. 0.014
    REQUIRE(rep.entries.size() == kReportMinEntries);
    CHECK(rep.entries[0].channel == "ch03");
    CHECK(rep.entries[1].channel == "ch07");
    for (std::size_t i = 1; i < rep.entries.size(); ++i)
        CHECK(std::abs(rep.entries[i].coefficient) <= std::abs(rep.entries[i - 1].coefficient));

    rep = render_signature(model, st, 1, 0.0);
    CHECK(rep.entries.size() == 14);

    const auto small_channels = many_channels(4);
    const auto small = render_signature(model_with(Eigen::MatrixXd::Ones(4, 1)),
                                        make_standardizer(small_channels), 0);
    CHECK(small.entries.size() == 4);

    const auto text = format_report(rep, st.epsilon);
    CHECK(text.rfind("signature 1\n", 0) == 0);
    CHECK(text.find("ch03") < text.find("ch07"));
}

TEST_CASE("report errors")
{
    const auto channels = many_channels(5);
    const auto st = make_standardizer(channels);
    const auto model = model_with(Eigen::MatrixXd::Ones(5, 2));
    CHECK_THROWS_AS(render_signature(model, st, 2), ValidationError);
    CHECK_THROWS_AS(render_signature(model, st, -1), ValidationError);
    CHECK_THROWS_AS(render_signature(model, make_standardizer(many_channels(4)), 0),
                    ValidationError);
    auto mismatched = model;
    mismatched.channels = many_channels(5);
    std::swap(mismatched.channels[0], mismatched.channels[1]);
    CHECK_THROWS_AS(render_signature(mismatched, st, 0), ValidationError);
}

TEST_CASE("histograms")
{
    SUBCASE("uniform bins, last bin closed")
    {
        Eigen::RowVectorXd r(5);
        r << 0.0, 0.5, 1.0, 1.5, 2.0;
        const auto h = expression_histogram(r, 2);
        CHECK(h.edges == std::vector<double>{0.0, 1.0, 2.0});
        CHECK(h.counts == std::vector<std::size_t>{2, 3});
    }
    SUBCASE("constant input")
    {
        const auto h = expression_histogram(Eigen::RowVectorXd::Constant(7, 3.0), 4);
        CHECK(h.counts[0] == 7);
        CHECK(h.counts.size() == 4);
    }
    SUBCASE("single bin")
    {
        Eigen::RowVectorXd r(3);
        r << -1.0, 0.0, 4.0;
        const auto h = expression_histogram(r, 1);
        CHECK(h.counts == std::vector<std::size_t>{3});
    }
    SUBCASE("std 0.5 Gaussian concentrates within [-1, 1]")
    {
        Rng rng(3);
        std::normal_distribution<double> g(0.0, 0.5);
        Eigen::RowVectorXd r(20000);
        for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = g(rng);
        const auto h = expression_histogram(r, 40);
        std::size_t inside = 0, total = 0;
        for (std::size_t b = 0; b < h.counts.size(); ++b) {
            total += h.counts[b];
            if (h.edges[b] >= -1.0 && h.edges[b + 1] <= 1.0) inside += h.counts[b];
        }
        CHECK(total == 20000);
        CHECK(static_cast<double>(inside) / total > 0.9);
    }
    SUBCASE("csv layout and errors")
    {
        Eigen::RowVectorXd r(2);
        r << 0.0, 1.0;
        const auto csv = histogram_csv(expression_histogram(r, 2));
        CHECK(csv.find("bin_low,bin_high,count\n") != std::string::npos);
        CHECK(csv.rfind("#", 0) == 0);
        CHECK_THROWS_AS(expression_histogram(Eigen::RowVectorXd(0), 3), ValidationError);
    }
}

TEST_CASE("report bundle files")
{
    fixtures::TempDir dir;
    const auto channels = many_channels(5);
    const auto st = make_standardizer(channels);
    Eigen::MatrixXd mix(5, 2);
    mix << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0;
    Eigen::MatrixXd expr(2, 6);
    expr << 0, 1, 2, 3, 4, 5, 1, 1, 2, 2, 3, 3;
    write_report_bundle(model_with(mix), st, expr, dir.path);
    CHECK(std::filesystem::exists(report_path(dir.path, 0)));
    CHECK(std::filesystem::exists(report_path(dir.path, 1)));
    CHECK(report_path(dir.path, 1).filename() == "signature_001.txt");
    CHECK(std::filesystem::exists(dir.path / "signature_001_hist.csv"));
}

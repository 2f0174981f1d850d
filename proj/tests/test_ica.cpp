#include "fixtures.hpp"
#include "sigdisc/error.hpp"
#include "sigdisc/ica.hpp"
#include "sigdisc/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>

using namespace sigdisc;

namespace {

double row_std(const Eigen::MatrixXd& m, Eigen::Index r)
{
    const Eigen::ArrayXd row = m.row(r).transpose().array();
    return std::sqrt((row - row.mean()).square().mean());
}

Mixture laplace_mixture(int k, int p, std::uint64_t seed, Eigen::Index n = 8000)
{
    MixtureOptions opts;
    opts.channels = p;
    opts.seed = seed;
    return generate_mixture_matrix(k, n, SourceFamily::Laplace, opts);
}

}  // namespace

TEST_CASE("whitening gives identity covariance")
{
    const auto mix = laplace_mixture(3, 5, 1);
    const auto w = whiten(mix.x, 3);
    CHECK(w.whitened.rows() == 3);
    const double n = static_cast<double>(w.whitened.cols());
    const Eigen::MatrixXd cov = w.whitened * w.whitened.transpose() / n;
    CHECK((cov - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::is_sorted(w.variances.data(), w.variances.data() + w.variances.size(),
                         std::greater<>()));
    CHECK((w.whitener * w.dewhitener - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <
          1e-10);
}

TEST_CASE("rank-deficient input cannot be whitened past its rank")
{
    Eigen::MatrixXd z(3, 100);
    for (int j = 0; j < 100; ++j) z.col(j) << j, 2.0 * j, std::sin(j);
    CHECK_NOTHROW(whiten(z, 2));
    CHECK_THROWS_AS(whiten(z, 3), NumericError);
}

TEST_CASE("symmetric decorrelation returns an orthonormal matrix")
{
    Eigen::MatrixXd w(3, 3);
    w << 1.0, 0.2, 0.1, 0.3, 1.0, -0.4, 0.0, 0.5, 2.0;
    const auto d = symmetric_decorrelation(w);
    CHECK((d * d.transpose() - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fit recovers a Laplace mixture")
{
    const auto mix = laplace_mixture(4, 4, 3);
    IcaConfig cfg;
    cfg.k = 4;
    cfg.seed = 5;
    const auto fit = fit_ica(mix.x, cfg);
    CHECK(fit.model.convergence.converged);
    CHECK(fit.model.convergence.max_orthogonality_error < 1e-8);
    CHECK(amari_index(fit.model.mixing, mix.mixing) < 0.05);
    for (Eigen::Index r = 0; r < 4; ++r) {
        CHECK(row_std(fit.expressions, r) == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(skewness(fit.expressions.row(r)) >= 0.0);
    }
    CHECK((fit.model.unmixing * fit.model.mixing - Eigen::MatrixXd::Identity(4, 4))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
    // The seed does not change the fit beyond sign and order.
    cfg.seed = 6;
    CHECK(amari_index(fit_ica(mix.x, cfg).model.mixing, fit.model.mixing) < 0.05);
}

TEST_CASE("fits are reproducible for a fixed seed")
{
    const auto mix = laplace_mixture(3, 6, 8, 3000);
    IcaConfig cfg;
    cfg.k = 3;
    cfg.seed = 2;
    const auto a = fit_ica(mix.x, cfg);
    const auto b = fit_ica(mix.x, cfg);
    CHECK(a.model.mixing == b.model.mixing);
    CHECK(a.expressions == b.expressions);
}

TEST_CASE("Gaussian sources are not identifiable")
{
    MixtureOptions opts;
    opts.seed = 4;
    const auto mix = generate_mixture_matrix(3, 8000, SourceFamily::Gaussian, opts);
    IcaConfig cfg;
    cfg.k = 3;
    cfg.seed = 1;
    cfg.max_iter = 200;
    const auto fit = fit_ica(mix.x, cfg);
    CHECK(amari_index(fit.model.mixing, mix.mixing) > 0.1);
}

TEST_CASE("orient_signs flips negatively skewed sources in tandem")
{
    const auto mix = laplace_mixture(2, 3, 9, 2000);
    IcaConfig cfg;
    cfg.k = 2;
    auto fit = fit_ica(mix.x, cfg);
    auto model = fit.model;
    auto s = fit.expressions;
    const Eigen::MatrixXd before = model.mixing * s;
    s.row(0) *= -1.0;
    model.mixing.col(0) *= -1.0;
    model.unmixing.row(0) *= -1.0;
    orient_signs(model, s);
    CHECK(skewness(s.row(0)) >= 0.0);
    CHECK(s == fit.expressions);
    CHECK(((model.mixing * s) - before).cwiseAbs().maxCoeff() < 1e-12);

    // Symmetric row: the sign follows the largest signature entry.
    SignatureModel m;
    m.mixing = Eigen::MatrixXd(2, 1);
    m.mixing << 0.5, -2.0;
    m.unmixing = Eigen::MatrixXd(1, 2);
    m.unmixing << 1.0, 1.0;
    m.signs = Eigen::VectorXd::Ones(1);
    Eigen::MatrixXd sym(1, 4);
    sym << -1.0, 1.0, -1.0, 1.0;
    orient_signs(m, sym);
    CHECK(m.mixing(1, 0) == 2.0);
    CHECK(sym(0, 0) == 1.0);
}

TEST_CASE("project and reconstruct")
{
    const auto mix = laplace_mixture(3, 6, 10, 4000);
    IcaConfig cfg;
    cfg.k = 3;
    const auto fit = fit_ica(mix.x, cfg);
    CHECK((project(fit.model, mix.x) - fit.expressions).cwiseAbs().maxCoeff() < 1e-10);

    // With k = p the reconstruction is exact.
    const auto full = laplace_mixture(4, 4, 11, 2000);
    cfg.k = 4;
    const auto ff = fit_ica(full.x, cfg);
    CHECK((reconstruct(ff.model, ff.expressions) - full.x).cwiseAbs().maxCoeff() < 1e-9);

    CHECK_THROWS_AS(project(fit.model, Eigen::MatrixXd::Zero(5, 3)), ValidationError);
}

TEST_CASE("channel order is checked on projection")
{
    SampleMatrix z;
    z.channels = fixtures::small_dictionary().channels();
    const auto mix = laplace_mixture(3, 5, 12, 2000);
    z.values = mix.x;
    for (Eigen::Index j = 0; j < z.values.cols(); ++j)
        z.provenance.push_back({"r" + std::to_string(j), 0});
    IcaConfig cfg;
    cfg.k = 3;
    const auto fit = fit_ica(z, cfg);
    CHECK(fit.model.channels.size() == 5);
    auto swapped = z;
    std::swap(swapped.channels[0], swapped.channels[1]);
    CHECK_THROWS_AS(project(fit.model, swapped), ValidationError);
}

TEST_CASE("config validation")
{
    IcaConfig cfg;
    cfg.k = 6;
    CHECK_THROWS_AS(cfg.validate(5, 100), ConfigError);
    cfg.k = 0;
    CHECK_THROWS_AS(cfg.validate(5, 100), ConfigError);
    cfg.k = 3;
    cfg.tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(5, 100), ConfigError);
    CHECK(parse_contrast("cube") == Contrast::Cube);
    CHECK_THROWS_AS(parse_contrast("tanh2"), ConfigError);
}

TEST_CASE("model file round trip is exact")
{
    fixtures::TempDir dir;
    const auto mix = laplace_mixture(3, 5, 13, 2000);
    IcaConfig cfg;
    cfg.k = 3;
    cfg.seed = 77;
    const auto fit = fit_ica(mix.x, cfg);
    write_model(fit.model, dir.path / "m.sgmodel");
    const auto back = read_model(dir.path / "m.sgmodel");
    CHECK(back.k == 3);
    CHECK(back.seed == 77);
    CHECK(back.mean == fit.model.mean);
    CHECK(back.whitener == fit.model.whitener);
    CHECK(back.rotation == fit.model.rotation);
    CHECK(back.mixing == fit.model.mixing);
    CHECK(back.unmixing == fit.model.unmixing);
    CHECK(back.row_scales == fit.model.row_scales);
    CHECK(back.signs == fit.model.signs);
    CHECK(back.convergence.iterations == fit.model.convergence.iterations);

    {
        std::ofstream out(dir.path / "bad.sgmodel", std::ios::binary);
        out << "NOPE";
    }
    CHECK_THROWS_AS(read_model(dir.path / "bad.sgmodel"), FormatError);
    CHECK_THROWS_AS(read_model(dir.path / "none.sgmodel"), MissingInputError);
}

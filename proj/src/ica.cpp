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

#include "sigdisc/ica.hpp"
#include "sigdisc/error.hpp"
#include "sigdisc/kernels.hpp"
#include "sigdisc/matrix_io.hpp"
#include "sigdisc/rng.hpp"

#include "json.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

using json = nlohmann::json;

namespace sigdisc {

Contrast parse_contrast(std::string_view s)
{
    if (s == "logcosh") return Contrast::LogCosh;
    if (s == "cube") return Contrast::Cube;
    throw ConfigError("unknown contrast '" + std::string(s) +
                      "' (expected logcosh or cube)");
}

const char* to_string(Contrast c)
{
    return c == Contrast::LogCosh ? "logcosh" : "cube";
}

void IcaConfig::validate(Eigen::Index p, Eigen::Index n) const
{
    if (k < 1 || k > p || k > n)
        throw ConfigError("k = " + std::to_string(k) + " must lie in [1, min(p=" +
                          std::to_string(p) + ", n=" + std::to_string(n) + ")]");
    if (!(tol > 0.0)) throw ConfigError("ICA tolerance must be > 0");
    if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
    if (!(alpha >= 1.0 && alpha <= 2.0))
        throw ConfigError("logcosh alpha must lie in [1, 2]");
}

Whitening whiten(const Eigen::MatrixXd& z, int k)
{
    const Eigen::Index p = z.rows();
    const Eigen::Index n = z.cols();
    if (k < 1 || k > p) throw ConfigError("whitening k must lie in [1, p]");
    if (n <= k)
        throw NumericError("whitening needs more columns (" + std::to_string(n) +
                           ") than components (" + std::to_string(k) + ")");

    Whitening w;
    Eigen::VectorXd sd;
    kernels::row_moments(z, w.mean, sd);
    const Eigen::MatrixXd cov = kernels::covariance(z, w.mean);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success)
        throw NumericError("eigendecomposition of the covariance failed");
    // Descending order.
    w.variances = eig.eigenvalues().reverse();
    const Eigen::MatrixXd vecs = eig.eigenvectors().rowwise().reverse();

    const double top = std::max(w.variances(0), 0.0);
    const double cutoff = top * 1e-10 * static_cast<double>(p);
    w.rank = 0;
    for (Eigen::Index i = 0; i < p; ++i)
        if (w.variances(i) > cutoff && w.variances(i) > 0.0) ++w.rank;
    if (w.rank < k)
        throw NumericError("requested " + std::to_string(k) +
                           " components but the centered data have rank " +
                           std::to_string(w.rank));

    const Eigen::MatrixXd u = vecs.leftCols(k);
    const Eigen::VectorXd d = w.variances.head(k);
    w.whitener = d.array().rsqrt().matrix().asDiagonal() * u.transpose();
    w.dewhitener = u * d.array().sqrt().matrix().asDiagonal();
    w.whitened = w.whitener * (z.colwise() - w.mean);
    return w;
}

Eigen::MatrixXd symmetric_decorrelation(const Eigen::MatrixXd& w)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(w * w.transpose());
    const Eigen::VectorXd d = eig.eigenvalues().cwiseMax(
        std::numeric_limits<double>::min());
    return eig.eigenvectors() * d.array().rsqrt().matrix().asDiagonal() *
           eig.eigenvectors().transpose() * w;
}

double skewness(const Eigen::Ref<const Eigen::RowVectorXd>& row)
{
    const auto n = static_cast<double>(row.size());
    if (row.size() == 0) return 0.0;
    const double mu = row.mean();
    const Eigen::ArrayXd c = (row.array() - mu).transpose();
    const double m2 = (c * c).sum() / n;
    const double m3 = (c * c * c).sum() / n;
    if (m2 <= 0.0) return 0.0;
    return m3 / std::pow(m2, 1.5);
}

namespace {

double population_std(const Eigen::Ref<const Eigen::RowVectorXd>& row)
{
    const double mu = row.mean();
    return std::sqrt((row.array() - mu).square().sum() /
                     static_cast<double>(row.size()));
}

}  // namespace

IcaFit fit_ica(const Eigen::MatrixXd& z, const IcaConfig& cfg)
{
    cfg.validate(z.rows(), z.cols());
    if (!z.allFinite()) throw NumericError("ICA input contains NaN or Inf");
    const Whitening wh = whiten(z, cfg.k);
    const Eigen::Index k = cfg.k;

    Rng rng(derive_seed(cfg.seed, "ica-init"));
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd w(k, k);
    for (Eigen::Index j = 0; j < k; ++j)
        for (Eigen::Index i = 0; i < k; ++i) w(i, j) = normal(rng);
    w = symmetric_decorrelation(w);

    ConvergenceReport report;
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(k, k);
    for (int it = 1; it <= cfg.max_iter; ++it) {
        Eigen::MatrixXd next = symmetric_decorrelation(
            kernels::fastica_step(w, wh.whitened, cfg.contrast, cfg.alpha));
        const double delta =
            (1.0 - (next * w.transpose()).diagonal().array().abs()).abs().maxCoeff();
        w = std::move(next);
        report.iterations = it;
        report.final_delta = delta;
        report.max_orthogonality_error =
            std::max(report.max_orthogonality_error,
                     (w * w.transpose() - eye).cwiseAbs().maxCoeff());
        if (delta < cfg.tol) {
            report.converged = true;
            break;
        }
    }

    IcaFit fit;
    SignatureModel& m = fit.model;
    m.k = cfg.k;
    m.seed = cfg.seed;
    m.mean = wh.mean;
    m.whitener = wh.whitener;
    m.variances = wh.variances;
    m.rotation = w;
    m.convergence = report;

    fit.expressions = w * wh.whitened;
    m.mixing = wh.dewhitener * w.transpose();
    m.unmixing = w * wh.whitener;

    // Each expression row gets population std 0.5; the signature column
    // absorbs the factor so mixing * S is unchanged.
    m.row_scales.resize(k);
    m.signs = Eigen::VectorXd::Ones(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const double scale = 2.0 * population_std(fit.expressions.row(i));
        if (!(scale > 0.0))
            throw NumericError("source " + std::to_string(i) +
                               " has zero variance");
        m.row_scales(i) = scale;
        fit.expressions.row(i) /= scale;
        m.unmixing.row(i) /= scale;
        m.mixing.col(i) *= scale;
    }
    orient_signs(m, fit.expressions);
    return fit;
}

IcaFit fit_ica(const SampleMatrix& z, const IcaConfig& cfg)
{
    auto fit = fit_ica(z.values, cfg);
    fit.model.channels = z.channels;
    return fit;
}

void orient_signs(SignatureModel& model, Eigen::MatrixXd& expressions)
{
    for (Eigen::Index i = 0; i < expressions.rows(); ++i) {
        const double skew = skewness(expressions.row(i));
        bool flip;
        if (std::abs(skew) < 1e-12) {
            Eigen::Index arg;
            model.mixing.col(i).cwiseAbs().maxCoeff(&arg);
            flip = model.mixing(arg, i) < 0.0;
        } else {
            flip = skew < 0.0;
        }
        if (!flip) continue;
        expressions.row(i) *= -1.0;
        model.mixing.col(i) *= -1.0;
        model.unmixing.row(i) *= -1.0;
        model.signs(i) = -model.signs(i);
    }
}

Eigen::MatrixXd project(const SignatureModel& model, const Eigen::MatrixXd& z)
{
    if (z.rows() != model.mean.size())
        throw ValidationError("projection input has " + std::to_string(z.rows()) +
                              " rows, model expects " +
                              std::to_string(model.mean.size()));
    return model.unmixing * (z.colwise() - model.mean);
}

Eigen::MatrixXd project(const SignatureModel& model, const SampleMatrix& z)
{
    if (!model.channels.empty() && !z.same_channels(model.channels))
        throw ValidationError(
            "channel order of the matrix does not match the model");
    return project(model, z.values);
}

Eigen::MatrixXd reconstruct(const SignatureModel& model, const Eigen::MatrixXd& s)
{
    if (s.rows() != model.k)
        throw ValidationError("expression matrix has " + std::to_string(s.rows()) +
                              " rows, model has k = " + std::to_string(model.k));
    return (model.mixing * s).colwise() + model.mean;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr char kModelMagic[4] = {'S', 'G', 'M', 'D'};
constexpr std::uint32_t kModelVersion = 1;

struct Component {
    const char* name;
    Eigen::MatrixXd SignatureModel::*matrix = nullptr;
    Eigen::VectorXd SignatureModel::*vector = nullptr;
};

const Component kComponents[] = {
    {"mean", nullptr, &SignatureModel::mean},
    {"whitener", &SignatureModel::whitener, nullptr},
    {"rotation", &SignatureModel::rotation, nullptr},
    {"mixing", &SignatureModel::mixing, nullptr},
    {"unmixing", &SignatureModel::unmixing, nullptr},
    {"row_scales", nullptr, &SignatureModel::row_scales},
    {"signs", nullptr, &SignatureModel::signs},
    {"variances", nullptr, &SignatureModel::variances},
};

}  // namespace

void write_model(const SignatureModel& model, const std::filesystem::path& path)
{
    json manifest;
    manifest["k"] = model.k;
    manifest["seed"] = model.seed;
    manifest["convergence"] = {
        {"iterations", model.convergence.iterations},
        {"final_delta", model.convergence.final_delta},
        {"converged", model.convergence.converged},
        {"max_orthogonality_error", model.convergence.max_orthogonality_error}};
    manifest["row_scales"] =
        std::vector<double>(model.row_scales.data(),
                            model.row_scales.data() + model.row_scales.size());
    manifest["channels"] = json::array();
    for (const auto& c : model.channels)
        manifest["channels"].push_back(
            {{"id", c.id}, {"mode", to_string(c.mode)}, {"unit", c.unit}});
    manifest["components"] = json::array();
    for (const auto& c : kComponents) manifest["components"].push_back(c.name);
    const std::string text = manifest.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw MissingInputError("cannot write " + path.string());
    out.write(kModelMagic, 4);
    const std::uint32_t version = kModelVersion;
    out.write(reinterpret_cast<const char*>(&version), 4);
    const std::uint64_t len = text.size();
    out.write(reinterpret_cast<const char*>(&len), 8);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& c : kComponents) {
        if (c.matrix)
            write_raw_matrix(model.*(c.matrix), out);
        else
            write_raw_matrix(Eigen::MatrixXd(model.*(c.vector)), out);
    }
    if (!out) throw FormatError("failed writing model " + path.string());
}

SignatureModel read_model(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingInputError("missing input: " + path.string());
    const auto size = std::filesystem::file_size(path);

    char magic[4];
    std::uint32_t version = 0;
    std::uint64_t len = 0;
    if (!in.read(magic, 4) || std::memcmp(magic, kModelMagic, 4) != 0)
        throw FormatError("bad model magic in " + path.string());
    if (!in.read(reinterpret_cast<char*>(&version), 4) || version != kModelVersion)
        throw FormatError("unsupported model version in " + path.string());
    if (!in.read(reinterpret_cast<char*>(&len), 8) || len > size - 16)
        throw FormatError("bad model manifest length in " + path.string());
    std::string text(len, '\0');
    if (!in.read(text.data(), static_cast<std::streamsize>(len)))
        throw FormatError("model manifest truncated in " + path.string());

    SignatureModel m;
    try {
        const json manifest = json::parse(text);
        m.k = manifest.at("k").get<int>();
        m.seed = manifest.at("seed").get<std::uint64_t>();
        const auto& conv = manifest.at("convergence");
        m.convergence.iterations = conv.at("iterations").get<int>();
        m.convergence.final_delta = conv.at("final_delta").get<double>();
        m.convergence.converged = conv.at("converged").get<bool>();
        m.convergence.max_orthogonality_error =
            conv.value("max_orthogonality_error", 0.0);
        for (const auto& c : manifest.at("channels"))
            m.channels.push_back({c.at("id").get<std::string>(),
                                  parse_mode(c.at("mode").get<std::string>()),
                                  c.value("unit", std::string{})});
        const auto names = manifest.at("components").get<std::vector<std::string>>();
        std::uint64_t used = 16 + len;
        for (const auto& name : names) {
            const Component* comp = nullptr;
            for (const auto& c : kComponents)
                if (name == c.name) comp = &c;
            const auto before = in.tellg();
            Eigen::MatrixXd mat = read_raw_matrix(in, size - used);
            used += static_cast<std::uint64_t>(in.tellg() - before);
            if (!comp) continue;
            if (comp->matrix)
                m.*(comp->matrix) = std::move(mat);
            else {
                if (mat.cols() != 1 && mat.size() != 0)
                    throw FormatError("model component '" + name +
                                      "' must be a column vector");
                m.*(comp->vector) = mat.col(0);
            }
        }
    } catch (const json::exception& e) {
        throw FormatError("bad model manifest in " + path.string() + ": " +
                          e.what());
    }
    if (m.mixing.cols() != m.k || m.unmixing.rows() != m.k ||
        m.mean.size() != m.mixing.rows())
        throw FormatError("inconsistent model component shapes in " +
                          path.string());
    return m;
}

}  // namespace sigdisc

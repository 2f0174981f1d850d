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

#include "sigdisc/synth.hpp"
#include "sigdisc/error.hpp"
#include "sigdisc/matrix_io.hpp"
#include "sigdisc/parallel.hpp"
#include "sigdisc/rng.hpp"

#include "json.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

using json = nlohmann::json;

namespace sigdisc {

void SynthConfig::validate() const
{
    if (records < 1 || codes < 0 || measurements < 0 || medications < 0 ||
        demographics < 0 || sources < 1)
        throw ConfigError("synth counts must be >= 1 (channel counts >= 0)");
    if (codes + measurements + medications + demographics < 1)
        throw ConfigError("synth needs at least one channel");
    if (!(sparsity > 0.0 && sparsity <= 1.0))
        throw ConfigError("sparsity must lie in (0, 1]");
    if (!(loading_density > 0.0 && loading_density <= 1.0))
        throw ConfigError("loading_density must lie in (0, 1]");
    if (min_length_days < 1 || max_length_days < min_length_days)
        throw ConfigError("need 1 <= min_length_days <= max_length_days");
    if (label_source < 0 || label_source >= sources)
        throw ConfigError("label_source must index a planted source");
    if (!(label_positive_rate > 0.0 && label_positive_rate < sparsity))
        throw ConfigError("label_positive_rate must lie in (0, sparsity)");
    if (!(base_code_rate > 0.0 && measurement_rate >= 0.0 &&
          reconciliation_rate >= 0.0 && measurement_noise >= 0.0))
        throw ConfigError("rates must be positive and noise nonnegative");
}

namespace {

std::string numbered(const char* prefix, int i)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s_%02d", prefix, i);
    return buf;
}

std::string record_name(int i)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "r%06d", i);
    return buf;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

struct ChannelBaselines {
    std::vector<double> log_rate;   // codes
    std::vector<double> mean;       // measurements
    std::vector<double> bias;       // medications and demographics (logit)
};

}  // namespace

ChannelDictionary synth_dictionary(const SynthConfig& cfg)
{
    std::vector<ChannelSpec> ch;
    for (int i = 0; i < cfg.codes; ++i)
        ch.push_back({numbered("code", i), Mode::Code, "events/day"});
    for (int i = 0; i < cfg.measurements; ++i)
        ch.push_back({numbered("meas", i), Mode::Measurement, "units"});
    for (int i = 0; i < cfg.medications; ++i)
        ch.push_back({numbered("med", i), Mode::Medication, "taking"});
    for (int i = 0; i < cfg.demographics; ++i)
        ch.push_back({numbered("demo", i), Mode::Demographic, "indicator"});
    return ChannelDictionary(std::move(ch));
}

SynthDataset generate_dataset(const SynthConfig& cfg)
{
    cfg.validate();
    SynthDataset out;
    GroundTruth& truth = out.truth;
    truth.config = cfg;
    truth.dictionary = synth_dictionary(cfg);
    const auto& dict = truth.dictionary;
    const auto p = static_cast<Eigen::Index>(dict.size());
    const int k = cfg.sources;

    // Loadings and per-channel baselines come from one shared stream.
    Rng rng(derive_seed(cfg.seed, "loadings"));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    truth.signatures = Eigen::MatrixXd::Zero(p, k);
    ChannelBaselines base;
    base.log_rate.assign(p, 0.0);
    base.mean.assign(p, 0.0);
    base.bias.assign(p, 0.0);
    for (Eigen::Index j = 0; j < p; ++j) {
        const Mode mode = dict[j].mode;
        double effect = 0.0;
        switch (mode) {
        case Mode::Code:
            effect = cfg.code_effect;
            base.log_rate[j] = std::log(cfg.base_code_rate) + std::log(2.0) * (2.0 * unit(rng) - 1.0);
            break;
        case Mode::Measurement:
            effect = cfg.measurement_effect;
            base.mean[j] = 5.0 + 10.0 * unit(rng);
            break;
        case Mode::Medication:
            effect = cfg.medication_effect;
            base.bias[j] = logit(0.05 + 0.2 * unit(rng));
            break;
        case Mode::Demographic:
            effect = cfg.demographic_effect;
            base.bias[j] = logit(0.2 + 0.6 * unit(rng));
            break;
        }
        for (int s = 0; s < k; ++s) {
            const bool on = unit(rng) < cfg.loading_density;
            const double mag = effect * (0.5 + 0.5 * unit(rng));
            const double sgn = unit(rng) < 0.5 ? -1.0 : 1.0;
            if (on) truth.signatures(j, s) = sgn * mag;
        }
    }
    // Label threshold: P(s > t) = sparsity * exp(-t) for unit exponentials.
    truth.label_threshold = std::log(cfg.sparsity / cfg.label_positive_rate);

    const int n = cfg.records;
    truth.expressions = Eigen::MatrixXd::Zero(k, n);
    truth.record_ids.resize(n);
    out.records.resize(n);
    out.labels.assign(n, 0);

    const auto codes = dict.indices_of(Mode::Code);
    const auto meas = dict.indices_of(Mode::Measurement);
    const auto meds = dict.indices_of(Mode::Medication);
    const auto demos = dict.indices_of(Mode::Demographic);

    parallel_for(static_cast<std::size_t>(n), [&](std::size_t ri) {
        const int r = static_cast<int>(ri);
        Rng g(derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        std::exponential_distribution<double> expo(1.0);
        std::normal_distribution<double> noise(0.0, cfg.measurement_noise);

        EventRecord rec;
        rec.record_id = record_name(r);
        const int length = std::uniform_int_distribution<int>(
            cfg.min_length_days, cfg.max_length_days)(g);
        std::uniform_int_distribution<int> any_day(0, length);

        Eigen::VectorXd s(k);
        for (int i = 0; i < k; ++i) {
            const double level = expo(g);
            s(i) = u01(g) < cfg.sparsity ? level : 0.0;
        }
        const Eigen::VectorXd drive = truth.signatures * s;
        const double span = static_cast<double>(length) + 1.0;

        for (std::size_t j : codes) {
            const double log_rate = base.log_rate[j] + drive(j);
            const double mean_count = std::exp(log_rate) * span;
            if (!(mean_count < 1e7))
                throw NumericError("record " + rec.record_id + ": code '" +
                                   dict[j].id + "' expects " +
                                   std::to_string(mean_count) + " events");
            const int m = std::poisson_distribution<int>(mean_count)(g);
            for (int e = 0; e < m; ++e)
                rec.codes.push_back({dict[j].id, any_day(g)});
        }
        std::sort(rec.codes.begin(), rec.codes.end(),
                  [](const CodeEvent& a, const CodeEvent& b) {
                      return a.day < b.day;
                  });

        for (std::size_t j : meas) {
            const double mu = base.mean[j] + drive(j);
            const int m = std::poisson_distribution<int>(cfg.measurement_rate * span)(g);
            for (int e = 0; e < m; ++e)
                rec.measurements.push_back({dict[j].id, any_day(g), mu + noise(g)});
        }
        std::sort(rec.measurements.begin(), rec.measurements.end(),
                  [](const MeasurementObs& a, const MeasurementObs& b) {
                      return a.day < b.day;
                  });

        // Reconciliations: always one at each end of the record, plus a
        // Poisson number in between.
        std::set<int> recon_days{0, length};
        const int extra =
            std::poisson_distribution<int>(cfg.reconciliation_rate * span)(g);
        for (int e = 0; e < extra; ++e) recon_days.insert(any_day(g));
        for (int day : recon_days) {
            MedReconciliation mr;
            mr.day = day;
            for (std::size_t j : meds)
                if (u01(g) < logistic(base.bias[j] + drive(j)))
                    mr.channels.push_back(dict[j].id);
            rec.med_recons.push_back(std::move(mr));
        }

        for (std::size_t j : demos)
            rec.demographics[dict[j].id] =
                u01(g) < logistic(base.bias[j] + drive(j)) ? 1.0 : 0.0;
        rec.age_at_day0 = 30.0 + 50.0 * u01(g);

        truth.expressions.col(r) = s;
        truth.record_ids[ri] = rec.record_id;
        out.labels[ri] = s(cfg.label_source) > truth.label_threshold ? 1 : 0;
        out.records[ri] = std::move(rec);
    });
    return out;
}

SourceFamily parse_source_family(std::string_view s)
{
    if (s == "laplace") return SourceFamily::Laplace;
    if (s == "uniform") return SourceFamily::Uniform;
    if (s == "gaussian") return SourceFamily::Gaussian;
    throw ConfigError("unknown source family '" + std::string(s) + "'");
}

Mixture generate_mixture_matrix(int k, Eigen::Index n, SourceFamily family,
                                const MixtureOptions& opts)
{
    const Eigen::Index p = opts.channels > 0 ? opts.channels : k;
    if (k < 1 || k > p) throw ConfigError("mixture needs 1 <= k <= p");
    if (n < 1) throw ConfigError("mixture needs n >= 1");

    Rng rng(derive_seed(opts.seed, "mixture"));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto gaussian = [&](Eigen::Index r, Eigen::Index c) {
        Eigen::MatrixXd g(r, c);
        for (Eigen::Index j = 0; j < c; ++j)
            for (Eigen::Index i = 0; i < r; ++i) g(i, j) = normal(rng);
        return g;
    };

    Mixture m;
    if (opts.loading_density >= 1.0) {
        // Orthonormal factors around a controlled singular spectrum.
        const Eigen::MatrixXd q1 =
            Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian(p, k)).householderQ() *
            Eigen::MatrixXd::Identity(p, k);
        const Eigen::MatrixXd q2 =
            Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian(k, k)).householderQ() *
            Eigen::MatrixXd::Identity(k, k);
        Eigen::VectorXd sv(k);
        for (int i = 0; i < k; ++i)
            sv(i) = k == 1 ? 1.0
                           : 1.0 + (opts.condition - 1.0) * i / static_cast<double>(k - 1);
        m.mixing = q1 * sv.asDiagonal() * q2.transpose();
    } else {
        m.mixing = Eigen::MatrixXd::Zero(p, k);
        for (int c = 0; c < k; ++c) {
            bool any = false;
            for (Eigen::Index r = 0; r < p; ++r) {
                const double v = normal(rng);
                if (unit(rng) < opts.loading_density) {
                    m.mixing(r, c) = v;
                    any = true;
                }
            }
            if (!any) m.mixing(c % p, c) = 1.0;
        }
    }

    m.sources.resize(k, n);
    std::uniform_real_distribution<double> box(-std::sqrt(3.0), std::sqrt(3.0));
    std::exponential_distribution<double> expo(std::sqrt(2.0));
    for (Eigen::Index j = 0; j < n; ++j)
        for (int i = 0; i < k; ++i) {
            switch (family) {
            case SourceFamily::Laplace: {
                const double mag = expo(rng);
                m.sources(i, j) = unit(rng) < 0.5 ? -mag : mag;
                break;
            }
            case SourceFamily::Uniform: m.sources(i, j) = box(rng); break;
            case SourceFamily::Gaussian: m.sources(i, j) = normal(rng); break;
            }
        }
    m.x = m.mixing * m.sources;
    if (opts.noise > 0.0) m.x += opts.noise * gaussian(p, n);
    return m;
}

double amari_index(const Eigen::MatrixXd& a_est, const Eigen::MatrixXd& a_true)
{
    if (a_est.rows() != a_true.rows() || a_est.cols() != a_true.cols())
        throw ValidationError("amari_index needs matrices of equal shape");
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a_est);
    if (cod.rank() < a_est.cols() ||
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(a_true).rank() < a_true.cols())
        throw NumericError("amari_index needs full column rank arguments");
    const Eigen::MatrixXd pm = (cod.pseudoInverse() * a_true).cwiseAbs();
    const Eigen::Index k = pm.rows();
    if (k == 1) return 0.0;

    double total = 0.0;
    for (Eigen::Index i = 0; i < k; ++i)
        total += pm.row(i).sum() / pm.row(i).maxCoeff() - 1.0;
    for (Eigen::Index j = 0; j < k; ++j)
        total += pm.col(j).sum() / pm.col(j).maxCoeff() - 1.0;
    return total / (2.0 * static_cast<double>(k) * static_cast<double>(k - 1));
}

std::optional<double> pearson(const Eigen::Ref<const Eigen::VectorXd>& a,
                              const Eigen::Ref<const Eigen::VectorXd>& b)
{
    if (a.size() != b.size() || a.size() < 2) return std::nullopt;
    const Eigen::ArrayXd ca = a.array() - a.mean();
    const Eigen::ArrayXd cb = b.array() - b.mean();
    const double na = std::sqrt((ca * ca).sum());
    const double nb = std::sqrt((cb * cb).sum());
    if (!(na > 0.0) || !(nb > 0.0)) return std::nullopt;
    return (ca * cb).sum() / (na * nb);
}

MatchReport match_signatures(const Eigen::MatrixXd& a_est,
                             const Eigen::MatrixXd& a_true)
{
    if (a_est.rows() != a_true.rows())
        throw ValidationError("match_signatures needs equal row counts");
    MatchReport report;
    const Eigen::Index ne = a_est.cols();
    const Eigen::Index nt = a_true.cols();
    Eigen::MatrixXd c(ne, nt);
    for (Eigen::Index i = 0; i < ne; ++i)
        for (Eigen::Index j = 0; j < nt; ++j) {
            const auto r = pearson(a_est.col(i), a_true.col(j));
            if (!r) report.defined = false;
            c(i, j) = r ? std::abs(*r) : 0.0;
        }

    std::vector<bool> used_e(ne, false), used_t(nt, false);
    const Eigen::Index pairs = std::min(ne, nt);
    for (Eigen::Index step = 0; step < pairs; ++step) {
        double best = -1.0;
        Eigen::Index bi = -1, bj = -1;
        for (Eigen::Index i = 0; i < ne; ++i) {
            if (used_e[i]) continue;
            for (Eigen::Index j = 0; j < nt; ++j)
                if (!used_t[j] && c(i, j) > best) {
                    best = c(i, j);
                    bi = i;
                    bj = j;
                }
        }
        used_e[bi] = used_t[bj] = true;
        report.pairs.push_back({static_cast<int>(bi), static_cast<int>(bj), best});
    }
    if (!report.pairs.empty()) {
        double sum = 0.0, lo = 1.0;
        for (const auto& m : report.pairs) {
            sum += m.abs_correlation;
            lo = std::min(lo, m.abs_correlation);
        }
        report.mean_abs_correlation = sum / static_cast<double>(report.pairs.size());
        report.min_abs_correlation = lo;
    }
    return report;
}

void write_ground_truth(const GroundTruth& truth, const std::filesystem::path& dir)
{
    write_raw_matrix(truth.signatures, dir / "ground_truth.sgmx");
    write_raw_matrix(truth.expressions, dir / "ground_truth_expressions.sgmx");
    const auto& c = truth.config;
    json j;
    j["channels"] = json::array();
    for (const auto& ch : truth.dictionary.channels()) j["channels"].push_back(ch.id);
    j["record_ids"] = truth.record_ids;
    j["label_threshold"] = truth.label_threshold;
    j["config"] = {{"records", c.records},
                   {"codes", c.codes},
                   {"measurements", c.measurements},
                   {"medications", c.medications},
                   {"demographics", c.demographics},
                   {"sources", c.sources},
                   {"sparsity", c.sparsity},
                   {"loading_density", c.loading_density},
                   {"code_effect", c.code_effect},
                   {"measurement_effect", c.measurement_effect},
                   {"medication_effect", c.medication_effect},
                   {"demographic_effect", c.demographic_effect},
                   {"measurement_noise", c.measurement_noise},
                   {"base_code_rate", c.base_code_rate},
                   {"measurement_rate", c.measurement_rate},
                   {"reconciliation_rate", c.reconciliation_rate},
                   {"min_length_days", c.min_length_days},
                   {"max_length_days", c.max_length_days},
                   {"label_source", c.label_source},
                   {"label_positive_rate", c.label_positive_rate},
                   {"seed", c.seed}};
    std::ofstream out(dir / "ground_truth.json");
    if (!out) throw MissingInputError("cannot write ground_truth.json in " + dir.string());
    out << j.dump(1) << '\n';
}

void write_labels(const std::vector<EventRecord>& records,
                  const std::vector<int>& labels, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw MissingInputError("cannot write " + path.string());
    out << "record_id,label\n";
    for (std::size_t i = 0; i < records.size(); ++i)
        out << records[i].record_id << ',' << labels[i] << '\n';
}

std::vector<std::pair<std::string, int>> read_labels(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw MissingInputError("missing input: " + path.string());
    std::vector<std::pair<std::string, int>> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1 && line.rfind("record_id", 0) == 0) continue;
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ParseError(lineno, "expected record_id,label");
        const std::string label = line.substr(comma + 1);
        if (label != "0" && label != "1" && label != "0\r" && label != "1\r")
            throw ParseError(lineno, "label must be 0 or 1");
        out.emplace_back(line.substr(0, comma), label[0] == '1' ? 1 : 0);
    }
    return out;
}

}  // namespace sigdisc

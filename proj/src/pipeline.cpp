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

#include "sigdisc/pipeline.hpp"
#include "sigdisc/curves.hpp"
#include "sigdisc/evalharness.hpp"
#include "sigdisc/kernels.hpp"
#include "sigdisc/matrix_io.hpp"
#include "sigdisc/parallel.hpp"
#include "sigdisc/report.hpp"
#include "sigdisc/rng.hpp"
#include "sigdisc/standardize.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <set>

namespace sigdisc {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

/// Collects inputs, outputs and timings of one command run.
class Manifest {
public:
    Manifest(std::string command, const PipelineConfig& cfg)
        : command_(std::move(command)), cfg_(cfg), start_(std::chrono::steady_clock::now())
    {
    }

    void input(const fs::path& p) { inputs_[p.string()] = file_digest(p); }
    void output(const fs::path& p) { outputs_[p.string()] = file_digest(p); }

    template <class F>
    auto timed(const std::string& name, F&& f)
    {
        const auto t0 = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            timings_[name] = elapsed_ms(t0);
        } else {
            auto r = f();
            timings_[name] = elapsed_ms(t0);
            return r;
        }
    }

    void note(const std::string& key, json value) { extra_[key] = std::move(value); }

    void write() const
    {
        json j;
        j["command"] = command_;
        j["seed"] = cfg_.seed;
        j["threads"] = thread_count();
        j["config"] = cfg_.to_json();
        j["inputs"] = inputs_;
        j["outputs"] = outputs_;
        j["timings_ms"] = timings_;
        j["timings_ms"]["total"] = elapsed_ms(start_);
        for (const auto& [k, v] : extra_.items()) j[k] = v;
        const fs::path dir = cfg_.output_dir / "manifests";
        fs::create_directories(dir);
        std::ofstream(dir / (command_ + ".json")) << j.dump(1) << '\n';
    }

private:
    static double elapsed_ms(std::chrono::steady_clock::time_point t0)
    {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    }

    std::string command_;
    const PipelineConfig& cfg_;
    std::chrono::steady_clock::time_point start_;
    std::map<std::string, std::string> inputs_, outputs_;
    std::map<std::string, double> timings_;
    json extra_ = json::object();
};

/// Runs `body`, tagging any library error with the stage name.
template <class F>
auto run_stage(const std::string& stage, F&& body)
{
    try {
        return body();
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(stage, e.category(), e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        throw StageError(stage, ErrorCategory::MissingInput, e.what());
    }
}

void require(const fs::path& p, const std::string& stage)
{
    if (!fs::exists(p))
        throw MissingInputError("stage '" + stage + "' needs " + p.string() +
                                ", which does not exist");
}

fs::path out(const PipelineConfig& cfg, const std::string& name)
{
    return cfg.output_dir / name;
}

void write_json(const json& j, const fs::path& p)
{
    std::ofstream o(p);
    if (!o) throw MissingInputError("cannot write " + p.string());
    o << j.dump(1) << '\n';
}

json read_json(const fs::path& p)
{
    std::ifstream in(p);
    if (!in) throw MissingInputError("missing input: " + p.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError("bad JSON in " + p.string() + ": " + e.what());
    }
}

SampleMatrix expressions_matrix(const Eigen::MatrixXd& s, std::vector<Provenance> prov)
{
    SampleMatrix m;
    m.values = s;
    m.provenance = std::move(prov);
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "signature_%03d", static_cast<int>(i));
        m.channels.push_back({id, Mode::Measurement, "expression"});
    }
    return m;
}

struct Inputs {
    ChannelDictionary dict;
    std::vector<EventRecord> records;
};

Inputs load_events(const PipelineConfig& cfg, const std::string& stage, Manifest& man)
{
    require(cfg.dictionary_path(), stage);
    require(cfg.events_path(), stage);
    Inputs in;
    in.dict = read_dictionary(cfg.dictionary_path());
    in.records = parse_records(cfg.events_path(), in.dict);
    man.input(cfg.dictionary_path());
    man.input(cfg.events_path());
    if (in.records.empty()) throw ValidationError("no records in " + cfg.events_path().string());
    return in;
}

std::map<std::string, int> label_map(const PipelineConfig& cfg, const std::string& stage,
                                     Manifest& man)
{
    require(cfg.labels_path(), stage);
    man.input(cfg.labels_path());
    std::map<std::string, int> m;
    for (const auto& [id, y] : read_labels(cfg.labels_path())) m[id] = y;
    return m;
}

}  // namespace

void cmd_synth(const PipelineConfig& cfg)
{
    run_stage("synth", [&] {
        Manifest man("synth", cfg);
        fs::create_directories(cfg.output_dir);
        const auto data = man.timed("generate", [&] { return generate_dataset(cfg.synth); });
        write_dictionary(data.truth.dictionary, cfg.dictionary_path());
        write_records(data.records, cfg.events_path());
        write_labels(data.records, data.labels, cfg.labels_path());
        write_ground_truth(data.truth, cfg.output_dir);
        for (const auto& p : {cfg.dictionary_path(), cfg.events_path(), cfg.labels_path(),
                              out(cfg, "ground_truth.sgmx"), out(cfg, "ground_truth_expressions.sgmx")})
            man.output(p);
        man.note("synth_seed", cfg.synth.seed);
        man.write();
    });
}

void cmd_curves(const PipelineConfig& cfg, const CommandOptions& opts)
{
    run_stage("curves", [&] {
        Manifest man("curves", cfg);
        const auto in = load_events(cfg, "curves", man);
        const EventRecord* rec = &in.records.front();
        if (opts.record_id) {
            rec = nullptr;
            for (const auto& r : in.records)
                if (r.record_id == *opts.record_id) rec = &r;
            if (!rec) throw ValidationError("no record '" + *opts.record_id + "'");
        }
        CurveParams params = cfg.curves;
        params.population_medians = population_medians(in.records, in.dict);
        const auto cs = man.timed("curves", [&] { return build_curveset(*rec, in.dict, params); });
        fs::create_directories(cfg.output_dir);
        const fs::path path = out(cfg, "curves_" + rec->record_id + ".csv");
        std::ofstream o(path);
        o.precision(17);
        o << "day,channel,value\n";
        for (Eigen::Index d = 0; d < cs.values.cols(); ++d)
            for (std::size_t c = 0; c < in.dict.size(); ++c)
                o << d << ',' << in.dict[c].id << ',' << cs.values(static_cast<Eigen::Index>(c), d)
                  << '\n';
        o.close();
        man.output(path);
        man.note("record_id", rec->record_id);
        man.write();
    });
}

void cmd_sample(const PipelineConfig& cfg, const CommandOptions& opts)
{
    const bool discovery = opts.sample_mode == SamplingMode::RandomDensity;
    const std::string stage = discovery ? "sample" : "sample-index";
    run_stage(stage, [&] {
        Manifest man(stage, cfg);
        auto in = load_events(cfg, stage, man);
        fs::create_directories(cfg.output_dir);

        CurveParams params = cfg.curves;
        const fs::path medians_path = out(cfg, "population_medians.json");
        if (discovery) {
            params.population_medians = population_medians(in.records, in.dict);
            write_json(json(params.population_medians), medians_path);
            man.output(medians_path);
        } else {
            // Evaluation curves impute with discovery medians when available.
            if (fs::exists(medians_path)) {
                params.population_medians =
                    read_json(medians_path).get<std::map<std::string, double>>();
                man.input(medians_path);
            } else {
                params.population_medians = population_medians(in.records, in.dict);
            }
            if (fs::exists(cfg.labels_path())) {
                const auto labels = label_map(cfg, stage, man);
                std::erase_if(in.records,
                              [&](const EventRecord& r) { return !labels.count(r.record_id); });
            }
        }

        SamplingPlan plan = cfg.sampling;
        plan.mode = opts.sample_mode;
        const auto samples = man.timed(
            "sample", [&] { return kernels::sample_records(in.records, in.dict, params, plan); });
        const SampleMatrix x = assemble_matrix(samples, in.dict);
        const fs::path path = out(cfg, discovery ? "discovery.sgmx" : "evaluation.sgmx");
        write_matrix(x, path);
        man.output(path);
        man.note("columns", x.cols());
        man.write();
    });
}

void cmd_fit(const PipelineConfig& cfg)
{
    run_stage("fit", [&] {
        Manifest man("fit", cfg);
        const fs::path xpath = out(cfg, "discovery.sgmx");
        require(xpath, "fit");
        const SampleMatrix x = read_matrix(xpath);
        man.input(xpath);

        const auto params = fit_standardizer(x, cfg.standardize);
        const SampleMatrix z = apply_standardizer(x, params);
        auto fit = man.timed("ica", [&] { return fit_ica(z, cfg.ica); });
        orient_signs(fit.model, fit.expressions);

        const fs::path spath = out(cfg, "standardizer.json");
        const fs::path mpath = out(cfg, "model.sgmodel");
        const fs::path epath = out(cfg, "discovery_expressions.sgmx");
        write_standardizer(params, spath);
        write_model(fit.model, mpath);
        write_matrix(expressions_matrix(fit.expressions, z.provenance), epath);
        for (const auto& p : {spath, mpath, epath}) man.output(p);
        man.note("convergence", {{"iterations", fit.model.convergence.iterations},
                                 {"final_delta", fit.model.convergence.final_delta},
                                 {"converged", fit.model.convergence.converged}});
        man.note("floored_channels", params.floored_channels);
        man.write();
    });
}

void cmd_project(const PipelineConfig& cfg)
{
    run_stage("project", [&] {
        Manifest man("project", cfg);
        const fs::path xpath = out(cfg, "evaluation.sgmx");
        const fs::path spath = out(cfg, "standardizer.json");
        const fs::path mpath = out(cfg, "model.sgmodel");
        for (const auto& p : {xpath, spath, mpath}) {
            require(p, "project");
            man.input(p);
        }
        const SampleMatrix x = read_matrix(xpath);
        const auto params = read_standardizer(spath);
        const auto model = read_model(mpath);
        const SampleMatrix z = apply_standardizer(x, params);
        const Eigen::MatrixXd s = project(model, z);

        const fs::path zpath = out(cfg, "evaluation_standardized.sgmx");
        const fs::path epath = out(cfg, "evaluation_expressions.sgmx");
        write_matrix(z, zpath);
        write_matrix(expressions_matrix(s, z.provenance), epath);
        man.output(zpath);
        man.output(epath);
        man.write();
    });
}

void cmd_report(const PipelineConfig& cfg, const CommandOptions& opts)
{
    run_stage("report", [&] {
        Manifest man("report", cfg);
        const fs::path spath = out(cfg, "standardizer.json");
        const fs::path mpath = out(cfg, "model.sgmodel");
        const fs::path epath = out(cfg, "discovery_expressions.sgmx");
        for (const auto& p : {spath, mpath, epath}) {
            require(p, "report");
            man.input(p);
        }
        const auto params = read_standardizer(spath);
        const auto model = read_model(mpath);
        const Eigen::MatrixXd s = read_matrix(epath).values;
        const fs::path dir = out(cfg, "reports");
        fs::create_directories(dir);
        if (opts.source) {
            const auto r = render_signature(model, params, *opts.source, cfg.report_threshold, &s,
                                            cfg.histogram_bins);
            const fs::path txt = report_path(dir, *opts.source);
            std::ofstream(txt) << format_report(r, params.epsilon);
            fs::path csv = txt;
            csv.replace_filename(txt.stem().string() + "_hist.csv");
            std::ofstream(csv) << r.histogram_csv;
            man.output(txt);
            man.output(csv);
        } else {
            write_report_bundle(model, params, s, dir, cfg.report_threshold, cfg.histogram_bins);
            for (int i = 0; i < model.k; ++i) man.output(report_path(dir, i));
        }
        man.write();
    });
}

namespace {

json cv_json(const CvResult& cv)
{
    json grid = json::array();
    for (const auto& c : cv.grid)
        grid.push_back({{"lambda", c.penalty.lambda},
                        {"l1_ratio", c.penalty.l1_ratio},
                        {"mean_auc", c.mean_auc},
                        {"fold_auc", c.fold_auc}});
    return {{"best_lambda", cv.best.lambda},
            {"best_l1_ratio", cv.best.l1_ratio},
            {"best_cv_auc", cv.best_auc},
            {"grid", grid}};
}

void write_cv_csv(const CvResult& cv, const fs::path& p)
{
    std::ofstream o(p);
    o.precision(17);
    o << "lambda,l1_ratio,fold,auc\n";
    for (const auto& c : cv.grid)
        for (std::size_t f = 0; f < c.fold_auc.size(); ++f)
            o << c.penalty.lambda << ',' << c.penalty.l1_ratio << ',' << f << ','
              << c.fold_auc[f] << '\n';
}

/// Cross-validates on the train side, refits the best cell and scores test.
json evaluate_features(const std::string& name, const Eigen::MatrixXd& feats,
                       const std::vector<int>& y, const std::vector<std::string>& groups,
                       const Split& split, const PipelineConfig& cfg, const fs::path& dir)
{
    const Eigen::MatrixXd xtr = select_columns(feats, split.train);
    const Eigen::MatrixXd xte = select_columns(feats, split.test);
    const auto ytr = select_labels(y, split.train);
    const auto yte = select_labels(y, split.test);
    std::vector<std::string> gtr;
    for (auto j : split.train) gtr.push_back(groups[static_cast<std::size_t>(j)]);

    const auto cv = cross_validate(xtr, ytr, gtr, cfg.eval.lambdas, cfg.eval.l1_ratios,
                                   cfg.eval.folds, derive_seed(cfg.seed, "cv"));
    write_cv_csv(cv, dir / ("cv_" + name + ".csv"));
    const auto sweep = seed_sweep(xtr, ytr, xte, yte, cv.best, cfg.eval.n_seeds);
    std::ofstream sw(dir / ("sweep_" + name + ".csv"));
    write_sweep_csv(sweep, sw);

    const auto model = train_elastic_net(xtr, ytr, cv.best, 0);
    const Eigen::VectorXd z = model.logits(xte);
    const double test_auc = auc(std::vector<double>(z.data(), z.data() + z.size()), yte);

    // Mean absolute attribution per feature over the test side, against the
    // train-side mean as background.
    const Eigen::VectorXd background = xtr.rowwise().mean();
    Eigen::VectorXd mean_abs = Eigen::VectorXd::Zero(feats.rows());
    for (Eigen::Index j = 0; j < xte.cols(); ++j)
        mean_abs += linear_attribution(model, xte.col(j), background).cwiseAbs();
    if (xte.cols() > 0) mean_abs /= static_cast<double>(xte.cols());
    std::ofstream wo(dir / ("weights_" + name + ".csv"));
    wo.precision(17);
    wo << "feature,weight,mean_abs_attribution\n";
    for (Eigen::Index i = 0; i < feats.rows(); ++i)
        wo << i << ',' << model.weights(i) << ',' << mean_abs(i) << '\n';

    return {{"test_auc", test_auc},
            {"cv", cv_json(cv)},
            {"sweep", {{"auc", sweep.auc}, {"min", sweep.min}, {"median", sweep.median},
                       {"max", sweep.max}}},
            {"iterations", model.iterations},
            {"converged", model.converged}};
}

}  // namespace

json cmd_eval(const PipelineConfig& cfg)
{
    return run_stage("eval", [&] {
        Manifest man("eval", cfg);
        const fs::path zpath = out(cfg, "evaluation_standardized.sgmx");
        const fs::path epath = out(cfg, "evaluation_expressions.sgmx");
        for (const auto& p : {zpath, epath}) {
            require(p, "eval");
            man.input(p);
        }
        const auto labels = label_map(cfg, "eval", man);
        const SampleMatrix x = read_matrix(zpath);
        const SampleMatrix s = read_matrix(epath);
        if (x.provenance != s.provenance)
            throw ValidationError("evaluation matrix and expressions disagree on columns");

        std::vector<int> y;
        std::vector<std::string> groups;
        for (const auto& p : x.provenance) {
            const auto it = labels.find(p.record_id);
            if (it == labels.end())
                throw ValidationError("record '" + p.record_id + "' has no label");
            y.push_back(it->second);
            groups.push_back(p.record_id);
        }
        const Split split =
            split_records(groups, y, cfg.eval.test_fraction, derive_seed(cfg.seed, "split"));
        const fs::path dir = out(cfg, "eval");
        fs::create_directories(dir);

        json metrics;
        metrics["records"] = x.cols();
        metrics["train_columns"] = split.train.size();
        metrics["test_columns"] = split.test.size();
        metrics["signatures"] =
            man.timed("S", [&] { return evaluate_features("S", s.values, y, groups, split, cfg, dir); });
        metrics["channels"] =
            man.timed("X", [&] { return evaluate_features("X", x.values, y, groups, split, cfg, dir); });
        const fs::path mpath = dir / "metrics.json";
        write_json(metrics, mpath);
        man.output(mpath);
        man.write();
        return metrics;
    });
}

Eigen::MatrixXd planted_expressions(const SampleMatrix& z, const GroundTruth& truth)
{
    std::map<std::string, Eigen::Index> col_of;
    for (std::size_t i = 0; i < truth.record_ids.size(); ++i)
        col_of[truth.record_ids[i]] = static_cast<Eigen::Index>(i);
    Eigen::MatrixXd s(truth.expressions.rows(), z.values.cols());
    for (std::size_t j = 0; j < z.provenance.size(); ++j) {
        const auto it = col_of.find(z.provenance[j].record_id);
        if (it == col_of.end())
            throw ValidationError("record '" + z.provenance[j].record_id +
                                  "' is not in the ground truth");
        s.col(static_cast<Eigen::Index>(j)) = truth.expressions.col(it->second);
    }
    return s;
}

Eigen::MatrixXd planted_signatures(const SampleMatrix& z, const GroundTruth& truth)
{
    Eigen::MatrixXd s = planted_expressions(z, truth);
    s.colwise() -= s.rowwise().mean();
    Eigen::MatrixXd zc = z.values;
    zc.colwise() -= zc.rowwise().mean();
    const Eigen::MatrixXd gram = s * s.transpose();
    return (zc * s.transpose()) * gram.ldlt().solve(Eigen::MatrixXd::Identity(gram.rows(), gram.cols()));
}

RecoveryMetrics recovery_metrics(const SignatureModel& model, const SampleMatrix& z,
                                 const Eigen::MatrixXd& expressions, const GroundTruth& truth)
{
    RecoveryMetrics m;
    const Eigen::MatrixXd a_true = planted_signatures(z, truth);
    m.signatures = match_signatures(model.mixing, a_true);
    m.expressions = match_signatures(expressions.transpose(), planted_expressions(z, truth).transpose());
    if (model.mixing.cols() == a_true.cols()) m.amari = amari_index(model.mixing, a_true);
    return m;
}

GroundTruth read_ground_truth(const fs::path& dir)
{
    GroundTruth t;
    t.signatures = read_raw_matrix(dir / "ground_truth.sgmx");
    t.expressions = read_raw_matrix(dir / "ground_truth_expressions.sgmx");
    const json j = read_json(dir / "ground_truth.json");
    try {
        t.record_ids = j.at("record_ids").get<std::vector<std::string>>();
        t.label_threshold = j.at("label_threshold").get<double>();
    } catch (const json::exception& e) {
        throw FormatError("bad ground_truth.json: " + std::string(e.what()));
    }
    if (static_cast<Eigen::Index>(t.record_ids.size()) != t.expressions.cols())
        throw FormatError("ground truth expressions do not match its record list");
    return t;
}

namespace {

json match_json(const MatchReport& r)
{
    json pairs = json::array();
    for (const auto& p : r.pairs)
        pairs.push_back({{"estimated", p.estimated}, {"truth", p.truth},
                         {"abs_correlation", p.abs_correlation}});
    return {{"defined", r.defined},
            {"mean_abs_correlation", r.mean_abs_correlation},
            {"min_abs_correlation", r.min_abs_correlation},
            {"pairs", pairs}};
}

}  // namespace

json cmd_e2e(const PipelineConfig& cfg)
{
    return run_stage("e2e", [&] {
        Manifest man("e2e", cfg);
        if (cfg.events.empty()) man.timed("synth", [&] { cmd_synth(cfg); });
        man.timed("sample", [&] { cmd_sample(cfg, {SamplingMode::RandomDensity, {}, {}}); });
        man.timed("fit", [&] { cmd_fit(cfg); });
        man.timed("sample-index", [&] { cmd_sample(cfg, {SamplingMode::FixedIndexDay, {}, {}}); });
        man.timed("project", [&] { cmd_project(cfg); });
        man.timed("report", [&] { cmd_report(cfg); });

        json metrics;
        if (fs::exists(cfg.labels_path()))
            metrics["eval"] = man.timed("eval", [&] { return cmd_eval(cfg); });

        if (fs::exists(out(cfg, "ground_truth.json"))) {
            run_stage("recovery", [&] {
                const auto truth = read_ground_truth(cfg.output_dir);
                const auto params = read_standardizer(out(cfg, "standardizer.json"));
                const auto model = read_model(out(cfg, "model.sgmodel"));
                const SampleMatrix z =
                    apply_standardizer(read_matrix(out(cfg, "discovery.sgmx")), params);
                const Eigen::MatrixXd s = read_matrix(out(cfg, "discovery_expressions.sgmx")).values;
                const auto rec = recovery_metrics(model, z, s, truth);
                metrics["recovery"] = {{"signatures", match_json(rec.signatures)},
                                       {"expressions", match_json(rec.expressions)},
                                       {"amari", rec.amari}};
            });
        }
        const fs::path mpath = out(cfg, "metrics.json");
        write_json(metrics, mpath);
        man.output(mpath);
        man.write();
        return metrics;
    });
}

}  // namespace sigdisc

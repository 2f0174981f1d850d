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

#include "sigdisc/config.hpp"
#include "sigdisc/error.hpp"
#include "sigdisc/rng.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>

namespace sigdisc {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& raw)
{
    const std::string s = trim(raw);
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
        return s.substr(1, s.size() - 2);
    return s;
}

double to_double(const std::string& key, const std::string& raw)
{
    const std::string s = unquote(raw);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0' || errno == ERANGE)
        throw ConfigError(key + ": expected a number, got '" + raw + "'");
    return v;
}

long long to_integer(const std::string& key, const std::string& raw)
{
    const std::string s = unquote(raw);
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || *end != '\0' || errno == ERANGE)
        throw ConfigError(key + ": expected an integer, got '" + raw + "'");
    return v;
}

int to_int(const std::string& key, const std::string& raw)
{
    const long long v = to_integer(key, raw);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw ConfigError(key + ": value out of range");
    return static_cast<int>(v);
}

std::uint64_t to_seed(const std::string& key, const std::string& raw)
{
    const std::string s = unquote(raw);
    char* end = nullptr;
    errno = 0;
    if (s.empty() || s[0] == '-') throw ConfigError(key + ": seed must be nonnegative");
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (*end != '\0' || errno == ERANGE)
        throw ConfigError(key + ": expected an unsigned integer, got '" + raw + "'");
    return v;
}

std::vector<double> to_list(const std::string& key, const std::string& raw)
{
    std::string s = trim(raw);
    if (s.size() < 2 || s.front() != '[' || s.back() != ']')
        throw ConfigError(key + ": expected a list like [1, 2], got '" + raw + "'");
    s = s.substr(1, s.size() - 2);
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto comma = s.find(',', pos);
        const std::string item = trim(s.substr(pos, comma == std::string::npos ? std::string::npos
                                                                                 : comma - pos));
        if (!item.empty()) out.push_back(to_double(key, item));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

using Setter = std::function<void(PipelineConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        auto path = [](std::filesystem::path PipelineConfig::*m) {
            return [m](PipelineConfig& c, const std::string&, const std::string& v) {
                c.*m = unquote(v);
            };
        };
        t["paths.events"] = path(&PipelineConfig::events);
        t["paths.dictionary"] = path(&PipelineConfig::dictionary);
        t["paths.labels"] = path(&PipelineConfig::labels);
        t["paths.output_dir"] = path(&PipelineConfig::output_dir);
        t["seed"] = [](auto& c, auto& k, auto& v) { c.seed = to_seed(k, v); };
        t["threads"] = [](auto& c, auto& k, auto& v) { c.threads = to_int(k, v); };

        t["curves.smoothing_window_days"] = [](auto& c, auto& k, auto& v) { c.curves.smoothing_window_days = to_int(k, v); };
        t["curves.med_extension_days"] = [](auto& c, auto& k, auto& v) { c.curves.med_extension_days = to_int(k, v); };
        t["curves.rash_histograms"] = [](auto& c, auto& k, auto& v) { c.curves.rash_histograms = to_int(k, v); };
        t["curves.rash_min_bin_events"] = [](auto& c, auto& k, auto& v) { c.curves.rash_min_bin_events = to_double(k, v); };
        t["curves.seed"] = [](auto& c, auto& k, auto& v) { c.curves.seed = to_seed(k, v); };

        t["sampling.density"] = [](auto& c, auto& k, auto& v) { c.sampling.density = to_double(k, v); };
        t["sampling.seed"] = [](auto& c, auto& k, auto& v) { c.sampling.seed = to_seed(k, v); };

        t["standardize.epsilon"] = [](auto& c, auto& k, auto& v) { c.standardize.epsilon = to_double(k, v); };
        t["standardize.std_floor"] = [](auto& c, auto& k, auto& v) { c.standardize.std_floor = to_double(k, v); };

        t["ica.k"] = [](auto& c, auto& k, auto& v) { c.ica.k = to_int(k, v); };
        t["ica.max_iter"] = [](auto& c, auto& k, auto& v) { c.ica.max_iter = to_int(k, v); };
        t["ica.tol"] = [](auto& c, auto& k, auto& v) { c.ica.tol = to_double(k, v); };
        t["ica.contrast"] = [](auto& c, auto&, auto& v) { c.ica.contrast = parse_contrast(unquote(v)); };
        t["ica.alpha"] = [](auto& c, auto& k, auto& v) { c.ica.alpha = to_double(k, v); };
        t["ica.seed"] = [](auto& c, auto& k, auto& v) { c.ica.seed = to_seed(k, v); };

        t["eval.test_fraction"] = [](auto& c, auto& k, auto& v) { c.eval.test_fraction = to_double(k, v); };
        t["eval.lambdas"] = [](auto& c, auto& k, auto& v) { c.eval.lambdas = to_list(k, v); };
        t["eval.l1_ratios"] = [](auto& c, auto& k, auto& v) { c.eval.l1_ratios = to_list(k, v); };
        t["eval.folds"] = [](auto& c, auto& k, auto& v) { c.eval.folds = to_int(k, v); };
        t["eval.n_seeds"] = [](auto& c, auto& k, auto& v) { c.eval.n_seeds = to_int(k, v); };

        t["report.threshold"] = [](auto& c, auto& k, auto& v) { c.report_threshold = to_double(k, v); };
        t["report.bins"] = [](auto& c, auto& k, auto& v) { c.histogram_bins = to_int(k, v); };

        t["synth.records"] = [](auto& c, auto& k, auto& v) { c.synth.records = to_int(k, v); };
        t["synth.codes"] = [](auto& c, auto& k, auto& v) { c.synth.codes = to_int(k, v); };
        t["synth.measurements"] = [](auto& c, auto& k, auto& v) { c.synth.measurements = to_int(k, v); };
        t["synth.medications"] = [](auto& c, auto& k, auto& v) { c.synth.medications = to_int(k, v); };
        t["synth.demographics"] = [](auto& c, auto& k, auto& v) { c.synth.demographics = to_int(k, v); };
        t["synth.sources"] = [](auto& c, auto& k, auto& v) { c.synth.sources = to_int(k, v); };
        t["synth.sparsity"] = [](auto& c, auto& k, auto& v) { c.synth.sparsity = to_double(k, v); };
        t["synth.loading_density"] = [](auto& c, auto& k, auto& v) { c.synth.loading_density = to_double(k, v); };
        t["synth.code_effect"] = [](auto& c, auto& k, auto& v) { c.synth.code_effect = to_double(k, v); };
        t["synth.measurement_effect"] = [](auto& c, auto& k, auto& v) { c.synth.measurement_effect = to_double(k, v); };
        t["synth.medication_effect"] = [](auto& c, auto& k, auto& v) { c.synth.medication_effect = to_double(k, v); };
        t["synth.demographic_effect"] = [](auto& c, auto& k, auto& v) { c.synth.demographic_effect = to_double(k, v); };
        t["synth.measurement_noise"] = [](auto& c, auto& k, auto& v) { c.synth.measurement_noise = to_double(k, v); };
        t["synth.base_code_rate"] = [](auto& c, auto& k, auto& v) { c.synth.base_code_rate = to_double(k, v); };
        t["synth.measurement_rate"] = [](auto& c, auto& k, auto& v) { c.synth.measurement_rate = to_double(k, v); };
        t["synth.reconciliation_rate"] = [](auto& c, auto& k, auto& v) { c.synth.reconciliation_rate = to_double(k, v); };
        t["synth.min_length_days"] = [](auto& c, auto& k, auto& v) { c.synth.min_length_days = to_int(k, v); };
        t["synth.max_length_days"] = [](auto& c, auto& k, auto& v) { c.synth.max_length_days = to_int(k, v); };
        t["synth.label_source"] = [](auto& c, auto& k, auto& v) { c.synth.label_source = to_int(k, v); };
        t["synth.label_positive_rate"] = [](auto& c, auto& k, auto& v) { c.synth.label_positive_rate = to_double(k, v); };
        t["synth.seed"] = [](auto& c, auto& k, auto& v) { c.synth.seed = to_seed(k, v); };
        return t;
    }();
    return table;
}

}  // namespace

void apply_setting(PipelineConfig& cfg, const std::string& key, const std::string& value)
{
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(cfg, key, value);
    cfg.explicit_keys[key] = trim(value);
}

void PipelineConfig::resolve_seeds()
{
    if (!explicit_keys.count("curves.seed")) curves.seed = derive_seed(seed, "curves");
    if (!explicit_keys.count("sampling.seed")) sampling.seed = derive_seed(seed, "sampling");
    if (!explicit_keys.count("ica.seed")) ica.seed = derive_seed(seed, "ica");
    if (!explicit_keys.count("synth.seed")) synth.seed = derive_seed(seed, "synth");
}

void PipelineConfig::validate() const
{
    if (output_dir.empty()) throw ConfigError("paths.output_dir must be set");
    if (threads < 0) throw ConfigError("threads must be >= 0");
    curves.validate();
    sampling.validate();
    if (!(standardize.epsilon > 0.0)) throw ConfigError("standardize.epsilon must be > 0");
    if (!(standardize.std_floor > 0.0)) throw ConfigError("standardize.std_floor must be > 0");
    if (ica.k < 1) throw ConfigError("ica.k must be >= 1");
    if (ica.max_iter < 1) throw ConfigError("ica.max_iter must be >= 1");
    if (!(ica.tol > 0.0)) throw ConfigError("ica.tol must be > 0");
    if (!(eval.test_fraction > 0.0 && eval.test_fraction < 1.0))
        throw ConfigError("eval.test_fraction must lie in (0, 1)");
    if (eval.folds < 2) throw ConfigError("eval.folds must be >= 2");
    if (eval.n_seeds < 1) throw ConfigError("eval.n_seeds must be >= 1");
    for (double l : eval.lambdas)
        if (!(l >= 0.0)) throw ConfigError("eval.lambdas must be >= 0");
    for (double r : eval.l1_ratios)
        if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("eval.l1_ratios must lie in [0, 1]");
    if (!(report_threshold >= 0.0)) throw ConfigError("report.threshold must be >= 0");
    if (histogram_bins < 1) throw ConfigError("report.bins must be >= 1");
    synth.validate();
}

std::filesystem::path PipelineConfig::events_path() const
{
    return events.empty() ? output_dir / "events.jsonl" : events;
}

std::filesystem::path PipelineConfig::dictionary_path() const
{
    return dictionary.empty() ? output_dir / "dictionary.json" : dictionary;
}

std::filesystem::path PipelineConfig::labels_path() const
{
    return labels.empty() ? output_dir / "labels.csv" : labels;
}

nlohmann::json PipelineConfig::to_json() const
{
    nlohmann::json j;
    j["paths"] = {{"events", events_path().string()},
                  {"dictionary", dictionary_path().string()},
                  {"labels", labels_path().string()},
                  {"output_dir", output_dir.string()}};
    j["seed"] = seed;
    j["threads"] = threads;
    j["curves"] = {{"smoothing_window_days", curves.smoothing_window_days},
                   {"med_extension_days", curves.med_extension_days},
                   {"rash_histograms", curves.rash_histograms},
                   {"rash_min_bin_events", curves.rash_min_bin_events},
                   {"seed", curves.seed}};
    j["sampling"] = {{"density", sampling.density}, {"seed", sampling.seed}};
    j["standardize"] = {{"epsilon", standardize.epsilon}, {"std_floor", standardize.std_floor}};
    j["ica"] = {{"k", ica.k},         {"max_iter", ica.max_iter},
                {"tol", ica.tol},     {"contrast", to_string(ica.contrast)},
                {"alpha", ica.alpha}, {"seed", ica.seed}};
    j["eval"] = {{"test_fraction", eval.test_fraction}, {"lambdas", eval.lambdas},
                 {"l1_ratios", eval.l1_ratios},         {"folds", eval.folds},
                 {"n_seeds", eval.n_seeds}};
    j["report"] = {{"threshold", report_threshold}, {"bins", histogram_bins}};
    j["synth"] = {{"records", synth.records},
                  {"codes", synth.codes},
                  {"measurements", synth.measurements},
                  {"medications", synth.medications},
                  {"demographics", synth.demographics},
                  {"sources", synth.sources},
                  {"sparsity", synth.sparsity},
                  {"loading_density", synth.loading_density},
                  {"code_effect", synth.code_effect},
                  {"measurement_effect", synth.measurement_effect},
                  {"medication_effect", synth.medication_effect},
                  {"demographic_effect", synth.demographic_effect},
                  {"measurement_noise", synth.measurement_noise},
                  {"base_code_rate", synth.base_code_rate},
                  {"measurement_rate", synth.measurement_rate},
                  {"reconciliation_rate", synth.reconciliation_rate},
                  {"min_length_days", synth.min_length_days},
                  {"max_length_days", synth.max_length_days},
                  {"label_source", synth.label_source},
                  {"label_positive_rate", synth.label_positive_rate},
                  {"seed", synth.seed}};
    return j;
}

PipelineConfig parse_config(std::istream& in, const std::vector<std::string>& overrides)
{
    PipelineConfig cfg;
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        // Strip comments outside quotes.
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') quoted = !quoted;
            if (line[i] == '#' && !quoted) {
                line.resize(i);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw ParseError(lineno, "empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(lineno, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ParseError(lineno, "missing key");
        try {
            apply_setting(cfg, section.empty() ? key : section + "." + key,
                          trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not key=value");
        apply_setting(cfg, trim(o.substr(0, eq)), trim(o.substr(eq + 1)));
    }
    cfg.resolve_seeds();
    cfg.validate();
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path,
                           const std::vector<std::string>& overrides)
{
    std::ifstream in(path);
    if (!in) throw MissingInputError("config file not found: " + path.string());
    return parse_config(in, overrides);
}

}  // namespace sigdisc

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

#include "sigdisc/report.hpp"
#include "sigdisc/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace sigdisc {

namespace {

bool is_probability(Mode m) { return m == Mode::Medication || m == Mode::Demographic; }

std::string fixed2(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s = buf;
    if (s == "-0.00") s = "0.00";
    return s;
}

std::string signed_str(const std::string& s)
{
    return (s.empty() || s[0] == '-') ? s : "+" + s;
}

}  // namespace

double unit_effect(Mode mode, double coefficient, double row_scale)
{
    return mode == Mode::Code ? std::exp(coefficient * row_scale) : coefficient * row_scale;
}

double effect_at_expression(const EffectEntry& e, double expression)
{
    return e.mode == Mode::Code ? std::pow(e.effect, expression) : e.effect * expression;
}

std::string format_significant(double v, int digits)
{
    if (v == 0.0 || !std::isfinite(v)) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%g", v == 0.0 ? 0.0 : v);
        return buf;
    }
    const int magnitude = static_cast<int>(std::floor(std::log10(std::abs(v))));
    char buf[64];
    if (magnitude < -4 || magnitude >= 15) {
        std::snprintf(buf, sizeof buf, "%.*g", digits, v);
        return buf;
    }
    // Rounding can carry into a new leading digit (9.996 -> 10.00).
    int decimals = std::max(0, digits - 1 - magnitude);
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    const double rounded = std::strtod(buf, nullptr);
    if (rounded != 0.0 &&
        static_cast<int>(std::floor(std::log10(std::abs(rounded)))) > magnitude) {
        decimals = std::max(0, decimals - 1);
        std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    }
    std::string out = buf;
    if (out.find('.') != std::string::npos) {
        out.erase(out.find_last_not_of('0') + 1);
        if (out.back() == '.') out.pop_back();
    }
    return out;
}

std::string render_compounding(const EffectEntry& e, double expression)
{
    const double total = effect_at_expression(e, expression);
    char expr[32];
    std::snprintf(expr, sizeof expr, "%.1f", expression);
    if (e.mode == Mode::Code)
        return "x" + format_significant(e.effect) + "^" + expr + " = " +
               format_significant(total);
    const std::string shown = is_probability(e.mode) ? fixed2(total) : format_significant(total);
    return format_significant(e.effect) + " x " + expr + " = " + signed_str(shown);
}

SignatureReport render_signature(const SignatureModel& model,
                                 const StandardizerParams& standardizer, int source,
                                 double threshold, const Eigen::MatrixXd* expressions,
                                 int histogram_bins)
{
    if (source < 0 || source >= model.mixing.cols())
        throw ValidationError("signature index " + std::to_string(source) +
                              " out of range [0, " + std::to_string(model.mixing.cols()) + ")");
    const auto p = static_cast<std::size_t>(model.mixing.rows());
    if (standardizer.channels.size() != p || standardizer.scales.size() != p)
        throw ValidationError("standardizer has " + std::to_string(standardizer.channels.size()) +
                              " channels but the model has " + std::to_string(p));
    if (!model.channels.empty() && model.channels != standardizer.channels)
        throw ValidationError("model and standardizer channel orders differ");

    SignatureReport r;
    r.signature = source;
    r.threshold = threshold;
    std::vector<EffectEntry> all(p);
    for (std::size_t j = 0; j < p; ++j) {
        auto& e = all[j];
        e.channel = standardizer.channels[j].id;
        e.mode = standardizer.channels[j].mode;
        e.coefficient = model.mixing(static_cast<Eigen::Index>(j), source);
        e.effect = unit_effect(e.mode, e.coefficient, standardizer.scales[j]);
        e.rendered = e.mode == Mode::Code ? "x" + format_significant(e.effect)
                                          : signed_str(format_significant(e.effect));
        if (std::abs(e.coefficient) >= threshold) ++r.above_threshold;
    }
    std::stable_sort(all.begin(), all.end(), [](const EffectEntry& a, const EffectEntry& b) {
        const double fa = std::abs(a.coefficient), fb = std::abs(b.coefficient);
        if (fa != fb) return fa > fb;
        return a.channel < b.channel;
    });
    all.resize(std::min(p, std::max(kReportMinEntries, r.above_threshold)));
    r.entries = std::move(all);

    if (expressions) {
        if (source >= expressions->rows())
            throw ValidationError("expression matrix has no row " + std::to_string(source));
        r.histogram_csv = histogram_csv(expression_histogram(expressions->row(source), histogram_bins));
    }
    return r;
}

std::string format_report(const SignatureReport& r, double epsilon)
{
    std::ostringstream out;
    out << "signature " << r.signature << "\n";
    out << "showing " << r.entries.size() << " channels (|coefficient| >= "
        << format_significant(r.threshold) << ": " << r.above_threshold
        << "; at least " << kReportMinEntries << " shown)\n\n";
    std::size_t width = 7;
    for (const auto& e : r.entries) width = std::max(width, e.channel.size());
    char line[256];
    std::snprintf(line, sizeof line, "%-*s  %-11s  %12s  %s\n", static_cast<int>(width),
                  "channel", "mode", "coefficient", "effect per unit expression");
    out << line;
    for (const auto& e : r.entries) {
        std::snprintf(line, sizeof line, "%-*s  %-11s  %12s  %s\n", static_cast<int>(width),
                      e.channel.c_str(), to_string(e.mode),
                      format_significant(e.coefficient).c_str(), e.rendered.c_str());
        out << line;
    }
    out << "\ncode effects multiply the event intensity; other effects add to the channel"
           " value\n(probability for medications and demographics). Effects compound with"
           " expression level.\ncode factors ignore the log offset eps = "
        << format_significant(epsilon) << ".\n";
    return out.str();
}

Histogram expression_histogram(const Eigen::Ref<const Eigen::RowVectorXd>& row, int bins)
{
    if (row.size() == 0) throw ValidationError("no expressions to histogram");
    if (bins < 1) throw ValidationError("histogram needs at least one bin");
    if (!row.allFinite()) throw NumericError("non-finite expression value");
    const double lo = row.minCoeff(), hi = row.maxCoeff();
    Histogram h;
    h.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b)
        h.edges[b] = b == bins ? hi : lo + (hi - lo) * static_cast<double>(b) / bins;
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    const double width = (hi - lo) / bins;
    for (Eigen::Index i = 0; i < row.size(); ++i) {
        int b = width > 0.0 ? static_cast<int>((row(i) - lo) / width) : 0;
        b = std::clamp(b, 0, bins - 1);
        ++h.counts[static_cast<std::size_t>(b)];
    }
    return h;
}

std::string histogram_csv(const Histogram& h)
{
    std::ostringstream out;
    out.precision(17);
    out << "# raw counts; plot counts on a log scale\n";
    out << "bin_low,bin_high,count\n";
    for (std::size_t b = 0; b < h.counts.size(); ++b)
        out << h.edges[b] << ',' << h.edges[b + 1] << ',' << h.counts[b] << '\n';
    return out.str();
}

std::filesystem::path report_path(const std::filesystem::path& dir, int source)
{
    char name[64];
    std::snprintf(name, sizeof name, "signature_%03d.txt", source);
    return dir / name;
}

void write_report_bundle(const SignatureModel& model, const StandardizerParams& standardizer,
                         const Eigen::MatrixXd& expressions, const std::filesystem::path& dir,
                         double threshold, int histogram_bins)
{
    std::filesystem::create_directories(dir);
    for (int i = 0; i < model.mixing.cols(); ++i) {
        const auto r = render_signature(model, standardizer, i, threshold, &expressions,
                                        histogram_bins);
        auto txt = report_path(dir, i);
        std::ofstream(txt) << format_report(r, standardizer.epsilon);
        auto csv = txt;
        csv.replace_filename(txt.stem().string() + "_hist.csv");
        std::ofstream(csv) << r.histogram_csv;
    }
}

}  // namespace sigdisc

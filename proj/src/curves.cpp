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

#include "sigdisc/curves.hpp"
#include "sigdisc/error.hpp"
#include "sigdisc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace sigdisc {

void CurveParams::validate() const
{
    if (smoothing_window_days < 1)
        throw ConfigError("smoothing_window_days must be >= 1");
    if (med_extension_days < 0)
        throw ConfigError("med_extension_days must be >= 0");
    if (rash_histograms < 1) throw ConfigError("rash_histograms must be >= 1");
    if (!(rash_min_bin_events >= 1.0))
        throw ConfigError("rash_min_bin_events must be >= 1");
}

// ---------------------------------------------------------------------------
// Measurements

std::vector<DayValue> collapse_same_day(std::vector<DayValue> obs)
{
    std::stable_sort(obs.begin(), obs.end(),
                     [](const DayValue& a, const DayValue& b) {
                         return a.day < b.day;
                     });
    std::vector<DayValue> out;
    for (std::size_t i = 0; i < obs.size();) {
        std::size_t j = i;
        double sum = 0.0;
        while (j < obs.size() && obs[j].day == obs[i].day) sum += obs[j++].value;
        out.push_back({obs[i].day, sum / static_cast<double>(j - i)});
        i = j;
    }
    return out;
}

namespace {

int sign(double x) { return (x > 0) - (x < 0); }

// One-sided three-point slope at an end knot, limited to keep the end
// segment monotone.
double edge_slope(double h0, double h1, double m0, double m1)
{
    double d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if (sign(d) != sign(m0))
        d = 0.0;
    else if (sign(m0) != sign(m1) && std::abs(d) > 3.0 * std::abs(m0))
        d = 3.0 * m0;
    return d;
}

}  // namespace

std::vector<double> pchip_slopes(std::span<const DayValue> knots)
{
    const std::size_t n = knots.size();
    std::vector<double> d(n, 0.0);
    if (n < 2) return d;

    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        h[k] = static_cast<double>(knots[k + 1].day - knots[k].day);
        delta[k] = (knots[k + 1].value - knots[k].value) / h[k];
    }
    if (n == 2) {
        d[0] = d[1] = delta[0];
        return d;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (sign(delta[k - 1]) != sign(delta[k]) || delta[k - 1] == 0.0 ||
            delta[k] == 0.0)
            continue;
        const double w1 = 2.0 * h[k] + h[k - 1];
        const double w2 = h[k] + 2.0 * h[k - 1];
        d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
    }
    d[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    return d;
}

DailyCurve build_measurement_curve(std::vector<DayValue> obs, int length_days,
                                   double fallback_median)
{
    if (length_days < 0) throw ValidationError("negative curve length");
    for (const auto& o : obs)
        if (!std::isfinite(o.value))
            throw ValidationError("non-finite measurement value on day " +
                                  std::to_string(o.day));
    const auto n_days = static_cast<std::size_t>(length_days) + 1;
    if (obs.empty()) return DailyCurve(n_days, fallback_median);

    const auto knots = collapse_same_day(std::move(obs));
    const auto slopes = pchip_slopes(knots);

    DailyCurve curve(n_days);
    const int first = knots.front().day;
    const int last = knots.back().day;
    for (int t = 0; t <= length_days; ++t) {
        if (t <= first) curve[t] = knots.front().value;
        else if (t >= last) curve[t] = knots.back().value;
    }
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        const int x0 = knots[k].day;
        const int x1 = knots[k + 1].day;
        const double y0 = knots[k].value;
        const double y1 = knots[k + 1].value;
        const double h = static_cast<double>(x1 - x0);
        // Power form around x0; a flat segment evaluates to exactly y0.
        const double secant = (y1 - y0) / h;
        const double d0 = slopes[k], d1 = slopes[k + 1];
        const double c2 = (3.0 * secant - 2.0 * d0 - d1) / h;
        const double c3 = (d0 + d1 - 2.0 * secant) / (h * h);
        if (x0 <= length_days) curve[x0] = y0;
        for (int t = std::max(x0 + 1, 0); t < x1 && t <= length_days; ++t) {
            const double u = t - x0;
            curve[t] = y0 + u * (d0 + u * (c2 + u * c3));
        }
    }
    return curve;
}

// ---------------------------------------------------------------------------
// Codes

namespace {

// Accumulates the integral of a piecewise-constant density over each day
// [d, d+1), d = 0..last_day. Whole days go through a difference array.
class DailyIntegrator {
public:
    explicit DailyIntegrator(int last_day)
        : last_day_(last_day),
          partial_(static_cast<std::size_t>(last_day) + 1, 0.0),
          diff_(static_cast<std::size_t>(last_day) + 2, 0.0)
    {}

    void add(double a, double b, double density)
    {
        a = std::max(a, 0.0);
        b = std::min(b, static_cast<double>(last_day_) + 1.0);
        if (!(b > a)) return;
        const int da = static_cast<int>(std::floor(a));
        const int db = static_cast<int>(std::floor(b));
        if (da == db) {
            partial_[da] += density * (b - a);
            return;
        }
        partial_[da] += density * (da + 1 - a);
        if (db <= last_day_) partial_[db] += density * (b - db);
        if (db > da + 1) {
            diff_[da + 1] += density;
            diff_[db] -= density;
        }
    }

    DailyCurve finish(double scale) const
    {
        DailyCurve out(partial_.size());
        double run = 0.0;
        for (std::size_t d = 0; d < out.size(); ++d) {
            run += diff_[d];
            out[d] = (run + partial_[d]) * scale;
        }
        return out;
    }

private:
    int last_day_;
    std::vector<double> partial_;
    std::vector<double> diff_;
};

}  // namespace

DailyCurve build_code_intensity_curve(std::vector<int> events, int length_days,
                                      const CurveParams& params,
                                      std::uint64_t stream_seed)
{
    if (length_days < 0) throw ValidationError("negative curve length");
    const auto n_days = static_cast<std::size_t>(length_days) + 1;
    const double min_bin = params.rash_min_bin_events;
    const auto m = static_cast<double>(events.size());
    if (m < min_bin)
        return DailyCurve(n_days, m / std::max(length_days, 1));

    std::sort(events.begin(), events.end());
    // Event-space coordinate u in [0, m]: the first event fills u in [0, 1]
    // at its own time, event k sits at u = k + 1. Events are placed at the
    // centre of their day.
    std::vector<double> knot_time(events.size() + 1);
    knot_time[0] = events[0] + 0.5;
    for (std::size_t k = 0; k < events.size(); ++k)
        knot_time[k + 1] = events[k] + 0.5;
    auto time_at = [&](double u) {
        const auto k = std::min(static_cast<std::size_t>(u), events.size() - 1);
        const double frac = u - static_cast<double>(k);
        return knot_time[k] + frac * (knot_time[k + 1] - knot_time[k]);
    };

    Rng rng(stream_seed);
    DailyIntegrator acc(length_days);
    for (int r = 0; r < params.rash_histograms; ++r) {
        double b = 0.0;
        double first_start = 0, first_density = 0;
        double last_end = 0, last_density = 0;
        bool first = true;
        while (m - b > 0.0) {
            const double remaining = m - b;
            double size = remaining;
            if (remaining > min_bin) {
                size = std::uniform_real_distribution<double>(min_bin,
                                                              remaining)(rng);
                if (remaining - size < min_bin) size = remaining;
            }
            const double e = (size == remaining) ? m : b + size;
            double t0 = time_at(b);
            double t1 = time_at(e);
            if (t1 - t0 < 1.0) {
                const double c = 0.5 * (t0 + t1);
                t0 = c - 0.5;
                t1 = c + 0.5;
            }
            const double density = (e - b) / (t1 - t0);
            acc.add(t0, t1, density);
            if (first) {
                first_start = t0;
                first_density = density;
                first = false;
            }
            last_end = t1;
            last_density = density;
            b = e;
        }
        acc.add(-1.0, first_start, first_density);
        acc.add(last_end, length_days + 2.0, last_density);
    }
    return acc.finish(1.0 / params.rash_histograms);
}

// ---------------------------------------------------------------------------
// Medications

DailyCurve extend_taking_runs(std::span<const double> curve, int extension)
{
    const auto n = static_cast<long>(curve.size());
    DailyCurve out(curve.size(), 0.0);
    // Distance to the nearest taking day, from the left and from the right.
    long last_on = -1;
    for (long t = 0; t < n; ++t) {
        if (curve[t] > 0.5) last_on = t;
        if (last_on >= 0 && t - last_on <= extension) out[t] = 1.0;
    }
    long next_on = -1;
    for (long t = n - 1; t >= 0; --t) {
        if (curve[t] > 0.5) next_on = t;
        if (next_on >= 0 && next_on - t <= extension) out[t] = 1.0;
    }
    return out;
}

DailyCurve build_medication_curve(std::vector<std::pair<int, bool>> recons,
                                  int length_days, const CurveParams& params)
{
    if (length_days < 0) throw ValidationError("negative curve length");
    const auto n_days = static_cast<std::size_t>(length_days) + 1;
    if (recons.empty()) return DailyCurve(n_days, 0.0);

    std::stable_sort(recons.begin(), recons.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    // Same-day reconciliations: a mention in any of them counts.
    std::vector<std::pair<int, bool>> merged;
    for (const auto& r : recons) {
        if (!merged.empty() && merged.back().first == r.first)
            merged.back().second = merged.back().second || r.second;
        else
            merged.push_back(r);
    }

    DailyCurve curve(n_days);
    std::size_t next = 0;
    for (int t = 0; t <= length_days; ++t) {
        while (next < merged.size() && merged[next].first < t) ++next;
        bool v;
        if (next == 0)
            v = merged.front().second;
        else if (next == merged.size())
            v = merged.back().second;
        else {
            const auto& before = merged[next - 1];
            const auto& after = merged[next];
            // Equidistant days take the later reconciliation.
            v = (t - before.first < after.first - t) ? before.second
                                                     : after.second;
        }
        curve[t] = v ? 1.0 : 0.0;
    }
    return extend_taking_runs(curve, params.med_extension_days);
}

// ---------------------------------------------------------------------------
// Demographics and smoothing

std::vector<DailyCurve> build_demographic_curves(const EventRecord& rec,
                                                 const ChannelDictionary& dict,
                                                 int length_days)
{
    const auto n_days = static_cast<std::size_t>(length_days) + 1;
    std::vector<DailyCurve> out;
    for (std::size_t i : dict.indices_of(Mode::Demographic)) {
        const auto& id = dict[i].id;
        if (id == kAgeChannel) {
            DailyCurve age(n_days);
            for (std::size_t t = 0; t < n_days; ++t)
                age[t] = rec.age_at_day0 + static_cast<double>(t) / 365.25;
            out.push_back(std::move(age));
        } else {
            auto it = rec.demographics.find(id);
            out.emplace_back(n_days,
                             it == rec.demographics.end() ? 0.0 : it->second);
        }
    }
    return out;
}

DailyCurve retrospective_rolling_mean(std::span<const double> curve, int window)
{
    if (window < 1) throw ConfigError("rolling-mean window must be >= 1");
    const std::size_t n = curve.size();
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t t = 0; t < n; ++t) prefix[t + 1] = prefix[t] + curve[t];

    DailyCurve out(n);
    const auto w = static_cast<std::size_t>(window);
    for (std::size_t t = 0; t < n; ++t) {
        const std::size_t lo = t + 1 > w ? t + 1 - w : 0;
        out[t] = (prefix[t + 1] - prefix[lo]) / static_cast<double>(t + 1 - lo);
    }
    return out;
}

CurveSet build_curveset(const EventRecord& rec, const ChannelDictionary& dict,
                        const CurveParams& params, std::optional<int> length)
{
    const int l = length.value_or(rec.length_days());
    if (l < rec.length_days())
        throw ValidationError("record '" + rec.record_id +
                              "' has observations after day " +
                              std::to_string(l));

    const std::size_t p = dict.size();
    std::vector<std::vector<DayValue>> meas(p);
    std::vector<std::vector<int>> codes(p);
    std::vector<bool> mentioned(p, false);

    auto index_of = [&](const std::string& id) {
        auto idx = dict.find(id);
        if (!idx)
            throw ValidationError("record '" + rec.record_id +
                                  "': unknown channel '" + id + "'");
        return *idx;
    };
    for (const auto& m : rec.measurements)
        meas[index_of(m.channel)].push_back({m.day, m.value});
    for (const auto& c : rec.codes) codes[index_of(c.channel)].push_back(c.day);
    for (const auto& r : rec.med_recons)
        for (const auto& ch : r.channels) mentioned[index_of(ch)] = true;

    CurveSet cs;
    cs.record_id = rec.record_id;
    cs.length_days = l;
    cs.values.resize(static_cast<Eigen::Index>(p), l + 1);
    auto store = [&](std::size_t i, const DailyCurve& c) {
        cs.values.row(static_cast<Eigen::Index>(i)) =
            Eigen::Map<const Eigen::RowVectorXd>(c.data(),
                                                 static_cast<Eigen::Index>(c.size()));
    };

    const auto demo_idx = dict.indices_of(Mode::Demographic);
    const auto demo = build_demographic_curves(rec, dict, l);
    for (std::size_t j = 0; j < demo_idx.size(); ++j) store(demo_idx[j], demo[j]);

    for (std::size_t i = 0; i < p; ++i) {
        const auto& ch = dict[i];
        switch (ch.mode) {
        case Mode::Measurement: {
            auto it = params.population_medians.find(ch.id);
            const double median =
                it == params.population_medians.end() ? 0.0 : it->second;
            const auto raw = build_measurement_curve(std::move(meas[i]), l, median);
            store(i, retrospective_rolling_mean(raw, params.smoothing_window_days));
            break;
        }
        case Mode::Code: {
            const auto raw = build_code_intensity_curve(
                std::move(codes[i]), l, params,
                derive_seed(params.seed, rec.record_id, ch.id));
            store(i, retrospective_rolling_mean(raw, params.smoothing_window_days));
            break;
        }
        case Mode::Medication: {
            if (!mentioned[i]) {
                store(i, DailyCurve(static_cast<std::size_t>(l) + 1, 0.0));
                break;
            }
            std::vector<std::pair<int, bool>> recons;
            recons.reserve(rec.med_recons.size());
            for (const auto& r : rec.med_recons) {
                const bool taking = std::find(r.channels.begin(), r.channels.end(),
                                              ch.id) != r.channels.end();
                recons.emplace_back(r.day, taking);
            }
            store(i, build_medication_curve(std::move(recons), l, params));
            break;
        }
        case Mode::Demographic:
            break;
        }
    }
    return cs;
}

std::map<std::string, double> population_medians(
    const std::vector<EventRecord>& records, const ChannelDictionary& dict)
{
    std::map<std::string, std::vector<double>> values;
    for (const auto& r : records)
        for (const auto& m : r.measurements) values[m.channel].push_back(m.value);

    std::map<std::string, double> out;
    for (std::size_t i : dict.indices_of(Mode::Measurement)) {
        auto& v = values[dict[i].id];
        if (v.empty()) {
            out[dict[i].id] = 0.0;
            continue;
        }
        const std::size_t mid = v.size() / 2;
        std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
        double med = v[mid];
        if (v.size() % 2 == 0)
            med = 0.5 * (med + *std::max_element(v.begin(),
                                                 v.begin() + static_cast<long>(mid)));
        out[dict[i].id] = med;
    }
    return out;
}

}  // namespace sigdisc

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
 *
 * @file curves.hpp Daily-resolution curve builders, one per data mode.
 *
 * Measurements: monotone piecewise-cubic Hermite interpolation, flat
 * extrapolation. Codes: event intensity from averaged histograms whose bins
 * are drawn in event space. Medications: nearest-reconciliation 0/1 fill with
 * the taking region widened on both sides. Demographics: constants and an age
 * ramp. Measurement and code curves then get a retrospective rolling mean.
 *
 *****************************************************************************/

#pragma once

#include "sigdisc/core_model.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sigdisc {

struct CurveParams {
    int smoothing_window_days = 365;
    int med_extension_days = 365;
    int rash_histograms = 64;
    double rash_min_bin_events = 3.0;
    /// Imputation value for measurement channels a record never observed.
    std::map<std::string, double> population_medians;
    std::uint64_t seed = 0;

    /// Throws ConfigError when an invariant is violated.
    void validate() const;
};

using DailyCurve = std::vector<double>;

struct DayValue {
    int day = 0;
    double value = 0.0;
};

/// Averages values that share a day and sorts by day.
std::vector<DayValue> collapse_same_day(std::vector<DayValue> obs);

/// Hermite slopes at each knot for the shape-preserving interpolant
/// (weighted harmonic mean in the interior, one-sided three-point estimate at
/// the ends, zero wherever the data change direction). Knots must have
/// strictly increasing days.
std::vector<double> pchip_slopes(std::span<const DayValue> knots);

/// Curve over days 0..length_days through every observation. Empty `obs`
/// gives a constant `fallback_median`. Duplicate days are averaged.
DailyCurve build_measurement_curve(std::vector<DayValue> obs, int length_days,
                                   double fallback_median);

/// Intensity in events/day. `events` are days (any order, duplicates allowed).
/// Fewer than `rash_min_bin_events` events gives the constant m / l.
DailyCurve build_code_intensity_curve(std::vector<int> events, int length_days,
                                      const CurveParams& params,
                                      std::uint64_t stream_seed);

/// `recons` holds (day, taking) for one medication channel.
DailyCurve build_medication_curve(std::vector<std::pair<int, bool>> recons,
                                  int length_days, const CurveParams& params);

/// One curve per demographic channel of `dict`, in dictionary order of those
/// channels. Indicators are constant; the age channel is
/// age_at_day0 + day / 365.25.
std::vector<DailyCurve> build_demographic_curves(const EventRecord& rec,
                                                 const ChannelDictionary& dict,
                                                 int length_days);

/// out[t] = mean(curve[max(0, t - window + 1) .. t]).
DailyCurve retrospective_rolling_mean(std::span<const double> curve,
                                      int window);

/// Widens every maximal run of 1s by `extension` days on both sides.
DailyCurve extend_taking_runs(std::span<const double> curve, int extension);

/// Builds and smooths every dictionary channel for one record. The curveset
/// spans days 0..length where length defaults to rec.length_days().
CurveSet build_curveset(const EventRecord& rec, const ChannelDictionary& dict,
                        const CurveParams& params,
                        std::optional<int> length = std::nullopt);

/// Per-channel medians of the observed measurement values across records.
/// Channels nobody observed get 0.
std::map<std::string, double> population_medians(
    const std::vector<EventRecord>& records, const ChannelDictionary& dict);

}  // namespace sigdisc

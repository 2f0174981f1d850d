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
 * @file core_model.hpp Domain types: channels, event records, curvesets and
 * the sample matrix, plus event-file and dictionary ingestion.
 *
 *****************************************************************************/

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sigdisc {

enum class Mode { Measurement, Code, Medication, Demographic };

const char* to_string(Mode m);
Mode parse_mode(std::string_view s);

/// The demographic channel holding age in years. Every other demographic
/// channel is a 0/1 indicator.
inline constexpr std::string_view kAgeChannel = "age";

struct ChannelSpec {
    std::string id;
    Mode mode = Mode::Measurement;
    std::string unit;

    bool operator==(const ChannelSpec&) const = default;
};

/// Closed, ordered set of channels. Order defines row order of every matrix.
class ChannelDictionary {
public:
    ChannelDictionary() = default;
    explicit ChannelDictionary(std::vector<ChannelSpec> channels);

    std::size_t size() const { return channels_.size(); }
    const ChannelSpec& operator[](std::size_t i) const { return channels_[i]; }
    const std::vector<ChannelSpec>& channels() const { return channels_; }

    std::optional<std::size_t> find(std::string_view id) const;
    std::vector<std::size_t> indices_of(Mode m) const;

private:
    std::vector<ChannelSpec> channels_;
    std::unordered_map<std::string, std::size_t> index_;
};

ChannelDictionary read_dictionary(const std::filesystem::path& path);
ChannelDictionary parse_dictionary(std::istream& in);
void write_dictionary(const ChannelDictionary& dict,
                      const std::filesystem::path& path);

struct MeasurementObs {
    std::string channel;
    int day = 0;
    double value = 0.0;
};

struct CodeEvent {
    std::string channel;
    int day = 0;
};

struct MedReconciliation {
    int day = 0;
    std::vector<std::string> channels;
};

/// One subject's observations. Days count from the first date of the record.
struct EventRecord {
    std::string record_id;
    std::vector<MeasurementObs> measurements;
    std::vector<CodeEvent> codes;
    std::vector<MedReconciliation> med_recons;
    std::map<std::string, double> demographics;
    double age_at_day0 = 0.0;
    /// Evaluation anchor (single-sample rule). Absent for discovery records.
    std::optional<int> index_day;

    /// Last observation day; the record spans days [0, length_days()].
    int length_days() const;
    std::size_t distinct_observation_days() const;
};

/// Throws ValidationError naming the record on any invariant violation.
void validate_record(const EventRecord& rec, const ChannelDictionary& dict);

/// Copy of `rec` with every observation after `day` removed.
EventRecord truncate_record(const EventRecord& rec, int day);

/// Reads the line-delimited JSON event file. Records are validated against
/// `dict` and returned in file order. Blank lines are skipped.
std::vector<EventRecord> parse_records(const std::filesystem::path& path,
                                       const ChannelDictionary& dict);
std::vector<EventRecord> parse_records(std::istream& in,
                                       const ChannelDictionary& dict);

void write_records(const std::vector<EventRecord>& records,
                   const std::filesystem::path& path);
std::string record_to_json_line(const EventRecord& rec);

/// Daily curves for one record, one row per dictionary channel and one column
/// per day 0..length_days.
struct CurveSet {
    std::string record_id;
    int length_days = 0;
    Eigen::MatrixXd values;

    Eigen::VectorXd cross_section(int day) const { return values.col(day); }
};

struct Provenance {
    std::string record_id;
    int day = 0;

    bool operator==(const Provenance&) const = default;
};

/// Channels x cross-sections matrix with its metadata.
struct SampleMatrix {
    Eigen::MatrixXd values;
    std::vector<ChannelSpec> channels;
    std::vector<Provenance> provenance;

    std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }

    /// Throws ValidationError on shape mismatch or non-finite entries.
    void validate() const;
    bool same_channels(const std::vector<ChannelSpec>& other) const;
};

}  // namespace sigdisc

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

#include "sigdisc/core_model.hpp"
#include "sigdisc/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

using json = nlohmann::json;

namespace sigdisc {

const char* to_string(Mode m)
{
    switch (m) {
    case Mode::Measurement: return "measurement";
    case Mode::Code: return "code";
    case Mode::Medication: return "medication";
    case Mode::Demographic: return "demographic";
    }
    return "unknown";
}

Mode parse_mode(std::string_view s)
{
    if (s == "measurement") return Mode::Measurement;
    if (s == "code") return Mode::Code;
    if (s == "medication") return Mode::Medication;
    if (s == "demographic") return Mode::Demographic;
    throw ValidationError("unknown channel mode '" + std::string(s) + "'");
}

ChannelDictionary::ChannelDictionary(std::vector<ChannelSpec> channels)
    : channels_(std::move(channels))
{
    for (std::size_t i = 0; i < channels_.size(); ++i) {
        if (channels_[i].id.empty())
            throw ValidationError("channel " + std::to_string(i) +
                                  " has an empty id");
        if (!index_.emplace(channels_[i].id, i).second)
            throw ValidationError("duplicate channel id '" + channels_[i].id +
                                  "'");
    }
}

std::optional<std::size_t> ChannelDictionary::find(std::string_view id) const
{
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::size_t> ChannelDictionary::indices_of(Mode m) const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < channels_.size(); ++i)
        if (channels_[i].mode == m) out.push_back(i);
    return out;
}

ChannelDictionary parse_dictionary(std::istream& in)
{
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(0, std::string("channel dictionary: ") + e.what());
    }
    if (!doc.is_array())
        throw ParseError(0, "channel dictionary must be a JSON array");

    std::vector<ChannelSpec> channels;
    channels.reserve(doc.size());
    for (const auto& item : doc) {
        try {
            ChannelSpec spec;
            spec.id = item.at("id").get<std::string>();
            spec.mode = parse_mode(item.at("mode").get<std::string>());
            spec.unit = item.value("unit", std::string{});
            channels.push_back(std::move(spec));
        } catch (const json::exception& e) {
            throw ParseError(0, std::string("channel dictionary entry: ") +
                                    e.what());
        }
    }
    return ChannelDictionary(std::move(channels));
}

ChannelDictionary read_dictionary(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw MissingInputError("cannot open dictionary " + path.string());
    return parse_dictionary(in);
}

void write_dictionary(const ChannelDictionary& dict,
                      const std::filesystem::path& path)
{
    json doc = json::array();
    for (const auto& c : dict.channels())
        doc.push_back({{"id", c.id}, {"mode", to_string(c.mode)},
                       {"unit", c.unit}});
    std::ofstream out(path);
    if (!out) throw MissingInputError("cannot write " + path.string());
    out << doc.dump(1) << '\n';
}

int EventRecord::length_days() const
{
    int l = 0;
    for (const auto& m : measurements) l = std::max(l, m.day);
    for (const auto& c : codes) l = std::max(l, c.day);
    for (const auto& r : med_recons) l = std::max(l, r.day);
    return l;
}

std::size_t EventRecord::distinct_observation_days() const
{
    std::set<int> days;
    for (const auto& m : measurements) days.insert(m.day);
    for (const auto& c : codes) days.insert(c.day);
    for (const auto& r : med_recons) days.insert(r.day);
    return days.size();
}

namespace {

[[noreturn]] void reject(const EventRecord& rec, const std::string& why)
{
    throw ValidationError("record '" + rec.record_id + "': " + why);
}

void check_channel(const EventRecord& rec, const ChannelDictionary& dict,
                   const std::string& id, Mode expected)
{
    auto idx = dict.find(id);
    if (!idx) reject(rec, "unknown channel '" + id + "'");
    if (dict[*idx].mode != expected)
        reject(rec, "channel '" + id + "' is " + to_string(dict[*idx].mode) +
                        ", used as " + to_string(expected));
}

void check_day(const EventRecord& rec, int day)
{
    if (day < 0) reject(rec, "negative day " + std::to_string(day));
}

}  // namespace

void validate_record(const EventRecord& rec, const ChannelDictionary& dict)
{
    if (rec.record_id.empty())
        throw ValidationError("record with empty record_id");

    for (const auto& m : rec.measurements) {
        check_day(rec, m.day);
        check_channel(rec, dict, m.channel, Mode::Measurement);
        if (!std::isfinite(m.value))
            reject(rec, "non-finite value for '" + m.channel + "'");
    }
    for (const auto& c : rec.codes) {
        check_day(rec, c.day);
        check_channel(rec, dict, c.channel, Mode::Code);
    }
    for (const auto& r : rec.med_recons) {
        check_day(rec, r.day);
        for (const auto& ch : r.channels)
            check_channel(rec, dict, ch, Mode::Medication);
    }
    for (const auto& [id, v] : rec.demographics) {
        check_channel(rec, dict, id, Mode::Demographic);
        if (id == kAgeChannel)
            reject(rec, "age is given by age_at_day0, not as a demographic");
        if (!(v >= 0.0 && v <= 1.0))
            reject(rec, "demographic '" + id + "' outside [0,1]");
    }
    if (!std::isfinite(rec.age_at_day0))
        reject(rec, "non-finite age_at_day0");
    if (rec.index_day) check_day(rec, *rec.index_day);
    if (rec.distinct_observation_days() < 2)
        reject(rec, "fewer than two distinct dates containing an observation");
}

EventRecord truncate_record(const EventRecord& rec, int day)
{
    EventRecord out;
    out.record_id = rec.record_id;
    out.demographics = rec.demographics;
    out.age_at_day0 = rec.age_at_day0;
    out.index_day = rec.index_day;
    for (const auto& m : rec.measurements)
        if (m.day <= day) out.measurements.push_back(m);
    for (const auto& c : rec.codes)
        if (c.day <= day) out.codes.push_back(c);
    for (const auto& r : rec.med_recons)
        if (r.day <= day) out.med_recons.push_back(r);
    return out;
}

namespace {

EventRecord record_from_json(const json& j)
{
    EventRecord rec;
    rec.record_id = j.at("record_id").get<std::string>();
    if (j.contains("measurements"))
        for (const auto& m : j.at("measurements")) {
            if (!m.is_array() || m.size() != 3)
                throw std::invalid_argument("measurement entries are [channel, day, value]");
            rec.measurements.push_back(
                {m[0].get<std::string>(), m[1].get<int>(), m[2].get<double>()});
        }
    if (j.contains("codes"))
        for (const auto& c : j.at("codes")) {
            if (!c.is_array() || c.size() != 2)
                throw std::invalid_argument("code entries are [channel, day]");
            rec.codes.push_back({c[0].get<std::string>(), c[1].get<int>()});
        }
    if (j.contains("med_recons"))
        for (const auto& r : j.at("med_recons")) {
            if (!r.is_array() || r.size() != 2)
                throw std::invalid_argument("med_recons entries are [day, [channel...]]");
            rec.med_recons.push_back(
                {r[0].get<int>(), r[1].get<std::vector<std::string>>()});
        }
    if (j.contains("demographics"))
        for (const auto& [k, v] : j.at("demographics").items())
            rec.demographics[k] = v.get<double>();
    rec.age_at_day0 = j.value("age_at_day0", 0.0);
    if (j.contains("index_day")) rec.index_day = j.at("index_day").get<int>();
    return rec;
}

}  // namespace

std::vector<EventRecord> parse_records(std::istream& in,
                                       const ChannelDictionary& dict)
{
    std::vector<EventRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        EventRecord rec;
        try {
            rec = record_from_json(json::parse(line));
        } catch (const json::exception& e) {
            throw ParseError(lineno, e.what());
        } catch (const std::invalid_argument& e) {
            throw ParseError(lineno, e.what());
        }
        try {
            validate_record(rec, dict);
        } catch (const ValidationError& e) {
            throw ValidationError("line " + std::to_string(lineno) + ": " +
                                  e.what());
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<EventRecord> parse_records(const std::filesystem::path& path,
                                       const ChannelDictionary& dict)
{
    std::ifstream in(path);
    if (!in) throw MissingInputError("cannot open event file " + path.string());
    return parse_records(in, dict);
}

std::string record_to_json_line(const EventRecord& rec)
{
    json j;
    j["record_id"] = rec.record_id;
    j["measurements"] = json::array();
    for (const auto& m : rec.measurements)
        j["measurements"].push_back({m.channel, m.day, m.value});
    j["codes"] = json::array();
    for (const auto& c : rec.codes) j["codes"].push_back({c.channel, c.day});
    j["med_recons"] = json::array();
    for (const auto& r : rec.med_recons)
        j["med_recons"].push_back({r.day, r.channels});
    j["demographics"] = json::object();
    for (const auto& [k, v] : rec.demographics) j["demographics"][k] = v;
    j["age_at_day0"] = rec.age_at_day0;
    if (rec.index_day) j["index_day"] = *rec.index_day;
    return j.dump();
}

void write_records(const std::vector<EventRecord>& records,
                   const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw MissingInputError("cannot write " + path.string());
    for (const auto& r : records) out << record_to_json_line(r) << '\n';
}

void SampleMatrix::validate() const
{
    if (static_cast<std::size_t>(values.rows()) != channels.size())
        throw ValidationError("sample matrix has " +
                              std::to_string(values.rows()) + " rows but " +
                              std::to_string(channels.size()) + " channels");
    if (static_cast<std::size_t>(values.cols()) != provenance.size())
        throw ValidationError("sample matrix has " +
                              std::to_string(values.cols()) +
                              " columns but " +
                              std::to_string(provenance.size()) +
                              " provenance entries");
    if (!values.allFinite())
        throw ValidationError("sample matrix contains NaN or Inf");
}

bool SampleMatrix::same_channels(const std::vector<ChannelSpec>& other) const
{
    if (other.size() != channels.size()) return false;
    for (std::size_t i = 0; i < other.size(); ++i)
        if (other[i].id != channels[i].id || other[i].mode != channels[i].mode)
            return false;
    return true;
}

}  // namespace sigdisc

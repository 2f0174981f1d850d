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

#include "sigdisc/standardize.hpp"
#include "sigdisc/error.hpp"
#include "sigdisc/kernels.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>

using json = nlohmann::json;

namespace sigdisc {

namespace {

std::vector<Mode> modes_of(const std::vector<ChannelSpec>& channels)
{
    std::vector<Mode> out;
    out.reserve(channels.size());
    for (const auto& c : channels) out.push_back(c.mode);
    return out;
}

void check_channels(const SampleMatrix& x, const StandardizerParams& params)
{
    if (!x.same_channels(params.channels))
        throw ValidationError(
            "channel order of the matrix does not match the standardizer");
}

void check_code_domain(const SampleMatrix& x, double eps)
{
    for (std::size_t i = 0; i < x.channels.size(); ++i) {
        if (x.channels[i].mode != Mode::Code) continue;
        const double lo = x.values.row(static_cast<Eigen::Index>(i)).minCoeff();
        if (x.cols() > 0 && !(lo + eps > 0.0))
            throw NumericError("code channel '" + x.channels[i].id +
                               "' has value " + std::to_string(lo) +
                               " at or below -epsilon");
    }
}

}  // namespace

StandardizerParams fit_standardizer(const SampleMatrix& x,
                                    const StandardizerOptions& opts)
{
    if (x.cols() == 0 || x.rows() == 0)
        throw ValidationError("cannot fit a standardizer on an empty matrix");
    if (!(opts.epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
    x.validate();
    check_code_domain(x, opts.epsilon);

    // Code rows are measured on the log scale.
    Eigen::MatrixXd work = x.values;
    for (std::size_t i = 0; i < x.channels.size(); ++i)
        if (x.channels[i].mode == Mode::Code)
            work.row(static_cast<Eigen::Index>(i)) =
                (work.row(static_cast<Eigen::Index>(i)).array() + opts.epsilon).log();

    Eigen::VectorXd mean, sd;
    kernels::row_moments(work, mean, sd);

    StandardizerParams params;
    params.channels = x.channels;
    params.epsilon = opts.epsilon;
    params.std_floor = opts.std_floor;
    params.means.assign(x.rows(), 0.0);
    params.scales.assign(x.rows(), 1.0);
    for (std::size_t i = 0; i < x.channels.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const Mode m = x.channels[i].mode;
        if (m == Mode::Demographic) continue;
        if (m != Mode::Code) params.means[i] = mean(r);
        double scale = 2.0 * sd(r);
        if (scale < opts.std_floor) {
            scale = opts.std_floor;
            params.floored_channels.push_back(x.channels[i].id);
        }
        params.scales[i] = scale;
    }
    return params;
}

SampleMatrix apply_standardizer(const SampleMatrix& x,
                                const StandardizerParams& params)
{
    check_channels(x, params);
    check_code_domain(x, params.epsilon);
    SampleMatrix z;
    z.channels = x.channels;
    z.provenance = x.provenance;
    const auto modes = modes_of(params.channels);
    z.values = kernels::standardize_rows(x.values, modes, params.means,
                                         params.scales, params.epsilon);
    return z;
}

double standardize_value(double x, std::size_t row,
                         const StandardizerParams& params)
{
    switch (params.channels.at(row).mode) {
    case Mode::Measurement:
    case Mode::Medication:
        return (x - params.means[row]) / params.scales[row];
    case Mode::Code:
        return std::log(x + params.epsilon) / params.scales[row];
    case Mode::Demographic:
        return x;
    }
    return x;
}

double unstandardize_value(double z, std::size_t row,
                           const StandardizerParams& params)
{
    switch (params.channels.at(row).mode) {
    case Mode::Measurement:
    case Mode::Medication:
        return z * params.scales[row] + params.means[row];
    case Mode::Code:
        return std::exp(z * params.scales[row]) - params.epsilon;
    case Mode::Demographic:
        return z;
    }
    return z;
}

SampleMatrix invert_standardizer(const SampleMatrix& z,
                                 const StandardizerParams& params)
{
    check_channels(z, params);
    SampleMatrix x = z;
    for (Eigen::Index i = 0; i < x.values.rows(); ++i)
        for (Eigen::Index j = 0; j < x.values.cols(); ++j)
            x.values(i, j) =
                unstandardize_value(z.values(i, j), static_cast<std::size_t>(i), params);
    return x;
}

void write_standardizer(const StandardizerParams& params,
                        const std::filesystem::path& path)
{
    json j;
    j["channels"] = json::array();
    for (const auto& c : params.channels)
        j["channels"].push_back({{"id", c.id}, {"mode", to_string(c.mode)},
                                 {"unit", c.unit}});
    j["means"] = params.means;
    j["scales"] = params.scales;
    j["epsilon"] = params.epsilon;
    j["std_floor"] = params.std_floor;
    j["floored_channels"] = params.floored_channels;
    std::ofstream out(path);
    if (!out) throw MissingInputError("cannot write " + path.string());
    out << j.dump(1) << '\n';
}

StandardizerParams read_standardizer(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw MissingInputError("missing input: " + path.string());
    StandardizerParams p;
    try {
        const json j = json::parse(in);
        for (const auto& c : j.at("channels"))
            p.channels.push_back({c.at("id").get<std::string>(),
                                  parse_mode(c.at("mode").get<std::string>()),
                                  c.value("unit", std::string{})});
        p.means = j.at("means").get<std::vector<double>>();
        p.scales = j.at("scales").get<std::vector<double>>();
        p.epsilon = j.at("epsilon").get<double>();
        p.std_floor = j.value("std_floor", 1e-8);
        p.floored_channels =
            j.value("floored_channels", std::vector<std::string>{});
    } catch (const json::exception& e) {
        throw FormatError("bad standardizer file " + path.string() + ": " +
                          e.what());
    }
    if (p.means.size() != p.channels.size() || p.scales.size() != p.channels.size())
        throw FormatError("standardizer arrays do not match channel count");
    return p;
}

}  // namespace sigdisc

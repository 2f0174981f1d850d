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

#include "sigdisc/matrix_io.hpp"
#include "sigdisc/error.hpp"
#include "sigdisc/rng.hpp"

#include "json.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

using json = nlohmann::json;

namespace sigdisc {

namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian targets are not supported");

template <typename T>
T to_little(T v)
{
    if constexpr (std::endian::native == std::endian::big) {
        auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
        std::reverse(bytes.begin(), bytes.end());
        return std::bit_cast<T>(bytes);
    }
    return v;
}

template <typename T>
void put(std::ostream& out, T v)
{
    v = to_little(v);
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in)
{
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
        throw FormatError("matrix file truncated in header");
    return to_little(v);
}

constexpr std::uint64_t kHeaderBytes = 4 + 4 + 8 + 8;

}  // namespace

void write_raw_matrix(const Eigen::MatrixXd& m, std::ostream& out)
{
    out.write(kMatrixMagic, 4);
    put<std::uint32_t>(out, kMatrixVersion);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));

    std::vector<std::uint64_t> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row[static_cast<std::size_t>(c)] =
                to_little(std::bit_cast<std::uint64_t>(m(r, c)));
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * 8));
    }
    if (!out) throw FormatError("failed writing matrix data");
}

void write_raw_matrix(const Eigen::MatrixXd& m,
                      const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MissingInputError("cannot write " + path.string());
    write_raw_matrix(m, out);
}

Eigen::MatrixXd read_raw_matrix(std::istream& in, std::uint64_t byte_budget)
{
    char magic[4];
    if (!in.read(magic, 4)) throw FormatError("matrix file truncated in header");
    if (std::memcmp(magic, kMatrixMagic, 4) != 0)
        throw FormatError("bad magic bytes, expected SGMX");
    const auto version = get<std::uint32_t>(in);
    if (version != kMatrixVersion)
        throw FormatError("unsupported matrix version " +
                          std::to_string(version));
    const auto rows = get<std::uint64_t>(in);
    const auto cols = get<std::uint64_t>(in);

    constexpr auto max_index =
        static_cast<std::uint64_t>(std::numeric_limits<Eigen::Index>::max());
    if (rows > max_index || cols > max_index ||
        (cols != 0 && rows > std::numeric_limits<std::uint64_t>::max() / 8 / cols))
        throw FormatError("matrix dimensions overflow");
    const std::uint64_t payload = rows * cols * 8;
    if (byte_budget < kHeaderBytes || payload > byte_budget - kHeaderBytes)
        throw FormatError("matrix header claims " + std::to_string(rows) + "x" +
                          std::to_string(cols) +
                          " but the file is too short (truncated?)");

    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows),
                      static_cast<Eigen::Index>(cols));
    std::vector<std::uint64_t> row(cols);
    for (std::uint64_t r = 0; r < rows; ++r) {
        if (!in.read(reinterpret_cast<char*>(row.data()),
                     static_cast<std::streamsize>(cols * 8)))
            throw FormatError("matrix data truncated at row " +
                              std::to_string(r));
        for (std::uint64_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                std::bit_cast<double>(to_little(row[c]));
    }
    return m;
}

Eigen::MatrixXd read_raw_matrix(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingInputError("missing input: " + path.string());
    const auto size = std::filesystem::file_size(path);
    auto m = read_raw_matrix(in, size);
    if (in.peek() != std::char_traits<char>::eof())
        throw FormatError("trailing bytes after matrix data in " +
                          path.string());
    return m;
}

std::filesystem::path meta_path(const std::filesystem::path& path)
{
    return std::filesystem::path(path.string() + ".meta.json");
}

void write_matrix(const SampleMatrix& m, const std::filesystem::path& path)
{
    m.validate();
    write_raw_matrix(m.values, path);

    json meta;
    meta["channels"] = json::array();
    for (const auto& c : m.channels)
        meta["channels"].push_back(
            {{"id", c.id}, {"mode", to_string(c.mode)}, {"unit", c.unit}});
    meta["provenance"] = json::array();
    for (const auto& p : m.provenance)
        meta["provenance"].push_back({p.record_id, p.day});

    std::ofstream out(meta_path(path));
    if (!out) throw MissingInputError("cannot write " + meta_path(path).string());
    out << meta.dump() << '\n';
}

SampleMatrix read_matrix(const std::filesystem::path& path)
{
    SampleMatrix m;
    m.values = read_raw_matrix(path);

    std::ifstream in(meta_path(path));
    if (!in)
        throw MissingInputError("missing input: " + meta_path(path).string());
    try {
        const json meta = json::parse(in);
        for (const auto& c : meta.at("channels"))
            m.channels.push_back({c.at("id").get<std::string>(),
                                  parse_mode(c.at("mode").get<std::string>()),
                                  c.value("unit", std::string{})});
        for (const auto& p : meta.at("provenance"))
            m.provenance.push_back({p.at(0).get<std::string>(),
                                    p.at(1).get<int>()});
    } catch (const json::exception& e) {
        throw FormatError("bad matrix sidecar " + meta_path(path).string() +
                          ": " + e.what());
    }
    try {
        m.validate();
    } catch (const ValidationError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return m;
}

std::string file_digest(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingInputError("missing input: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(ss.str())));
    return buf;
}

}  // namespace sigdisc

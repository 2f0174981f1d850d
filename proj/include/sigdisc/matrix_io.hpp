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
 * @file matrix_io.hpp The SGMX binary matrix format.
 *
 * Layout: magic "SGMX", u32 version (1), u64 rows, u64 cols, then rows*cols
 * little-endian IEEE-754 doubles in row-major order. A SampleMatrix also gets
 * a `<path>.meta.json` sidecar holding channel order and column provenance.
 *
 *****************************************************************************/

#pragma once

#include "sigdisc/core_model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>

namespace sigdisc {

inline constexpr char kMatrixMagic[4] = {'S', 'G', 'M', 'X'};
inline constexpr std::uint32_t kMatrixVersion = 1;

void write_raw_matrix(const Eigen::MatrixXd& m, std::ostream& out);
void write_raw_matrix(const Eigen::MatrixXd& m,
                      const std::filesystem::path& path);

/// `byte_budget` bounds the payload the header may claim; pass the bytes
/// remaining in the source so that a corrupt header fails before allocating.
Eigen::MatrixXd read_raw_matrix(std::istream& in, std::uint64_t byte_budget);
Eigen::MatrixXd read_raw_matrix(const std::filesystem::path& path);

void write_matrix(const SampleMatrix& m, const std::filesystem::path& path);
SampleMatrix read_matrix(const std::filesystem::path& path);

std::filesystem::path meta_path(const std::filesystem::path& path);

/// FNV-1a of the file bytes, as 16 hex digits. Used in run manifests.
std::string file_digest(const std::filesystem::path& path);

}  // namespace sigdisc

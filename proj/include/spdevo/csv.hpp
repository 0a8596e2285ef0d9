// Copyright 2026 The spdevo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

namespace spdevo {

/// One CSV field. Reals are written with 9 significant digits; an empty
/// string leaves the field blank.
using CsvCell = std::variant<std::string, double, std::int64_t, std::uint64_t>;

std::string format_cell(const CsvCell& cell);

/// Streaming comma-separated writer with a fixed header.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);

    std::size_t columns() const noexcept { return header_.size(); }
    /// Throws DimensionError when the row width does not match the header.
    void row(const std::vector<CsvCell>& cells);
    void flush();

private:
    std::filesystem::path path_;
    std::vector<std::string> header_;
    std::ofstream out_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<CsvCell>> rows;
};

/// Writes a whole table; an empty row set gives a header-only file.
void write_csv(const CsvTable& table, const std::filesystem::path& path);

/// Minimal reader for files produced by CsvWriter (no quoting).
CsvTable read_csv(const std::filesystem::path& path);

} // namespace spdevo

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

#include "spdevo/csv.hpp"

#include <cstdio>
#include <sstream>

#include "spdevo/error.hpp"

namespace spdevo {

namespace {

std::string escape(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

} // namespace

std::string format_cell(const CsvCell& cell)
{
    struct Visitor {
        std::string operator()(const std::string& s) const { return escape(s); }
        std::string operator()(double v) const
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.9g", v == 0.0 ? 0.0 : v);
            return buf;
        }
        std::string operator()(std::int64_t v) const { return std::to_string(v); }
        std::string operator()(std::uint64_t v) const { return std::to_string(v); }
    };
    return std::visit(Visitor{}, cell);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : path_(path), header_(std::move(header))
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    for (std::size_t i = 0; i < header_.size(); ++i) {
        out_ << (i ? "," : "") << escape(header_[i]);
    }
    out_ << '\n';
}

void CsvWriter::row(const std::vector<CsvCell>& cells)
{
    if (cells.size() != header_.size()) {
        throw DimensionError("row has " + std::to_string(cells.size()) + " fields, header has " +
                             std::to_string(header_.size()));
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        out_ << (i ? "," : "") << format_cell(cells[i]);
    }
    out_ << '\n';
    if (!out_) {
        throw Error("write failed: " + path_.string());
    }
}

void CsvWriter::flush()
{
    out_.flush();
    if (!out_) {
        throw Error("write failed: " + path_.string());
    }
}

void write_csv(const CsvTable& table, const std::filesystem::path& path)
{
    CsvWriter writer(path, table.header);
    for (const auto& r : table.rows) {
        writer.row(r);
    }
    writer.flush();
}

CsvTable read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    auto split = [](const std::string& line) {
        std::vector<std::string> out;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            out.push_back(field);
        }
        if (!line.empty() && line.back() == ',') {
            out.emplace_back();
        }
        return out;
    };
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) {
        return table;
    }
    table.header = split(line);
    while (std::getline(in, line)) {
        std::vector<CsvCell> row;
        for (auto& f : split(line)) {
            row.emplace_back(std::move(f));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

} // namespace spdevo

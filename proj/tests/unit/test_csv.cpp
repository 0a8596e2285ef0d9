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


#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "spdevo/csv.hpp"
#include "spdevo/error.hpp"

using namespace spdevo;

namespace {

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path scratch(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / "spdevo_unit_csv";
    std::filesystem::create_directories(dir);
    return dir / name;
}

} // namespace

TEST_CASE("cell formatting")
{
    CHECK(format_cell(1.0) == "1");
    CHECK(format_cell(0.1) == "0.1");
    CHECK(format_cell(1.0 / 3.0) == "0.333333333");
    CHECK(format_cell(123456789.123) == "123456789");
    CHECK(format_cell(-0.0) == "0");
    CHECK(format_cell(std::int64_t{-3}) == "-3");
    CHECK(format_cell(std::uint64_t{7}) == "7");
    CHECK(format_cell(std::string("S1")) == "S1");
    CHECK(format_cell(std::string()) == "");
}

TEST_CASE("header-only file for an empty table")
{
    const auto p = scratch("empty.csv");
    write_csv({{"t", "x", "h"}, {}}, p);
    CHECK(slurp(p) == "t,x,h\n");
    const auto back = read_csv(p);
    CHECK(back.header == std::vector<std::string>{"t", "x", "h"});
    CHECK(back.rows.empty());
}

TEST_CASE("writer enforces the header width")
{
    const auto p = scratch("metrics.csv");
    {
        CsvWriter w(p, {"experiment", "mode", "trials", "region", "rmse", "avg_sigma", "runtime_s"});
        w.row({std::string("demo"), std::string("mpc"), std::uint64_t{16}, std::string("S"), 0.0021, 0.5, std::string()});
        CHECK_THROWS_AS(w.row({1.0, 2.0}), DimensionError);
    }
    CHECK(slurp(p) == "experiment,mode,trials,region,rmse,avg_sigma,runtime_s\ndemo,mpc,16,S,0.0021,0.5,\n");
    const auto t = read_csv(p);
    REQUIRE(t.rows.size() == 1);
    CHECK(std::get<std::string>(t.rows[0][4]) == "0.0021");
}

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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spdevo {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameter or configuration value.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Operands with incompatible sizes or grids.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Argument outside the domain of a function.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Linear solver breakdown.
class NumericError : public Error {
public:
    using Error::Error;
};

/// A state became non-finite while stepping.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, std::size_t step)
        : Error(what + " (step " + std::to_string(step) + ")"), step_(step)
    {
    }

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// The actuator Gram matrix is not positive definite.
class DegenerateActuationError : public Error {
public:
    using Error::Error;
};

/// Every rollout in a batch has infinite cost.
class DegenerateBatchError : public Error {
public:
    using Error::Error;
};

/// Metrics requested over an empty region or trial set.
class MetricsError : public Error {
public:
    using Error::Error;
};

/// Malformed configuration file; carries the offending line when known.
class ParseError : public ConfigError {
public:
    ParseError(const std::string& what, std::size_t line)
        : ConfigError(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line)
    {
    }

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace spdevo

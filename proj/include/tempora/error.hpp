/* Copyright 2026 The Tempora Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

	http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
--------------------------------------------------------------------------------------------------------------*/

#pragma once

#include <stdexcept>
#include <string>

namespace tempora {

// Error categories. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
    Config = 2,
    Data = 3,
    Runtime = 4,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Invalid configuration, spec or arguments.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

// Schema or content violations in panel data.
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

// CSV or model-file parse failure; carries the 1-based line number.
class ParseError : public DataError {
public:
    ParseError(std::size_t line, const std::string& what)
        : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Vectors of mismatched length or misaligned era indices.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& what) : Error(ErrorKind::Runtime, what) {}
};

// A rolling statistic or online model has no usable history yet.
class NotReadyError : public Error {
public:
    explicit NotReadyError(const std::string& what) : Error(ErrorKind::Runtime, what) {}
};

// A metric is mathematically undefined for the given input.
class UndefinedMetricError : public Error {
public:
    explicit UndefinedMetricError(const std::string& what) : Error(ErrorKind::Runtime, what) {}
};

} // namespace tempora

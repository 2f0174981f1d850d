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
 * @file error.hpp Exception types shared by every stage.
 *
 *****************************************************************************/

#pragma once

#include <stdexcept>
#include <string>

namespace sigdisc {

/// Machine-readable failure class. The CLI maps each to its own exit code.
enum class ErrorCategory {
    Parse,
    Validation,
    Format,
    MissingInput,
    Config,
    Numeric,
};

const char* to_string(ErrorCategory c);

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const { return category_; }

private:
    ErrorCategory category_;
};

/// Malformed input text. `line` is 1-based, 0 when unknown.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(ErrorCategory::Parse,
                line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what)
        : Error(ErrorCategory::Validation, what) {}
};

class FormatError : public Error {
public:
    explicit FormatError(const std::string& what)
        : Error(ErrorCategory::Format, what) {}
};

class MissingInputError : public Error {
public:
    explicit MissingInputError(const std::string& what)
        : Error(ErrorCategory::MissingInput, what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what)
        : Error(ErrorCategory::Config, what) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what)
        : Error(ErrorCategory::Numeric, what) {}
};

}  // namespace sigdisc

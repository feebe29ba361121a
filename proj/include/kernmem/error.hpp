// Copyright 2026 the kernmem authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace kernmem {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A size/count argument is zero or otherwise unusable.
class InvalidDimensionError : public Error {
public:
    using Error::Error;
};

/// Two operands disagree on a dimension (state length vs. N, etc).
class DimensionMismatchError : public Error {
public:
    using Error::Error;
};

/// A scalar parameter lies outside its allowed domain.
class OutOfRangeError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed text input. line/column are 1-based; 0 when not applicable.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : Error(line == 0 ? what
                          : what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
          line_(line),
          column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// A pattern or state entry outside {-1, +1}.
class EntryDomainError : public ParseError {
public:
    using ParseError::ParseError;
};

/// SPD factorization failed even after the jitter escalations.
class FactorizationError : public Error {
public:
    using Error::Error;
};

/// An iterative learner produced NaN or Inf.
class NonFiniteError : public Error {
public:
    using Error::Error;
};

/// An error raised inside a sweep, annotated with the sweep cell.
class ExperimentError : public Error {
public:
    using Error::Error;
};

}  // namespace kernmem

// Copyright 2026 The IntDiff Authors
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

#ifndef INTDIFF__ERRORS_HPP_
#define INTDIFF__ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace intdiff
{

/// Base class for every error raised by the library. `kind()` is a stable
/// machine-readable tag used by the CLI error reporter.
class Error : public std::runtime_error
{
public:
  Error(std::string kind, const std::string & message)
  : std::runtime_error(message), kind_(std::move(kind))
  {
  }

  const std::string & kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

class ParseError : public Error
{
public:
  ParseError(std::size_t line, const std::string & message)
  : Error("parse_error", "line " + std::to_string(line) + ": " + message), line_(line)
  {
  }

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class ValidationError : public Error
{
public:
  explicit ValidationError(const std::string & message) : Error("validation_error", message) {}
};

class IoError : public Error
{
public:
  explicit IoError(const std::string & message) : Error("io_error", message) {}
};

class TrainingError : public Error
{
public:
  explicit TrainingError(const std::string & message) : Error("training_error", message) {}
};

}  // namespace intdiff

#endif  // INTDIFF__ERRORS_HPP_

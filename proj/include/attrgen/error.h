/*
 * Copyright 2026 The attrgen Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace attrgen {

// Base of every domain error raised by the library. The CLI maps these to
// exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. `line` is 1-based; 0 when not line-oriented.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line,
             const std::string& message)
      : Error(source + ":" + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A structurally valid input that violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Caller broke an operation precondition (empty prompt, k > class count, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Template placeholder that cannot be resolved; `placeholder()` is the name.
class RenderError : public Error {
 public:
  RenderError(const std::string& placeholder, const std::string& message)
      : Error(message), placeholder_(placeholder) {}

  const std::string& placeholder() const { return placeholder_; }

 private:
  std::string placeholder_;
};

enum class ProviderErrorKind {
  kTransient,       // timeout, rate limit, 5xx; retried
  kPermanent,       // malformed request, unmatched mock prompt, 4xx
  kAuthentication,  // missing or rejected credential
};

class ProviderError : public Error {
 public:
  ProviderError(ProviderErrorKind kind, const std::string& message)
      : Error(message), kind_(kind) {}

  ProviderErrorKind kind() const { return kind_; }
  bool transient() const { return kind_ == ProviderErrorKind::kTransient; }

 private:
  ProviderErrorKind kind_;
};

// Raised when an armed spending cap would be crossed by the next request.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace attrgen

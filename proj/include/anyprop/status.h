/* Copyright 2026 The AnyProp Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef ANYPROP_STATUS_H_
#define ANYPROP_STATUS_H_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace anyprop {

// Precondition violations on public entry points.
class InvalidArgumentError : public std::invalid_argument {
 public:
  explicit InvalidArgumentError(const std::string& what)
      : std::invalid_argument(what) {}
};

// Malformed record in an input file. `location` is a 1-based line number for
// text formats and a byte offset for binary formats.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::int64_t location)
      : std::runtime_error(what), location_(location) {}
  std::int64_t location() const { return location_; }

 private:
  std::int64_t location_;
};

// Structurally valid input that violates a stream invariant (ordering, bounds,
// magic bytes).
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// The event stream does not cover the span a propagation step needs.
class InsufficientDataError : public std::runtime_error {
 public:
  InsufficientDataError(const std::string& what, std::int64_t missing_begin_us,
                        std::int64_t missing_end_us)
      : std::runtime_error(what),
        missing_begin_us_(missing_begin_us),
        missing_end_us_(missing_end_us) {}
  std::int64_t missing_begin_us() const { return missing_begin_us_; }
  std::int64_t missing_end_us() const { return missing_end_us_; }

 private:
  std::int64_t missing_begin_us_;
  std::int64_t missing_end_us_;
};

}  // namespace anyprop

#endif  // ANYPROP_STATUS_H_

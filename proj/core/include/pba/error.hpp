// Copyright 2026 The PBA Authors. All Rights Reserved.
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

#ifndef PBA_ERROR_HPP_
#define PBA_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace pba {

// Base class for every error raised by the library. Messages are one line
// and start with a short category tag so the CLI can print them verbatim.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or truncated input files.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error("format: " + what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io: " + what) {}
};

// Shape or precondition violations on in-memory arguments.
class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error("invalid-argument: " + what) {}
};

// Iterative numerics that failed to reach tolerance.
class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what)
      : Error("convergence: " + what) {}
};

// A container was presented with a model it was not produced by.
class HashMismatch : public Error {
 public:
  explicit HashMismatch(const std::string& what)
      : Error("hash-mismatch: " + what) {}
};

}  // namespace pba

#endif  // PBA_ERROR_HPP_

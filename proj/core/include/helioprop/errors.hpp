// Copyright 2026 The helioprop Authors.
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

#ifndef HELIOPROP_ERRORS_HPP
#define HELIOPROP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace helioprop {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid sizes, bounds or configuration values.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Requested band limit does not fit the sampling grid.
class BandLimitError : public Error {
 public:
  using Error::Error;
};

/// Arrays or grids with incompatible dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A non-finite value appeared in a computation.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Input outside the physical domain of an operation (e.g. v <= 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Explicit scheme would violate its CFL bound.
class StabilityError : public Error {
 public:
  using Error::Error;
};

/// A ForwardTape does not match the parameters it is replayed against.
class TapeError : public Error {
 public:
  using Error::Error;
};

/// Malformed or truncated file.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Dataset split produced an empty side or overlapping ranges.
class SplitError : public Error {
 public:
  using Error::Error;
};

/// Training loss became non-finite.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int epoch) : Error(what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace helioprop

#endif  // HELIOPROP_ERRORS_HPP

// Copyright 2026 The qacq Authors.
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

#ifndef QACQ_ERRORS_HPP
#define QACQ_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qacq {

/// Base class for all qacq exceptions.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed caller input: shape mismatches, out-of-bounds points.
struct InputError : Error {
  using Error::Error;
};

/// Invalid or inconsistent configuration values.
struct ConfigError : Error {
  using Error::Error;
};

/// Linear-algebra breakdown (factorization failure, singular solve).
struct NumericalError : Error {
  using Error::Error;
};

/// Matrix not positive definite within the allowed jitter.
struct NotPositiveDefiniteError : NumericalError {
  using NumericalError::NumericalError;
};

/// Query set contains (near-)duplicate rows; gradients are undefined there.
struct DegenerateQueryError : InputError {
  using InputError::InputError;
};

/// Hyperparameter fit failed on every restart.
struct FitError : Error {
  using Error::Error;
};

/// Filesystem failure while emitting results.
struct IoError : Error {
  using Error::Error;
};

}  // namespace qacq

#endif  // QACQ_ERRORS_HPP

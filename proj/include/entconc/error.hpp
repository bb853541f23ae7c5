// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace entconc {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad simplex, length mismatch, unknown option.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A requested computation is outside the mathematical domain of the result
/// (lambda <= -1, lambda below an admissible threshold, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A drawn category carries zero probability.
class ImpossibleSample : public Error {
 public:
  using Error::Error;
};

/// A parameter sits on the simplex boundary where a fixed-parameter bound is
/// undefined (max |log p| is infinite).
class BoundaryParameter : public Error {
 public:
  using Error::Error;
};

/// The computation is well posed but too large or vacuous to carry out.
class Infeasible : public Error {
 public:
  using Error::Error;
};

class CensusTooLarge : public Infeasible {
 public:
  using Infeasible::Infeasible;
};

class VacuousCode : public Infeasible {
 public:
  using Infeasible::Infeasible;
};

}  // namespace entconc

#pragma once

#include <stdexcept>
#include <string>

namespace qdc {

/// Operand shapes do not agree (matrix dims, vector lengths, operand counts).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A composition violates Λ₁ ≤ C ≤ Λ₂ for some generator C of the outer map.
class BoundViolation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An enumeration would exceed its desk-scale cap.
class UnsupportedDimension : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Base point violates g(x₀) ≤ 0.
class InfeasiblePoint : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed problem / expression JSON.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The problem is valid but outside what a command accepts (e.g. a vector
/// objective handed to the scalar solver).
class UnsupportedProblem : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace qdc

#pragma once

#include <stdexcept>
#include <string>

namespace perclab {

// Input outside an operation's domain (empty sets, disconnected inputs,
// points outside the box, non-unit directions, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A sampling run was requested at or above the configured p_c bound.
class SubcriticalityViolation : public std::domain_error {
 public:
  SubcriticalityViolation(int dimension, double p, double bound);
  int dimension() const { return dimension_; }
  double p() const { return p_; }
  double bound() const { return bound_; }

 private:
  int dimension_;
  double p_;
  double bound_;
};

// Exhaustive enumeration refused because the lattice has too many edges.
class EnumerationCapExceeded : public std::runtime_error {
 public:
  EnumerationCapExceeded(std::size_t edges, std::size_t cap);
  std::size_t edges() const { return edges_; }
  std::size_t cap() const { return cap_; }

 private:
  std::size_t edges_;
  std::size_t cap_;
};

// A numerical procedure could not produce a result (fit with too few
// scales, optimizer without any converged topology, ...).
class ComputationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace perclab

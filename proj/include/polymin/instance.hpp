#pragma once

#include <cstdint>

#include "polymin/poly.hpp"
#include "polymin/rng.hpp"

namespace polymin {

struct InstanceSpec {
  int num_vars = 2;
  int degree = 4;  // even
  std::uint64_t seed = 0;
};

/// f = sum_{|alpha| <= d} a_alpha X^alpha with a_alpha ~ U(-1, 1) i.i.d.,
/// drawn in graded-lex order of alpha. Whole instances are redrawn from the
/// same stream until every pure power x_i^d has a positive coefficient.
/// Throws std::invalid_argument for odd d, d < 2, or n < 1.
Polynomial GenerateInstance(const InstanceSpec& spec);

/// Whether every pure power x_i^d has a positive coefficient.
bool SatisfiesPurePowerCondition(const Polynomial& f, int degree);

}  // namespace polymin

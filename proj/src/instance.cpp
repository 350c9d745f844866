#include "polymin/instance.hpp"

#include <stdexcept>

namespace polymin {

bool SatisfiesPurePowerCondition(const Polynomial& f, int degree) {
  for (int i = 0; i < f.num_vars(); ++i) {
    if (!(f.coefficient(Monomial::Unit(f.num_vars(), i, degree)) > 0.0)) return false;
  }
  return true;
}

Polynomial GenerateInstance(const InstanceSpec& spec) {
  if (spec.num_vars < 1) throw std::invalid_argument("GenerateInstance: n must be positive");
  if (spec.degree < 2 || spec.degree % 2 != 0) {
    throw std::invalid_argument("GenerateInstance: d must be even and at least 2");
  }
  const std::vector<Monomial> monomials = MonomialsUpToDegree(spec.num_vars, spec.degree);
  Xoshiro256 rng(spec.seed);
  for (;;) {
    Polynomial f(spec.num_vars);
    for (const Monomial& m : monomials) f.AddTerm(m, rng.UniformSigned());
    if (SatisfiesPurePowerCondition(f, spec.degree)) return f;
  }
}

}  // namespace polymin

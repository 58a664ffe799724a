// norms.hpp
//
// Mixed Lebesgue norms L^{p,q}, their sequence analogues l^{p,q}, the mixed
// Wiener amalgam norm W(L^{p,q}) and the oscillation (local modulus of
// continuity). The inner exponent q always acts on the d spatial axes and the
// outer exponent p on axis 0. Every sum runs in a fixed order, so results do
// not depend on how callers schedule work.

#ifndef AVSAMP_NORMS_HPP
#define AVSAMP_NORMS_HPP

#include <stdexcept>

#include "avsamp/grid.hpp"

namespace avsamp {

struct MixedExponents {
  double p = 2.0;
  double q = 2.0;

  MixedExponents() = default;
  MixedExponents(double p_, double q_);
};

class CoefficientArray;  // coefficients.hpp

double mixed_lebesgue_norm(const DiscreteField& f, const MixedExponents& e);

// [ sum_{k1} ( sum_{k2} |c_i(k1,k2)|^q )^{p/q} ]^{1/p} for generator i.
double mixed_seq_norm(const CoefficientArray& c, int i, const MixedExponents& e);

// [ sum_n max_{x in [n,n+1)} ( sum_l max_{y in l+[0,1)^d} |f|^q )^{p/q} ]^{1/p},
// where the sup over a unit cell is the max over its m^(d+1) samples.
double wiener_amalgam_norm(const DiscreteField& f, const MixedExponents& e);

// osc_delta(f)(x) = max_{|t_a| <= delta for every axis} |f(x + t) - f(x)|,
// with t restricted to grid offsets. Requires delta <= min period / 4.
DiscreteField oscillation(const DiscreteField& f, double delta);

// Window radius in cells used by oscillation() for a given delta.
long oscillation_radius(const GridSpec& spec, double delta);

}  // namespace avsamp

#endif

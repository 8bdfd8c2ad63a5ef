#pragma once

// 2-morphisms (g, h): g ⇒ t(h)·g of the one-object 2-groupoid of a crossed module.

#include "two_transport/crossed_module.hpp"

#include <random>

namespace two_transport {

inline constexpr double kComposeTol = 1e-9;

struct TwoMorphism {
  GroupElement source;
  GroupElement h;
};

inline GroupElement target(const CrossedModule& cm, const TwoMorphism& m) {
  return multiply(cm.apply_t(m.h), m.source);
}

inline TwoMorphism identity_2morphism(const CrossedModule& cm, const GroupElement& g) {
  return {g, cm.H().identity()};
}

/// m2 • m1 with source(m2) = target(m1).
inline TwoMorphism vertical_compose(const CrossedModule& cm, const TwoMorphism& m2, const TwoMorphism& m1,
                                    double tol = kComposeTol) {
  const double gap = distance(m2.source, target(cm, m1));
  if (!(gap <= tol))
    throw Error("vertical_compose: source/target mismatch (" + std::to_string(gap) + ")");
  return {m1.source, multiply(m2.h, m1.h)};
}

/// m2 ∘ m1 = (g₂g₁, h₂·α(g₂, h₁)).
inline TwoMorphism horizontal_compose(const CrossedModule& cm, const TwoMorphism& m2, const TwoMorphism& m1) {
  return {multiply(m2.source, m1.source), multiply(m2.h, cm.apply_alpha(m2.source, m1.h))};
}

inline TwoMorphism vertical_inverse(const CrossedModule& cm, const TwoMorphism& m) {
  return {target(cm, m), inverse(m.h)};
}

inline TwoMorphism horizontal_inverse(const CrossedModule& cm, const TwoMorphism& m) {
  const GroupElement gi = inverse(m.source);
  return {gi, inverse(cm.apply_alpha(gi, m.h))};
}

inline double distance(const TwoMorphism& a, const TwoMorphism& b) {
  return std::max(distance(a.source, b.source), distance(a.h, b.h));
}

struct InterchangeReport {
  double max_residual = 0;
  int samples = 0;
};

/// (ψ₁•ψ₂)∘(φ₁•φ₂) against (ψ₁∘φ₁)•(ψ₂∘φ₂) on random composable quadruples.
/// `drop_alpha` swaps in the wrong horizontal law (g₂g₁, h₂h₁).
inline InterchangeReport check_interchange(const CrossedModule& cm, int samples, std::uint64_t seed,
                                           bool drop_alpha = false) {
  std::mt19937_64 rng(seed);
  auto hcomp = [&](const TwoMorphism& m2, const TwoMorphism& m1) {
    if (drop_alpha) return TwoMorphism{multiply(m2.source, m1.source), multiply(m2.h, m1.h)};
    return horizontal_compose(cm, m2, m1);
  };
  // vertical composition without the boundary check: the wrong law breaks
  // composability itself, and the residual should report that
  auto vcomp = [](const TwoMorphism& m2, const TwoMorphism& m1) {
    return TwoMorphism{m1.source, multiply(m2.h, m1.h)};
  };
  InterchangeReport r;
  r.samples = samples;
  for (int s = 0; s < samples; ++s) {
    const GroupElement a = cm.G().random(rng), b = cm.G().random(rng);
    const TwoMorphism phi2{a, cm.H().random(rng)};
    const TwoMorphism psi2{target(cm, phi2), cm.H().random(rng)};
    const TwoMorphism phi1{b, cm.H().random(rng)};
    const TwoMorphism psi1{target(cm, phi1), cm.H().random(rng)};
    const TwoMorphism lhs = hcomp(vcomp(psi1, phi1), vcomp(psi2, phi2));
    const TwoMorphism rhs = vcomp(hcomp(psi1, psi2), hcomp(phi1, phi2));
    r.max_residual = std::max(r.max_residual, distance(lhs, rhs));
  }
  return r;
}

}  // namespace two_transport

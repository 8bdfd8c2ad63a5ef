#include "fixtures.hpp"
#include "two_transport/crossed_module.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace two_transport;

namespace {

const Complex I(0, 1);

}  // namespace

TEST(CrossedModule, BuiltinsSatisfyAxioms) {
  for (const auto& name : builtin_crossed_module_names()) {
    const AxiomReport r = validate_axioms(builtin_crossed_module(name), 200, 42);
    EXPECT_TRUE(r.pass) << name;
    EXPECT_LT(r.axiom_a, 1e-9) << name;
    EXPECT_LT(r.axiom_b, 1e-9) << name;
    EXPECT_LT(r.action, 1e-9) << name;
    EXPECT_LT(r.homomorphism, 1e-9) << name;
    EXPECT_LT(r.differentials, 1e-5) << name;
  }
}

TEST(CrossedModule, UnknownNameRejected) { EXPECT_THROW(builtin_crossed_module("EG:SO7"), Error); }

TEST(CrossedModule, BAPassesVacuously) {
  const AxiomReport r = validate_axioms(make_ba(GroupKind::U1), 50, 1);
  EXPECT_EQ(r.axiom_a, 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(CrossedModule, MutatedEGFailsAxiomB) {
  const AxiomReport r = validate_axioms(fixtures::eg_with_trivial_action(), 200, 42);
  EXPECT_FALSE(r.pass);
  EXPECT_GE(r.axiom_b, 0.1);
}

TEST(CrossedModule, MutatedAUTFailsAxiomA) {
  const AxiomReport r = validate_axioms(fixtures::aut_with_trivial_action(), 200, 42);
  EXPECT_FALSE(r.pass);
  EXPECT_GE(r.axiom_a, 0.1);
}

TEST(CrossedModule, NonAbelianBAFailsAxiomB) {
  const AxiomReport r = validate_axioms(fixtures::ba_over_su2(), 200, 42);
  EXPECT_FALSE(r.pass);
  EXPECT_GE(r.axiom_b, 0.1);
}

TEST(CrossedModule, NonCentralSESFailsAxiomA) {
  const AxiomReport r = validate_axioms(fixtures::ses_with_noncentral_t(), 200, 42);
  EXPECT_FALSE(r.pass);
  EXPECT_GE(r.axiom_a, 0.1);
}

TEST(CrossedModule, EGMixedDifferentialIsBracket) {
  const CrossedModule cm = make_eg(GroupKind::SU2);
  std::mt19937_64 rng(3);
  const auto& G = cm.G();
  for (int s = 0; s < 20; ++s) {
    const AlgebraElement xi = G.random_algebra(rng), eta = G.random_algebra(rng);
    EXPECT_LT(distance(cm.alpha_star_mixed(xi, eta), bracket(xi, eta)), 1e-10);
  }
}

TEST(CrossedModule, BATargetDifferentialVanishes) {
  const CrossedModule cm = make_ba(GroupKind::U1);
  const AlgebraElement eta{Matrix::Constant(1, 1, 0.7 * I), GroupKind::U1};
  const AlgebraElement out = cm.t_star(eta);
  EXPECT_EQ(out.algebra, GroupKind::Trivial);
  EXPECT_EQ(out.value.norm(), 0.0);
}

TEST(CrossedModule, AUTTargetIsAdjointMatrix) {
  const CrossedModule cm = make_aut_su2();
  std::mt19937_64 rng(4);
  const auto& basis = cm.H().basis();
  for (int s = 0; s < 20; ++s) {
    const GroupElement h = cm.H().random(rng);
    // matrix of x ↦ h x h⁻¹ in the basis iσ_k, built from traces
    Matrix direct(3, 3);
    for (int j = 0; j < 3; ++j) {
      const Matrix img = h.value * basis[j] * h.value.adjoint();
      for (int k = 0; k < 3; ++k) direct(k, j) = -0.5 * (basis[k] * img).trace();
    }
    EXPECT_LT(distance(cm.apply_t(h).value, direct), 1e-10);
  }
}

TEST(CrossedModule, DifferentialOfAxiomB) {
  for (const auto& name : builtin_crossed_module_names()) {
    const CrossedModule cm = builtin_crossed_module(name);
    if (cm.H().is_discrete()) continue;
    std::mt19937_64 rng(5);
    for (int s = 0; s < 20; ++s) {
      const GroupElement h = cm.H().random(rng);
      const AlgebraElement eta = cm.H().random_algebra(rng);
      const AlgebraElement lhs = cm.alpha_g_star(cm.apply_t(h), eta);
      EXPECT_LT(distance(lhs, adjoint(h, eta)), 1e-8) << name;
    }
  }
}

TEST(CrossedModule, DifferentialOfAxiomA) {
  for (const auto& name : builtin_crossed_module_names()) {
    const CrossedModule cm = builtin_crossed_module(name);
    std::mt19937_64 rng(6);
    for (int s = 0; s < 20; ++s) {
      const AlgebraElement xi = cm.G().random_algebra(rng), eta = cm.H().random_algebra(rng);
      const AlgebraElement lhs = cm.t_star(cm.alpha_star_mixed(xi, eta));
      EXPECT_LT(distance(lhs, bracket(xi, cm.t_star(eta))), 1e-6) << name;
    }
  }
}

TEST(CrossedModule, FiniteDifferenceFallbackMatchesClosedForms) {
  // the mutated copies use finite differences throughout
  const CrossedModule eg = make_eg(GroupKind::SU2);
  const CrossedModule fd = eg.with_alpha(eg.alpha_map(), "EG:SU2/fd");
  std::mt19937_64 rng(7);
  const auto& G = eg.G();
  const GroupElement g = G.random(rng);
  const AlgebraElement xi = G.random_algebra(rng), eta = G.random_algebra(rng);
  EXPECT_LT(distance(fd.t_star(eta), eg.t_star(eta)), 1e-5);
  EXPECT_LT(distance(fd.alpha_g_star(g, eta), eg.alpha_g_star(g, eta)), 1e-5);
  EXPECT_LT(distance(fd.alpha_star_mixed(xi, eta), eg.alpha_star_mixed(xi, eta)), 1e-5);
  EXPECT_LT(distance(fd.alpha_h_star(g, xi), eg.alpha_h_star(g, xi)), 1e-5);
}

TEST(CrossedModule, CommutatorProjection) {
  const GroupElement phase{Matrix::Constant(1, 1, std::polar(1.0, 0.8)), GroupKind::U1};
  const CommutatorClass ba = gh_commutator_projection(make_ba(GroupKind::U1), phase);
  ASSERT_EQ(ba.kind, CommutatorClass::Kind::Value);
  EXPECT_LT(distance(*ba.value, phase), 1e-15);

  // det = i
  Matrix u(2, 2);
  u << I, 0, 0, 1;
  const CommutatorClass eg2 = gh_commutator_projection(make_eg(GroupKind::U2), {u, GroupKind::U2});
  ASSERT_EQ(eg2.kind, CommutatorClass::Kind::Value);
  EXPECT_LT(distance(eg2.value->value, Matrix::Constant(1, 1, I)), 1e-14);

  const CommutatorClass su2 =
      gh_commutator_projection(make_eg(GroupKind::SU2), group(GroupKind::SU2).identity());
  EXPECT_EQ(su2.kind, CommutatorClass::Kind::Trivial);

  // trivial action: nothing is divided out
  const GroupElement minus{-Matrix::Identity(1, 1), GroupKind::Z2};
  const CommutatorClass ses = gh_commutator_projection(make_ses_z2_su2(), minus);
  ASSERT_EQ(ses.kind, CommutatorClass::Kind::Value);
  EXPECT_LT(distance(*ses.value, minus), 1e-15);

  EXPECT_EQ(gh_commutator_projection(fixtures::ba_over_su2(), group(GroupKind::SU2).identity()).kind,
            CommutatorClass::Kind::Unsupported);
}

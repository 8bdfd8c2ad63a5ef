#include "fixtures.hpp"
#include "two_transport/reconstruct.hpp"

#include <gtest/gtest.h>

using namespace two_transport;

namespace {

Point pt(double x, double y) {
  Point p(2);
  p << x, y;
  return p;
}

/// Bigon on the torus that crosses the seam of strip_cover().
Bigon seam_bigon() {
  return Bigon([](double s, double t) {
    const double w = t * (1 - t);
    return pt(0.15 + 0.7 * t + 0.2 * s * w, 0.3 + 0.1 * w + 0.8 * s * w);
  });
}

/// ∫_γ φ by the composite Simpson rule for a u(1)-valued form.
Complex simpson_integral(const Form& phi, const Path& g, int n = 2000) {
  Complex sum = 0;
  const double h = 1.0 / n;
  for (int k = 0; k <= n; ++k) {
    const double t = k * h;
    const double w = (k == 0 || k == n) ? 1 : (k % 2 ? 4 : 2);
    sum += w * phi.evaluate(g(t), std::vector<Point>{g.velocity(t)})(0, 0);
  }
  return sum * h / 3.0;
}

BoxCover quarter_strips() {
  const BoxChart base = fixtures::torus();
  std::vector<BoxChart> p;
  for (auto [lo, hi] : {std::pair{0.0, 0.3}, {0.25, 0.6}, {0.5, 0.85}, {0.8, 1.1}})
    p.push_back(base.sub_box(pt(lo, 0), pt(hi, 1)));
  return BoxCover(base, p);
}

}  // namespace

TEST(LiftPath, SinglePatchGivesOneSegment) {
  const BoxChart base = fixtures::torus();
  const BoxCover cover(base, {base});
  const PathLift lift = lift_path(cover, Path::straight(pt(0.1, 0.2), pt(0.9, 0.4)));
  ASSERT_EQ(lift.segments.size(), 1u);
  EXPECT_TRUE(lift.jumps.empty());
  EXPECT_EQ(lift.segments[0].patch, 0);
}

TEST(LiftPath, FullLoopAcrossTwoStripsHasTwoJumps) {
  const BoxCover cover = fixtures::strip_cover();
  const PathLift lift = lift_path(cover, Path::straight(pt(0.05, 0.3), pt(1.05, 0.3)));
  ASSERT_EQ(lift.segments.size(), 2u);
  ASSERT_EQ(lift.jumps.size(), 2u);
  EXPECT_EQ(lift.jumps[0], std::make_pair(0, 1));
  EXPECT_EQ(lift.jumps[1], std::make_pair(1, 0));
  EXPECT_DOUBLE_EQ(lift.segments.front().t0, 0.0);
  EXPECT_DOUBLE_EQ(lift.segments.back().t1, 1.0);
}

TEST(LiftPath, PathInsideOverlapUsesLowestIndex) {
  const PathLift lift = lift_path(fixtures::strip_cover(), Path::straight(pt(0.52, 0.1), pt(0.58, 0.9)));
  ASSERT_EQ(lift.segments.size(), 1u);
  EXPECT_EQ(lift.segments[0].patch, 0);
}

TEST(LiftPath, UncoveredPathThrows) {
  const BoxChart base = BoxChart::make(pt(0, 0), pt(1, 1));
  const BoxCover cover(base, {base});
  EXPECT_THROW(lift_path(cover, Path::straight(pt(0.5, 0.5), pt(1.5, 0.5))), Error);
}

TEST(TransportPathGlobal, SinglePatchEqualsLocalTransport) {
  const auto c = fixtures::eg_single(GroupKind::SU2, fixtures::torus(), 3);
  const Path g = Path::straight(pt(0.1, 0.1), pt(0.8, 0.6));
  EXPECT_LT(distance(transport_path_global(*c, g, 200), transport_path(c->A(0), g, 200)), 1e-13);
}

TEST(TransportPathGlobal, TrivialCocycleGivesIdentity) {
  const CrossedModule cm = make_eg(GroupKind::SU2);
  const BoxCover cover = fixtures::strip_cover();
  const auto c = fixtures::trivially_glued(cm, cover, Form::zero(1, cover.base(), GroupKind::SU2),
                                           Form::zero(2, cover.base(), GroupKind::SU2));
  const GroupElement f = transport_path_global(*c, Path::straight(pt(0.1, 0.2), pt(0.95, 0.7)), 50);
  EXPECT_LT(distance(f, cm.G().identity()), 1e-14);
}

TEST(TransportPathGlobal, GaugeMorphismConjugatesEndpoints) {
  for (GroupKind kind : {GroupKind::U1, GroupKind::SU2}) {
    const fixtures::GaugedTorus gt = fixtures::gauged_torus(kind, 21);
    const DifferentialCocycle target = apply_morphism(gt.morphism);
    const BoxCover& cover = gt.glued->cover();
    const Path g = Path::straight(pt(0.1, 0.2), pt(0.9, 0.7));
    const Point x = g(0.0), y = g(1.0);
    const GroupElement f = transport_path_global(*gt.glued, g, 400);
    const GroupElement f2 = transport_path_global(target, g, 400);
    const GroupElement hx = gt.morphism.h[detail::point_patch(cover, x)](x);
    const GroupElement hy = gt.morphism.h[detail::point_patch(cover, y)](y);
    EXPECT_LT(distance(f2, multiply(multiply(hy, f), inverse(hx))), 1e-6) << group(kind).name();
  }
}

TEST(TransportPathGlobal, RefinedCoverReproducesCoarseValue) {
  const fixtures::GaugedTorus gt = fixtures::gauged_torus(GroupKind::U1, 5);
  const DifferentialCocycle coarse = apply_morphism(gt.morphism);
  const auto fine = fixtures::refined(coarse, quarter_strips(), {0, 0, 1, 1});
  for (const Path& g : {Path::straight(pt(0.05, 0.1), pt(0.95, 0.8)), Path::straight(pt(0.05, 0.3), pt(1.05, 0.3))}) {
    EXPECT_GT(lift_path(fine->cover(), g).jumps.size(), lift_path(coarse.cover(), g).jumps.size());
    EXPECT_LT(distance(transport_path_global(*fine, g, 400), transport_path_global(coarse, g, 400)), 1e-8);
  }
}

TEST(WilsonLineOverlap, TrivialGluingHasIdentityFiber) {
  const CrossedModule cm = make_eg(GroupKind::SU2);
  const BoxCover cover = fixtures::strip_cover();
  const Form a = fixtures::random_connection(cover.base(), GroupKind::SU2, 4, 0.5);
  const auto c = fixtures::trivially_glued(cm, cover, a, fixtures::fake_flat_b(a));
  const OverlapTransport ot = wilson_line_overlap(*c, 0, 1, Path::straight(pt(0.52, 0.1), pt(0.58, 0.8)), 50);
  EXPECT_LT(distance(ot.k, cm.H().identity()), 1e-12);
}

TEST(WilsonLineOverlap, AbelianFiberIsExponentialOfIntegral) {
  const auto c = fixtures::abelian_torus();
  const Path g = Path::straight(pt(0.52, 0.05), pt(0.58, 0.55));
  const OverlapTransport ot = wilson_line_overlap(*c, 0, 1, g, 100);
  const Complex expected = std::exp(simpson_integral(c->phi(0, 1), g));
  EXPECT_LT(std::abs(ot.k.value(0, 0) - expected), 1e-10);
}

TEST(WilsonLineOverlap, IntertwinesPatchTransports) {
  const CocycleMorphism m = fixtures::twisted_morphism(GroupKind::SU2, 9);
  const DifferentialCocycle& c = *m.target;
  const CrossedModule& cm = c.cm();
  const Path g = Path::straight(pt(0.51, 0.1), pt(0.59, 0.9)).reparameterized([](double t) { return t * t; });
  for (auto [i, j] : {std::pair{0, 1}, {1, 0}}) {
    const OverlapTransport ot = wilson_line_overlap(c, i, j, g, 400);
    const GroupElement fj = transport_path(c.A(j), g, 400);
    EXPECT_LT(distance(fj, multiply(cm.apply_t(ot.k), ot.w)), 1e-6) << i << j;
    EXPECT_GT(distance(ot.k, cm.H().identity()), 1e-3);
  }
}

TEST(TransportBigonGlobal, SinglePatchEqualsLattice) {
  const auto c = fixtures::eg_single(GroupKind::SU2, fixtures::plane(), 11);
  const Bigon sigma = fixtures::polynomial_bigon();
  const TwoMorphism g = transport_bigon_global(*c, sigma, 16, 12);
  const TwoMorphism l = transport_bigon_lattice(c->cm(), c->A(0), c->B(0), sigma, 16, 12);
  EXPECT_LT(distance(g.source, l.source), 1e-12);
  EXPECT_LT(distance(g.h, l.h), 1e-12);
}

TEST(TransportBigonGlobal, TrivialGluingMatchesSinglePatch) {
  const CrossedModule cm = make_eg(GroupKind::SU2);
  const Form a = fixtures::random_connection(fixtures::torus(), GroupKind::SU2, 13, 0.5);
  const Form b = fixtures::fake_flat_b(a);
  const auto one = fixtures::single_patch(cm, a, b);
  const auto two = fixtures::trivially_glued(cm, fixtures::strip_cover(), a, b);
  const Bigon sigma = seam_bigon();
  const TwoMorphism m1 = transport_bigon_global(*one, sigma, 24);
  const TwoMorphism m2 = transport_bigon_global(*two, sigma, 24);
  EXPECT_LT(distance(m1.h, m2.h), 1e-10);
  EXPECT_LT(distance(m1.source, m2.source), 1e-10);
}

TEST(TransportBigonGlobal, GaugeMorphismActsOnFiberAtEndpoint) {
  const fixtures::GaugedTorus gt = fixtures::gauged_torus(GroupKind::SU2, 17);
  const DifferentialCocycle target = apply_morphism(gt.morphism);
  const CrossedModule& cm = target.cm();
  const Bigon sigma = seam_bigon();
  const Point y = sigma(0.0, 1.0);
  const GroupElement hy = gt.morphism.h[detail::point_patch(target.cover(), y)](y);
  const TwoMorphism m = transport_bigon_global(*gt.glued, sigma, 64);
  const TwoMorphism m2 = transport_bigon_global(target, sigma, 64);
  EXPECT_GT(distance(m.h, cm.H().identity()), 1e-2);
  EXPECT_LT(distance(m2.h, cm.apply_alpha(hy, m.h)), 5e-3);
}

TEST(TransportBigonGlobal, TargetLawOnGluedFixture) {
  const fixtures::GaugedTorus gt = fixtures::gauged_torus(GroupKind::SU2, 19);
  const DifferentialCocycle c = apply_morphism(gt.morphism);
  const Bigon sigma = seam_bigon();
  const TwoMorphism m = transport_bigon_global(c, sigma, 64);
  const GroupElement f1 = transport_path_global(c, sigma.path_at(1.0), 400);
  const GroupElement f0 = transport_path_global(c, sigma.path_at(0.0), 400);
  EXPECT_LT(distance(m.source, f0), 5e-3);
  EXPECT_LT(distance(target(c.cm(), m), f1), 5e-3);
}

TEST(TransportBigonGlobal, TargetLawOnTwistedFixture) {
  const CocycleMorphism m = fixtures::twisted_morphism(GroupKind::SU2, 23);
  const DifferentialCocycle& c = *m.target;
  const Bigon sigma = seam_bigon();
  std::vector<double> residual;
  for (int n : {16, 32, 64}) {
    const TwoMorphism t = transport_bigon_global(c, sigma, n);
    EXPECT_LT(distance(t.source, transport_path_lattice(c, sigma.path_at(0.0), n)), 1e-12);
    residual.push_back(distance(target(c.cm(), t), transport_path_lattice(c, sigma.path_at(1.0), n)));
  }
  EXPECT_LT(residual.back(), 5e-3);
  EXPECT_LT(residual[2], residual[0]);
}

TEST(TransportPathLattice, AgreesWithOdeWhenTransitionsAreFlat) {
  const fixtures::GaugedTorus gt = fixtures::gauged_torus(GroupKind::SU2, 29);
  const DifferentialCocycle c = apply_morphism(gt.morphism);
  const Path g = Path::straight(pt(0.1, 0.2), pt(0.9, 0.7));
  const GroupElement ode = transport_path_global(c, g, 400);
  const double e1 = distance(transport_path_lattice(c, g, 32), ode);
  const double e2 = distance(transport_path_lattice(c, g, 64), ode);
  EXPECT_LT(e2, 1e-3);
  EXPECT_GT(e1 / e2, 1.8);
}

TEST(TransportBigonGlobal, CoarseCoverThrows) {
  const BoxChart base = fixtures::torus();
  const BoxCover cover(base, {base.sub_box(pt(0, 0), pt(0.55, 1)), base.sub_box(pt(0.5, 0), pt(1.05, 1))});
  const auto c = fixtures::trivially_glued(make_eg(GroupKind::U1), cover, Form::zero(1, base, GroupKind::U1),
                                           Form::zero(2, base, GroupKind::U1));
  EXPECT_THROW(transport_bigon_global(*c, seam_bigon(), 1), Error);
}

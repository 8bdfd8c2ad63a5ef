#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace two_transport;

namespace {

double max_form_gap(const Form& a, const Form& b, const std::vector<BoxChart>& region, int grid = 5) {
  double m = 0;
  for (const Point& x : sample_points(region, grid))
    m = std::max(m, detail::coeff_gap(a.coefficients(x), b.coefficients(x)));
  return m;
}

double max_map_gap(const MapField& a, const MapField& b, const std::vector<BoxChart>& region, int grid = 5) {
  double m = 0;
  for (const Point& x : sample_points(region, grid)) m = std::max(m, distance(a(x), b(x)));
  return m;
}

}  // namespace

TEST(Cover, PeriodicOverlapHasTwoPieces) {
  const BoxCover cover = fixtures::strip_cover();
  const auto& ov = cover.overlap({0, 1});
  ASSERT_EQ(ov.size(), 2u);
  Point a(2), b(2), c(2);
  a << 0.55, 0.3;
  b << 0.05, 0.7;
  c << 0.3, 0.5;
  EXPECT_EQ(cover.containing(a).size(), 2u);
  EXPECT_EQ(cover.containing(b).size(), 2u);
  EXPECT_EQ(cover.containing(c), std::vector<int>{0});
}

TEST(Cover, FourPatchTorusHasQuadrupleOverlap) {
  const auto c = fixtures::abelian_torus();
  EXPECT_TRUE(c->cover().overlaps({0, 1, 2, 3}));
  EXPECT_TRUE(c->cover().overlaps({1, 2}));
}

TEST(Cover, RejectsGaps) {
  const BoxChart base = BoxChart::unit(2);
  EXPECT_THROW(BoxCover::from_boxes(base, {{Point::Zero(2), Point::Constant(2, 0.4)}}), Error);
}

TEST(Cocycle, RejectsDataOnEmptyOverlap) {
  const BoxChart base = BoxChart::unit(1);
  Point a0(1), a1(1), b0(1), b1(1), c0(1), c1(1);
  a0 << 0;
  a1 << 0.4;
  b0 << 0.35;
  b1 << 0.7;
  c0 << 0.65;
  c1 << 1;
  DifferentialCocycle c(make_eg(GroupKind::U1), BoxCover::from_boxes(base, {{a0, a1}, {b0, b1}, {c0, c1}}));
  EXPECT_THROW(c.set_overlap(0, 2, MapField::identity(c.cover().patch(0), GroupKind::U1),
                             Form::zero(1, c.cover().patch(0), GroupKind::U1)),
               Error);
}

TEST(Cocycle, AbelianTorusValidates) {
  const auto c = fixtures::abelian_torus();
  const ValidationReport r = validate_cocycle(*c);
  for (const auto& cl : r.clauses) EXPECT_TRUE(cl.pass) << cl.name << " " << cl.residual << " " << cl.location;
  const std::vector<std::string> expected = {"phi_ii", "overlap_B", "overlap_normalization", "triple_phi",
                                             "fourfold_f"};
  EXPECT_EQ(r.non_vacuous(), expected);
}

TEST(Cocycle, MutatedTripleFailsThreefoldClause) {
  fixtures::AbelianTorusOptions opt;
  opt.mutate_triple = true;
  const ValidationReport r = validate_cocycle(*fixtures::abelian_torus(opt));
  EXPECT_FALSE(r.pass());
  ASSERT_TRUE(r.first_failure().has_value());
  EXPECT_EQ(*r.first_failure(), "triple_phi");
  EXPECT_GT(r.clause("triple_phi").residual, 0.1);
}

TEST(Cocycle, FakeFlatEgDataValidates) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto c = fixtures::eg_single(GroupKind::SU2, BoxChart::unit(2), seed);
    const ValidationReport r = validate_cocycle(*c);
    EXPECT_TRUE(r.pass()) << seed;
    EXPECT_LT(r.clause("fake_flatness").residual, 5 * kDefaultFdStep);
  }
}

TEST(Cocycle, PerturbedBFailsByPerturbationSize) {
  const BoxChart chart = BoxChart::unit(2);
  const Form a = fixtures::random_connection(chart, GroupKind::SU2, 4, 0.6);
  const Matrix delta = 0.1 * group(GroupKind::SU2).basis()[0] / group(GroupKind::SU2).basis()[0].norm();
  const Form b = fixtures::fake_flat_b(a) + Form::constant(2, chart, GroupKind::SU2, {delta});
  const ValidationReport r = validate_cocycle(*fixtures::single_patch(make_eg(GroupKind::SU2), a, b));
  EXPECT_EQ(*r.first_failure(), "fake_flatness");
  EXPECT_NEAR(r.clause("fake_flatness").residual, 0.1, 0.01);
}

TEST(Cocycle, BianchiOnThreeDimensionalChart) {
  const auto c = fixtures::eg_single(GroupKind::SU2, BoxChart::unit(3), 5);
  const Form h = curvature_3form(*c, 0);
  double m = 0;
  for (const Point& x : sample_points({BoxChart::unit(3)}, 4)) m = std::max(m, h.coefficients(x)[0].norm());
  EXPECT_LT(m, 10 * kDefaultFdStep);
}

TEST(Cocycle, CurvatureThreeFormNeedsThreeDimensions) {
  const auto c = fixtures::eg_single(GroupKind::SU2, BoxChart::unit(2), 5);
  EXPECT_THROW(curvature_3form(*c, 0), Error);
}

TEST(Cocycle, CompletionRulesForReversedIndices) {
  const auto t = fixtures::gauged_torus(GroupKind::SU2, 11);
  const DifferentialCocycle& c = *t.morphism.target;
  const auto& ov = c.cover().overlap({0, 1});
  for (const Point& x : sample_points(ov, 4)) {
    EXPECT_LT(distance(multiply(c.g(0, 1)(x), c.g(1, 0)(x)), group(GroupKind::SU2).identity()), 1e-12);
  }
  // φ_10 = −(α_{g_10})_* φ_01 on the overlap
  const Form p01 = c.phi(0, 1);
  const Form p10 = c.phi(1, 0);
  const MapField g10 = c.g(1, 0);
  double m = 0;
  for (const Point& x : sample_points(ov, 4)) {
    const auto a = p01.coefficients(x), b = p10.coefficients(x);
    for (std::size_t k = 0; k < a.size(); ++k)
      m = std::max(m, distance(b[k], -c.cm().alpha_g_star_matrix(g10(x).value, a[k])));
  }
  EXPECT_LT(m, 1e-12);
}

TEST(Cocycle, NonNormalizedDataNeedsExplicitReversal) {
  auto c = fixtures::trivially_glued(make_eg(GroupKind::U1), fixtures::strip_cover(),
                                     Form::zero(1, fixtures::torus(), GroupKind::U1),
                                     Form::zero(2, fixtures::torus(), GroupKind::U1));
  c->set_psi(0, MapField::identity(c->cover().patch(0), GroupKind::U1));
  EXPECT_FALSE(c->normalized());
  EXPECT_THROW(c->g(1, 0), Error);
}

TEST(Morphism, GaugeTransformedTorusValidates) {
  const auto t = fixtures::gauged_torus(GroupKind::SU2, 12);
  const ValidationReport r = validate_cocycle(*t.morphism.target);
  for (const auto& cl : r.clauses) EXPECT_TRUE(cl.pass) << cl.name << " " << cl.residual << " " << cl.location;
  EXPECT_TRUE(validate_morphism(t.morphism).pass());
}

TEST(Morphism, GeneralMorphismTargetValidates) {
  // non-zero φ_i and ε_01 on a non-trivially glued source
  const CocycleMorphism m = fixtures::twisted_morphism(GroupKind::SU2, 13);
  const ValidationReport r = validate_cocycle(*m.target);
  for (const auto& cl : r.clauses) EXPECT_TRUE(cl.pass) << cl.name << " " << cl.residual << " " << cl.location;
  EXPECT_TRUE(validate_morphism(m).pass());
}

TEST(Morphism, FourPatchTargetSatisfiesTripleRelations) {
  const CrossedModule cm = make_eg(GroupKind::SU2);
  const BoxChart base = fixtures::torus();
  const BoxCover cover(base, fixtures::four_patches(base));
  const Form a = fixtures::random_connection(base, GroupKind::SU2, 5, 0.5);
  auto src = fixtures::trivially_glued(cm, cover, a, fixtures::fake_flat_b(a));
  std::vector<MapField> h;
  std::vector<Form> phi;
  for (int i = 0; i < 4; ++i) {
    h.push_back(fixtures::random_gauge(cover.patch(i), GroupKind::SU2, 10 + i, 0.4));
    phi.push_back(fixtures::random_connection(cover.patch(i), GroupKind::SU2, 30 + i, 0.2));
  }
  std::map<std::pair<int, int>, MapField> eps;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (cover.overlaps({i, j}))
        eps.emplace(std::pair{i, j}, fixtures::random_gauge(cover.patch(i), GroupKind::SU2, 50 + 4 * i + j, 0.4));
  const CocycleMorphism m = make_morphism(src, h, phi, eps);
  const ValidationReport r = validate_cocycle(*m.target);
  for (const auto& cl : r.clauses) EXPECT_TRUE(cl.pass) << cl.name << " " << cl.residual << " " << cl.location;
  EXPECT_TRUE(validate_morphism(m).pass());
}

TEST(Morphism, AbelianGaugeTransformValidates) {
  const auto src = fixtures::abelian_torus();
  std::vector<MapField> h;
  std::vector<Form> phi;
  for (int i = 0; i < src->size(); ++i) {
    const BoxChart& p = src->cover().patch(i);
    h.push_back(MapField::identity(p, GroupKind::Trivial));
    phi.push_back(fixtures::random_connection(p, GroupKind::U1, 500 + i, 0.3));
  }
  const CocycleMorphism m = make_morphism(src, h, phi);
  EXPECT_TRUE(validate_cocycle(*m.target).pass());
}

TEST(Morphism, IdentityMorphismReproducesSource) {
  const auto c = fixtures::gauged_torus(GroupKind::SU2, 14).morphism.target;
  const CocycleMorphism id = identity_morphism(c);
  EXPECT_TRUE(validate_morphism(id).pass());
  for (int i = 0; i < 2; ++i) {
    EXPECT_LT(max_form_gap(id.target->A(i), c->A(i), {c->cover().patch(i)}), 1e-12);
    EXPECT_LT(max_form_gap(id.target->B(i), c->B(i), {c->cover().patch(i)}), 1e-6);
  }
  EXPECT_LT(max_map_gap(id.target->g(0, 1), c->g(0, 1), c->cover().overlap({0, 1})), 1e-12);
}

TEST(Morphism, ValidatorRejectsWrongTarget) {
  const auto t = fixtures::gauged_torus(GroupKind::SU2, 15);
  CocycleMorphism wrong = t.morphism;
  wrong.target = t.glued;
  EXPECT_FALSE(validate_morphism(wrong).pass());
}

TEST(TwoMorphism, ConnectsMorphismsWithEqualTargets) {
  // Given m = (h, φ, ε) and E, the morphism m' = (t(E)h, Ad_E φ − (r⁻¹α)_E(A') − E*θ̄,
  // α(g', E_i) ε E_j⁻¹) must land on the same target cocycle.
  const auto t = fixtures::gauged_torus(GroupKind::SU2, 16);
  const CocycleMorphism& m = t.morphism;
  const DifferentialCocycle& tgt = *m.target;
  const CrossedModule cm = tgt.cm();
  const GroupKind k = GroupKind::SU2;
  std::vector<MapField> E, h2;
  std::vector<Form> phi2;
  for (int i = 0; i < 2; ++i) {
    const BoxChart& p = tgt.cover().patch(i);
    const MapField e = fixtures::random_gauge(p, k, 600 + i, 0.4);
    E.push_back(e);
    const MapField hi = m.h[i];
    h2.push_back(MapField(p, k, [e, hi](const Point& x) { return Matrix(e.sample(x) * hi.sample(x)); }));
    const Form phi = m.phi[i], a = tgt.A(i), mc = maurer_cartan(e);
    phi2.push_back(Form(1, p, k, [=](const Point& x) {
      const Matrix ev = e.sample(x), einv = ev.adjoint();
      auto pc = phi.sample(x);
      const auto ac = a.sample(x), mcc = mc.sample(x);
      for (std::size_t c = 0; c < pc.size(); ++c)
        pc[c] = ev * pc[c] * einv - cm.alpha_h_star_matrix(ev, ac[c]) - mcc[c];
      return pc;
    }));
  }
  const MapField g01 = tgt.g(0, 1), e0 = E[0], e1 = E[1];
  std::map<std::pair<int, int>, MapField> eps;
  eps.emplace(std::pair{0, 1}, MapField(tgt.cover().patch(0), k, [=](const Point& x) {
                return Matrix(cm.alpha_map()(g01.sample(x), e0.sample(x)) * e1.sample(x).adjoint());
              }));
  const auto m2 = std::make_shared<CocycleMorphism>(make_morphism(m.source, h2, phi2, eps));
  const CocycleTwoMorphism two{std::make_shared<CocycleMorphism>(m), m2, E};
  EXPECT_TRUE(validate_two_morphism(two).pass());

  const DifferentialCocycle& tgt2 = *m2->target;
  for (int i = 0; i < 2; ++i) {
    const std::vector<BoxChart> region = {tgt.cover().patch(i)};
    EXPECT_LT(max_form_gap(tgt2.A(i), tgt.A(i), region), 1e-6);
    EXPECT_LT(max_form_gap(tgt2.B(i), tgt.B(i), region), 1e-4);
  }
  const auto& ov = tgt.cover().overlap({0, 1});
  EXPECT_LT(max_map_gap(tgt2.g(0, 1), tgt.g(0, 1), ov), 1e-10);
  EXPECT_LT(max_form_gap(tgt2.phi(0, 1), tgt.phi(0, 1), ov), 1e-4);
}

#pragma once

// Programmatic cocycle and bigon fixtures shared by the test suites.

#include "two_transport/cocycle.hpp"
#include "two_transport/transport.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

namespace fixtures {

using namespace two_transport;

inline constexpr double kTwoPi = 2 * std::numbers::pi;

/// Crossed modules that violate an axiom; each must fail validation.
inline CrossedModule eg_with_trivial_action() {
  return make_eg(GroupKind::SU2).with_alpha([](const Matrix&, const Matrix& h) -> Matrix { return h; },
                                            "EG:SU2/trivial-alpha");
}

inline CrossedModule aut_with_trivial_action() {
  return make_aut_su2().with_alpha([](const Matrix&, const Matrix& h) -> Matrix { return h; },
                                   "AUT:SU2/trivial-alpha");
}

inline CrossedModule ba_over_su2() {
  return CrossedModule("BA:SU2", GroupKind::Trivial, GroupKind::SU2,
                       [](const Matrix&) -> Matrix { return Matrix::Identity(1, 1); },
                       [](const Matrix&, const Matrix& h) -> Matrix { return h; });
}

inline CrossedModule ses_with_noncentral_t() {
  return make_ses_z2_su2().with_t(
      [](const Matrix& n) -> Matrix {
        if (n(0, 0).real() > 0) return Matrix::Identity(2, 2);
        Matrix m(2, 2);
        m << 0, 1, -1, 0;
        return m;
      },
      "SES/noncentral-t");
}

/// Periodic scalar a + b·sin(2π n·x + c) + d·cos(2π m·x) with small integer n, m.
struct Wave {
  double a = 0, b = 0, c = 0, d = 0;
  Eigen::VectorXd n, m;

  double operator()(const Point& x) const { return a + b * std::sin(kTwoPi * n.dot(x) + c) + d * std::cos(kTwoPi * m.dot(x)); }

  Eigen::VectorXd grad(const Point& x) const {
    return kTwoPi * (b * std::cos(kTwoPi * n.dot(x) + c) * n - d * std::sin(kTwoPi * m.dot(x)) * m);
  }

  static Wave random(std::mt19937_64& rng, int dim, double amplitude) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> freq(-1, 1);
    Wave w;
    w.a = amplitude * u(rng);
    w.b = amplitude * u(rng);
    w.c = std::numbers::pi * u(rng);
    w.d = amplitude * u(rng);
    w.n.resize(dim);
    w.m.resize(dim);
    for (int k = 0; k < dim; ++k) {
      w.n[k] = freq(rng);
      w.m[k] = freq(rng);
    }
    if (w.n.isZero()) w.n[0] = 1;
    if (w.m.isZero()) w.m[dim - 1] = 1;
    return w;
  }
};

/// Smooth 𝔨-valued 1-form with periodic coefficients, 𝔨 = Lie(kind).
inline Form random_connection(const BoxChart& chart, GroupKind kind, std::uint64_t seed, double amplitude) {
  std::mt19937_64 rng(seed);
  const auto& basis = group(kind).basis();
  const int dim = chart.dim();
  std::vector<std::vector<Wave>> waves(dim);
  for (int mu = 0; mu < dim; ++mu)
    for (std::size_t a = 0; a < basis.size(); ++a) waves[mu].push_back(Wave::random(rng, dim, amplitude));
  return Form(1, chart, kind, [waves, basis, kind](const Point& x) {
    std::vector<Matrix> out;
    for (const auto& comp : waves) {
      Matrix m = zero_like(kind);
      for (std::size_t a = 0; a < basis.size(); ++a) m += comp[a](x) * basis[a];
      out.push_back(m);
    }
    return out;
  });
}

/// Smooth periodic map into a connected matrix group, exp of a random algebra field.
inline MapField random_gauge(const BoxChart& chart, GroupKind kind, std::uint64_t seed, double amplitude) {
  std::mt19937_64 rng(seed);
  const auto& basis = group(kind).basis();
  std::vector<Wave> waves;
  for (std::size_t a = 0; a < basis.size(); ++a) waves.push_back(Wave::random(rng, chart.dim(), amplitude));
  return MapField(chart, kind, [waves, basis, kind](const Point& x) {
    Matrix m = zero_like(kind);
    for (std::size_t a = 0; a < basis.size(); ++a) m += waves[a](x) * basis[a];
    return exp(AlgebraElement{m, kind}).value;
  });
}

/// B = dA + [A∧A] for EG-type crossed modules (t = id).
inline Form fake_flat_b(const Form& a, double fd_step = kDefaultFdStep) {
  return exterior_derivative(a, fd_step) + half_bracket(a);
}

inline std::shared_ptr<DifferentialCocycle> single_patch(const CrossedModule& cm, const Form& a, const Form& b) {
  auto c = std::make_shared<DifferentialCocycle>(cm, BoxCover(a.chart(), {a.chart()}));
  c->set_patch(0, a, b);
  return c;
}

/// EG(kind) on a chart with a random connection and fake-flat B.
inline std::shared_ptr<DifferentialCocycle> eg_single(GroupKind kind, const BoxChart& chart, std::uint64_t seed,
                                                      double amplitude = 0.6) {
  const Form a = random_connection(chart, kind, seed, amplitude);
  return single_patch(make_eg(kind), a, fake_flat_b(a));
}

inline BoxChart plane() { return BoxChart::make(Point::Constant(2, -0.5), Point::Constant(2, 1.5)); }
inline BoxChart torus() { return BoxChart::unit(2, true); }

/// Polynomial bigon in plane(): γ₀ the diagonal-ish arc, γ₁ bent upward.
inline Bigon polynomial_bigon() {
  return Bigon(
      [](double s, double t) {
        Point p(2);
        const double w = t * (1 - t);
        p << t + 0.3 * s * w, 0.2 * w + 1.2 * s * w * (1 + 0.5 * t - 0.3 * s);
        return p;
      },
      [](double s, double t) {
        Point p(2);
        const double w = t * (1 - t);
        p << 0.3 * w, 1.2 * w * (1 + 0.5 * t - 0.6 * s);
        return p;
      },
      [](double s, double t) {
        Point p(2);
        const double w = t * (1 - t), dw = 1 - 2 * t;
        p << 1 + 0.3 * s * dw, 0.2 * dw + 1.2 * s * (dw * (1 + 0.5 * t - 0.3 * s) + 0.5 * w);
        return p;
      });
}

/// Unit square swept by horizontal lines: Σ(s,t) = (t, s). Not a bigon
/// (endpoints move); used for surface integrals only.
inline Bigon identity_square() {
  return Bigon([](double s, double t) {
    Point p(2);
    p << t, s;
    return p;
  });
}

/// Abelian torus data: BA(U(1)) with constant B = i·b dx∧dy on every patch,
/// glued by φ_ij = i d(μ_i − μ_j − λ_ij) and f_ijk = exp(i(λ_ik − λ_ij − λ_jk)).
/// With 4 patches, patch i = a + 2·c covers [a/2, a/2 + 0.6] × [c/2, c/2 + 0.6].
struct AbelianTorusOptions {
  double b = 1.7;
  int patches = 4;
  bool mutate_triple = false;
  std::uint64_t seed = 7;
};

inline std::vector<BoxChart> four_patches(const BoxChart& base) {
  std::vector<BoxChart> patches;
  for (int c = 0; c < 2; ++c)
    for (int a = 0; a < 2; ++a) {
      Point lo(2), hi(2);
      lo << 0.5 * a, 0.5 * c;
      hi << 0.5 * a + 0.6, 0.5 * c + 0.6;
      patches.push_back(base.sub_box(lo, hi));
    }
  return patches;
}

inline std::shared_ptr<DifferentialCocycle> abelian_torus(const AbelianTorusOptions& opt = {}) {
  const CrossedModule cm = make_ba(GroupKind::U1);
  const BoxChart base = torus();
  const std::vector<BoxChart> patches = opt.patches == 1 ? std::vector<BoxChart>{base} : four_patches(base);
  auto co = std::make_shared<DifferentialCocycle>(cm, BoxCover(base, patches));
  const int n = co->size();
  std::mt19937_64 rng(opt.seed);
  const Complex I(0, 1);
  std::vector<Wave> mu;
  for (int i = 0; i < n; ++i) mu.push_back(Wave::random(rng, 2, 0.3));
  std::vector<std::vector<Wave>> lambda(n, std::vector<Wave>(n));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) lambda[i][j] = Wave::random(rng, 2, 0.4);
  for (int i = 0; i < n; ++i)
    co->set_patch(i, Form::zero(1, patches[i], GroupKind::Trivial),
                  Form::constant(2, patches[i], GroupKind::U1, {Matrix::Constant(1, 1, I * opt.b)}));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (!co->cover().overlaps({i, j})) continue;
      const Wave mi = mu[i], mj = mu[j], l = lambda[i][j];
      const Form phi(1, patches[i], GroupKind::U1, [mi, mj, l, I](const Point& x) {
        const Eigen::VectorXd g = mi.grad(x) - mj.grad(x) - l.grad(x);
        return std::vector<Matrix>{Matrix::Constant(1, 1, I * g[0]), Matrix::Constant(1, 1, I * g[1])};
      });
      co->set_overlap(i, j, MapField::identity(patches[i], GroupKind::Trivial), phi);
    }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        if (!co->cover().overlaps({i, j, k})) continue;
        const Wave lij = lambda[i][j], ljk = lambda[j][k], lik = lambda[i][k];
        const bool bad = opt.mutate_triple && i == 0 && j == 1 && k == 2;
        co->set_triple(i, j, k, MapField(patches[i], GroupKind::U1, [=](const Point& x) {
                         double v = lik(x) - lij(x) - ljk(x);
                         if (bad) v += 0.5 * std::sin(kTwoPi * x[0]);
                         return Matrix(Matrix::Constant(1, 1, std::exp(I * v)));
                       }));
      }
  return co;
}

/// Two-patch cover of the torus split along x: [0, 0.6] and [0.5, 1.1].
inline BoxCover strip_cover() {
  const BoxChart base = torus();
  Point a0(2), a1(2), b0(2), b1(2);
  a0 << 0, 0;
  a1 << 0.6, 1;
  b0 << 0.5, 0;
  b1 << 1.1, 1;
  return BoxCover(base, {base.sub_box(a0, a1), base.sub_box(b0, b1)});
}

/// Restriction of global (A, B) to every patch of `cover`, glued trivially.
inline std::shared_ptr<DifferentialCocycle> trivially_glued(const CrossedModule& cm, const BoxCover& cover, const Form& a,
                                                            const Form& b) {
  auto co = std::make_shared<DifferentialCocycle>(cm, cover);
  for (int i = 0; i < cover.size(); ++i) {
    const BoxChart& p = cover.patch(i);
    co->set_patch(i, Form(1, p, a.algebra(), [a](const Point& x) { return a.sample(x); }),
                  Form(2, p, b.algebra(), [b](const Point& x) { return b.sample(x); }));
  }
  for (int i = 0; i < cover.size(); ++i)
    for (int j = i + 1; j < cover.size(); ++j)
      if (cover.overlaps({i, j}))
        co->set_overlap(i, j, MapField::identity(cover.patch(i), cm.g_kind()),
                        Form::zero(1, cover.patch(i), cm.h_kind()));
  for (int i = 0; i < cover.size(); ++i)
    for (int j = i + 1; j < cover.size(); ++j)
      for (int k = j + 1; k < cover.size(); ++k)
        if (cover.overlaps({i, j, k})) co->set_triple(i, j, k, MapField::identity(cover.patch(i), cm.h_kind()));
  return co;
}

/// Pulls a normalized cocycle back to a finer cover, patch r inheriting the
/// data of patch parent[r]. Siblings are glued by the identity.
inline std::shared_ptr<DifferentialCocycle> refined(const DifferentialCocycle& c, const BoxCover& cover,
                                                    const std::vector<int>& parent) {
  const CrossedModule& cm = c.cm();
  auto co = std::make_shared<DifferentialCocycle>(cm, cover);
  const int n = cover.size();
  for (int r = 0; r < n; ++r) {
    const BoxChart& p = cover.patch(r);
    const Form a = c.A(parent[r]), b = c.B(parent[r]);
    co->set_patch(r, Form(1, p, a.algebra(), [a](const Point& x) { return a.sample(x); }),
                  Form(2, p, b.algebra(), [b](const Point& x) { return b.sample(x); }));
  }
  for (int r = 0; r < n; ++r)
    for (int s = r + 1; s < n; ++s) {
      if (!cover.overlaps({r, s})) continue;
      const BoxChart& p = cover.patch(r);
      if (parent[r] == parent[s]) {
        co->set_overlap(r, s, MapField::identity(p, cm.g_kind()), Form::zero(1, p, cm.h_kind()));
        continue;
      }
      const MapField g = c.g(parent[r], parent[s]);
      const Form phi = c.phi(parent[r], parent[s]);
      co->set_overlap(r, s, MapField(p, cm.g_kind(), [g](const Point& x) { return g.sample(x); }),
                      Form(1, p, cm.h_kind(), [phi](const Point& x) { return phi.sample(x); }));
    }
  for (int r = 0; r < n; ++r)
    for (int s = r + 1; s < n; ++s)
      for (int u = s + 1; u < n; ++u) {
        if (!cover.overlaps({r, s, u})) continue;
        const int a = parent[r], b = parent[s], d = parent[u];
        const BoxChart& p = cover.patch(r);
        if (a == b || b == d || a == d) {
          co->set_triple(r, s, u, MapField::identity(p, cm.h_kind()));
          continue;
        }
        const MapField f = c.f(a, b, d);
        co->set_triple(r, s, u, MapField(p, cm.h_kind(), [f](const Point& x) { return f.sample(x); }));
      }
  return co;
}

/// EG(kind) torus: one-patch cocycle, its trivially glued two-patch copy, and
/// a gauge morphism (non-constant h_i, φ_i = 0) out of the copy.
struct GaugedTorus {
  std::shared_ptr<DifferentialCocycle> single;
  std::shared_ptr<DifferentialCocycle> glued;
  CocycleMorphism morphism;
};

inline GaugedTorus gauged_torus(GroupKind kind, std::uint64_t seed, double amplitude = 0.5) {
  const CrossedModule cm = make_eg(kind);
  const Form a = random_connection(torus(), kind, seed, amplitude);
  const Form b = fake_flat_b(a);
  GaugedTorus out;
  out.single = single_patch(cm, a, b);
  out.glued = trivially_glued(cm, strip_cover(), a, b);
  std::vector<MapField> h;
  std::vector<Form> phi;
  for (int i = 0; i < 2; ++i) {
    const BoxChart& p = out.glued->cover().patch(i);
    h.push_back(random_gauge(p, kind, seed + 101 + i, 0.4));
    phi.push_back(Form::zero(1, p, kind));
  }
  out.morphism = make_morphism(out.glued, std::move(h), std::move(phi));
  return out;
}

/// Target of a general morphism (non-constant h_i, non-zero φ_i and ε_01) out
/// of gauged_torus(kind, seed).glued; every transition datum is non-trivial.
inline CocycleMorphism twisted_morphism(GroupKind kind, std::uint64_t seed) {
  const auto src = gauged_torus(kind, seed).morphism.target;
  std::vector<MapField> h;
  std::vector<Form> phi;
  for (int i = 0; i < 2; ++i) {
    const BoxChart& p = src->cover().patch(i);
    h.push_back(random_gauge(p, kind, seed + 200 + i, 0.3));
    phi.push_back(random_connection(p, kind, seed + 300 + i, 0.3));
  }
  std::map<std::pair<int, int>, MapField> eps;
  eps.emplace(std::pair{0, 1}, random_gauge(src->cover().patch(0), kind, seed + 400, 0.3));
  return make_morphism(src, std::move(h), std::move(phi), std::move(eps));
}

}  // namespace fixtures

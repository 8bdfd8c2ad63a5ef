#pragma once

// Surface holonomy around closed oriented surfaces: fundamental bigons on the
// 4n-gon, the transport of their image, and the laws describing how the
// result depends on base point, loop and contraction.

#include "two_transport/reconstruct.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace two_transport {

inline constexpr double kIdentificationTol = 1e-9;
inline constexpr double kMapFdStep = 1e-6;

/// One edge of the polygon boundary: it traverses α_label, backwards when
/// `inverse` is set, from vertex `from` to vertex `from + 1`.
struct BoundaryEdge {
  int label;
  bool inverse;
  int from;
};

struct FundamentalBigon {
  int genus = 1;
  std::vector<Point> vertices;  // P_0 … P_{4n-1}, P_0 the base vertex
  std::vector<BoundaryEdge> word;
  Bigon sigma = Bigon([](double, double) { return Point(); });

  Point vertex(int m) const { return vertices[static_cast<std::size_t>(m) % vertices.size()]; }
  int edge_count() const { return static_cast<int>(word.size()); }
};

/// Regular 4n-gon inscribed in the unit circle, base vertex at angle 0,
/// boundary τ = … ∘ α₂⁻¹ ∘ α₁⁻¹ ∘ α₂ ∘ α₁ with affine edges on equal shares of
/// [0, 1], and Σ(s, t) = (1 − s)·τ(t) + s·P₀ the linear contraction onto P₀.
inline FundamentalBigon build_fundamental_bigon(int genus) {
  if (genus < 1) throw Error("build_fundamental_bigon: genus must be at least 1");
  FundamentalBigon fb;
  fb.genus = genus;
  const int m = 4 * genus;
  for (int k = 0; k < m; ++k) {
    const double a = 2 * std::numbers::pi * k / m;
    Point p(2);
    p << std::cos(a), std::sin(a);
    if (std::abs(p[0]) < 1e-15) p[0] = 0;
    if (std::abs(p[1]) < 1e-15) p[1] = 0;
    fb.vertices.push_back(p);
  }
  for (int j = 0; j < genus; ++j) {
    const int a = 2 * j + 1, b = 2 * j + 2, k = 4 * j;
    fb.word.push_back({a, false, k});
    fb.word.push_back({b, false, k + 1});
    fb.word.push_back({a, true, k + 2});
    fb.word.push_back({b, true, k + 3});
  }
  const std::vector<Point> v = fb.vertices;
  auto tau = [v, m](double t, Side side) {
    const auto [k, u] = detail::locate_piece(t, m, side);
    const Point& a = v[k];
    const Point& b = v[(k + 1) % m];
    return std::pair<Point, Point>{a + u * (b - a), m * (b - a)};
  };
  const Point base = v[0];
  fb.sigma = Bigon::sided([tau, base](double s, double t) { return Point((1 - s) * tau(t, Side::Left).first + s * base); },
                          [tau, base](double, double t, Side) { return Point(base - tau(t, Side::Left).first); },
                          [tau](double s, double t, Side side) { return Point((1 - s) * tau(t, side).second); });
  return fb;
}

/// Reparameterized contraction Σ(w(s,t), t) with w = s + c·s(1 − s)·sin πt,
/// |c| < 1 so that w is increasing in s.
inline FundamentalBigon warped_contraction(const FundamentalBigon& fb, double c) {
  if (!(std::abs(c) < 1)) throw Error("warped_contraction: |c| must be below 1");
  FundamentalBigon out = fb;
  const Bigon sg = fb.sigma;
  const double pi = std::numbers::pi;
  auto w = [c, pi](double s, double t) { return s + c * s * (1 - s) * std::sin(pi * t); };
  auto ws = [c, pi](double s, double t) { return 1 + c * (1 - 2 * s) * std::sin(pi * t); };
  auto wt = [c, pi](double s, double t) { return c * s * (1 - s) * pi * std::cos(pi * t); };
  out.sigma = Bigon::sided([sg, w](double s, double t) { return sg(w(s, t), t); },
                           [sg, w, ws](double s, double t, Side side) { return Point(sg.d_s(w(s, t), t, side) * ws(s, t)); },
                           [sg, w, wt](double s, double t, Side side) {
                             const double x = w(s, t);
                             return Point(sg.d_t(x, t, side) + sg.d_s(x, t, side) * wt(s, t));
                           });
  return out;
}

/// Smooth map from polygon coordinates into M. The Jacobian is optional;
/// central differences are used without it.
struct SurfaceMap {
  std::function<Point(const Point&)> eval;
  std::function<Eigen::MatrixXd(const Point&)> jacobian;

  Point operator()(const Point& u) const { return eval(u); }

  Point push(const Point& u, const Point& v) const {
    if (jacobian) return jacobian(u) * v;
    const double n = v.norm();
    if (n == 0) return Point::Zero(eval(u).size());
    const double h = kMapFdStep / n;
    return (eval(u + h * v) - eval(u - h * v)) / (2 * h);
  }

  static SurfaceMap affine(const Eigen::MatrixXd& m, const Point& offset) {
    return {[m, offset](const Point& u) -> Point { return m * u + offset; },
            [m](const Point&) { return m; }};
  }
};

/// The square-to-torus map for genus 1: P₀ ↦ (0,0), P₁ ↦ (1,0), P₂ ↦ (1,1),
/// P₃ ↦ (0,1), so α₁ and α₂ run once around the two circle directions.
inline SurfaceMap standard_torus_map() {
  Eigen::MatrixXd m(2, 2);
  m << -0.5, 0.5, -0.5, -0.5;
  Point c(2);
  c << 0.5, 0.5;
  return SurfaceMap::affine(m, c);
}

/// Difference of two points of the chart's ambient space, periodic axes
/// reduced to the nearest representative.
inline double chart_distance(const BoxChart& chart, const Point& a, const Point& b) {
  Point d = a - b;
  for (int k = 0; k < chart.dim(); ++k)
    if (chart.period[k] > 0) d[k] = std::remainder(d[k], chart.period[k]);
  return d.norm();
}

/// Throws unless the two occurrences of each α_k map to the same path in M.
inline void check_identifications(const BoxChart& chart, const SurfaceMap& phi, const FundamentalBigon& fb,
                                  int samples = 16) {
  for (const BoundaryEdge& e : fb.word) {
    if (e.inverse) continue;
    const auto other = std::find_if(fb.word.begin(), fb.word.end(),
                                    [&](const BoundaryEdge& o) { return o.label == e.label && o.inverse; });
    if (other == fb.word.end()) throw Error("fundamental bigon: α" + std::to_string(e.label) + " occurs once");
    for (int k = 0; k <= samples; ++k) {
      const double u = static_cast<double>(k) / samples;
      const Point a = fb.vertex(e.from) + u * (fb.vertex(e.from + 1) - fb.vertex(e.from));
      const Point b = fb.vertex(other->from + 1) + u * (fb.vertex(other->from) - fb.vertex(other->from + 1));
      const double gap = chart_distance(chart, phi(a), phi(b));
      if (gap > kIdentificationTol)
        throw Error("surface map breaks the identification of α" + std::to_string(e.label) + " (gap " +
                    std::to_string(gap) + " at u = " + std::to_string(u) + ")");
    }
  }
}

/// φ∘Σ as a bigon in M.
inline Bigon mapped_bigon(const SurfaceMap& phi, const Bigon& sigma) {
  return Bigon::sided([phi, sigma](double s, double t) { return phi(sigma(s, t)); },
                      [phi, sigma](double s, double t, Side side) { return phi.push(sigma(s, t), sigma.d_s(s, t, side)); },
                      [phi, sigma](double s, double t, Side side) { return phi.push(sigma(s, t), sigma.d_t(s, t, side)); });
}

/// Hol(φ, Σ): the 2-morphism of φ∘Σ : φ∘τ ⇒ id. Its source is F(φ∘τ) and
/// t(h)·F(φ∘τ) = e up to discretization.
inline TwoMorphism surface_holonomy(const DifferentialCocycle& c, const SurfaceMap& phi, const FundamentalBigon& fb,
                                    int cells) {
  check_identifications(c.cover().base(), phi, fb);
  if (cells % fb.edge_count() != 0)
    throw Error("surface_holonomy: cell count must be a multiple of the " + std::to_string(fb.edge_count()) +
                " boundary edges");
  return transport_bigon_global(c, mapped_bigon(phi, fb.sigma), cells);
}

/// Distance of t(h)·F(τ) from the identity.
inline double holonomy_constraint_residual(const CrossedModule& cm, const TwoMorphism& hol) {
  return distance(target(cm, hol), cm.G().identity());
}

/// exp(∫ Σ*B) for BA(U(1))-type data whose patch 2-forms agree on overlaps,
/// by 3-point Gauss–Legendre on n × (4g·n) panels.
inline GroupElement abelian_oracle(const DifferentialCocycle& c, const SurfaceMap& phi, const FundamentalBigon& fb,
                                   int n) {
  const CrossedModule& cm = c.cm();
  if (cm.h_kind() != GroupKind::U1) throw Error("abelian_oracle: H must be U(1)");
  check_identifications(c.cover().base(), phi, fb);
  const Bigon sigma = mapped_bigon(phi, fb.sigma);
  const BoxCover& cover = c.cover();
  const std::array<double, 3> node = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  const std::array<double, 3> weight = {5.0 / 9, 8.0 / 9, 5.0 / 9};
  const int ns = n, nt = fb.edge_count() * n;
  std::vector<Complex> rows(ns);
  parallel_for(ns, [&](int a) {
    Complex sum = 0;
    for (int k = 0; k < nt; ++k)
      for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q) {
          const double s = (a + 0.5 + 0.5 * node[p]) / ns, t = (k + 0.5 + 0.5 * node[q]) / nt;
          const Point x = sigma(s, t);
          const std::vector<Point> v = {sigma.d_t(s, t), sigma.d_s(s, t)};
          const int i = detail::point_patch(cover, x);
          const Complex b = c.B(i).evaluate(x, v)(0, 0);
          for (int j = i + 1; j < cover.size(); ++j)
            if (cover.patch(j).contains(x) && std::abs(c.B(j).evaluate(x, v)(0, 0) - b) > 1e-8)
              throw Error("abelian_oracle: patch 2-forms do not glue at " + BoxCover::format_point(x));
          sum += weight[p] * weight[q] * b;
        }
    rows[a] = sum * (0.25 / (static_cast<double>(ns) * nt));
  });
  Complex total = 0;
  for (const Complex& r : rows) total += r;
  return cm.H().checked(Matrix::Constant(1, 1, std::exp(total)));
}

// ---------------------------------------------------------------------------
// Base point

/// Hol(φ, Σ^γ) by the formula: fibre α(F(γ), h), source F(γ)·F(τ)·F(γ)⁻¹,
/// with F(γ) the lattice path transport on `edges` steps.
inline TwoMorphism move_base_point(const DifferentialCocycle& c, const TwoMorphism& hol, const Path& gamma, int edges) {
  const CrossedModule& cm = c.cm();
  const GroupElement f = transport_path_lattice(c, gamma, edges);
  return {multiply(multiply(f, hol.source), inverse(f)), cm.apply_alpha(f, hol.h)};
}

/// Σ^γ = id_γ ∘ Σ ∘ id_{γ⁻¹} for γ from the base point of Σ to the new one.
inline Bigon conjugated_bigon(const Bigon& sigma, const Path& gamma) {
  return horizontal_chain({Bigon::identity(gamma.reversed()), sigma, Bigon::identity(gamma)});
}

struct LawCheck {
  TwoMorphism direct;
  TwoMorphism formula;
  double residual = 0;  // fibre distance
};

/// Recomputes the holonomy on Σ^γ (N rows, 3N columns) and compares it with
/// move_base_point applied to the holonomy on Σ (N × N).
inline LawCheck base_point_check(const DifferentialCocycle& c, const SurfaceMap& phi, const FundamentalBigon& fb,
                                 const Path& gamma, int cells) {
  const Bigon sigma = mapped_bigon(phi, fb.sigma);
  if ((gamma(0.0) - sigma(0.0, 0.0)).norm() > kEndpointTol)
    throw Error("base_point_check: γ must start at the base point");
  check_identifications(c.cover().base(), phi, fb);
  LawCheck out;
  const TwoMorphism hol = transport_bigon_global(c, sigma, cells, cells);
  out.formula = move_base_point(c, hol, gamma, cells);
  out.direct = transport_bigon_global(c, conjugated_bigon(sigma, gamma), cells, 3 * cells);
  out.residual = distance(out.direct.h, out.formula.h);
  return out;
}

// ---------------------------------------------------------------------------
// Loop change

/// Data for τ = γ₂ ∘ α⁻¹ ∘ γ₁ ∘ α (γ₀ = id) with Δ: α' ⇒ α. Each of α, γ₁,
/// α⁻¹, γ₂ must occupy one quarter of τ's parameter, as for genus 1 with
/// α = α₁. `delta_sharp` is Δ#(s, t) = Δ(s, 1 − t) placed where α⁻¹ sits in
/// the lifted coordinates of τ.
struct LoopChange {
  Bigon delta;
  Bigon delta_sharp;
  Path gamma1;
  Path gamma2;
};

/// Bulges α₁ of a genus-1 surface by δ·sin(πt) along `direction` (in M).
inline LoopChange torus_loop_change(const SurfaceMap& phi, const FundamentalBigon& fb, double delta,
                                    const Point& direction) {
  if (fb.genus != 1) throw Error("torus_loop_change: genus must be 1");
  const Point p0 = phi(fb.vertex(0)), p1 = phi(fb.vertex(1)), p2 = phi(fb.vertex(2)), p3 = phi(fb.vertex(3));
  const Point v0 = fb.vertex(0), e1 = fb.vertex(1) - fb.vertex(0);
  const double pi = std::numbers::pi;
  Bigon d = Bigon::sided(
      [phi, v0, e1, direction, delta, pi](double s, double t) {
        return Point(phi(v0 + t * e1) + (1 - s) * delta * std::sin(pi * t) * direction);
      },
      [direction, delta, pi](double, double t, Side) { return Point(-delta * std::sin(pi * t) * direction); },
      [phi, v0, e1, direction, delta, pi](double s, double t, Side) {
        return Point(phi.push(v0 + t * e1, e1) + (1 - s) * delta * pi * std::cos(pi * t) * direction);
      });
  const Point shift = p2 - p1;
  Bigon ds = Bigon::sided([d, shift](double s, double t) { return Point(d(s, 1 - t) + shift); },
                          [d](double s, double t, Side side) { return d.d_s(s, 1 - t, side); },
                          [d](double s, double t, Side side) { return Point(-d.d_t(s, 1 - t, flip(side))); });
  return {d, ds, Path::straight(p1, p2), Path::straight(p3, p0)};
}

/// Both sides of the loop-change law: the holonomy on Σ' = Σ • X with
/// X = id_{γ₂} ∘ Δ# ∘ id_{γ₁} ∘ Δ (2N rows, N columns, so the Σ half reuses the
/// cells of Σ), against Hol·α(F(γ₂)·g⁻¹, h⁻¹·α(F(γ₁), h)) with (g, h) the
/// transport of Δ on N × N/4 cells.
inline LawCheck change_loop(const DifferentialCocycle& c, const SurfaceMap& phi, const FundamentalBigon& fb,
                            const LoopChange& lc, int cells) {
  if (cells % 4 != 0) throw Error("change_loop: cell count must be a multiple of 4");
  check_identifications(c.cover().base(), phi, fb);
  const CrossedModule& cm = c.cm();
  const Bigon sigma = mapped_bigon(phi, fb.sigma);
  const int q = cells / 4;
  const Bigon x = horizontal_chain({lc.delta, Bigon::identity(lc.gamma1), lc.delta_sharp, Bigon::identity(lc.gamma2)});
  for (int k = 0; k <= 16; ++k) {
    const double t = k / 16.0;
    if ((x(1.0, t) - sigma(0.0, t)).norm() > kIdentificationTol)
      throw Error("change_loop: the top of X does not run along τ at t = " + std::to_string(t));
  }
  LawCheck out;
  out.direct = transport_bigon_global(c, vertical_stack(x, sigma), 2 * cells, cells);
  const TwoMorphism hol = transport_bigon_global(c, sigma, cells, cells);
  const TwoMorphism d = transport_bigon_global(c, lc.delta, cells, q);
  const GroupElement g1 = transport_path_lattice(c, lc.gamma1, q);
  const GroupElement g2 = transport_path_lattice(c, lc.gamma2, q);
  const GroupElement inner = multiply(inverse(d.h), cm.apply_alpha(g1, d.h));
  const GroupElement fiber = multiply(hol.h, cm.apply_alpha(multiply(g2, inverse(d.source)), inner));
  const GroupElement g = d.source;
  out.formula = {multiply(multiply(multiply(g2, inverse(g)), g1), g), fiber};
  out.residual = distance(out.direct.h, out.formula.h);
  return out;
}

// ---------------------------------------------------------------------------
// Contraction and [G, H]

/// Fibre distance between the holonomies on two fundamental bigons with the
/// same loop.
inline double contraction_independence(const DifferentialCocycle& c, const SurfaceMap& phi, const FundamentalBigon& fb,
                                       const FundamentalBigon& other, int cells) {
  const TwoMorphism a = surface_holonomy(c, phi, fb, cells);
  const TwoMorphism b = surface_holonomy(c, phi, other, cells);
  return distance(a.h, b.h);
}

/// Image of a holonomy fibre in H/[G,H].
inline CommutatorClass quotient_invariant(const CrossedModule& cm, const GroupElement& h) {
  return gh_commutator_projection(cm, h);
}

}  // namespace two_transport

#pragma once

// Global transport over a multi-patch cover: paths are cut into patch
// segments joined by transition functions, bigons are cut into lattice cells
// whose boundaries are re-expressed across patch changes.

#include "two_transport/cocycle.hpp"
#include "two_transport/transport.hpp"

#include <map>
#include <tuple>
#include <vector>

namespace two_transport {

inline constexpr double kAssignMargin = 1e-9;
inline constexpr int kMaxBisectionDepth = 16;

namespace detail {

/// Lowest patch index holding every point, first with the shrunk boxes, then
/// with the closed ones (points on the boundary of a non-periodic base).
inline int lowest_holding(const BoxCover& cover, const std::vector<Point>& pts) {
  for (const double margin : {kAssignMargin, 0.0})
    for (int i = 0; i < cover.size(); ++i) {
      const BoxChart& p = cover.patch(i);
      const bool ok = std::all_of(pts.begin(), pts.end(), [&](const Point& x) {
        return margin > 0 ? p.contains_strictly(x, margin) : p.contains(x);
      });
      if (ok) return i;
    }
  return -1;
}

inline int point_patch(const BoxCover& cover, const Point& x) {
  const int i = lowest_holding(cover, {x});
  if (i < 0) throw Error("point " + BoxCover::format_point(x) + " is not covered");
  return i;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Paths

struct PathSegment {
  int patch;
  double t0;
  double t1;
};

/// Segments ordered along γ, and the patch changes met along the way: one per
/// interior cut, plus one at either end where the frame p(x) of the endpoint
/// differs from its segment's patch (a closed loop re-entering its start).
struct PathLift {
  int start_patch = 0;
  int end_patch = 0;
  std::vector<PathSegment> segments;
  std::vector<std::pair<int, int>> jumps;
};

/// Cuts γ by bisection until each piece lies in a patch (lowest index wins),
/// then merges neighbouring pieces in the same patch.
inline PathLift lift_path(const BoxCover& cover, const Path& gamma, int samples = 8) {
  std::vector<PathSegment> raw;
  std::function<void(double, double, int)> cut = [&](double a, double b, int depth) {
    std::vector<Point> pts;
    for (int k = 0; k <= samples; ++k) pts.push_back(gamma(a + (b - a) * k / samples));
    const int i = detail::lowest_holding(cover, pts);
    if (i >= 0) {
      raw.push_back({i, a, b});
      return;
    }
    if (depth >= kMaxBisectionDepth)
      throw Error("lift_path: cover too coarse near " + BoxCover::format_point(gamma(0.5 * (a + b))));
    const double m = 0.5 * (a + b);
    cut(a, m, depth + 1);
    cut(m, b, depth + 1);
  };
  cut(0.0, 1.0, 0);
  PathLift out;
  out.start_patch = detail::point_patch(cover, gamma(0.0));
  out.end_patch = detail::point_patch(cover, gamma(1.0));
  int frame = out.start_patch;
  for (const PathSegment& s : raw) {
    if (!out.segments.empty() && out.segments.back().patch == s.patch) {
      out.segments.back().t1 = s.t1;
      continue;
    }
    if (s.patch != frame) out.jumps.emplace_back(frame, s.patch);
    frame = s.patch;
    out.segments.push_back(s);
  }
  if (out.end_patch != frame) out.jumps.emplace_back(frame, out.end_patch);
  return out;
}

/// Transport along γ from the frame of p(γ(0)) to the frame of p(γ(1)), where
/// p(x) is the lowest patch containing x.
inline GroupElement transport_path_global(const DifferentialCocycle& c, const Path& gamma, int steps_per_segment) {
  const PathLift lift = lift_path(c.cover(), gamma);
  const GroupInstance& G = c.cm().G();
  Matrix u = G.identity().value;
  int frame = lift.start_patch;
  for (const PathSegment& s : lift.segments) {
    if (s.patch != frame) u = c.g(frame, s.patch)(gamma(s.t0)).value * u;
    u = G.project(transport_path(c.A(s.patch), gamma, steps_per_segment, s.t0, s.t1).value * u);
    frame = s.patch;
  }
  if (lift.end_patch != frame) u = c.g(frame, lift.end_patch)(gamma(1.0)).value * u;
  return G.checked(G.project(u));
}

// ---------------------------------------------------------------------------
// Overlap transport

/// w = g_ij(y)·F_i(γ)·g_ij(x)⁻¹ and k ∈ H with F_j(γ)·g_ij(x) = t(k)·g_ij(y)·F_i(γ).
struct OverlapTransport {
  GroupElement w;
  GroupElement k;
};

/// Joint RK4 for U' = −A_i(γ')U and m' = (α_{W⁻¹})_*(φ_ij(γ'))·m with
/// W(τ) = g_ij(γ(τ))·U(τ)·g_ij(x)⁻¹; then k = α(W(1), m(1)).
inline OverlapTransport wilson_line_overlap(const DifferentialCocycle& c, int i, int j, const Path& gamma, int steps) {
  if (steps < 1) throw Error("wilson_line_overlap: steps must be positive");
  const CrossedModule& cm = c.cm();
  const GroupInstance& G = cm.G();
  const GroupInstance& H = cm.H();
  const MapField g = c.g(i, j);
  const Form phi = c.phi(i, j);
  const Form& a = c.A(i);
  const GroupKind gk = cm.g_kind();
  const Point x = gamma(0.0);
  const Matrix g0inv = inverse_matrix(gk, g(x).value);
  const bool g_flat = G.is_discrete();
  const bool h_flat = H.is_discrete();

  struct Slope {
    Matrix du;
    Matrix dm;
  };
  auto slope = [&](double tau, Side side, const Matrix& u, const Matrix& m) {
    const Point p = gamma(tau);
    const Point v = gamma.velocity(tau, side);
    Slope out;
    out.du = g_flat ? Matrix::Zero(u.rows(), u.cols()) : Matrix(-a.evaluate(p, std::vector<Point>{v}) * u);
    if (h_flat) {
      out.dm = Matrix::Zero(m.rows(), m.cols());
    } else {
      const Matrix w = g(p).value * u * g0inv;
      out.dm = cm.alpha_g_star_matrix(inverse_matrix(gk, w), phi.evaluate(p, std::vector<Point>{v})) * m;
    }
    return out;
  };

  Matrix u = G.identity().value, m = H.identity().value;
  const double h = 1.0 / steps;
  for (int s = 0; s < steps; ++s) {
    const double t0 = s * h;
    const Slope k1 = slope(t0, Side::Right, u, m);
    const Slope k2 = slope(t0 + 0.5 * h, Side::Left, u + 0.5 * h * k1.du, m + 0.5 * h * k1.dm);
    const Slope k3 = slope(t0 + 0.5 * h, Side::Left, u + 0.5 * h * k2.du, m + 0.5 * h * k2.dm);
    const Slope k4 = slope(t0 + h, Side::Left, u + h * k3.du, m + h * k3.dm);
    u = G.project(u + (h / 6.0) * (k1.du + 2 * k2.du + 2 * k3.du + k4.du));
    m = H.project(m + (h / 6.0) * (k1.dm + 2 * k2.dm + 2 * k3.dm + k4.dm));
  }
  const Matrix w = g(gamma(1.0)).value * u * g0inv;
  return {G.checked(G.project(w)), H.checked(cm.alpha_map()(w, m))};
}

// ---------------------------------------------------------------------------
// Bigons

namespace detail {

/// g and f lookups with the completion rules applied once up front.
class CocycleTables {
 public:
  explicit CocycleTables(const DifferentialCocycle& c) : c_(c) {
    const int n = c.size();
    const BoxCover& cover = c.cover();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i == j || cover.overlaps({i, j})) g_.emplace(std::pair{i, j}, c.g(i, j));
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int d = 0; d < n; ++d)
          if (cover.overlaps({a, b, d})) f_.emplace(std::tuple{a, b, d}, c.f(a, b, d));
  }

  Matrix g(int i, int j, const Point& x) const {
    if (i == j && c_.normalized()) return c_.cm().G().identity().value;
    return g_.at({i, j})(x).value;
  }

  Matrix f(int a, int b, int d, const Point& x) const {
    if (c_.normalized() && (a == b || b == d || a == d)) return c_.cm().H().identity().value;
    return f_.at({a, b, d})(x).value;
  }

 private:
  const DifferentialCocycle& c_;
  std::map<std::pair<int, int>, MapField> g_;
  std::map<std::tuple<int, int, int>, MapField> f_;
};

struct LatticeEdge {
  Point from, to, mid;
  Path curve = Path::constant(Point());  // parameter interval of Σ mapped to [0, 1]
  int patch = -1;
  Matrix global;  // frame p(from) → frame p(to)
};

/// Fills patch and global for an edge whose curve, from and to are set.
inline void globalize_edge(const DifferentialCocycle& c, const CocycleTables& tab, LatticeEdge& e, int from_patch,
                           int to_patch) {
  e.mid = e.curve(0.5);
  e.patch = lowest_holding(c.cover(), {e.from, e.mid, e.to});
  if (e.patch < 0)
    throw Error("cover too coarse for this lattice near " + BoxCover::format_point(e.mid));
  const int q = e.patch;
  const Matrix f = link(c.cm().G(), c.A(q), e.mid, e.to - e.from);
  e.global = tab.g(q, to_patch, e.to) * f * tab.g(from_patch, q, e.from);
}

}  // namespace detail

/// The 1-morphism the lattice method assigns to γ cut into n equal parameter
/// steps: exponential-midpoint links in the lowest patch holding each edge,
/// moved to the vertex frames p(x) by transitions. With non-zero φ the G-part
/// of a global path transport depends on where the patch changes are placed,
/// so the target law of transport_bigon_global is stated against this.
inline GroupElement transport_path_lattice(const DifferentialCocycle& c, const Path& gamma, int n) {
  if (n < 1) throw Error("transport_path_lattice: edge count must be positive");
  const detail::CocycleTables tab(c);
  const GroupInstance& G = c.cm().G();
  Matrix u = G.identity().value;
  const double dt = 1.0 / n;
  Point x = gamma(0.0);
  int px = detail::point_patch(c.cover(), x);
  for (int k = 0; k < n; ++k) {
    detail::LatticeEdge e;
    e.curve = gamma.restricted(k * dt, (k + 1) * dt);
    e.from = x;
    e.to = gamma((k + 1) * dt);
    const int py = detail::point_patch(c.cover(), e.to);
    detail::globalize_edge(c, tab, e, px, py);
    u = G.project(e.global * u);
    x = e.to;
    px = py;
  }
  return G.checked(u);
}

/// Multi-patch lattice transport on ns × nt cells. Vertices, edges and cells
/// take the lowest patch holding them. Each cell's local fibre is moved to
/// the global vertex frames by transition functions, overlap Wilson lines
/// along its edges, and f at its corners. Returns (source, h) with source the
/// transport of γ₀ from frame p(x) to frame p(y).
inline TwoMorphism transport_bigon_global(const DifferentialCocycle& c, const Bigon& sigma, int ns, int nt) {
  if (ns < 1 || nt < 1) throw Error("transport_bigon_global: cell counts must be positive");
  detail::require_bigon(sigma);
  const CrossedModule& cm = c.cm();
  const GroupInstance& G = cm.G();
  const GroupInstance& H = cm.H();
  const GroupKind gk = cm.g_kind(), hk = cm.h_kind();
  const BoxCover& cover = c.cover();
  const detail::CocycleTables tab(c);
  const auto& alpha = cm.alpha_map();
  const double ds = 1.0 / ns, dt = 1.0 / nt;

  auto vidx = [nt](int a, int k) { return static_cast<std::size_t>(a) * (nt + 1) + k; };
  std::vector<Point> vpos((ns + 1) * static_cast<std::size_t>(nt + 1));
  std::vector<int> vpatch(vpos.size());
  for (int a = 0; a <= ns; ++a)
    for (int k = 0; k <= nt; ++k) {
      vpos[vidx(a, k)] = sigma(a * ds, k * dt);
      vpatch[vidx(a, k)] = detail::point_patch(cover, vpos[vidx(a, k)]);
    }

  // t-edges [a][k]: (a,k) → (a,k+1); s-edges [a][k]: (a,k) → (a+1,k)
  std::vector<detail::LatticeEdge> tedge((ns + 1) * static_cast<std::size_t>(nt));
  std::vector<detail::LatticeEdge> sedge(ns * static_cast<std::size_t>(nt + 1));
  auto make_edge = [&](detail::LatticeEdge& e, Path curve, std::size_t v0, std::size_t v1) {
    e.from = vpos[v0];
    e.to = vpos[v1];
    e.curve = std::move(curve);
    detail::globalize_edge(c, tab, e, vpatch[v0], vpatch[v1]);
  };
  parallel_for(ns + 1, [&](int a) {
    for (int k = 0; k < nt; ++k)
      make_edge(tedge[static_cast<std::size_t>(a) * nt + k], sigma.path_at(a * ds).restricted(k * dt, (k + 1) * dt),
                vidx(a, k), vidx(a, k + 1));
  });
  parallel_for(ns, [&](int a) {
    for (int k = 0; k <= nt; ++k)
      make_edge(sedge[static_cast<std::size_t>(a) * (nt + 1) + k],
                sigma.s_path_at(k * dt).restricted(a * ds, (a + 1) * ds), vidx(a, k), vidx(a + 1, k));
  });

  LatticeCells L;
  L.ns = ns;
  L.nt = nt;
  L.t_edges.resize(tedge.size());
  for (std::size_t i = 0; i < tedge.size(); ++i) L.t_edges[i] = tedge[i].global;
  L.fibers.resize(static_cast<std::size_t>(ns) * nt);

  parallel_for(ns, [&](int a) {
    for (int k = 0; k < nt; ++k) {
      const detail::LatticeEdge& e = tedge[static_cast<std::size_t>(a) * nt + k];
      const detail::LatticeEdge& e2 = tedge[static_cast<std::size_t>(a + 1) * nt + k];
      const detail::LatticeEdge& sg = sedge[static_cast<std::size_t>(a) * (nt + 1) + k];
      const detail::LatticeEdge& sg2 = sedge[static_cast<std::size_t>(a) * (nt + 1) + k + 1];
      std::vector<Point> pts = {e.from, e.mid, e.to, e2.from, e2.mid, e2.to, sg.mid, sg2.mid,
                                sigma((a + 0.5) * ds, (k + 0.5) * dt)};
      const int j = detail::lowest_holding(cover, pts);
      if (j < 0)
        throw Error("transport_bigon_global: cover too coarse for this lattice near " +
                    BoxCover::format_point(pts.back()));
      const Form& aj = c.A(j);

      // Ẽ = g_{j,p(to)} F_j g_{p(from),j} and d with E = t(d)·Ẽ
      struct Local {
        Matrix tilde;
        Matrix d;
      };
      auto local = [&](const detail::LatticeEdge& ed, std::size_t v0, std::size_t v1) {
        const int q = ed.patch, vp = vpatch[v0], wp = vpatch[v1];
        const Matrix fj = detail::link(G, aj, ed.mid, ed.to - ed.from);
        Local out;
        out.tilde = tab.g(j, wp, ed.to) * fj * tab.g(vp, j, ed.from);
        if (q == j) {
          out.d = H.identity().value;
          return out;
        }
        const Matrix k = wilson_line_overlap(c, j, q, ed.curve, 1).k.value;
        const Matrix x = tab.g(j, wp, ed.to) * fj * inverse_matrix(gk, tab.g(j, q, ed.from));
        out.d = alpha(tab.g(q, wp, ed.to), k) * inverse_matrix(hk, tab.f(j, q, wp, ed.to)) *
                alpha(x, tab.f(vp, j, q, ed.from));
        return out;
      };
      const Local le = local(e, vidx(a, k), vidx(a, k + 1));
      const Local le2 = local(e2, vidx(a + 1, k), vidx(a + 1, k + 1));
      const Local ls = local(sg, vidx(a, k), vidx(a + 1, k));
      const Local ls2 = local(sg2, vidx(a, k + 1), vidx(a + 1, k + 1));

      const Matrix h_loc = detail::cell_fiber(cm, aj, c.B(j), sigma, a * ds, k * dt, ds, dt);
      const std::size_t corner = vidx(a, k + 1);
      const Matrix h_hat = alpha(tab.g(j, vpatch[corner], vpos[corner]), h_loc);
      // P = e ∘ σ⁻¹, Q = σ'⁻¹ ∘ e'
      const Matrix ls_inv = inverse_matrix(gk, ls.tilde), ls2_inv = inverse_matrix(gk, ls2.tilde);
      const Matrix d_p = le.d * alpha(le.tilde * ls_inv, inverse_matrix(hk, ls.d));
      const Matrix d_q = alpha(ls2_inv, inverse_matrix(hk, ls2.d) * le2.d);
      L.fibers[static_cast<std::size_t>(a) * nt + k] = H.project(d_q * h_hat * inverse_matrix(hk, d_p));
    }
  });
  return assemble_lattice(cm, L);
}

inline TwoMorphism transport_bigon_global(const DifferentialCocycle& c, const Bigon& sigma, int cells) {
  return transport_bigon_global(c, sigma, cells, cells);
}

}  // namespace two_transport

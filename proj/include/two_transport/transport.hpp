#pragma once

// Path transport (RK4 path-ordered exponential), surface transport by the
// lane ODE, and the lattice 2-group composer used as an independent oracle.

#include "two_transport/fields.hpp"
#include "two_transport/parallel.hpp"
#include "two_transport/two_group.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

namespace two_transport {

inline constexpr double kParamFdStep = 1e-5;
inline constexpr double kEndpointTol = 1e-9;

// ---------------------------------------------------------------------------
// Paths and bigons

/// Which one-sided derivative to take at a kink of a piecewise path.
enum class Side { Left, Right };

inline Side flip(Side s) { return s == Side::Left ? Side::Right : Side::Left; }

namespace detail {

/// Piece index and local parameter of t in a chain of n equal pieces.
/// Parameters within rounding distance of a breakpoint are put on it, so
/// that lattice nodes such as k/(3N) see the requested side of a kink.
inline std::pair<int, double> locate_piece(double t, int n, Side side) {
  double x = t * n;
  if (const double r = std::round(x); std::abs(x - r) < 1e-12 * n) x = r;
  int k = static_cast<int>(std::floor(x));
  if (side == Side::Left && x == k && k > 0) --k;
  k = std::clamp(k, 0, n - 1);
  return {k, x - k};
}

}  // namespace detail

class Path {
 public:
  using Eval = std::function<Point(double)>;
  using SidedEval = std::function<Point(double, Side)>;

  /// `derivative` is optional; central differences are used without it.
  explicit Path(Eval eval, Eval derivative = {}) : eval_(std::make_shared<const Eval>(std::move(eval))) {
    if (derivative)
      deriv_ = std::make_shared<const SidedEval>([d = std::move(derivative)](double t, Side) { return d(t); });
  }

  /// Path whose derivative has one-sided values at kinks.
  static Path sided(Eval eval, SidedEval derivative) {
    Path p(std::move(eval));
    if (derivative) p.deriv_ = std::make_shared<const SidedEval>(std::move(derivative));
    return p;
  }

  static Path straight(const Point& a, const Point& b) {
    const Point d = b - a;
    return Path([a, d](double t) -> Point { return a + t * d; }, [d](double) -> Point { return d; });
  }

  static Path constant(const Point& x) {
    return Path([x](double) { return x; }, [x](double) -> Point { return Point::Zero(x.size()); });
  }

  Point operator()(double t) const { return (*eval_)(t); }

  Point velocity(double t, Side side = Side::Left) const {
    if (deriv_) return (*deriv_)(t, side);
    return ((*eval_)(t + kParamFdStep) - (*eval_)(t - kParamFdStep)) / (2 * kParamFdStep);
  }

  Path reversed() const {
    const Path p = *this;
    return sided([p](double t) { return p(1 - t); },
                 [p](double t, Side side) -> Point { return -p.velocity(1 - t, flip(side)); });
  }

  /// γ ∘ φ for an increasing φ: [0,1] → [0,1]; `dphi` by central differences if empty.
  Path reparameterized(std::function<double(double)> phi, std::function<double(double)> dphi = {}) const {
    const Path p = *this;
    if (!dphi)
      dphi = [phi](double t) { return (phi(t + kParamFdStep) - phi(t - kParamFdStep)) / (2 * kParamFdStep); };
    return sided([p, phi](double t) { return p(phi(t)); },
                 [p, phi, dphi](double t, Side side) -> Point { return dphi(t) * p.velocity(phi(t), side); });
  }

  /// Restriction to [a, b], rescaled to [0, 1].
  Path restricted(double a, double b) const {
    const Path p = *this;
    return sided([p, a, b](double t) { return p(a + (b - a) * t); },
                 [p, a, b](double t, Side side) -> Point { return (b - a) * p.velocity(a + (b - a) * t, side); });
  }

 private:
  // shared so that copies captured by derived paths stay cheap
  std::shared_ptr<const Eval> eval_;
  std::shared_ptr<const SidedEval> deriv_;
};

/// Concatenation of several pieces, each taking an equal share of [0, 1];
/// pieces[0] is traversed first.
inline Path concat(const std::vector<Path>& pieces) {
  if (pieces.empty()) throw Error("concat: no pieces");
  const int n = static_cast<int>(pieces.size());
  return Path::sided(
      [pieces, n](double t) {
        const auto [k, u] = detail::locate_piece(t, n, Side::Left);
        return pieces[k](u);
      },
      [pieces, n](double t, Side side) -> Point {
        const auto [k, u] = detail::locate_piece(t, n, side);
        return n * pieces[k].velocity(u, side);
      });
}

/// `first` on [0, 1/2], then `second`; in composition order second ∘ first.
inline Path concat(const Path& first, const Path& second) { return concat(std::vector<Path>{first, second}); }

/// Σ: [0,1]² → M with Σ(0,·) = γ₀, Σ(1,·) = γ₁ and fixed endpoints.
class Bigon {
 public:
  using Eval = std::function<Point(double s, double t)>;
  using SidedEval = std::function<Point(double s, double t, Side side)>;

  explicit Bigon(Eval eval, Eval d_s = {}, Eval d_t = {}) : eval_(std::make_shared<const Eval>(std::move(eval))) {
    if (d_s) ds_ = std::make_shared<const SidedEval>([d = std::move(d_s)](double s, double t, Side) { return d(s, t); });
    if (d_t) dt_ = std::make_shared<const SidedEval>([d = std::move(d_t)](double s, double t, Side) { return d(s, t); });
  }

  /// Bigon whose partials have one-sided values along kinks; the side refers
  /// to the differentiated variable.
  static Bigon sided(Eval eval, SidedEval d_s, SidedEval d_t) {
    Bigon b(std::move(eval));
    if (d_s) b.ds_ = std::make_shared<const SidedEval>(std::move(d_s));
    if (d_t) b.dt_ = std::make_shared<const SidedEval>(std::move(d_t));
    return b;
  }

  Point operator()(double s, double t) const { return (*eval_)(s, t); }

  Point d_s(double s, double t, Side side = Side::Left) const {
    if (ds_) return (*ds_)(s, t, side);
    return ((*eval_)(s + kParamFdStep, t) - (*eval_)(s - kParamFdStep, t)) / (2 * kParamFdStep);
  }

  Point d_t(double s, double t, Side side = Side::Left) const {
    if (dt_) return (*dt_)(s, t, side);
    return ((*eval_)(s, t + kParamFdStep) - (*eval_)(s, t - kParamFdStep)) / (2 * kParamFdStep);
  }

  /// t ↦ Σ(s, t)
  Path path_at(double s) const {
    const Bigon b = *this;
    return Path::sided([b, s](double t) { return b(s, t); }, [b, s](double t, Side side) { return b.d_t(s, t, side); });
  }

  /// s ↦ Σ(s, t)
  Path s_path_at(double t) const {
    const Bigon b = *this;
    return Path::sided([b, t](double s) { return b(s, t); }, [b, t](double s, Side side) { return b.d_s(s, t, side); });
  }

  /// Largest displacement of Σ(s,0) and Σ(s,1) from their s = 0 values.
  double endpoint_drift(int samples = 17) const {
    double m = 0;
    const Point x = (*this)(0, 0), y = (*this)(0, 1);
    for (int k = 0; k <= samples; ++k) {
      const double s = static_cast<double>(k) / samples;
      m = std::max(m, ((*this)(s, 0) - x).norm());
      m = std::max(m, ((*this)(s, 1) - y).norm());
    }
    return m;
  }

  /// Identity bigon id_γ.
  static Bigon identity(const Path& g) {
    return sided([g](double, double t) { return g(t); },
                 [g](double, double t, Side) -> Point { return Point::Zero(g(t).size()); },
                 [g](double, double t, Side side) { return g.velocity(t, side); });
  }

 private:
  std::shared_ptr<const Eval> eval_;
  std::shared_ptr<const SidedEval> ds_;
  std::shared_ptr<const SidedEval> dt_;
};

/// Vertical composition: `lower` on s ∈ [0, 1/2], then `upper`.
inline Bigon vertical_stack(const Bigon& lower, const Bigon& upper) {
  const std::vector<Bigon> parts = {lower, upper};
  return Bigon::sided(
      [parts](double s, double t) {
        const auto [k, u] = detail::locate_piece(s, 2, Side::Left);
        return parts[k](u, t);
      },
      [parts](double s, double t, Side side) -> Point {
        const auto [k, u] = detail::locate_piece(s, 2, side);
        return 2 * parts[k].d_s(u, t, side);
      },
      [parts](double s, double t, Side side) {
        const auto [k, u] = detail::locate_piece(s, 2, Side::Left);
        return parts[k].d_t(u, t, side);
      });
}

/// Horizontal composition of bigons laid side by side in t, each on an equal
/// share of [0, 1]; the first piece is traversed first.
inline Bigon horizontal_chain(const std::vector<Bigon>& pieces) {
  if (pieces.empty()) throw Error("horizontal_chain: no pieces");
  const int n = static_cast<int>(pieces.size());
  return Bigon::sided(
      [pieces, n](double s, double t) {
        const auto [k, u] = detail::locate_piece(t, n, Side::Left);
        return pieces[k](s, u);
      },
      [pieces, n](double s, double t, Side side) {
        const auto [k, u] = detail::locate_piece(t, n, Side::Left);
        return pieces[k].d_s(s, u, side);
      },
      [pieces, n](double s, double t, Side side) -> Point {
        const auto [k, u] = detail::locate_piece(t, n, side);
        return n * pieces[k].d_t(s, u, side);
      });
}

// ---------------------------------------------------------------------------
// Path transport

namespace detail {

inline Matrix connection_along(const Form& A, const Point& x, const Point& v) {
  return A.evaluate(x, std::vector<Point>{v});
}

}  // namespace detail

/// Path-ordered exponential over γ restricted to [t0, t1]: U' = −A(γ')U,
/// U(t0) = e, fixed-step RK4. Each step's propagator is projected to the group
/// and multiplied on the left.
inline GroupElement transport_path(const Form& A, const Path& gamma, int steps, double t0 = 0.0, double t1 = 1.0) {
  if (A.degree() != 1) throw Error("transport_path: A must be a 1-form");
  if (steps < 1) throw Error("transport_path: steps must be positive");
  const GroupInstance& G = group(A.algebra());
  if (G.is_discrete()) return G.identity();
  const int d = G.dim();
  const Matrix I = Matrix::Identity(d, d);
  const double h = (t1 - t0) / steps;
  auto X = [&](double t, Side side) -> Matrix {
    const Point v = gamma.velocity(t, side);
    if (!v.allFinite()) throw Error("transport_path: non-finite path derivative");
    return -detail::connection_along(A, gamma(t), v);
  };
  Matrix U = I;
  for (int k = 0; k < steps; ++k) {
    const double ta = t0 + k * h;
    // one-sided samples at the step ends, so kinks on the grid are exact
    const Matrix x0 = X(ta, Side::Right);
    const Matrix xm = X(ta + 0.5 * h, Side::Left);
    const Matrix x1 = X(ta + h, Side::Left);
    const Matrix k1 = x0;
    const Matrix k2 = xm * (I + 0.5 * h * k1);
    const Matrix k3 = xm * (I + 0.5 * h * k2);
    const Matrix k4 = x1 * (I + h * k3);
    const Matrix M = I + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
    U = G.project(M) * U;
  }
  return G.checked(U);
}

/// Distance between F(γ) and F(γ∘φ).
inline double reparameterize_check(const Form& A, const Path& gamma, std::function<double(double)> phi, int steps,
                                   std::function<double(double)> dphi = {}) {
  const GroupElement a = transport_path(A, gamma, steps);
  const GroupElement b = transport_path(A, gamma.reparameterized(std::move(phi), std::move(dphi)), steps);
  return distance(a, b);
}

// ---------------------------------------------------------------------------
// Surface transport, lane ODE

namespace detail {

inline void require_bigon(const Bigon& sigma) {
  const double drift = sigma.endpoint_drift();
  if (!(drift <= kEndpointTol))
    throw Error("bigon endpoints move with s (drift " + std::to_string(drift) + ")");
}

inline void require_forms(const CrossedModule& cm, const Form& A, const Form& B) {
  if (A.degree() != 1 || A.algebra() != cm.g_kind()) throw Error("A must be a 𝔤-valued 1-form");
  if (B.degree() != 2 || B.algebra() != cm.h_kind()) throw Error("B must be an 𝔥-valued 2-form");
}

}  // namespace detail

/// η(s) = ∫₀¹ (α_{V(τ)})_* B(∂_tΣ, ∂_sΣ)(s,τ) dτ, with V(τ) the transport along
/// Σ(s,·) from τ to 1. V solves dV/dτ = V·A(∂_tΣ), V(1) = e, integrated backward.
inline Matrix lane_integral(const CrossedModule& cm, const Form& A, const Form& B, const Bigon& sigma, double s,
                            int steps, Side s_side = Side::Left) {
  const GroupInstance& G = cm.G();
  const int gd = G.dim();
  const int hd = cm.H().dim();
  if (cm.H().is_discrete()) return Matrix::Zero(hd, hd);
  struct Sample {
    Matrix a;  // A(∂_tΣ)
    Matrix b;  // B(∂_tΣ, ∂_sΣ)
  };
  auto sample = [&](double tau, Side t_side) {
    const Point x = sigma(s, tau);
    const Point dt = sigma.d_t(s, tau, t_side);
    const Point ds = sigma.d_s(s, tau, s_side);
    Sample out;
    out.a = G.is_discrete() ? Matrix::Zero(gd, gd) : Matrix(A.evaluate(x, std::vector<Point>{dt}));
    out.b = B.evaluate(x, std::vector<Point>{dt, ds});
    return out;
  };
  auto twist = [&](const Matrix& v, const Matrix& b) { return cm.alpha_g_star_matrix(v, b); };

  const double h = -1.0 / steps;
  Matrix V = Matrix::Identity(gd, gd);
  Matrix acc = Matrix::Zero(hd, hd);
  for (int k = steps; k > 0; --k) {
    const double ta = static_cast<double>(k) / steps;
    const Sample s1 = sample(ta, Side::Left);
    const Sample sm = sample(ta + 0.5 * h, Side::Left);
    const Sample s0 = sample(ta + h, Side::Right);
    const Matrix kv1 = V * s1.a;
    const Matrix ki1 = twist(V, s1.b);
    const Matrix V2 = V + 0.5 * h * kv1;
    const Matrix kv2 = V2 * sm.a;
    const Matrix ki2 = twist(V2, sm.b);
    const Matrix V3 = V + 0.5 * h * kv2;
    const Matrix kv3 = V3 * sm.a;
    const Matrix ki3 = twist(V3, sm.b);
    const Matrix V4 = V + h * kv3;
    const Matrix kv4 = V4 * s0.a;
    const Matrix ki4 = twist(V4, s0.b);
    V = G.project(V + (h / 6.0) * (kv1 + 2 * kv2 + 2 * kv3 + kv4));
    acc += (h / 6.0) * (ki1 + 2 * ki2 + 2 * ki3 + ki4);
  }
  return -acc;
}

/// Surface transport by the lane ODE h' = η(s)·h, h(0) = e, RK4 in s.
/// Returns (F(γ₀), h) with t(h)·F(γ₀) ≈ F(γ₁).
inline TwoMorphism transport_bigon_ode(const CrossedModule& cm, const Form& A, const Form& B, const Bigon& sigma,
                                       int steps) {
  if (steps < 1) throw Error("transport_bigon_ode: steps must be positive");
  detail::require_forms(cm, A, B);
  detail::require_bigon(sigma);
  const GroupElement g0 = transport_path(A, sigma.path_at(0.0), steps);
  const GroupInstance& H = cm.H();
  if (H.is_discrete()) return {g0, H.identity()};

  // three lanes per step: start (right-sided in s), midpoint, end (left-sided)
  std::vector<Matrix> eta(3 * static_cast<std::size_t>(steps));
  parallel_for(3 * steps, [&](int j) {
    const int k = j / 3, r = j % 3;
    const double s = (k + 0.5 * r) / steps;
    eta[j] = lane_integral(cm, A, B, sigma, s, steps, r == 0 ? Side::Right : Side::Left);
  });

  const int d = H.dim();
  const Matrix I = Matrix::Identity(d, d);
  const double ds = 1.0 / steps;
  Matrix hm = I;
  for (int k = 0; k < steps; ++k) {
    const Matrix& e0 = eta[3 * k];
    const Matrix& em = eta[3 * k + 1];
    const Matrix& e1 = eta[3 * k + 2];
    const Matrix k1 = e0 * hm;
    const Matrix k2 = em * (hm + 0.5 * ds * k1);
    const Matrix k3 = em * (hm + 0.5 * ds * k2);
    const Matrix k4 = e1 * (hm + ds * k3);
    hm = H.project(hm + (ds / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4));
  }
  return {g0, H.checked(hm)};
}

// ---------------------------------------------------------------------------
// Lattice composer

/// Edge transports along the t-direction and cell fibres, already twisted to
/// each cell's corner (s_a, t_{k+1}).
struct LatticeCells {
  int ns = 0;
  int nt = 0;
  std::vector<Matrix> t_edges;  // (ns+1)·nt, [a·nt + k]: F along Σ(s_a,·) on [t_k, t_{k+1}]
  std::vector<Matrix> fibers;   // ns·nt,     [a·nt + k]

  const Matrix& edge(int a, int k) const { return t_edges[static_cast<std::size_t>(a) * nt + k]; }
  const Matrix& fiber(int a, int k) const { return fibers[static_cast<std::size_t>(a) * nt + k]; }
};

/// Row sweep: cell k of row a replaces e_{a,k}∘σ_k⁻¹ by σ_{k+1}⁻¹∘e_{a+1,k} and is
/// whiskered by the rest of row a. Rows are composed vertically bottom to top.
inline TwoMorphism assemble_lattice(const CrossedModule& cm, const LatticeCells& L) {
  const GroupInstance& G = cm.G();
  const GroupInstance& H = cm.H();
  const int ns = L.ns, nt = L.nt;
  const auto& alpha = cm.alpha_map();
  std::vector<Matrix> rows(ns);
  parallel_for(ns, [&](int a) {
    Matrix rest = G.identity().value;  // F(R_k), R_k = e_{a,nt-1} ∘ … ∘ e_{a,k+1}
    std::vector<Matrix> whiskered(nt);
    for (int k = nt - 1; k >= 0; --k) {
      whiskered[k] = alpha(rest, L.fiber(a, k));
      rest = G.project(rest * L.edge(a, k));
    }
    Matrix h = H.identity().value;
    for (int k = 0; k < nt; ++k) h = whiskered[k] * h;
    rows[a] = H.project(h);
  });
  Matrix h = H.identity().value;
  for (int a = 0; a < ns; ++a) h = H.project(rows[a] * h);
  Matrix g = G.identity().value;
  for (int k = 0; k < nt; ++k) g = G.project(L.edge(0, k) * g);
  return {G.checked(g), H.checked(h)};
}

namespace detail {

/// Exponential-midpoint link variable exp(−A(x_mid)[Δx]).
inline Matrix link(const GroupInstance& G, const Form& A, const Point& mid, const Point& chord) {
  if (G.is_discrete()) return G.identity().value;
  return exp(AlgebraElement{-A.evaluate(mid, std::vector<Point>{chord}), G.kind()}).value;
}

/// exp_H of the 2×2 Gauss–Legendre sum of (α_V)_* B(∂_tΣ, ∂_sΣ), V the
/// straight-line link from each node to the corner (s_a, t_{k+1}).
inline Matrix cell_fiber(const CrossedModule& cm, const Form& A, const Form& B, const Bigon& sigma, double s0,
                         double t0, double ds, double dt) {
  const GroupInstance& H = cm.H();
  if (H.is_discrete()) return H.identity().value;
  constexpr double kNode = 0.21132486540518711775;  // (1 − 1/√3)/2
  const Point q = sigma(s0, t0 + dt);
  Matrix sum;
  for (double us : {kNode, 1.0 - kNode})
    for (double ut : {kNode, 1.0 - kNode}) {
      const double sn = s0 + us * ds, tn = t0 + ut * dt;
      const Point c = sigma(sn, tn);
      const Matrix b = B.evaluate(c, std::vector<Point>{sigma.d_t(sn, tn), sigma.d_s(sn, tn)}) * (0.25 * ds * dt);
      const Matrix v = cm.alpha_g_star_matrix(link(cm.G(), A, 0.5 * (c + q), q - c), b);
      if (sum.size() == 0) sum = v; else sum += v;
    }
  return exp(AlgebraElement{sum, H.kind()}).value;
}

}  // namespace detail

/// Lattice surface transport on an ns × nt grid of cells.
inline TwoMorphism transport_bigon_lattice(const CrossedModule& cm, const Form& A, const Form& B, const Bigon& sigma,
                                           int ns, int nt) {
  if (ns < 1 || nt < 1) throw Error("transport_bigon_lattice: cell counts must be positive");
  detail::require_forms(cm, A, B);
  detail::require_bigon(sigma);
  const GroupInstance& G = cm.G();
  LatticeCells L;
  L.ns = ns;
  L.nt = nt;
  L.t_edges.resize(static_cast<std::size_t>(ns + 1) * nt);
  L.fibers.resize(static_cast<std::size_t>(ns) * nt);
  const double ds = 1.0 / ns, dt = 1.0 / nt;
  parallel_for(ns + 1, [&](int a) {
    const double s = a * ds;
    for (int k = 0; k < nt; ++k) {
      const Point p0 = sigma(s, k * dt), p1 = sigma(s, (k + 1) * dt);
      L.t_edges[static_cast<std::size_t>(a) * nt + k] = detail::link(G, A, sigma(s, (k + 0.5) * dt), p1 - p0);
      if (a < ns) L.fibers[static_cast<std::size_t>(a) * nt + k] = detail::cell_fiber(cm, A, B, sigma, s, k * dt, ds, dt);
    }
  });
  return assemble_lattice(cm, L);
}

inline TwoMorphism transport_bigon_lattice(const CrossedModule& cm, const Form& A, const Form& B, const Bigon& sigma,
                                           int cells) {
  return transport_bigon_lattice(cm, A, B, sigma, cells, cells);
}

// ---------------------------------------------------------------------------
// Diagnostics

/// ‖t(h)·source − F(γ₁)‖ with F(γ₁) by RK4 at `steps`.
inline double target_law_residual(const CrossedModule& cm, const Form& A, const Bigon& sigma, const TwoMorphism& m,
                                  int steps) {
  const GroupElement f1 = transport_path(A, sigma.path_at(1.0), steps);
  return distance(target(cm, m), f1);
}

/// Σ over an N×N grid of ‖(t_*B − dA − [A∧A])(∂_tΣ, ∂_sΣ)‖ at cell centres times cell area.
inline double plaquette_fake_curvature(const CrossedModule& cm, const Form& A, const Form& B, const Bigon& sigma,
                                       int cells, double fd_step = kDefaultFdStep) {
  const Form fc = t_star(B, cm) - exterior_derivative(A, fd_step) - 0.5 * bracket_wedge(A, A);
  double total = 0;
  const double d = 1.0 / cells;
  for (int a = 0; a < cells; ++a)
    for (int k = 0; k < cells; ++k) {
      const double s = (a + 0.5) * d, t = (k + 0.5) * d;
      const Matrix v = fc.evaluate(sigma(s, t), std::vector<Point>{sigma.d_t(s, t), sigma.d_s(s, t)});
      total += v.norm() * d * d;
    }
  return total;
}

}  // namespace two_transport

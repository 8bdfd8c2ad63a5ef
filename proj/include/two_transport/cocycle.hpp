#pragma once

// Degree-two differential cocycles over box covers, their 1- and 2-morphisms,
// and the validators for the cocycle and morphism conditions.

#include "two_transport/crossed_module.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace two_transport {

// ---------------------------------------------------------------------------
// Covers

namespace detail {

struct Interval {
  double lo;
  double hi;
};

// Intersection of two intervals on an axis with the given period (0: none).
// The result is expressed in the first interval's coordinates.
inline std::vector<Interval> intersect(Interval a, Interval b, double period) {
  constexpr double kMinLength = 1e-12;
  std::vector<Interval> out;
  if (period <= 0) {
    const Interval r{std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
    if (r.hi - r.lo > kMinLength) out.push_back(r);
    return out;
  }
  if (b.hi - b.lo >= period - 1e-12) return {a};
  if (a.hi - a.lo >= period - 1e-12) return {b};
  for (int k = -2; k <= 2; ++k) {
    const Interval r{std::max(a.lo, b.lo + k * period), std::min(a.hi, b.hi + k * period)};
    if (r.hi - r.lo > kMinLength) out.push_back(r);
  }
  return out;
}

}  // namespace detail

/// Cell-centre sample grid with n points per axis on each box.
inline std::vector<Point> sample_points(const std::vector<BoxChart>& boxes, int n) {
  std::vector<Point> pts;
  for (const BoxChart& b : boxes) {
    const int d = b.dim();
    std::vector<int> idx(d, 0);
    while (true) {
      Point p(d);
      for (int a = 0; a < d; ++a) p[a] = b.lower[a] + (idx[a] + 0.5) * (b.upper[a] - b.lower[a]) / n;
      pts.push_back(p);
      int a = 0;
      while (a < d && ++idx[a] == n) idx[a++] = 0;
      if (a == d) break;
    }
  }
  return pts;
}

class BoxCover {
 public:
  BoxCover(BoxChart base, std::vector<BoxChart> patches, int coverage_resolution = 64)
      : base_(std::move(base)), patches_(std::move(patches)) {
    if (patches_.empty()) throw Error("BoxCover: no patches");
    for (const BoxChart& p : patches_)
      if (p.dim() != base_.dim()) throw Error("BoxCover: patch dimension differs from base");
    for (const Point& x : sample_points({base_}, coverage_resolution))
      if (containing(x).empty())
        throw Error("BoxCover: patches do not cover the base (uncovered point near " + format_point(x) + ")");
    const int n = size();
    std::vector<int> cur;
    std::function<void(int)> rec = [&](int start) {
      if (!cur.empty()) {
        auto boxes = compute_overlap(cur);
        if (boxes.empty()) return;  // supersets are empty too
        overlaps_[cur] = std::move(boxes);
      }
      if (cur.size() == 4) return;
      for (int i = start; i < n; ++i) {
        cur.push_back(i);
        rec(i + 1);
        cur.pop_back();
      }
    };
    rec(0);
  }

  /// Patches given as corner pairs inside `base`, inheriting its periods.
  static BoxCover from_boxes(const BoxChart& base, const std::vector<std::pair<Point, Point>>& boxes) {
    std::vector<BoxChart> patches;
    for (const auto& [lo, hi] : boxes) patches.push_back(base.sub_box(lo, hi));
    return BoxCover(base, std::move(patches));
  }

  const BoxChart& base() const { return base_; }
  int size() const { return static_cast<int>(patches_.size()); }
  const BoxChart& patch(int i) const { return patches_.at(i); }

  /// Intersection of the listed patches as a union of boxes (empty if none).
  const std::vector<BoxChart>& overlap(std::vector<int> idx) const {
    static const std::vector<BoxChart> none;
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    const auto it = overlaps_.find(idx);
    return it == overlaps_.end() ? none : it->second;
  }

  bool overlaps(const std::vector<int>& idx) const { return !overlap(idx).empty(); }

  /// Patches containing p, shrunk by `margin` on non-periodic sides.
  std::vector<int> containing(const Point& p, double margin = 0.0) const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i) {
      const bool in = margin > 0 ? patches_[i].contains_strictly(p, margin) : patches_[i].contains(p);
      if (in) out.push_back(i);
    }
    return out;
  }

  static std::string format_point(const Point& p) {
    std::ostringstream os;
    os << "(";
    for (Eigen::Index a = 0; a < p.size(); ++a) os << (a ? ", " : "") << p[a];
    os << ")";
    return os.str();
  }

 private:
  std::vector<BoxChart> compute_overlap(const std::vector<int>& idx) const {
    std::vector<BoxChart> region = {patches_[idx[0]]};
    for (std::size_t k = 1; k < idx.size(); ++k) {
      const BoxChart& next = patches_[idx[k]];
      std::vector<BoxChart> out;
      for (const BoxChart& r : region) {
        std::vector<std::vector<detail::Interval>> axes;
        for (int a = 0; a < base_.dim(); ++a)
          axes.push_back(detail::intersect({r.lower[a], r.upper[a]}, {next.lower[a], next.upper[a]}, base_.period[a]));
        std::vector<int> pick(base_.dim(), 0);
        bool empty = false;
        for (const auto& ax : axes) empty = empty || ax.empty();
        if (empty) continue;
        while (true) {
          Point lo(base_.dim()), hi(base_.dim());
          for (int a = 0; a < base_.dim(); ++a) {
            lo[a] = axes[a][pick[a]].lo;
            hi[a] = axes[a][pick[a]].hi;
          }
          out.push_back(base_.sub_box(lo, hi));
          int a = 0;
          while (a < base_.dim() && ++pick[a] == static_cast<int>(axes[a].size())) pick[a++] = 0;
          if (a == base_.dim()) break;
        }
      }
      region = std::move(out);
      if (region.empty()) break;
    }
    return region;
  }

  BoxChart base_;
  std::vector<BoxChart> patches_;
  std::map<std::vector<int>, std::vector<BoxChart>> overlaps_;
};

// ---------------------------------------------------------------------------
// Cocycles

class DifferentialCocycle {
 public:
  DifferentialCocycle(CrossedModule cm, BoxCover cover)
      : cm_(std::move(cm)), cover_(std::move(cover)), A_(cover_.size()), B_(cover_.size()) {}

  const CrossedModule& cm() const { return cm_; }
  const BoxCover& cover() const { return cover_; }
  int size() const { return cover_.size(); }

  void set_patch(int i, Form A, Form B) {
    check_index(i);
    if (A.degree() != 1 || A.algebra() != cm_.g_kind()) throw Error("A must be a 𝔤-valued 1-form");
    if (B.degree() != 2 || B.algebra() != cm_.h_kind()) throw Error("B must be an 𝔥-valued 2-form");
    A_[i] = std::move(A);
    B_[i] = std::move(B);
  }

  void set_psi(int i, MapField psi) {
    check_index(i);
    if (psi.group_kind() != cm_.h_kind()) throw Error("ψ must be H-valued");
    psi_.insert_or_assign(i, std::move(psi));
  }

  void set_overlap(int i, int j, MapField g, Form phi) {
    check_index(i);
    check_index(j);
    if (i != j && !cover_.overlaps({i, j}))
      throw Error("overlap data given for empty intersection (" + std::to_string(i) + "," + std::to_string(j) + ")");
    if (g.group_kind() != cm_.g_kind()) throw Error("g must be G-valued");
    if (phi.degree() != 1 || phi.algebra() != cm_.h_kind()) throw Error("φ must be an 𝔥-valued 1-form");
    g_.insert_or_assign({i, j}, std::move(g));
    phi_.insert_or_assign({i, j}, std::move(phi));
  }

  void set_triple(int i, int j, int k, MapField f) {
    check_index(i);
    check_index(j);
    check_index(k);
    if (!cover_.overlaps({i, j, k})) throw Error("triple data given for empty intersection");
    if (f.group_kind() != cm_.h_kind()) throw Error("f must be H-valued");
    f_.insert_or_assign({i, j, k}, std::move(f));
  }

  /// True when no normalization ψ_i was given (ψ_i = 1).
  bool normalized() const { return psi_.empty(); }

  const Form& A(int i) const {
    check_index(i);
    if (!A_[i]) throw Error("patch " + std::to_string(i) + " has no connection data");
    return *A_[i];
  }
  const Form& B(int i) const {
    check_index(i);
    if (!B_[i]) throw Error("patch " + std::to_string(i) + " has no connection data");
    return *B_[i];
  }

  MapField psi(int i) const {
    check_index(i);
    const auto it = psi_.find(i);
    if (it != psi_.end()) return it->second;
    return MapField::identity(cover_.patch(i), cm_.h_kind());
  }

  MapField g(int i, int j) const {
    if (const auto it = g_.find({i, j}); it != g_.end()) return it->second;
    if (i == j) {
      const MapField p = psi(i);
      const CrossedModule cm = cm_;
      return MapField(cover_.patch(i), cm_.g_kind(), [p, cm](const Point& x) { return cm.t_map()(p.sample(x)); });
    }
    require_normalized("g", {i, j});
    if (const auto it = g_.find({j, i}); it != g_.end()) {
      const MapField gij = it->second;
      const GroupKind k = cm_.g_kind();
      return MapField(gij.chart(), k, [gij, k](const Point& x) { return inverse_matrix(k, gij.sample(x)); });
    }
    throw missing("overlap", {i, j});
  }

  Form phi(int i, int j) const {
    if (const auto it = phi_.find({i, j}); it != phi_.end()) return it->second;
    const CrossedModule cm = cm_;
    if (i == j) {
      if (psi_.find(i) == psi_.end()) return Form::zero(1, cover_.patch(i), cm_.h_kind());
      // φ_ii = −(r⁻¹_ψ ∘ α_ψ)_*(A_i) − ψ*θ̄
      const MapField p = psi(i);
      const Form a = A(i);
      const Form mc = maurer_cartan(p);
      return Form(1, cover_.patch(i), cm_.h_kind(), [p, a, mc, cm](const Point& x) {
        auto out = mc.sample(x);
        const auto ac = a.sample(x);
        const Matrix pv = p.sample(x);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = -out[k] - cm.alpha_h_star_matrix(pv, ac[k]);
        return out;
      });
    }
    require_normalized("φ", {i, j});
    if (const auto it = phi_.find({j, i}); it != phi_.end()) {
      // φ_ji = −(α_{g_ji})_* φ_ij
      const MapField gji = g(i, j);
      return pushforward_pointwise(
          it->second, [gji, cm](const Point& x, const Matrix& m) { return Matrix(-cm.alpha_g_star_matrix(gji.sample(x), m)); },
          cm_.h_kind());
    }
    throw missing("overlap", {i, j});
  }

  MapField f(int a, int b, int c) const {
    if (const auto it = f_.find({a, b, c}); it != f_.end()) return it->second;
    const GroupKind hk = cm_.h_kind();
    const CrossedModule cm = cm_;
    const BoxChart& chart = cover_.patch(a);
    if (b == c) {
      // f_ijj ψ_j = 1
      const MapField p = psi(b);
      return MapField(chart, hk, [p, hk](const Point& x) { return inverse_matrix(hk, p.sample(x)); });
    }
    if (a == b) {
      // f_iij α(g_ij, ψ_i) = 1
      const MapField p = psi(a);
      const MapField gab = g(a, c);
      return MapField(chart, hk, [p, gab, cm, hk](const Point& x) {
        return inverse_matrix(hk, cm.alpha_map()(gab.sample(x), p.sample(x)));
      });
    }
    require_normalized("f", {a, b, c});
    if (a == c) return MapField::identity(chart, hk);
    if (a > b) {
      const MapField swapped = f(b, a, c);
      return MapField(chart, hk, [swapped, hk](const Point& x) { return inverse_matrix(hk, swapped.sample(x)); });
    }
    if (b > c) {
      const MapField swapped = f(a, c, b);
      const MapField gbc = g(b, c);
      return MapField(chart, hk, [swapped, gbc, cm, hk](const Point& x) {
        return inverse_matrix(hk, cm.alpha_map()(gbc.sample(x), swapped.sample(x)));
      });
    }
    throw missing("triple", {a, b, c});
  }

  bool has_patch(int i) const { return A_.at(i).has_value(); }

 private:
  void check_index(int i) const {
    if (i < 0 || i >= size()) throw Error("patch index " + std::to_string(i) + " out of range");
  }

  void require_normalized(const char* what, const std::vector<int>& idx) const {
    if (!normalized())
      throw Error(std::string(what) + format_indices(idx) +
                  ": cocycles with non-trivial ψ need explicit data for every index order");
  }

  static std::string format_indices(const std::vector<int>& idx) {
    std::string s = "_{";
    for (std::size_t k = 0; k < idx.size(); ++k) s += (k ? "," : "") + std::to_string(idx[k]);
    return s + "}";
  }

  Error missing(const char* kind, const std::vector<int>& idx) const {
    std::vector<int> sorted = idx;
    std::sort(sorted.begin(), sorted.end());
    if (!cover_.overlaps(sorted))
      return Error(std::string("no ") + kind + " data: intersection" + format_indices(idx) + " is empty");
    return Error(std::string("missing ") + kind + " data" + format_indices(idx));
  }

  CrossedModule cm_;
  BoxCover cover_;
  std::vector<std::optional<Form>> A_;
  std::vector<std::optional<Form>> B_;
  std::map<int, MapField> psi_;
  std::map<std::pair<int, int>, MapField> g_;
  std::map<std::pair<int, int>, Form> phi_;
  std::map<std::tuple<int, int, int>, MapField> f_;
};

// ---------------------------------------------------------------------------
// Curvature

/// [A∧A] in the normalization of the cocycle conditions: component [A_x, A_y].
inline Form half_bracket(const Form& a) { return 0.5 * bracket_wedge(a, a); }

/// t_*(B_i) − dA_i − [A_i∧A_i]
inline Form fake_curvature(const DifferentialCocycle& c, int i, double fd_step = kDefaultFdStep) {
  const Form& a = c.A(i);
  return t_star(c.B(i), c.cm()) - exterior_derivative(a, fd_step) - half_bracket(a);
}

/// H_i = dB_i + α_*(A_i ∧ B_i)
inline Form curvature_3form(const DifferentialCocycle& c, int i, double fd_step = kDefaultFdStep) {
  if (c.cover().base().dim() < 3) throw Error("curvature_3form: base has dimension < 3");
  return exterior_derivative(c.B(i), fd_step) + action_wedge(c.A(i), c.B(i), c.cm());
}

// ---------------------------------------------------------------------------
// Reports

struct ClauseResult {
  std::string name;
  double residual = 0;
  double tol = 0;
  bool vacuous = false;
  bool pass = true;
  bool sampled = false;
  std::string location;
};

struct ValidationReport {
  std::vector<ClauseResult> clauses;

  bool pass() const {
    return std::all_of(clauses.begin(), clauses.end(), [](const ClauseResult& c) { return c.pass; });
  }

  const ClauseResult& clause(const std::string& name) const {
    for (const auto& c : clauses)
      if (c.name == name) return c;
    throw Error("no clause named '" + name + "'");
  }

  std::optional<std::string> first_failure() const {
    for (const auto& c : clauses)
      if (!c.pass) return c.name;
    return std::nullopt;
  }

  std::vector<std::string> non_vacuous() const {
    std::vector<std::string> out;
    for (const auto& c : clauses)
      if (!c.vacuous) out.push_back(c.name);
    return out;
  }
};

struct ValidationOptions {
  int grid = 8;
  double fd_step = kDefaultFdStep;
  double tol = 1e-4;
  double exact_tol = 1e-9;
};

namespace detail {

class ClauseAccumulator {
 public:
  ClauseAccumulator(std::string name, double tol, bool vacuous) {
    r_.name = std::move(name);
    r_.tol = tol;
    r_.vacuous = vacuous;
  }

  void add(double residual, const std::string& where, const Point& p) {
    if (!std::isfinite(residual)) residual = std::numeric_limits<double>::infinity();
    if (!r_.sampled || residual > r_.residual) {
      r_.residual = residual;
      r_.location = where + " at " + BoxCover::format_point(p);
    }
    r_.sampled = true;
  }

  ClauseResult finish() {
    r_.pass = r_.residual < r_.tol;
    return r_;
  }

 private:
  ClauseResult r_;
};

inline double coeff_gap(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
  double m = 0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, distance(a[k], b[k]));
  return m;
}

inline std::string idx_label(std::initializer_list<int> idx) {
  std::string s = "(";
  bool first = true;
  for (int i : idx) {
    s += (first ? "" : ",") + std::to_string(i);
    first = false;
  }
  return s + ")";
}

inline std::vector<std::vector<int>> ordered_distinct(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void()> rec = [&] {
    if (static_cast<int>(cur.size()) == k) {
      out.push_back(cur);
      return;
    }
    for (int i = 0; i < n; ++i) {
      if (std::find(cur.begin(), cur.end(), i) != cur.end()) continue;
      cur.push_back(i);
      rec();
      cur.pop_back();
    }
  };
  rec();
  return out;
}

struct TypeFlags {
  bool g_trivial;  // G is the trivial group
  bool g_zero;     // 𝔤 = 0
  bool h_trivial;
  bool h_zero;
};

inline TypeFlags type_flags(const CrossedModule& cm) {
  return {cm.g_kind() == GroupKind::Trivial, cm.G().is_discrete(), cm.h_kind() == GroupKind::Trivial,
          cm.H().is_discrete()};
}

}  // namespace detail

inline ValidationReport validate_cocycle(const DifferentialCocycle& c, const ValidationOptions& opt = {}) {
  if (opt.grid < 4) throw Error("validate_cocycle: grid must be at least 4");
  const CrossedModule& cm = c.cm();
  const BoxCover& cover = c.cover();
  const int n = c.size();
  const double fd = opt.fd_step;
  const auto flags = detail::type_flags(cm);
  using detail::ClauseAccumulator;
  using detail::idx_label;

  for (int i = 0; i < n; ++i)
    if (!c.has_patch(i)) throw Error("patch " + std::to_string(i) + " has no connection data");

  ClauseAccumulator fake("fake_flatness", opt.tol, flags.g_zero);
  ClauseAccumulator gii("g_ii", opt.exact_tol, flags.g_trivial);
  ClauseAccumulator phii("phi_ii", opt.tol, flags.h_zero);
  ClauseAccumulator ovA("overlap_A", opt.tol, flags.g_zero);
  ClauseAccumulator ovB("overlap_B", opt.tol, flags.h_zero);
  ClauseAccumulator norm("overlap_normalization", opt.exact_tol, flags.h_trivial);
  ClauseAccumulator trg("triple_g", opt.exact_tol, flags.g_trivial);
  ClauseAccumulator trphi("triple_phi", opt.tol, flags.h_zero);
  ClauseAccumulator four("fourfold_f", opt.exact_tol, flags.h_trivial);

  // patches
  for (int i = 0; i < n; ++i) {
    const Form fc = fake_curvature(c, i, fd);
    const MapField p = c.psi(i);
    const MapField g = c.g(i, i);
    const Form phi = c.phi(i, i);
    const Form mc = maurer_cartan(p, fd);
    const Form& a = c.A(i);
    const std::string where = "patch " + std::to_string(i);
    for (const Point& x : sample_points({cover.patch(i)}, opt.grid)) {
      double m = 0;
      for (const Matrix& k : fc.coefficients(x)) m = std::max(m, k.norm());
      fake.add(m, where, x);

      const GroupElement pv = p(x);
      gii.add(distance(g(x), cm.apply_t(pv)), where, x);

      const auto ac = a.coefficients(x);
      auto expected = mc.coefficients(x);
      for (std::size_t k = 0; k < expected.size(); ++k)
        expected[k] = -expected[k] - cm.alpha_h_star_matrix(pv.value, ac[k]);
      phii.add(detail::coeff_gap(phi.coefficients(x), expected), where, x);
    }
  }

  // two-fold
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!cover.overlaps({i, j})) continue;
      const auto pts = sample_points(cover.overlap({i, j}), opt.grid);
      const std::string where = "overlap " + idx_label({i, j});
      const MapField fijj = c.f(i, j, j), fiij = c.f(i, i, j), pi = c.psi(i), pj = c.psi(j);
      const MapField gij = c.g(i, j);
      for (const Point& x : pts) {
        const Matrix e = cm.H().identity().value;
        const double r1 = distance(fijj(x).value * pj(x).value, e);
        const double r2 = distance(fiij(x).value * cm.apply_alpha(gij(x), pi(x)).value, e);
        norm.add(std::max(r1, r2), where, x);
      }
      if (i == j) continue;

      const Form phi = c.phi(i, j);
      const Form mc = maurer_cartan(gij, fd);
      const Form& ai = c.A(i);
      const Form& aj = c.A(j);
      const Form rhsB = pushforward_pointwise(
                            c.B(i), [gij, cm](const Point& x, const Matrix& m) { return cm.alpha_g_star_matrix(gij.sample(x), m); },
                            cm.h_kind()) -
                        action_wedge(aj, phi, cm) - exterior_derivative(phi, fd) - half_bracket(phi);
      const Form& bj = c.B(j);
      for (const Point& x : pts) {
        const GroupElement gv = gij(x);
        const Matrix ginv = inverse_matrix(cm.g_kind(), gv.value);
        const auto aic = ai.coefficients(x);
        const auto mcc = mc.coefficients(x);
        const auto phic = phi.coefficients(x);
        std::vector<Matrix> rhsA(aic.size());
        for (std::size_t k = 0; k < aic.size(); ++k)
          rhsA[k] = gv.value * aic[k] * ginv - mcc[k] - cm.t_star_matrix(phic[k]);
        ovA.add(detail::coeff_gap(aj.coefficients(x), rhsA), where, x);
        ovB.add(detail::coeff_gap(bj.coefficients(x), rhsB.coefficients(x)), where, x);
      }
    }
  }

  // three-fold
  for (const auto& t : detail::ordered_distinct(n, 3)) {
    const int i = t[0], j = t[1], k = t[2];
    if (!cover.overlaps({i, j, k})) continue;
    const std::string where = "triple " + idx_label({i, j, k});
    const MapField f = c.f(i, j, k), gik = c.g(i, k), gjk = c.g(j, k), gij = c.g(i, j);
    const Form phik = c.phi(i, k), phij = c.phi(i, j), phjk = c.phi(j, k);
    const MapField finvf(f.chart(), cm.h_kind(), [f, hk = cm.h_kind()](const Point& x) {
      return inverse_matrix(hk, f.sample(x));
    });
    const Form mcf = maurer_cartan(finvf, fd);
    const Form& ak = c.A(k);
    for (const Point& x : sample_points(cover.overlap({i, j, k}), opt.grid)) {
      const GroupElement fv = f(x);
      const GroupElement gjkv = gjk(x);
      trg.add(distance(gik(x), multiply(multiply(cm.apply_t(fv), gjkv), gij(x))), where, x);

      const Matrix finv = inverse_matrix(cm.h_kind(), fv.value);
      const auto a = phik.coefficients(x), b = phij.coefficients(x), d = phjk.coefficients(x);
      const auto akc = ak.coefficients(x), mc = mcf.coefficients(x);
      std::vector<Matrix> lhs(a.size()), rhs(a.size());
      for (std::size_t q = 0; q < a.size(); ++q) {
        lhs[q] = finv * a[q] * fv.value;
        rhs[q] = cm.alpha_g_star_matrix(gjkv.value, b[q]) + d[q] + cm.alpha_h_star_matrix(finv, akc[q]) + mc[q];
      }
      trphi.add(detail::coeff_gap(lhs, rhs), where, x);
    }
  }

  // four-fold
  for (const auto& t : detail::ordered_distinct(n, 4)) {
    const int i = t[0], j = t[1], k = t[2], l = t[3];
    if (!cover.overlaps({i, j, k, l})) continue;
    const std::string where = "quadruple " + idx_label({i, j, k, l});
    const MapField fikl = c.f(i, k, l), fijk = c.f(i, j, k), fijl = c.f(i, j, l), fjkl = c.f(j, k, l);
    const MapField gkl = c.g(k, l);
    for (const Point& x : sample_points(cover.overlap({i, j, k, l}), opt.grid)) {
      const GroupElement lhs = multiply(fikl(x), cm.apply_alpha(gkl(x), fijk(x)));
      four.add(distance(lhs, multiply(fijl(x), fjkl(x))), where, x);
    }
  }

  ValidationReport r;
  for (ClauseAccumulator* a : {&fake, &gii, &phii, &ovA, &ovB, &norm, &trg, &trphi, &four})
    r.clauses.push_back(a->finish());
  return r;
}

// ---------------------------------------------------------------------------
// Morphisms

struct CocycleMorphism {
  std::shared_ptr<const DifferentialCocycle> source;
  std::shared_ptr<const DifferentialCocycle> target;
  std::vector<MapField> h;                          // G-valued, per patch
  std::vector<Form> phi;                            // 𝔥-valued 1-forms, per patch
  std::map<std::pair<int, int>, MapField> epsilon;  // H-valued; missing entries are 1

  MapField eps(int i, int j) const {
    if (const auto it = epsilon.find({i, j}); it != epsilon.end()) return it->second;
    return MapField::identity(source->cover().patch(i), source->cm().h_kind());
  }
};

/// Target cocycle determined by the source and the data (h_i, φ_i, ε_ij).
/// Only patch data, sorted overlaps and sorted triples are transformed; the
/// remaining index orders follow from the target's completion rules.
inline DifferentialCocycle apply_morphism(const CocycleMorphism& m, double fd_step = kDefaultFdStep) {
  const DifferentialCocycle& s = *m.source;
  const CrossedModule cm = s.cm();
  const int n = s.size();
  if (static_cast<int>(m.h.size()) != n || static_cast<int>(m.phi.size()) != n)
    throw Error("apply_morphism: need h_i and φ_i for every patch");
  for (int i = 0; i < n; ++i) {
    if (m.h[i].group_kind() != cm.g_kind()) throw Error("apply_morphism: h_i must be G-valued");
    if (m.phi[i].degree() != 1 || m.phi[i].algebra() != cm.h_kind())
      throw Error("apply_morphism: φ_i must be an 𝔥-valued 1-form");
  }
  for (const auto& [key, e] : m.epsilon)
    if (e.group_kind() != cm.h_kind()) throw Error("apply_morphism: ε must be H-valued");

  DifferentialCocycle t(cm, s.cover());
  std::vector<Form> a_new;
  for (int i = 0; i < n; ++i) {
    const MapField h = m.h[i];
    const Form& a = s.A(i);
    const Form& phi = m.phi[i];
    const Form mc = maurer_cartan(h, fd_step);
    // A'_i = Ad_{h_i}(A_i) − t_*(φ_i) − h_i*θ̄
    const GroupKind gk = cm.g_kind();
    const Form ad = pushforward_pointwise(
        a, [h, gk](const Point& x, const Matrix& v) { const Matrix hv = h.sample(x); return Matrix(hv * v * inverse_matrix(gk, hv)); },
        gk);
    const Form a2 = ad - t_star(phi, cm) - mc;
    // B'_i = (α_{h_i})_*(B_i) − α_*(A'_i ∧ φ_i) − dφ_i − [φ_i∧φ_i]
    const Form b2 = pushforward_pointwise(
                        s.B(i), [h, cm](const Point& x, const Matrix& v) { return cm.alpha_g_star_matrix(h.sample(x), v); },
                        cm.h_kind()) -
                    action_wedge(a2, phi, cm) - exterior_derivative(phi, fd_step) - half_bracket(phi);
    t.set_patch(i, a2, b2);
    a_new.push_back(a2);
  }
  const bool explicit_eii = std::any_of(m.epsilon.begin(), m.epsilon.end(),
                                        [](const auto& kv) { return kv.first.first == kv.first.second; });
  if (!s.normalized() || explicit_eii) {
    for (int i = 0; i < n; ++i) {
      // ψ'_i = ε_ii α(h_i, ψ_i)
      const MapField e = m.eps(i, i), h = m.h[i], p = s.psi(i);
      t.set_psi(i, MapField(s.cover().patch(i), cm.h_kind(), [e, h, p, cm](const Point& x) {
                  return Matrix(e.sample(x) * cm.alpha_map()(h.sample(x), p.sample(x)));
                }));
    }
  }
  const GroupKind gk = cm.g_kind(), hk = cm.h_kind();
  auto g_new = [&](int i, int j) {
    // g'_ij = t(ε_ij) h_j g_ij h_i⁻¹
    const MapField e = m.eps(i, j), hi = m.h[i], hj = m.h[j], g = s.g(i, j);
    return MapField(g.chart(), gk, [=](const Point& x) {
      return Matrix(cm.t_map()(e.sample(x)) * hj.sample(x) * g.sample(x) * inverse_matrix(gk, hi.sample(x)));
    });
  };
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      if (i == j && s.normalized()) continue;
      if (i != j && !s.cover().overlaps({i, j})) continue;
      const MapField g2 = g_new(i, j);
      const MapField e = m.eps(i, j), hj = m.h[j];
      const Form phi = s.phi(i, j), phi_i = m.phi[i], phi_j = m.phi[j], aj = a_new[j];
      const Form mce = maurer_cartan(e, fd_step);
      // φ'_ij = Ad_ε((α_{h_j})_*φ_ij + φ_j) − (α_{g'_ij})_*φ_i − (r⁻¹_ε∘α_ε)_*(A'_j) − ε*θ̄
      const Form phi2(1, phi.chart(), hk, [=](const Point& x) {
        const Matrix ev = e.sample(x), einv = inverse_matrix(hk, ev), hjv = hj.sample(x), gv = g2.sample(x);
        const auto p = phi.sample(x), pi = phi_i.sample(x), pj = phi_j.sample(x), a = aj.sample(x), mc = mce.sample(x);
        std::vector<Matrix> out(p.size());
        for (std::size_t k = 0; k < p.size(); ++k)
          out[k] = ev * (cm.alpha_g_star_matrix(hjv, p[k]) + pj[k]) * einv - cm.alpha_g_star_matrix(gv, pi[k]) -
                   cm.alpha_h_star_matrix(ev, a[k]) - mc[k];
        return out;
      });
      t.set_overlap(i, j, g2, phi2);
    }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        if (!s.cover().overlaps({i, j, k})) continue;
        // f'_ijk = ε_ik α(h_k, f_ijk) ε_jk⁻¹ α(g'_jk, ε_ij⁻¹)
        const MapField eik = m.eps(i, k), eij = m.eps(i, j), ejk = m.eps(j, k), hk_ = m.h[k], f = s.f(i, j, k);
        const MapField gjk = g_new(j, k);
        t.set_triple(i, j, k, MapField(f.chart(), hk, [=](const Point& x) {
                       return Matrix(eik.sample(x) * cm.alpha_map()(hk_.sample(x), f.sample(x)) *
                                     inverse_matrix(hk, ejk.sample(x)) *
                                     cm.alpha_map()(gjk.sample(x), inverse_matrix(hk, eij.sample(x))));
                     }));
      }
  return t;
}

inline CocycleMorphism make_morphism(std::shared_ptr<const DifferentialCocycle> source, std::vector<MapField> h,
                                     std::vector<Form> phi, std::map<std::pair<int, int>, MapField> epsilon = {},
                                     double fd_step = kDefaultFdStep) {
  CocycleMorphism m{std::move(source), nullptr, std::move(h), std::move(phi), std::move(epsilon)};
  m.target = std::make_shared<DifferentialCocycle>(apply_morphism(m, fd_step));
  return m;
}

inline CocycleMorphism identity_morphism(std::shared_ptr<const DifferentialCocycle> c) {
  std::vector<MapField> h;
  std::vector<Form> phi;
  for (int i = 0; i < c->size(); ++i) {
    h.push_back(MapField::identity(c->cover().patch(i), c->cm().g_kind()));
    phi.push_back(Form::zero(1, c->cover().patch(i), c->cm().h_kind()));
  }
  return make_morphism(std::move(c), std::move(h), std::move(phi));
}

/// Checks the 1-morphism conditions between m.source and m.target.
inline ValidationReport validate_morphism(const CocycleMorphism& m, const ValidationOptions& opt = {}) {
  if (!m.source || !m.target) throw Error("validate_morphism: source and target required");
  const DifferentialCocycle& s = *m.source;
  const DifferentialCocycle& t = *m.target;
  const CrossedModule& cm = s.cm();
  const BoxCover& cover = s.cover();
  const int n = s.size();
  const double fd = opt.fd_step;
  const auto flags = detail::type_flags(cm);
  using detail::ClauseAccumulator;
  using detail::idx_label;

  ClauseAccumulator cA("morphism_A", opt.tol, flags.g_zero);
  ClauseAccumulator cB("morphism_B", opt.tol, flags.h_zero);
  ClauseAccumulator cpsi("morphism_psi", opt.exact_tol, flags.h_trivial);
  ClauseAccumulator cg("morphism_g", opt.exact_tol, flags.g_trivial);
  ClauseAccumulator cphi("morphism_phi", opt.tol, flags.h_zero);
  ClauseAccumulator cf("morphism_f", opt.exact_tol, flags.h_trivial);
  const GroupKind gk = cm.g_kind(), hk = cm.h_kind();

  for (int i = 0; i < n; ++i) {
    const MapField h = m.h[i];
    const Form& phi = m.phi[i];
    const Form mch = maurer_cartan(h, fd);
    const Form& a2 = t.A(i);
    const Form rhsB = pushforward_pointwise(
                          s.B(i), [h, cm](const Point& x, const Matrix& v) { return cm.alpha_g_star_matrix(h.sample(x), v); },
                          hk) -
                      action_wedge(a2, phi, cm) - exterior_derivative(phi, fd) - half_bracket(phi);
    const MapField e = m.eps(i, i), p = s.psi(i), p2 = t.psi(i);
    const std::string where = "patch " + std::to_string(i);
    for (const Point& x : sample_points({cover.patch(i)}, opt.grid)) {
      const GroupElement hv = h(x);
      const Matrix hinv = inverse_matrix(gk, hv.value);
      const auto ac = s.A(i).coefficients(x), pc = phi.coefficients(x), mc = mch.coefficients(x);
      std::vector<Matrix> rhsA(ac.size());
      for (std::size_t k = 0; k < ac.size(); ++k) rhsA[k] = hv.value * ac[k] * hinv - cm.t_star_matrix(pc[k]) - mc[k];
      cA.add(detail::coeff_gap(a2.coefficients(x), rhsA), where, x);
      cB.add(detail::coeff_gap(t.B(i).coefficients(x), rhsB.coefficients(x)), where, x);
      cpsi.add(distance(p2(x), multiply(e(x), cm.apply_alpha(hv, p(x)))), where, x);
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (!cover.overlaps({i, j})) continue;
      const std::string where = "overlap " + idx_label({i, j});
      const MapField e = m.eps(i, j), hi = m.h[i], hj = m.h[j], g = s.g(i, j), g2 = t.g(i, j);
      const Form phi = s.phi(i, j), phi2 = t.phi(i, j), phi_i = m.phi[i], phi_j = m.phi[j];
      const Form& aj2 = t.A(j);
      const Form mce = maurer_cartan(e, fd);
      for (const Point& x : sample_points(cover.overlap({i, j}), opt.grid)) {
        const GroupElement ev = e(x), g2v = g2(x);
        const GroupElement expect_g =
            multiply(multiply(multiply(cm.apply_t(ev), hj(x)), g(x)), inverse(hi(x)));
        cg.add(distance(g2v, expect_g), where, x);

        const Matrix einv = inverse_matrix(hk, ev.value);
        const Matrix hjv = hj(x).value;
        const auto p = phi.coefficients(x), pi = phi_i.coefficients(x), pj = phi_j.coefficients(x);
        const auto a = aj2.coefficients(x), mc = mce.coefficients(x);
        std::vector<Matrix> rhs(p.size());
        for (std::size_t k = 0; k < p.size(); ++k)
          rhs[k] = ev.value * (cm.alpha_g_star_matrix(hjv, p[k]) + pj[k]) * einv -
                   cm.alpha_g_star_matrix(g2v.value, pi[k]) - cm.alpha_h_star_matrix(ev.value, a[k]) - mc[k];
        cphi.add(detail::coeff_gap(phi2.coefficients(x), rhs), where, x);
      }
    }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        if (!cover.overlaps({i, j, k})) continue;
        const std::string where = "triple " + idx_label({i, j, k});
        const MapField eik = m.eps(i, k), eij = m.eps(i, j), ejk = m.eps(j, k), hkf = m.h[k], f = s.f(i, j, k),
                       f2 = t.f(i, j, k), gjk2 = t.g(j, k);
        for (const Point& x : sample_points(cover.overlap({i, j, k}), opt.grid)) {
          const GroupElement expect = multiply(
              multiply(multiply(eik(x), cm.apply_alpha(hkf(x), f(x))), inverse(ejk(x))),
              cm.apply_alpha(gjk2(x), inverse(eij(x))));
          cf.add(distance(f2(x), expect), where, x);
        }
      }
  ValidationReport r;
  for (ClauseAccumulator* a : {&cA, &cB, &cpsi, &cg, &cphi, &cf}) r.clauses.push_back(a->finish());
  return r;
}

struct CocycleTwoMorphism {
  std::shared_ptr<const CocycleMorphism> source;
  std::shared_ptr<const CocycleMorphism> target;
  std::vector<MapField> E;  // H-valued, per patch
};

/// Checks h'_i = t(E_i)h_i, the φ relation and ε'_ij = α(g'_ij, E_i) ε_ij E_j⁻¹.
inline ValidationReport validate_two_morphism(const CocycleTwoMorphism& m2, const ValidationOptions& opt = {}) {
  if (!m2.source || !m2.target) throw Error("validate_two_morphism: source and target required");
  const CocycleMorphism& a = *m2.source;
  const CocycleMorphism& b = *m2.target;
  const DifferentialCocycle& tgt = *a.target;
  const CrossedModule& cm = tgt.cm();
  const BoxCover& cover = tgt.cover();
  const int n = tgt.size();
  if (static_cast<int>(m2.E.size()) != n) throw Error("validate_two_morphism: need E_i for every patch");
  const auto flags = detail::type_flags(cm);
  using detail::ClauseAccumulator;
  using detail::idx_label;
  ClauseAccumulator ch("two_morphism_h", opt.exact_tol, flags.g_trivial);
  ClauseAccumulator cphi("two_morphism_phi", opt.tol, flags.h_zero);
  ClauseAccumulator ce("two_morphism_eps", opt.exact_tol, flags.h_trivial);
  const GroupKind hk = cm.h_kind();

  for (int i = 0; i < n; ++i) {
    const MapField E = m2.E[i];
    const Form mcE = maurer_cartan(E, opt.fd_step);
    const std::string where = "patch " + std::to_string(i);
    for (const Point& x : sample_points({cover.patch(i)}, opt.grid)) {
      const GroupElement Ev = E(x);
      ch.add(distance(b.h[i](x), multiply(cm.apply_t(Ev), a.h[i](x))), where, x);
      const Matrix Einv = inverse_matrix(hk, Ev.value);
      const auto p = a.phi[i].coefficients(x), ac = tgt.A(i).coefficients(x), mc = mcE.coefficients(x);
      std::vector<Matrix> rhs(p.size());
      for (std::size_t k = 0; k < p.size(); ++k)
        rhs[k] = Ev.value * p[k] * Einv - cm.alpha_h_star_matrix(Ev.value, ac[k]) - mc[k];
      cphi.add(detail::coeff_gap(b.phi[i].coefficients(x), rhs), where, x);
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (!cover.overlaps({i, j})) continue;
      const std::string where = "overlap " + idx_label({i, j});
      const MapField g2 = tgt.g(i, j), ea = a.eps(i, j), eb = b.eps(i, j);
      for (const Point& x : sample_points(cover.overlap({i, j}), opt.grid)) {
        const GroupElement expect =
            multiply(multiply(cm.apply_alpha(g2(x), m2.E[i](x)), ea(x)), inverse(m2.E[j](x)));
        ce.add(distance(eb(x), expect), where, x);
      }
    }
  ValidationReport r;
  for (ClauseAccumulator* c : {&ch, &cphi, &ce}) r.clauses.push_back(c->finish());
  return r;
}

}  // namespace two_transport

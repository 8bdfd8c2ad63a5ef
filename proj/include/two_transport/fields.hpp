#pragma once

// Lie-algebra valued differential forms and group valued maps on box charts.
// Forms are evaluators, never grids; derivatives are central differences.

#include "two_transport/lie_core.hpp"

#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace two_transport {

using Point = Eigen::VectorXd;

inline constexpr double kDefaultFdStep = 1e-4;

/// Axis-aligned box, optionally sitting inside a periodic ambient space.
/// An axis with period > 0 identifies coordinates modulo that period; the box
/// itself is periodic along the axis when it spans a full period.
struct BoxChart {
  Point lower;
  Point upper;
  std::vector<double> period;

  static BoxChart make(Point lower, Point upper, std::vector<bool> periodic = {}) {
    const auto n = lower.size();
    if (upper.size() != n) throw Error("BoxChart: corner dimensions differ");
    BoxChart c{std::move(lower), std::move(upper), std::vector<double>(n, 0.0)};
    for (Eigen::Index a = 0; a < n; ++a) {
      if (!(c.lower[a] < c.upper[a])) throw Error("BoxChart: lower must be < upper on every axis");
      if (a < static_cast<Eigen::Index>(periodic.size()) && periodic[a])
        c.period[a] = c.upper[a] - c.lower[a];
    }
    return c;
  }

  static BoxChart unit(int dim, bool periodic = false) {
    return make(Point::Zero(dim), Point::Ones(dim), std::vector<bool>(dim, periodic));
  }

  /// Sub-box sharing this chart's ambient periods.
  BoxChart sub_box(Point lo, Point hi) const {
    BoxChart c{std::move(lo), std::move(hi), period};
    for (Eigen::Index a = 0; a < c.lower.size(); ++a)
      if (!(c.lower[a] < c.upper[a])) throw Error("BoxChart: lower must be < upper on every axis");
    return c;
  }

  int dim() const { return static_cast<int>(lower.size()); }

  bool periodic(int axis) const {
    return period[axis] > 0 && upper[axis] - lower[axis] >= period[axis] - 1e-12;
  }

  /// Shifts periodic coordinates into [lower - slack, lower - slack + period).
  Point wrap(Point p) const {
    for (int a = 0; a < dim(); ++a) {
      if (period[a] <= 0) continue;
      const double slack = 1e-9 * period[a];
      double r = std::fmod(p[a] - lower[a] + slack, period[a]);
      if (r < 0) r += period[a];
      p[a] = lower[a] + r - slack;
    }
    return p;
  }

  bool contains(const Point& p, double tol = 1e-9) const {
    if (p.size() != lower.size()) return false;
    const Point q = wrap(p);
    for (int a = 0; a < dim(); ++a) {
      if (periodic(a)) continue;
      if (q[a] < lower[a] - tol || q[a] > upper[a] + tol) return false;
    }
    return true;
  }

  /// Containment of the box shrunk by `margin` on non-periodic sides.
  bool contains_strictly(const Point& p, double margin) const {
    const Point q = wrap(p);
    for (int a = 0; a < dim(); ++a) {
      if (periodic(a)) continue;
      if (q[a] < lower[a] + margin || q[a] > upper[a] - margin) return false;
    }
    return true;
  }
};

/// Increasing index tuples of length p from {0..n-1}, lexicographic.
inline std::vector<std::vector<int>> index_tuples(int n, int p) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(cur.size()) == p) {
      out.push_back(cur);
      return;
    }
    for (int i = start; i < n; ++i) {
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

inline int tuple_position(int n, const std::vector<int>& tuple) {
  const auto all = index_tuples(n, static_cast<int>(tuple.size()));
  for (std::size_t k = 0; k < all.size(); ++k)
    if (all[k] == tuple) return static_cast<int>(k);
  throw Error("index tuple out of range");
}

inline Matrix zero_like(GroupKind algebra) {
  const int d = group(algebra).dim();
  return Matrix::Zero(d, d);
}

class Form {
 public:
  /// Receives an already wrapped point, returns one coefficient per index tuple.
  using Evaluator = std::function<std::vector<Matrix>(const Point&)>;

  Form(int degree, BoxChart chart, GroupKind algebra, Evaluator eval)
      : degree_(degree),
        chart_(std::make_shared<BoxChart>(std::move(chart))),
        algebra_(algebra),
        eval_(std::make_shared<Evaluator>(std::move(eval))) {
    if (degree_ < 0 || degree_ > chart_->dim()) throw Error("Form: degree exceeds chart dimension");
    tuples_ = std::make_shared<std::vector<std::vector<int>>>(index_tuples(chart_->dim(), degree_));
  }

  static Form zero(int degree, const BoxChart& chart, GroupKind algebra) {
    const int count = static_cast<int>(index_tuples(chart.dim(), degree).size());
    return Form(degree, chart, algebra, [algebra, count](const Point&) {
      return std::vector<Matrix>(count, zero_like(algebra));
    });
  }

  static Form constant(int degree, const BoxChart& chart, GroupKind algebra,
                       std::vector<Matrix> coefficients) {
    if (coefficients.size() != index_tuples(chart.dim(), degree).size())
      throw Error("Form::constant: wrong coefficient count");
    return Form(degree, chart, algebra, [c = std::move(coefficients)](const Point&) { return c; });
  }

  int degree() const { return degree_; }
  const BoxChart& chart() const { return *chart_; }
  GroupKind algebra() const { return algebra_; }
  const std::vector<std::vector<int>>& tuples() const { return *tuples_; }
  int num_components() const { return static_cast<int>(tuples_->size()); }

  /// Domain-checked evaluation.
  std::vector<Matrix> coefficients(const Point& p) const {
    if (!chart_->contains(p)) throw Error("form evaluation outside chart");
    return sample(p);
  }

  /// Evaluation without a domain check (finite-difference offsets).
  std::vector<Matrix> sample(const Point& p) const {
    auto c = (*eval_)(chart_->wrap(p));
    if (static_cast<int>(c.size()) != num_components())
      throw Error("form evaluator returned wrong number of coefficients");
    return c;
  }

  /// ω_p(v_1, ..., v_p).
  Matrix evaluate(const Point& p, std::span<const Point> vectors) const {
    if (static_cast<int>(vectors.size()) != degree_) throw Error("Form::evaluate: wrong vector count");
    return contract(coefficients(p), vectors);
  }

  Matrix contract(const std::vector<Matrix>& coeff, std::span<const Point> vectors) const {
    Matrix out = zero_like(algebra_);
    for (int k = 0; k < num_components(); ++k) {
      const auto& t = (*tuples_)[k];
      Eigen::MatrixXd minor(degree_, degree_);
      for (int r = 0; r < degree_; ++r)
        for (int c = 0; c < degree_; ++c) minor(r, c) = vectors[c][t[r]];
      const double det = degree_ == 0 ? 1.0 : minor.determinant();
      if (det != 0.0) out += det * coeff[k];
    }
    return out;
  }

  Form with_evaluator(Evaluator eval) const { return Form(degree_, *chart_, algebra_, std::move(eval)); }

 private:
  int degree_;
  std::shared_ptr<const BoxChart> chart_;
  GroupKind algebra_;
  std::shared_ptr<const Evaluator> eval_;
  std::shared_ptr<const std::vector<std::vector<int>>> tuples_;
};

/// Group-valued map on a chart (transition functions, gauge maps, ψ, f).
class MapField {
 public:
  using Evaluator = std::function<Matrix(const Point&)>;

  MapField(BoxChart chart, GroupKind group_kind, Evaluator eval)
      : chart_(std::make_shared<BoxChart>(std::move(chart))),
        group_(group_kind),
        eval_(std::make_shared<Evaluator>(std::move(eval))) {}

  static MapField identity(const BoxChart& chart, GroupKind g) {
    const Matrix id = group(g).identity().value;
    return MapField(chart, g, [id](const Point&) { return id; });
  }

  static MapField constant(const BoxChart& chart, const GroupElement& value) {
    return MapField(chart, value.group, [m = value.value](const Point&) { return m; });
  }

  const BoxChart& chart() const { return *chart_; }
  GroupKind group_kind() const { return group_; }

  GroupElement operator()(const Point& p) const {
    if (!chart_->contains(p)) throw Error("map field evaluation outside chart");
    return group(group_).checked(sample(p));
  }

  Matrix sample(const Point& p) const { return (*eval_)(chart_->wrap(p)); }

 private:
  std::shared_ptr<const BoxChart> chart_;
  GroupKind group_;
  std::shared_ptr<const Evaluator> eval_;
};

// ---------------------------------------------------------------------------
// Pointwise algebra

inline Form operator+(const Form& a, const Form& b) {
  if (a.degree() != b.degree() || a.algebra() != b.algebra()) throw Error("form sum: incompatible forms");
  return a.with_evaluator([a, b](const Point& p) {
    auto x = a.sample(p);
    const auto y = b.sample(p);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] += y[k];
    return x;
  });
}

inline Form operator*(double s, const Form& a) {
  return a.with_evaluator([a, s](const Point& p) {
    auto x = a.sample(p);
    for (auto& m : x) m *= s;
    return x;
  });
}

inline Form operator-(const Form& a, const Form& b) { return a + (-1.0) * b; }

/// Applies a linear map coefficientwise (t_*, (α_g)_* with constant g, ...).
inline Form pushforward(const Form& w, const std::function<Matrix(const Matrix&)>& linear_map,
                        GroupKind target_algebra) {
  return Form(w.degree(), w.chart(), target_algebra, [w, linear_map](const Point& p) {
    auto x = w.sample(p);
    for (auto& m : x) m = linear_map(m);
    return x;
  });
}

/// Point-dependent linear map, e.g. (α_{g(x)})_*.
inline Form pushforward_pointwise(const Form& w,
                                  const std::function<Matrix(const Point&, const Matrix&)>& map,
                                  GroupKind target_algebra) {
  return Form(w.degree(), w.chart(), target_algebra, [w, map](const Point& p) {
    auto x = w.sample(p);
    for (auto& m : x) m = map(p, m);
    return x;
  });
}

/// Wedge of a 1-form with a p-form through a bilinear pairing:
/// (P∧Q)(u, v_1..v_p) = Σ over shuffles, signed, of pair(P(u), Q(v...)).
inline Form wedge_pair(const Form& one_form, const Form& q,
                       const std::function<Matrix(const Matrix&, const Matrix&)>& pair,
                       GroupKind target_algebra) {
  if (one_form.degree() != 1) throw Error("wedge_pair: left factor must be a 1-form");
  const int n = q.chart().dim();
  const int p = q.degree();
  if (p + 1 > n) return Form::zero(std::min(p + 1, n), q.chart(), target_algebra);
  const auto out_tuples = index_tuples(n, p + 1);
  std::vector<std::vector<std::pair<int, int>>> terms(out_tuples.size());  // (axis, q-index) with sign in order
  for (std::size_t J = 0; J < out_tuples.size(); ++J) {
    for (int k = 0; k <= p; ++k) {
      std::vector<int> rest;
      for (int r = 0; r <= p; ++r)
        if (r != k) rest.push_back(out_tuples[J][r]);
      terms[J].push_back({out_tuples[J][k], tuple_position(n, rest)});
    }
  }
  return Form(p + 1, q.chart(), target_algebra, [one_form, q, pair, terms, target_algebra](const Point& x) {
    const auto a = one_form.sample(x);
    const auto b = q.sample(x);
    std::vector<Matrix> out(terms.size(), zero_like(target_algebra));
    for (std::size_t J = 0; J < terms.size(); ++J)
      for (std::size_t k = 0; k < terms[J].size(); ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        out[J] += sign * pair(a[terms[J][k].first], b[terms[J][k].second]);
      }
    return out;
  });
}

/// [A∧A'](u,v) = [A(u),A'(v)] − [A(v),A'(u)].
inline Form bracket_wedge(const Form& a, const Form& b) {
  if (a.degree() != 1 || b.degree() != 1) throw Error("bracket_wedge: both arguments must be 1-forms");
  return wedge_pair(a, b, [](const Matrix& x, const Matrix& y) -> Matrix { return x * y - y * x; },
                    a.algebra());
}

/// Central-difference exterior derivative.
inline Form exterior_derivative(const Form& w, double fd_step = kDefaultFdStep) {
  if (!(fd_step > 0)) throw Error("exterior_derivative: fd_step must be positive");
  const int n = w.chart().dim();
  const int p = w.degree();
  if (p + 1 > n) throw Error("exterior_derivative: degree would exceed chart dimension");
  const auto out_tuples = index_tuples(n, p + 1);
  std::vector<std::vector<std::pair<int, int>>> terms(out_tuples.size());
  for (std::size_t J = 0; J < out_tuples.size(); ++J)
    for (int k = 0; k <= p; ++k) {
      std::vector<int> rest;
      for (int r = 0; r <= p; ++r)
        if (r != k) rest.push_back(out_tuples[J][r]);
      terms[J].push_back({out_tuples[J][k], tuple_position(n, rest)});
    }
  const GroupKind alg = w.algebra();
  return Form(p + 1, w.chart(), alg, [w, terms, n, fd_step, alg](const Point& x) {
    std::vector<std::vector<Matrix>> deriv(n);
    for (int a = 0; a < n; ++a) {
      Point xp = x, xm = x;
      xp[a] += fd_step;
      xm[a] -= fd_step;
      auto fp = w.sample(xp);
      const auto fm = w.sample(xm);
      for (std::size_t k = 0; k < fp.size(); ++k) fp[k] = (fp[k] - fm[k]) / (2 * fd_step);
      deriv[a] = std::move(fp);
    }
    std::vector<Matrix> out(terms.size(), zero_like(alg));
    for (std::size_t J = 0; J < terms.size(); ++J)
      for (std::size_t k = 0; k < terms[J].size(); ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        out[J] += sign * deriv[terms[J][k].first][terms[J][k].second];
      }
    return out;
  });
}

/// Pullback along a smooth map from `source` into the form's chart.
inline Form pullback(const Form& w, const BoxChart& source, std::function<Point(const Point&)> map,
                     double fd_step = kDefaultFdStep) {
  const int m = source.dim();
  const int n = w.chart().dim();
  const int p = w.degree();
  if (p > m) throw Error("pullback: degree exceeds source dimension");
  const auto src_tuples = index_tuples(m, p);
  const auto dst_tuples = index_tuples(n, p);
  return Form(p, source, w.algebra(), [=](const Point& q) {
    Eigen::MatrixXd jac(n, m);
    for (int b = 0; b < m; ++b) {
      Point qp = q, qm = q;
      qp[b] += fd_step;
      qm[b] -= fd_step;
      jac.col(b) = (map(qp) - map(qm)) / (2 * fd_step);
    }
    const auto coeff = w.sample(map(q));
    std::vector<Matrix> out(src_tuples.size(), zero_like(w.algebra()));
    for (std::size_t I = 0; I < src_tuples.size(); ++I)
      for (std::size_t J = 0; J < dst_tuples.size(); ++J) {
        Eigen::MatrixXd minor(p, p);
        for (int r = 0; r < p; ++r)
          for (int c = 0; c < p; ++c) minor(r, c) = jac(dst_tuples[J][r], src_tuples[I][c]);
        const double det = p == 0 ? 1.0 : minor.determinant();
        if (det != 0.0) out[I] += det * coeff[J];
      }
    return out;
  });
}

/// Midpoint rule on an N^p grid over a top-degree form's box `domain`.
inline AlgebraElement integrate(const Form& w, const Point& lower, const Point& upper, int subdivisions) {
  const int p = w.degree();
  if (p != w.chart().dim() || lower.size() != p || upper.size() != p)
    throw Error("integrate: form must have top degree on a box of matching dimension");
  if (subdivisions < 1) throw Error("integrate: subdivisions must be positive");
  const Point h = (upper - lower) / subdivisions;
  const double cell = p == 0 ? 1.0 : h.prod();
  Matrix sum = zero_like(w.algebra());
  std::vector<int> idx(p, 0);
  while (true) {
    Point x(p);
    for (int a = 0; a < p; ++a) x[a] = lower[a] + (idx[a] + 0.5) * h[a];
    sum += w.coefficients(x)[0];
    int a = 0;
    while (a < p && ++idx[a] == subdivisions) idx[a++] = 0;
    if (a == p) break;
  }
  return {sum * cell, w.algebra()};
}

inline AlgebraElement integrate(const Form& w, int subdivisions) {
  return integrate(w, w.chart().lower, w.chart().upper, subdivisions);
}

/// Right Maurer–Cartan form g*θ̄ = (∂_μ g) g⁻¹ by central differences.
inline Form maurer_cartan(const MapField& g, double fd_step = kDefaultFdStep) {
  const int n = g.chart().dim();
  const GroupKind kind = g.group_kind();
  return Form(1, g.chart(), kind, [g, n, fd_step, kind](const Point& x) {
    const GroupInstance& grp = group(kind);
    std::vector<Matrix> out;
    out.reserve(n);
    const Matrix inv = inverse_matrix(kind, g.sample(x));
    for (int a = 0; a < n; ++a) {
      if (grp.is_discrete()) {
        out.push_back(zero_like(kind));
        continue;
      }
      Point xp = x, xm = x;
      xp[a] += fd_step;
      xm[a] -= fd_step;
      out.push_back(grp.project_algebra((g.sample(xp) - g.sample(xm)) / (2 * fd_step) * inv));
    }
    return out;
  });
}

}  // namespace two_transport

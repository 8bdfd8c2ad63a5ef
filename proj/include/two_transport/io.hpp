#pragma once

// Text formats for cocycles, paths, bigons and surfaces.
//
// A file is a sequence of sections. A header line `[name arg ...]` opens a
// section; inside it every non-blank line is `key = value`. `#` starts a
// comment. Coefficients use the expression language of expression.hpp, over
// x1..xn for fields, t for paths, s,t for bigons and u,v for surfaces.
//
// Cocycle files
//   [base]            box = l1 u1 l2 u2 ...   periodic = 1 1 ...   (dimension = n, optional)
//   [crossed_module]  name = EG:SU2
//   [patch i]         box = ...   A[a] = ...   B[a,b] = ...   psi = ...
//   [overlap i j]     g = ...   phi[a] = ...
//   [triple i j k]    f = ...
// Form components are keyed by increasing 1-based axis indices and default to
// zero. Group values are written `exp(<algebra expression>)`, or `e` for the
// identity (`1` and `-1` for Z2). Patches are numbered 0..n-1; a single patch
// may omit its box. Overlaps and triples that are not listed but intersect get
// g = e, phi = 0 and f = e.
//
// Path, bigon and surface files
//   [path]     x1 = ...  x2 = ...                      (parameter t)
//   [bigon]    x1 = ...  x2 = ...                      (parameters s, t)
//   [surface]  genus = 1  cells = 64  x1 = ...  x2 = ...   (polygon coordinates u, v)
//              warp = 0.5  loop_change = 0.15  loop_change_direction = 0 1   (optional)
// A surface file may carry a [path] section: the base-point path for checks.

#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "two_transport/cocycle.hpp"
#include "two_transport/expression.hpp"
#include "two_transport/holonomy.hpp"
#include "two_transport/transport.hpp"

namespace two_transport::io {

class FileError : public Error {
 public:
  using Error::Error;
};

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

struct Section {
  std::string name;
  std::vector<std::string> args;
  std::string header;
  int line = 0;
  std::vector<Entry> entries;

  const Entry* find(const std::string& key) const {
    for (const Entry& e : entries)
      if (e.key == key) return &e;
    return nullptr;
  }
};

class Document {
 public:
  static Document parse(const std::string& text, std::string source = "<input>") {
    Document d;
    d.source_ = std::move(source);
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      std::string s = trim(raw.substr(0, raw.find('#')));
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']') d.fail(line, "", "unterminated section header");
        Section sec;
        sec.header = s;
        sec.line = line;
        std::istringstream words(s.substr(1, s.size() - 2));
        if (!(words >> sec.name)) d.fail(line, s, "empty section header");
        for (std::string w; words >> w;) sec.args.push_back(w);
        d.sections_.push_back(std::move(sec));
        continue;
      }
      if (d.sections_.empty()) d.fail(line, "", "entry outside of any section");
      const auto eq = s.find('=');
      if (eq == std::string::npos) d.fail(line, d.sections_.back().header, "expected 'key = value'");
      Entry e{trim(s.substr(0, eq)), trim(s.substr(eq + 1)), line};
      if (e.key.empty()) d.fail(line, d.sections_.back().header, "missing key");
      if (e.value.empty()) d.fail(line, d.sections_.back().header, "missing value for '" + e.key + "'");
      if (d.sections_.back().find(e.key)) d.fail(line, d.sections_.back().header, "duplicate key '" + e.key + "'");
      d.sections_.back().entries.push_back(std::move(e));
    }
    return d;
  }

  static Document load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw FileError(path + ": cannot open file");
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse(buf.str(), path);
  }

  const std::string& source() const { return source_; }
  const std::vector<Section>& sections() const { return sections_; }

  std::vector<const Section*> all(const std::string& name) const {
    std::vector<const Section*> out;
    for (const Section& s : sections_)
      if (s.name == name) out.push_back(&s);
    return out;
  }

  const Section* optional(const std::string& name) const {
    const auto v = all(name);
    if (v.size() > 1) fail(*v[1], "section [" + name + "] appears more than once");
    return v.empty() ? nullptr : v.front();
  }

  const Section& required(const std::string& name) const {
    const Section* s = optional(name);
    if (!s) throw FileError(source_ + ": missing section [" + name + "]");
    return *s;
  }

  [[noreturn]] void fail(int line, const std::string& header, const std::string& what) const {
    std::string msg = source_ + ":" + std::to_string(line);
    if (!header.empty()) msg += " " + header;
    throw FileError(msg + ": " + what);
  }
  [[noreturn]] void fail(const Section& s, const std::string& what) const { fail(s.line, s.header, what); }
  [[noreturn]] void fail(const Section& s, const Entry& e, const std::string& what) const {
    fail(e.line, s.header, what);
  }

  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
  }

 private:
  std::string source_;
  std::vector<Section> sections_;
};

namespace detail {

inline std::vector<std::string> coordinate_names(int n) {
  std::vector<std::string> v;
  for (int i = 1; i <= n; ++i) v.push_back("x" + std::to_string(i));
  return v;
}

inline std::vector<double> numbers(const Document& d, const Section& s, const Entry& e) {
  std::istringstream in(e.value);
  std::vector<double> out;
  std::string w;
  while (in >> w) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(w, &used));
      if (used != w.size()) throw std::invalid_argument(w);
    } catch (const std::exception&) {
      d.fail(s, e, "'" + w + "' is not a number");
    }
  }
  return out;
}

inline double number(const Document& d, const Section& s, const Entry& e) {
  const auto v = numbers(d, s, e);
  if (v.size() != 1) d.fail(s, e, "'" + e.key + "' takes one number");
  return v.front();
}

inline int integer(const Document& d, const Section& s, const Entry& e) {
  const double v = number(d, s, e);
  if (v != std::floor(v) || std::abs(v) > 1e9) d.fail(s, e, "'" + e.key + "' must be an integer");
  return static_cast<int>(v);
}

inline std::vector<int> indices(const Document& d, const Section& s, std::size_t count) {
  if (s.args.size() != count)
    d.fail(s, "[" + s.name + "] takes " + std::to_string(count) + " patch " + (count == 1 ? "index" : "indices"));
  std::vector<int> out;
  for (const std::string& a : s.args) {
    if (a.empty() || a.find_first_not_of("0123456789") != std::string::npos) d.fail(s, "bad patch index '" + a + "'");
    out.push_back(std::stoi(a));
  }
  return out;
}

inline expr::Expression expression(const Document& d, const Section& s, const Entry& e,
                                   const std::vector<std::string>& vars, int basis) {
  try {
    return expr::Expression::parse(e.value, vars, basis);
  } catch (const expr::ParseError& err) {
    d.fail(s, e, "in '" + e.key + "': " + err.what());
  }
}

inline void reject_unknown(const Document& d, const Section& s, const std::set<std::string>& plain,
                           const std::set<std::string>& form_prefixes = {}) {
  for (const Entry& e : s.entries) {
    if (plain.count(e.key)) continue;
    const auto br = e.key.find('[');
    if (br != std::string::npos && form_prefixes.count(e.key.substr(0, br))) continue;
    d.fail(s, e, "unknown key '" + e.key + "'");
  }
}

/// Components `prefix[a,b,...]` of a degree-p form; missing components are zero.
inline Form form(const Document& d, const Section& s, const std::string& prefix, int degree, const BoxChart& chart,
                 GroupKind algebra) {
  const int n = chart.dim();
  const auto tuples = index_tuples(n, degree);
  const GroupInstance& G = group(algebra);
  const std::vector<Matrix> basis = G.basis();
  const int k = static_cast<int>(basis.size());
  std::vector<std::optional<expr::Expression>> comp(tuples.size());
  bool any = false;
  for (const Entry& e : s.entries) {
    if (e.key.rfind(prefix + "[", 0) != 0) continue;
    if (e.key.back() != ']') d.fail(s, e, "malformed component key '" + e.key + "'");
    std::string inner = e.key.substr(prefix.size() + 1, e.key.size() - prefix.size() - 2);
    for (char& c : inner)
      if (c == ',') c = ' ';
    std::istringstream in(inner);
    std::vector<int> tuple;
    for (int a; in >> a;) tuple.push_back(a - 1);
    if (!in.eof() || static_cast<int>(tuple.size()) != degree)
      d.fail(s, e, "'" + e.key + "' needs " + std::to_string(degree) + " axis " + (degree == 1 ? "index" : "indices"));
    for (int a = 0; a < degree; ++a) {
      if (tuple[a] < 0 || tuple[a] >= n) d.fail(s, e, "axis index out of range in '" + e.key + "'");
      if (a > 0 && tuple[a] <= tuple[a - 1]) d.fail(s, e, "axis indices must increase in '" + e.key + "'");
    }
    if (k == 0) d.fail(s, e, "'" + prefix + "' takes values in a zero-dimensional algebra");
    const int pos = tuple_position(n, tuple);
    comp[pos] = expression(d, s, e, coordinate_names(n), k);
    if (!comp[pos]->algebra_valued()) d.fail(s, e, "'" + e.key + "' must be algebra-valued (use E1..E" + std::to_string(k) + ")");
    any = true;
  }
  if (!any) return Form::zero(degree, chart, algebra);
  const Matrix zero = zero_like(algebra);
  return Form(degree, chart, algebra, [comp, basis, zero](const Point& x) {
    std::vector<Matrix> out(comp.size(), zero);
    for (std::size_t i = 0; i < comp.size(); ++i) {
      if (!comp[i]) continue;
      const auto c = comp[i]->coefficients(x.data());
      for (std::size_t b = 0; b < c.size(); ++b) out[i] += c[b] * basis[b];
    }
    return out;
  });
}

/// `exp(<algebra expression>)`, `e`, or ±1 for Z2.
inline MapField group_field(const Document& d, const Section& s, const Entry& e, const BoxChart& chart,
                            GroupKind kind) {
  const GroupInstance& G = group(kind);
  if (e.value == "e") return MapField::identity(chart, kind);
  if (kind == GroupKind::Z2 && (e.value == "1" || e.value == "-1")) {
    const Matrix m = e.value == "1" ? G.identity().value : Matrix(-G.identity().value);
    return MapField(chart, kind, [m](const Point&) { return m; });
  }
  if (G.is_discrete())
    d.fail(s, e, "'" + e.key + "' in " + std::string(group_name(kind)) + " must be e" + (kind == GroupKind::Z2 ? ", 1 or -1" : ""));
  const std::string& v = e.value;
  bool wrapped = v.rfind("exp(", 0) == 0 && v.back() == ')';
  if (wrapped) {
    int depth = 0;
    for (std::size_t i = 3; i + 1 < v.size(); ++i) {
      depth += v[i] == '(' ? 1 : v[i] == ')' ? -1 : 0;
      if (depth == 0) wrapped = false;
    }
  }
  if (!wrapped) d.fail(s, e, "'" + e.key + "' must be e or exp(<algebra expression>)");
  Entry inner = e;
  inner.value = v.substr(4, v.size() - 5);
  const std::vector<Matrix> basis = G.basis();
  const expr::Expression x = expression(d, s, inner, coordinate_names(chart.dim()), static_cast<int>(basis.size()));
  if (!x.algebra_valued()) d.fail(s, e, "the argument of exp in '" + e.key + "' must be algebra-valued");
  return MapField(chart, kind, [x, basis, kind](const Point& p) {
    const auto c = x.coefficients(p.data());
    Matrix m = zero_like(kind);
    for (std::size_t b = 0; b < c.size(); ++b) m += c[b] * basis[b];
    return exp(AlgebraElement{m, kind}).value;
  });
}

inline BoxChart box(const Document& d, const Section& s, const Entry& e, const BoxChart* ambient) {
  const auto v = numbers(d, s, e);
  if (v.size() % 2 != 0 || v.empty() || (ambient && static_cast<int>(v.size()) != 2 * ambient->dim()))
    d.fail(s, e, "box needs a lower and an upper bound per axis");
  const int n = static_cast<int>(v.size() / 2);
  Point lo(n), hi(n);
  for (int a = 0; a < n; ++a) {
    lo[a] = v[2 * a];
    hi[a] = v[2 * a + 1];
    if (!(lo[a] < hi[a])) d.fail(s, e, "box bounds must satisfy lower < upper on every axis");
  }
  return ambient ? ambient->sub_box(lo, hi) : BoxChart::make(lo, hi);
}

inline std::vector<expr::Expression> coordinates(const Document& d, const Section& s, int n,
                                                 const std::vector<std::string>& params) {
  std::vector<expr::Expression> out;
  for (int a = 1; a <= n; ++a) {
    const std::string key = "x" + std::to_string(a);
    const Entry* e = s.find(key);
    if (!e) d.fail(s, "missing coordinate '" + key + "'");
    out.push_back(expression(d, s, *e, params, 0));
  }
  return out;
}

template <class F>
auto rethrow_at(const Document& d, const Section& s, F&& f) {
  try {
    return f();
  } catch (const FileError&) {
    throw;
  } catch (const Error& err) {
    d.fail(s, err.what());
  }
}

}  // namespace detail

/// Reads a cocycle; validation is left to the caller.
inline std::shared_ptr<DifferentialCocycle> read_cocycle(const Document& d) {
  using namespace detail;
  const Section& bs = d.required("base");
  reject_unknown(d, bs, {"dimension", "box", "periodic"});
  const Entry* be = bs.find("box");
  if (!be) d.fail(bs, "missing 'box'");
  BoxChart base = box(d, bs, *be, nullptr);
  const int n = base.dim();
  if (const Entry* e = bs.find("dimension"); e && integer(d, bs, *e) != n)
    d.fail(bs, *e, "dimension does not match the box");
  if (const Entry* e = bs.find("periodic")) {
    const auto v = numbers(d, bs, *e);
    if (static_cast<int>(v.size()) != n) d.fail(bs, *e, "periodic needs one flag per axis");
    std::vector<bool> flags;
    for (double f : v) {
      if (f != 0 && f != 1) d.fail(bs, *e, "periodic flags are 0 or 1");
      flags.push_back(f == 1);
    }
    base = BoxChart::make(base.lower, base.upper, flags);
  }

  const Section& cs = d.required("crossed_module");
  reject_unknown(d, cs, {"name"});
  const Entry* ne = cs.find("name");
  if (!ne) d.fail(cs, "missing 'name'");
  const CrossedModule cm = rethrow_at(d, cs, [&] { return builtin_crossed_module(ne->value); });

  const auto patch_secs = d.all("patch");
  if (patch_secs.empty()) throw FileError(d.source() + ": no [patch] sections");
  std::vector<const Section*> by_index(patch_secs.size(), nullptr);
  for (const Section* s : patch_secs) {
    const int i = indices(d, *s, 1)[0];
    if (i >= static_cast<int>(by_index.size())) d.fail(*s, "patch indices must run from 0 to " + std::to_string(by_index.size() - 1));
    if (by_index[i]) d.fail(*s, "patch " + std::to_string(i) + " is defined twice");
    by_index[i] = s;
  }
  std::vector<BoxChart> charts;
  for (const Section* s : by_index) {
    reject_unknown(d, *s, {"box", "psi"}, {"A", "B"});
    if (const Entry* e = s->find("box")) charts.push_back(box(d, *s, *e, &base));
    else if (by_index.size() == 1) charts.push_back(base);
    else d.fail(*s, "missing 'box'");
  }
  BoxCover cover = rethrow_at(d, *by_index.front(), [&] { return BoxCover(base, charts); });
  auto co = std::make_shared<DifferentialCocycle>(cm, std::move(cover));
  const BoxCover& cv = co->cover();

  for (int i = 0; i < co->size(); ++i) {
    const Section& s = *by_index[i];
    const BoxChart& p = cv.patch(i);
    co->set_patch(i, form(d, s, "A", 1, p, cm.g_kind()), form(d, s, "B", 2, p, cm.h_kind()));
    if (const Entry* e = s.find("psi")) co->set_psi(i, group_field(d, s, *e, p, cm.h_kind()));
  }

  std::set<std::pair<int, int>> given_pairs;
  for (const Section* s : d.all("overlap")) {
    reject_unknown(d, *s, {"g"}, {"phi"});
    const auto ix = indices(d, *s, 2);
    if (ix[0] >= co->size() || ix[1] >= co->size()) d.fail(*s, "patch index out of range");
    if (!given_pairs.insert({ix[0], ix[1]}).second) d.fail(*s, "overlap given twice");
    const BoxChart& p = cv.patch(ix[0]);
    const MapField g = s->find("g") ? group_field(d, *s, *s->find("g"), p, cm.g_kind()) : MapField::identity(p, cm.g_kind());
    const Form phi = form(d, *s, "phi", 1, p, cm.h_kind());
    rethrow_at(d, *s, [&] {
      co->set_overlap(ix[0], ix[1], g, phi);
      return 0;
    });
  }
  std::set<std::vector<int>> given_triples;
  for (const Section* s : d.all("triple")) {
    reject_unknown(d, *s, {"f"});
    const auto ix = indices(d, *s, 3);
    for (int i : ix)
      if (i >= co->size()) d.fail(*s, "patch index out of range");
    if (!given_triples.insert(ix).second) d.fail(*s, "triple given twice");
    const BoxChart& p = cv.patch(ix[0]);
    const MapField f = s->find("f") ? group_field(d, *s, *s->find("f"), p, cm.h_kind()) : MapField::identity(p, cm.h_kind());
    rethrow_at(d, *s, [&] {
      co->set_triple(ix[0], ix[1], ix[2], f);
      return 0;
    });
  }

  const int m = co->size();
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      if (!cv.overlaps({i, j}) || given_pairs.count({i, j}) || given_pairs.count({j, i})) continue;
      co->set_overlap(i, j, MapField::identity(cv.patch(i), cm.g_kind()), Form::zero(1, cv.patch(i), cm.h_kind()));
    }
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      for (int k = j + 1; k < m; ++k) {
        if (!cv.overlaps({i, j, k})) continue;
        bool any = false;
        for (const auto& t : given_triples)
          any = any || std::set<int>(t.begin(), t.end()) == std::set<int>{i, j, k};
        if (!any) co->set_triple(i, j, k, MapField::identity(cv.patch(i), cm.h_kind()));
      }
  return co;
}

inline std::shared_ptr<DifferentialCocycle> load_cocycle(const std::string& path) {
  return read_cocycle(Document::load(path));
}

inline Path read_path(const Document& d, int dim) {
  const Section& s = d.required("path");
  detail::reject_unknown(d, s, [dim] {
    std::set<std::string> k;
    for (int a = 1; a <= dim; ++a) k.insert("x" + std::to_string(a));
    return k;
  }());
  const auto xs = detail::coordinates(d, s, dim, {"t"});
  return Path([xs](double t) {
    Point p(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t a = 0; a < xs.size(); ++a) p[a] = xs[a].scalar(&t);
    return p;
  });
}

inline Bigon read_bigon(const Document& d, int dim) {
  const Section& s = d.required("bigon");
  detail::reject_unknown(d, s, [dim] {
    std::set<std::string> k;
    for (int a = 1; a <= dim; ++a) k.insert("x" + std::to_string(a));
    return k;
  }());
  const auto xs = detail::coordinates(d, s, dim, {"s", "t"});
  return Bigon([xs](double s_, double t) {
    const double st[2] = {s_, t};
    Point p(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t a = 0; a < xs.size(); ++a) p[a] = xs[a].scalar(st);
    return p;
  });
}

struct SurfaceSpec {
  int genus = 1;
  int cells = 64;
  SurfaceMap map;
  double warp = 0.5;
  double loop_change = 0.15;
  Point loop_change_direction;
  std::optional<Path> base_path;
};

inline SurfaceSpec read_surface(const Document& d, int dim) {
  using namespace detail;
  const Section& s = d.required("surface");
  std::set<std::string> keys = {"genus", "cells", "warp", "loop_change", "loop_change_direction"};
  for (int a = 1; a <= dim; ++a) keys.insert("x" + std::to_string(a));
  reject_unknown(d, s, keys);
  SurfaceSpec out;
  if (const Entry* e = s.find("genus")) out.genus = integer(d, s, *e);
  if (out.genus < 1) d.fail(s, "genus must be at least 1");
  if (const Entry* e = s.find("cells")) out.cells = integer(d, s, *e);
  if (out.cells < 1) d.fail(s, "cells must be positive");
  if (const Entry* e = s.find("warp")) {
    out.warp = number(d, s, *e);
    if (!(std::abs(out.warp) < 1)) d.fail(s, *e, "warp must lie in (-1, 1)");
  }
  if (const Entry* e = s.find("loop_change")) out.loop_change = number(d, s, *e);
  out.loop_change_direction = Point::Zero(dim);
  if (dim > 1) out.loop_change_direction[1] = 1;
  if (const Entry* e = s.find("loop_change_direction")) {
    const auto v = numbers(d, s, *e);
    if (static_cast<int>(v.size()) != dim) d.fail(s, *e, "loop_change_direction needs one number per axis");
    for (int a = 0; a < dim; ++a) out.loop_change_direction[a] = v[a];
  }
  const auto xs = coordinates(d, s, dim, {"u", "v"});
  out.map.eval = [xs](const Point& u) {
    Point p(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t a = 0; a < xs.size(); ++a) p[a] = xs[a].scalar(u.data());
    return p;
  };
  if (d.optional("path")) out.base_path = read_path(d, dim);
  return out;
}

}  // namespace two_transport::io

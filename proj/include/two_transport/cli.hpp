#pragma once

// Batch commands behind the two_transport executable. Each command writes a
// plain-text report and returns the process exit code: 0 on success, 1 when
// validation fails, 2 on bad input.

#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "two_transport/holonomy.hpp"
#include "two_transport/io.hpp"

namespace two_transport::cli {

struct GlobalOptions {
  double fd_step = kDefaultFdStep;
  double tol = 1e-4;
  std::uint64_t seed = 1;
  bool quiet = false;
};

/// Fixed-format numbers: 12 significant digits for values, scientific
/// notation for residuals. Negative zero prints as zero.
inline std::string num(double v) {
  if (v == 0) v = 0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string sci(double v) {
  if (v == 0) v = 0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

inline std::string entry(const Complex& z) {
  if (z.imag() == 0) return num(z.real());
  const double im = z.imag();
  return num(z.real()) + (im < 0 || std::signbit(im) ? "-" : "+") + num(std::abs(im)) + "i";
}

/// Row-major, one row per line.
inline void print_matrix(std::ostream& out, const std::string& label, const Matrix& m) {
  out << label << ":\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out << "  [";
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? ", " : "") << entry(m(r, c));
    out << "]\n";
  }
}

inline void print_element(std::ostream& out, const std::string& label, const GroupElement& g) {
  print_matrix(out, label + " (" + std::string(group_name(g.group)) + ")", g.value);
}

namespace detail {

inline ValidationOptions validation_options(const GlobalOptions& g) {
  ValidationOptions v;
  v.fd_step = g.fd_step;
  v.tol = g.tol;
  return v;
}

inline void print_header(std::ostream& out, const std::string& command, const GlobalOptions& g) {
  if (g.quiet) return;
  out << "command: " << command << "\n";
  out << "fd_step: " << sci(g.fd_step) << "\n";
  out << "tol: " << sci(g.tol) << "\n";
  out << "seed: " << g.seed << "\n";
}

inline void print_cocycle(std::ostream& out, const std::string& path, const DifferentialCocycle& c,
                          const GlobalOptions& g) {
  if (g.quiet) return;
  out << "cocycle: " << path << "\n";
  out << "crossed_module: " << c.cm().name() << "\n";
  out << "patches: " << c.size() << "\n";
}

/// Validates and reports the first failing clause; true when valid.
inline bool require_valid(std::ostream& out, const DifferentialCocycle& c, const GlobalOptions& g) {
  const ValidationReport r = validate_cocycle(c, validation_options(g));
  if (r.pass()) return true;
  for (const ClauseResult& cl : r.clauses)
    if (!cl.pass) {
      out << "result: FAIL invalid cocycle, clause " << cl.name << " residual " << sci(cl.residual) << " at "
          << cl.location << "\n";
      break;
    }
  return false;
}

/// Patch containing a sample grid of Σ, or −1.
inline int bigon_patch(const DifferentialCocycle& c, const Bigon& sigma, int samples = 16) {
  std::vector<Point> pts;
  for (int a = 0; a <= samples; ++a)
    for (int k = 0; k <= samples; ++k) pts.push_back(sigma(static_cast<double>(a) / samples, static_cast<double>(k) / samples));
  return two_transport::detail::lowest_holding(c.cover(), pts);
}

struct SurfaceResult {
  TwoMorphism two;
  GroupElement target_path;
  std::string method;
};

inline SurfaceResult surface_transport(const DifferentialCocycle& c, const Bigon& sigma, int cells,
                                       const std::string& method, int steps) {
  SurfaceResult r;
  if (method == "ode") {
    const int p = bigon_patch(c, sigma);
    if (p < 0) throw Error("the ode method needs the bigon inside a single patch");
    r.two = transport_bigon_ode(c.cm(), c.A(p), c.B(p), sigma, cells);
    r.target_path = transport_path(c.A(p), sigma.path_at(1.0), steps);
    r.method = "ode (patch " + std::to_string(p) + ")";
  } else if (method == "lattice") {
    r.two = transport_bigon_global(c, sigma, cells);
    r.target_path = transport_path_lattice(c, sigma.path_at(1.0), cells);
    r.method = "lattice";
  } else {
    throw Error("unknown method '" + method + "' (expected ode or lattice)");
  }
  return r;
}

}  // namespace detail

inline int cmd_validate(std::ostream& out, const std::string& cocycle_path, const GlobalOptions& g) {
  const auto c = io::load_cocycle(cocycle_path);
  detail::print_header(out, "validate", g);
  detail::print_cocycle(out, cocycle_path, *c, g);
  const ValidationReport r = validate_cocycle(*c, detail::validation_options(g));
  if (!g.quiet)
    for (const ClauseResult& cl : r.clauses) {
      char line[160];
      std::snprintf(line, sizeof line, "clause %-22s residual %s  tol %s  %s", cl.name.c_str(), sci(cl.residual).c_str(),
                    sci(cl.tol).c_str(), cl.vacuous ? "vacuous" : cl.pass ? "pass" : "FAIL");
      out << line << "\n";
    }
  if (r.pass()) {
    out << "result: pass\n";
    return 0;
  }
  for (const ClauseResult& cl : r.clauses)
    if (!cl.pass) out << "failed: " << cl.name << " residual " << sci(cl.residual) << " at " << cl.location << "\n";
  out << "result: FAIL " << *r.first_failure() << "\n";
  return 1;
}

inline int cmd_transport_path(std::ostream& out, const std::string& cocycle_path, const std::string& path_file,
                              int steps, const GlobalOptions& g) {
  const auto c = io::load_cocycle(cocycle_path);
  const Path gamma = io::read_path(io::Document::load(path_file), c->cover().base().dim());
  detail::print_header(out, "transport-path", g);
  detail::print_cocycle(out, cocycle_path, *c, g);
  if (!detail::require_valid(out, *c, g)) return 1;
  const PathLift lift = lift_path(c->cover(), gamma);
  const GroupElement F = transport_path_global(*c, gamma, steps);
  if (!g.quiet) {
    out << "path: " << path_file << "\n";
    out << "steps_per_segment: " << steps << "\n";
    out << "segments:";
    for (const PathSegment& s : lift.segments) out << " [" << num(s.t0) << ", " << num(s.t1) << "]@" << s.patch;
    out << "\n";
    out << "jumps: " << lift.jumps.size() << "\n";
  }
  print_element(out, "transport", F);
  out << "result: ok\n";
  return 0;
}

inline int cmd_transport_surface(std::ostream& out, const std::string& cocycle_path, const std::string& bigon_file,
                                 int cells, const std::string& method, int steps, const GlobalOptions& g) {
  const auto c = io::load_cocycle(cocycle_path);
  const Bigon sigma = io::read_bigon(io::Document::load(bigon_file), c->cover().base().dim());
  detail::print_header(out, "transport-surface", g);
  detail::print_cocycle(out, cocycle_path, *c, g);
  if (!detail::require_valid(out, *c, g)) return 1;
  const detail::SurfaceResult r = detail::surface_transport(*c, sigma, cells, method, steps);
  if (!g.quiet) {
    out << "bigon: " << bigon_file << "\n";
    out << "method: " << r.method << "\n";
    out << "cells: " << cells << "\n";
  }
  print_element(out, "source", r.two.source);
  print_element(out, "fiber", r.two.h);
  print_element(out, "target", target(c->cm(), r.two));
  out << "target_law_residual: " << sci(distance(target(c->cm(), r.two), r.target_path)) << "\n";
  out << "result: ok\n";
  return 0;
}

inline int cmd_holonomy(std::ostream& out, const std::string& cocycle_path, const std::string& surface_file,
                        std::optional<int> cells_flag, const std::vector<std::string>& checks, const GlobalOptions& g) {
  const auto c = io::load_cocycle(cocycle_path);
  const int dim = c->cover().base().dim();
  const io::SurfaceSpec spec = io::read_surface(io::Document::load(surface_file), dim);
  const int cells = cells_flag.value_or(spec.cells);
  detail::print_header(out, "holonomy", g);
  detail::print_cocycle(out, cocycle_path, *c, g);
  if (!detail::require_valid(out, *c, g)) return 1;
  const FundamentalBigon fb = build_fundamental_bigon(spec.genus);
  const TwoMorphism hol = surface_holonomy(*c, spec.map, fb, cells);
  if (!g.quiet) {
    out << "surface: " << surface_file << "\n";
    out << "genus: " << spec.genus << "\n";
    out << "cells: " << cells << "\n";
  }
  print_element(out, "boundary_transport", hol.source);
  print_element(out, "holonomy", hol.h);
  out << "constraint_residual: " << sci(holonomy_constraint_residual(c->cm(), hol)) << "\n";
  const CommutatorClass q = quotient_invariant(c->cm(), hol.h);
  if (q.kind == CommutatorClass::Kind::Value) print_element(out, "quotient_class", *q.value);
  else out << "quotient_class: " << (q.kind == CommutatorClass::Kind::Trivial ? "trivial" : "unsupported") << "\n";

  for (const std::string& check : checks) {
    if (check == "base-point") {
      if (!spec.base_path) throw Error("the base-point check needs a [path] section in the surface file");
      const LawCheck r = base_point_check(*c, spec.map, fb, *spec.base_path, cells);
      print_element(out, "base_point.direct", r.direct.h);
      print_element(out, "base_point.formula", r.formula.h);
      out << "base_point.residual: " << sci(r.residual) << "\n";
    } else if (check == "loop-change") {
      const LoopChange lc = torus_loop_change(spec.map, fb, spec.loop_change, spec.loop_change_direction);
      const LawCheck r = change_loop(*c, spec.map, fb, lc, cells);
      print_element(out, "loop_change.direct", r.direct.h);
      print_element(out, "loop_change.formula", r.formula.h);
      out << "loop_change.residual: " << sci(r.residual) << "\n";
    } else if (check == "contraction") {
      const double d = contraction_independence(*c, spec.map, fb, warped_contraction(fb, spec.warp), cells);
      out << "contraction.warp: " << num(spec.warp) << "\n";
      out << "contraction.residual: " << sci(d) << "\n";
    } else if (check == "oracle") {
      const GroupElement o = abelian_oracle(*c, spec.map, fb, cells);
      print_element(out, "oracle", o);
      out << "oracle.residual: " << sci(distance(o, hol.h)) << "\n";
    } else {
      throw Error("unknown check '" + check + "' (expected base-point, loop-change, contraction or oracle)");
    }
  }
  out << "result: ok\n";
  return 0;
}

inline int cmd_compare_oracle(std::ostream& out, const std::string& cocycle_path, const std::string& bigon_file,
                              const std::vector<int>& cells_list, int steps, const GlobalOptions& g) {
  const auto c = io::load_cocycle(cocycle_path);
  const Bigon sigma = io::read_bigon(io::Document::load(bigon_file), c->cover().base().dim());
  detail::print_header(out, "compare-oracle", g);
  detail::print_cocycle(out, cocycle_path, *c, g);
  if (!detail::require_valid(out, *c, g)) return 1;
  if (!g.quiet) out << "bigon: " << bigon_file << "\n";
  out << "N  ode_vs_lattice  target_law_ode  target_law_lattice  order\n";
  double prev = 0;
  for (std::size_t i = 0; i < cells_list.size(); ++i) {
    const int n = cells_list[i];
    const detail::SurfaceResult ode = detail::surface_transport(*c, sigma, n, "ode", steps);
    const detail::SurfaceResult lat = detail::surface_transport(*c, sigma, n, "lattice", steps);
    const double d = distance(ode.two.h, lat.two.h);
    const double r_ode = distance(target(c->cm(), ode.two), ode.target_path);
    const double r_lat = distance(target(c->cm(), lat.two), lat.target_path);
    std::string order = "-";
    if (i > 0 && d > 0 && prev > 0) order = num(std::log(prev / d) / std::log(static_cast<double>(n) / cells_list[i - 1]));
    out << n << "  " << sci(d) << "  " << sci(r_ode) << "  " << sci(r_lat) << "  " << order << "\n";
    prev = d;
  }
  out << "result: ok\n";
  return 0;
}

}  // namespace two_transport::cli

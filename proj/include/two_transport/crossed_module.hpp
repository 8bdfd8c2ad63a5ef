#pragma once

// Smooth crossed modules (G, H, t, α) and their differentials.

#include "two_transport/fields.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>

namespace two_transport {

inline constexpr double kCrossedModuleFdStep = 1e-5;

class CrossedModule {
 public:
  using TMap = std::function<Matrix(const Matrix& h)>;
  using AlphaMap = std::function<Matrix(const Matrix& g, const Matrix& h)>;
  using LinearMap = std::function<Matrix(const Matrix&)>;
  using ParamLinearMap = std::function<Matrix(const Matrix& param, const Matrix& x)>;
  using BilinearMap = std::function<Matrix(const Matrix& xi, const Matrix& eta)>;

  /// Closed-form differentials; anything left empty falls back to central
  /// differences along one-parameter subgroups.
  struct Differentials {
    LinearMap t_star;
    ParamLinearMap alpha_g_star;
    BilinearMap alpha_star_mixed;
    ParamLinearMap alpha_h_star;
  };

  CrossedModule(std::string name, GroupKind g, GroupKind h, TMap t, AlphaMap alpha,
                Differentials diff = {})
      : name_(std::move(name)), g_(g), h_(h), t_(std::move(t)), alpha_(std::move(alpha)),
        diff_(std::move(diff)) {}

  const std::string& name() const { return name_; }
  GroupKind g_kind() const { return g_; }
  GroupKind h_kind() const { return h_; }
  const GroupInstance& G() const { return group(g_); }
  const GroupInstance& H() const { return group(h_); }

  GroupElement apply_t(const GroupElement& h) const {
    require(h, h_, "apply_t");
    return G().checked(t_(h.value));
  }

  GroupElement apply_alpha(const GroupElement& g, const GroupElement& h) const {
    require(g, g_, "apply_alpha");
    require(h, h_, "apply_alpha");
    return H().checked(alpha_(g.value, h.value));
  }

  AlgebraElement t_star(const AlgebraElement& eta) const {
    require(eta, h_, "t_star");
    return {t_star_matrix(eta.value), g_};
  }

  /// (α_g)_*: 𝔥 → 𝔥.
  AlgebraElement alpha_g_star(const GroupElement& g, const AlgebraElement& eta) const {
    require(g, g_, "alpha_g_star");
    require(eta, h_, "alpha_g_star");
    return {alpha_g_star_matrix(g.value, eta.value), h_};
  }

  /// α_*: 𝔤 × 𝔥 → 𝔥, the derivative of (α_g)_* in g at the identity.
  AlgebraElement alpha_star_mixed(const AlgebraElement& xi, const AlgebraElement& eta) const {
    require(xi, g_, "alpha_star_mixed");
    require(eta, h_, "alpha_star_mixed");
    return {alpha_star_mixed_matrix(xi.value, eta.value), h_};
  }

  /// (r_ψ⁻¹ ∘ α_ψ)_*: 𝔤 → 𝔥, ξ ↦ d/dε α(exp(εξ), ψ)·ψ⁻¹.
  AlgebraElement alpha_h_star(const GroupElement& psi, const AlgebraElement& xi) const {
    require(psi, h_, "alpha_h_star");
    require(xi, g_, "alpha_h_star");
    return {alpha_h_star_matrix(psi.value, xi.value), h_};
  }

  Matrix t_star_matrix(const Matrix& eta) const {
    if (diff_.t_star) return diff_.t_star(eta);
    if (H().is_discrete() || G().is_discrete()) return zero_like(g_);
    const double e = kCrossedModuleFdStep;
    const Matrix hp = exp(AlgebraElement{e * eta, h_}).value;
    const Matrix hm = exp(AlgebraElement{-e * eta, h_}).value;
    return G().project_algebra((t_(hp) - t_(hm)) / (2 * e));
  }

  Matrix alpha_g_star_matrix(const Matrix& g, const Matrix& eta) const {
    if (diff_.alpha_g_star) return diff_.alpha_g_star(g, eta);
    if (H().is_discrete()) return zero_like(h_);
    const double e = kCrossedModuleFdStep;
    const Matrix hp = exp(AlgebraElement{e * eta, h_}).value;
    const Matrix hm = exp(AlgebraElement{-e * eta, h_}).value;
    return H().project_algebra((alpha_(g, hp) - alpha_(g, hm)) / (2 * e));
  }

  Matrix alpha_star_mixed_matrix(const Matrix& xi, const Matrix& eta) const {
    if (diff_.alpha_star_mixed) return diff_.alpha_star_mixed(xi, eta);
    if (H().is_discrete() || G().is_discrete()) return zero_like(h_);
    const double e = kCrossedModuleFdStep;
    const Matrix gp = exp(AlgebraElement{e * xi, g_}).value;
    const Matrix gm = exp(AlgebraElement{-e * xi, g_}).value;
    return H().project_algebra((alpha_g_star_matrix(gp, eta) - alpha_g_star_matrix(gm, eta)) / (2 * e));
  }

  Matrix alpha_h_star_matrix(const Matrix& psi, const Matrix& xi) const {
    if (diff_.alpha_h_star) return diff_.alpha_h_star(psi, xi);
    if (H().is_discrete() || G().is_discrete()) return zero_like(h_);
    const double e = kCrossedModuleFdStep;
    const Matrix gp = exp(AlgebraElement{e * xi, g_}).value;
    const Matrix gm = exp(AlgebraElement{-e * xi, g_}).value;
    const Matrix d = (alpha_(gp, psi) - alpha_(gm, psi)) / (2 * e);
    return H().project_algebra(d * inverse_matrix(h_, psi));
  }

  const TMap& t_map() const { return t_; }
  const AlphaMap& alpha_map() const { return alpha_; }

  /// Copy with α replaced; differentials revert to finite differences.
  CrossedModule with_alpha(AlphaMap alpha, std::string name) const {
    return CrossedModule(std::move(name), g_, h_, t_, std::move(alpha));
  }

  /// Copy with t replaced; differentials revert to finite differences.
  CrossedModule with_t(TMap t, std::string name) const {
    return CrossedModule(std::move(name), g_, h_, std::move(t), alpha_);
  }

 private:
  static void require(const GroupElement& x, GroupKind k, const char* op) {
    if (x.group != k)
      throw Error(std::string(op) + ": expected element of " + std::string(group_name(k)) + ", got " +
                  std::string(group_name(x.group)));
  }
  static void require(const AlgebraElement& x, GroupKind k, const char* op) {
    if (x.algebra != k)
      throw Error(std::string(op) + ": expected algebra element of " + std::string(group_name(k)) +
                  ", got " + std::string(group_name(x.algebra)));
  }

  std::string name_;
  GroupKind g_;
  GroupKind h_;
  TMap t_;
  AlphaMap alpha_;
  Differentials diff_;
};

// ---------------------------------------------------------------------------
// Builtin instances

namespace detail {

// h = a·I + Σ v_k E_k for h ∈ SU(2), E_k = iσ_k.
inline std::pair<double, Eigen::Vector3d> su2_split(const Matrix& h) {
  const double a = h.trace().real() / 2.0;
  const Eigen::VectorXd v = group(GroupKind::SU2).coordinates(h - a * Matrix::Identity(2, 2));
  return {a, Eigen::Vector3d(v[0], v[1], v[2])};
}

inline Matrix su2_join(double a, const Eigen::Vector3d& v) {
  const auto& basis = group(GroupKind::SU2).basis();
  Matrix h = a * Matrix::Identity(2, 2);
  for (int k = 0; k < 3; ++k) h += v[k] * basis[k];
  return h;
}

inline Eigen::Vector3d su2_coords(const Matrix& eta) {
  const Eigen::VectorXd c = group(GroupKind::SU2).coordinates(eta);
  return {c[0], c[1], c[2]};
}

}  // namespace detail

/// BA(A): trivial G acting trivially on an abelian H.
inline CrossedModule make_ba(GroupKind a) {
  if (!group(a).is_abelian()) throw Error("BA requires an abelian group");
  const GroupKind g = GroupKind::Trivial;
  CrossedModule::Differentials d;
  d.t_star = [](const Matrix&) -> Matrix { return Matrix::Zero(1, 1); };
  d.alpha_g_star = [](const Matrix&, const Matrix& eta) -> Matrix { return eta; };
  d.alpha_star_mixed = [a](const Matrix&, const Matrix&) -> Matrix { return zero_like(a); };
  d.alpha_h_star = [a](const Matrix&, const Matrix&) -> Matrix { return zero_like(a); };
  return CrossedModule(
      "BA:" + std::string(group_name(a)), g, a,
      [](const Matrix&) -> Matrix { return Matrix::Identity(1, 1); },
      [](const Matrix&, const Matrix& h) -> Matrix { return h; }, d);
}

/// EG(K): H = G = K, t = id, α = conjugation.
inline CrossedModule make_eg(GroupKind k) {
  CrossedModule::Differentials d;
  d.t_star = [](const Matrix& eta) -> Matrix { return eta; };
  d.alpha_g_star = [k](const Matrix& g, const Matrix& eta) -> Matrix {
    return g * eta * inverse_matrix(k, g);
  };
  d.alpha_star_mixed = [](const Matrix& xi, const Matrix& eta) -> Matrix { return xi * eta - eta * xi; };
  d.alpha_h_star = [k](const Matrix& psi, const Matrix& xi) -> Matrix {
    return xi - psi * xi * inverse_matrix(k, psi);
  };
  return CrossedModule(
      "EG:" + std::string(group_name(k)), k, k, [](const Matrix& h) -> Matrix { return h; },
      [k](const Matrix& g, const Matrix& h) -> Matrix { return g * h * inverse_matrix(k, g); }, d);
}

/// AUT(SU(2)) with G = SO(3) acting through the adjoint representation.
inline CrossedModule make_aut_su2() {
  const GroupKind g = GroupKind::SO3;
  const GroupKind h = GroupKind::SU2;
  CrossedModule::Differentials d;
  d.t_star = [](const Matrix& eta) -> Matrix {
    const auto& basis = group(GroupKind::SU2).basis();
    Matrix out = Matrix::Zero(3, 3);
    for (int j = 0; j < 3; ++j) {
      const Eigen::Vector3d col = detail::su2_coords(eta * basis[j] - basis[j] * eta);
      for (int i = 0; i < 3; ++i) out(i, j) = col[i];
    }
    return out;
  };
  d.alpha_g_star = [](const Matrix& r, const Matrix& eta) -> Matrix {
    const Eigen::Vector3d v = r.real() * detail::su2_coords(eta);
    return detail::su2_join(0.0, v);
  };
  d.alpha_star_mixed = [](const Matrix& xi, const Matrix& eta) -> Matrix {
    const Eigen::Vector3d v = xi.real() * detail::su2_coords(eta);
    return detail::su2_join(0.0, v);
  };
  d.alpha_h_star = [](const Matrix& psi, const Matrix& xi) -> Matrix {
    const auto [a, v] = detail::su2_split(psi);
    const Eigen::Vector3d w = xi.real() * v;
    return group(GroupKind::SU2).project_algebra(detail::su2_join(0.0, w) * psi.adjoint());
  };
  return CrossedModule(
      "AUT:SU2", g, h, [](const Matrix& q) -> Matrix { return GroupInstance::su2_to_so3(q); },
      [](const Matrix& r, const Matrix& q) -> Matrix {
        const auto [a, v] = detail::su2_split(q);
        return detail::su2_join(a, r.real() * v);
      },
      d);
}

/// Z2 → SU(2) → SO(3): central inclusion, trivial action.
inline CrossedModule make_ses_z2_su2() {
  CrossedModule::Differentials d;
  d.t_star = [](const Matrix&) -> Matrix { return Matrix::Zero(2, 2); };
  d.alpha_g_star = [](const Matrix&, const Matrix&) -> Matrix { return Matrix::Zero(1, 1); };
  d.alpha_star_mixed = [](const Matrix&, const Matrix&) -> Matrix { return Matrix::Zero(1, 1); };
  d.alpha_h_star = [](const Matrix&, const Matrix&) -> Matrix { return Matrix::Zero(1, 1); };
  return CrossedModule(
      "SES:Z2-SU2", GroupKind::SU2, GroupKind::Z2,
      [](const Matrix& n) -> Matrix { return n(0, 0).real() * Matrix::Identity(2, 2); },
      [](const Matrix&, const Matrix& n) -> Matrix { return n; }, d);
}

/// Builtins by config name: BA:U1, BA:R, EG:U1, EG:SU2, EG:U2, AUT:SU2, SES:Z2-SU2.
inline CrossedModule builtin_crossed_module(const std::string& name) {
  if (name == "BA:U1") return make_ba(GroupKind::U1);
  if (name == "BA:R") return make_ba(GroupKind::R);
  if (name == "EG:U1") return make_eg(GroupKind::U1);
  if (name == "EG:SU2") return make_eg(GroupKind::SU2);
  if (name == "EG:U2") return make_eg(GroupKind::U2);
  if (name == "AUT:SU2") return make_aut_su2();
  if (name == "SES:Z2-SU2") return make_ses_z2_su2();
  throw Error("unknown crossed module '" + name + "'");
}

inline const std::vector<std::string>& builtin_crossed_module_names() {
  static const std::vector<std::string> names = {"BA:U1",  "BA:R",    "EG:U1",     "EG:SU2",
                                                 "EG:U2", "AUT:SU2", "SES:Z2-SU2"};
  return names;
}

// ---------------------------------------------------------------------------
// Validation

struct AxiomReport {
  double axiom_a = 0;        // t(α(g,h)) = g t(h) g⁻¹
  double axiom_b = 0;        // α(t(h), x) = h x h⁻¹
  double action = 0;         // α(g₁g₂, h) = α(g₁, α(g₂, h))
  double homomorphism = 0;   // α(g, h₁h₂) = α(g,h₁) α(g,h₂)
  double t_homomorphism = 0; // t(h₁h₂) = t(h₁) t(h₂)
  double differentials = 0;  // closed forms vs. finite differences
  bool pass = false;
};

namespace detail {

inline CrossedModule without_differentials(const CrossedModule& cm) {
  return CrossedModule(cm.name(), cm.g_kind(), cm.h_kind(), cm.t_map(), cm.alpha_map());
}

}  // namespace detail

inline AxiomReport validate_axioms(const CrossedModule& cm, int samples = 200, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  const GroupInstance& G = cm.G();
  const GroupInstance& H = cm.H();
  const auto& t = cm.t_map();
  const auto& alpha = cm.alpha_map();
  const CrossedModule fd = detail::without_differentials(cm);
  AxiomReport r;
  for (int s = 0; s < samples; ++s) {
    const Matrix g1 = G.random(rng).value, g2 = G.random(rng).value;
    const Matrix h1 = H.random(rng).value, h2 = H.random(rng).value;
    const Matrix g1i = inverse_matrix(cm.g_kind(), g1);
    const Matrix h1i = inverse_matrix(cm.h_kind(), h1);
    r.axiom_a = std::max(r.axiom_a, distance(t(alpha(g1, h1)), g1 * t(h1) * g1i));
    r.axiom_b = std::max(r.axiom_b, distance(alpha(t(h1), h2), h1 * h2 * h1i));
    r.action = std::max(r.action, distance(alpha(g1 * g2, h1), alpha(g1, alpha(g2, h1))));
    r.homomorphism = std::max(r.homomorphism, distance(alpha(g1, h1 * h2), alpha(g1, h1) * alpha(g1, h2)));
    r.t_homomorphism = std::max(r.t_homomorphism, distance(t(h1 * h2), t(h1) * t(h2)));

    if (!H.is_discrete() || !G.is_discrete()) {
      const Matrix xi = G.random_algebra(rng, 0.7).value;
      const Matrix eta = H.random_algebra(rng, 0.7).value;
      double d = distance(cm.t_star_matrix(eta), fd.t_star_matrix(eta));
      d = std::max(d, distance(cm.alpha_g_star_matrix(g1, eta), fd.alpha_g_star_matrix(g1, eta)));
      d = std::max(d, distance(cm.alpha_star_mixed_matrix(xi, eta), fd.alpha_star_mixed_matrix(xi, eta)));
      d = std::max(d, distance(cm.alpha_h_star_matrix(h1, xi), fd.alpha_h_star_matrix(h1, xi)));
      r.differentials = std::max(r.differentials, d);
    }
  }
  r.pass = r.axiom_a < 1e-8 && r.axiom_b < 1e-8 && r.action < 1e-8 && r.homomorphism < 1e-8 &&
           r.t_homomorphism < 1e-8 && r.differentials < 1e-5;
  return r;
}

// ---------------------------------------------------------------------------
// Forms

/// α_*(A ∧ B) for a 𝔤-valued 1-form A and an 𝔥-valued p-form B.
inline Form action_wedge(const Form& a, const Form& b, const CrossedModule& cm) {
  if (a.algebra() != cm.g_kind() || b.algebra() != cm.h_kind())
    throw Error("action_wedge: form algebras do not match the crossed module");
  return wedge_pair(
      a, b, [cm](const Matrix& x, const Matrix& y) { return cm.alpha_star_mixed_matrix(x, y); },
      cm.h_kind());
}

inline Form t_star(const Form& b, const CrossedModule& cm) {
  if (b.algebra() != cm.h_kind()) throw Error("t_star: form is not 𝔥-valued");
  return pushforward(b, [cm](const Matrix& m) { return cm.t_star_matrix(m); }, cm.g_kind());
}

// ---------------------------------------------------------------------------
// [G, H]

struct CommutatorClass {
  enum class Kind { Value, Trivial, Unsupported };
  Kind kind = Kind::Unsupported;
  std::optional<GroupElement> value;
};

/// Image of h in H/[G,H] when that quotient is concretely known.
inline CommutatorClass gh_commutator_projection(const CrossedModule& cm, const GroupElement& h) {
  using K = CommutatorClass::Kind;
  const std::string& n = cm.name();
  // Trivial action: [G,H] = {1}.
  if ((n.rfind("BA:", 0) == 0 && cm.H().is_abelian()) || n == "SES:Z2-SU2") return {K::Value, h};
  if (n == "EG:U2" || n == "EG:U1") {
    const Complex det = h.value.determinant();
    return {K::Value, group(GroupKind::U1).checked(Matrix::Constant(1, 1, det))};
  }
  if (n == "EG:SU2" || n == "AUT:SU2") return {K::Trivial, std::nullopt};
  return {K::Unsupported, std::nullopt};
}

}  // namespace two_transport

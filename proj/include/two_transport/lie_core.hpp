#pragma once

// Matrix Lie groups and algebras used as structure groups: U(1), R, Z2, the
// trivial group, SU(2), U(2) and SO(3). Elements are small complex matrices.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace two_transport {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class GroupKind { Trivial, U1, R, Z2, SU2, U2, SO3 };

inline constexpr std::array<GroupKind, 7> kAllGroups = {
    GroupKind::Trivial, GroupKind::U1,  GroupKind::R,  GroupKind::Z2,
    GroupKind::SU2,     GroupKind::U2, GroupKind::SO3};

inline std::string_view group_name(GroupKind k) {
  switch (k) {
    case GroupKind::Trivial: return "Trivial";
    case GroupKind::U1: return "U1";
    case GroupKind::R: return "R";
    case GroupKind::Z2: return "Z2";
    case GroupKind::SU2: return "SU2";
    case GroupKind::U2: return "U2";
    case GroupKind::SO3: return "SO3";
  }
  return "?";
}

inline GroupKind parse_group(std::string_view name) {
  for (GroupKind k : kAllGroups)
    if (group_name(k) == name) return k;
  throw Error("unknown group '" + std::string(name) + "'");
}

struct GroupElement {
  Matrix value;
  GroupKind group;
};

struct AlgebraElement {
  Matrix value;
  GroupKind algebra;
};

/// Tolerances shared by every membership check.
inline constexpr double kMembershipTol = 1e-10;
inline constexpr double kReprojectAbove = 1e-12;
inline constexpr double kDriftLimit = 1e-8;

inline double distance(const Matrix& a, const Matrix& b) { return (a - b).norm(); }
inline double distance(const GroupElement& a, const GroupElement& b) {
  return distance(a.value, b.value);
}
inline double distance(const AlgebraElement& a, const AlgebraElement& b) {
  return distance(a.value, b.value);
}

namespace detail {

inline Matrix pauli(int k) {
  Matrix s(2, 2);
  const Complex i(0, 1);
  switch (k) {
    case 1: s << 0, 1, 1, 0; break;
    case 2: s << 0, -i, i, 0; break;
    default: s << 1, 0, 0, -1; break;
  }
  return s;
}

inline Matrix so3_generator(int k) {
  Matrix l = Matrix::Zero(3, 3);
  switch (k) {
    case 1: l(2, 1) = 1; l(1, 2) = -1; break;
    case 2: l(0, 2) = 1; l(2, 0) = -1; break;
    default: l(1, 0) = 1; l(0, 1) = -1; break;
  }
  return l;
}

// Closest unitary matrix (polar factor).
inline Matrix polar_unitary(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

}  // namespace detail

/// Immutable description of one builtin matrix group.
class GroupInstance {
 public:
  explicit GroupInstance(GroupKind kind) : kind_(kind) {
    const Complex i(0, 1);
    switch (kind) {
      case GroupKind::Trivial:
      case GroupKind::Z2:
        dim_ = 1;
        break;
      case GroupKind::U1:
        dim_ = 1;
        basis_.push_back(Matrix::Constant(1, 1, i));
        break;
      case GroupKind::R:
        dim_ = 1;
        basis_.push_back(Matrix::Constant(1, 1, 1.0));
        break;
      case GroupKind::SU2:
        dim_ = 2;
        for (int k = 1; k <= 3; ++k) basis_.push_back(i * detail::pauli(k));
        break;
      case GroupKind::U2:
        dim_ = 2;
        for (int k = 1; k <= 3; ++k) basis_.push_back(i * detail::pauli(k));
        basis_.push_back(i * Matrix::Identity(2, 2));
        break;
      case GroupKind::SO3:
        dim_ = 3;
        for (int k = 1; k <= 3; ++k) basis_.push_back(detail::so3_generator(k));
        break;
    }
  }

  GroupKind kind() const { return kind_; }
  std::string_view name() const { return group_name(kind_); }
  int dim() const { return dim_; }
  bool is_discrete() const { return basis_.empty(); }
  bool is_abelian() const {
    return kind_ == GroupKind::Trivial || kind_ == GroupKind::U1 ||
           kind_ == GroupKind::R || kind_ == GroupKind::Z2;
  }
  const std::vector<Matrix>& basis() const { return basis_; }

  GroupElement identity() const { return {Matrix::Identity(dim_, dim_), kind_}; }
  AlgebraElement zero() const { return {Matrix::Zero(dim_, dim_), kind_}; }

  /// Distance of a raw matrix from the group's defining property.
  double membership_residual(const Matrix& m) const {
    if (m.rows() != dim_ || m.cols() != dim_) return INFINITY;
    const Matrix id = Matrix::Identity(dim_, dim_);
    switch (kind_) {
      case GroupKind::Trivial: return (m - id).norm();
      case GroupKind::U1: return std::abs(std::abs(m(0, 0)) - 1.0);
      case GroupKind::R:
        return m(0, 0).real() > 0 ? std::abs(m(0, 0).imag()) : INFINITY;
      case GroupKind::Z2:
        return std::min(std::abs(m(0, 0) - 1.0), std::abs(m(0, 0) + 1.0));
      case GroupKind::U2: return (m.adjoint() * m - id).norm();
      case GroupKind::SU2:
        return (m.adjoint() * m - id).norm() + std::abs(m.determinant() - 1.0);
      case GroupKind::SO3:
        return (m.adjoint() * m - id).norm() + m.imag().norm() +
               std::abs(m.determinant() - 1.0);
    }
    return INFINITY;
  }

  double algebra_residual(const Matrix& x) const {
    if (x.rows() != dim_ || x.cols() != dim_) return INFINITY;
    if (is_discrete()) return x.norm();
    return (x - project_algebra(x)).norm();
  }

  /// Nearest group element; callers decide whether the drift was acceptable.
  Matrix project(const Matrix& m) const {
    switch (kind_) {
      case GroupKind::Trivial: return Matrix::Identity(1, 1);
      case GroupKind::U1: {
        const double r = std::abs(m(0, 0));
        if (r == 0.0) throw Error("cannot project 0 onto U1");
        return Matrix::Constant(1, 1, m(0, 0) / r);
      }
      case GroupKind::R:
        if (m(0, 0).real() <= 0) throw Error("cannot project non-positive value onto R");
        return Matrix::Constant(1, 1, Complex(m(0, 0).real(), 0));
      case GroupKind::Z2:
        return Matrix::Constant(1, 1, m(0, 0).real() >= 0 ? 1.0 : -1.0);
      case GroupKind::U2: return detail::polar_unitary(m);
      case GroupKind::SU2: {
        Matrix u = detail::polar_unitary(m);
        return u / std::sqrt(u.determinant());
      }
      case GroupKind::SO3: {
        Eigen::Matrix3d re = m.real();
        Eigen::JacobiSVD<Eigen::Matrix3d> svd(re, Eigen::ComputeFullU | Eigen::ComputeFullV);
        Eigen::Matrix3d q = svd.matrixU() * svd.matrixV().transpose();
        if (q.determinant() < 0) {
          Eigen::Matrix3d u = svd.matrixU();
          u.col(2) *= -1;
          q = u * svd.matrixV().transpose();
        }
        return q.cast<Complex>();
      }
    }
    return m;
  }

  Matrix project_algebra(const Matrix& x) const {
    switch (kind_) {
      case GroupKind::Trivial:
      case GroupKind::Z2: return Matrix::Zero(dim_, dim_);
      case GroupKind::U1: return Matrix::Constant(1, 1, Complex(0, x(0, 0).imag()));
      case GroupKind::R: return Matrix::Constant(1, 1, Complex(x(0, 0).real(), 0));
      case GroupKind::U2: return 0.5 * (x - x.adjoint());
      case GroupKind::SU2: {
        Matrix a = 0.5 * (x - x.adjoint());
        return a - (a.trace() / 2.0) * Matrix::Identity(2, 2);
      }
      case GroupKind::SO3: {
        Eigen::Matrix3d re = x.real();
        return (0.5 * (re - re.transpose())).cast<Complex>();
      }
    }
    return x;
  }

  /// Re-projects small drift, rejects large drift.
  GroupElement checked(const Matrix& m) const {
    const double r = membership_residual(m);
    if (!(r <= kDriftLimit))
      throw Error("matrix is not an element of " + std::string(name()) +
                  " (residual " + std::to_string(r) + ")");
    if (r > kReprojectAbove) return {project(m), kind_};
    return {m, kind_};
  }

  GroupElement projected(const Matrix& m) const { return {project(m), kind_}; }

  /// Coordinates of an algebra element in the (orthogonal) basis.
  Eigen::VectorXd coordinates(const Matrix& x) const {
    Eigen::VectorXd c(basis_.size());
    for (std::size_t k = 0; k < basis_.size(); ++k)
      c[k] = (basis_[k].adjoint() * x).trace().real() / basis_[k].squaredNorm();
    return c;
  }

  AlgebraElement from_coordinates(const Eigen::VectorXd& c) const {
    Matrix x = Matrix::Zero(dim_, dim_);
    for (std::size_t k = 0; k < basis_.size(); ++k) x += c[k] * basis_[k];
    return {x, kind_};
  }

  template <class Rng>
  GroupElement random(Rng& rng) const {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    switch (kind_) {
      case GroupKind::Trivial: return identity();
      case GroupKind::U1: return {Matrix::Constant(1, 1, std::polar(1.0, angle(rng))), kind_};
      case GroupKind::R: return {Matrix::Constant(1, 1, std::exp(normal(rng))), kind_};
      case GroupKind::Z2: {
        std::bernoulli_distribution coin;
        return {Matrix::Constant(1, 1, coin(rng) ? 1.0 : -1.0), kind_};
      }
      case GroupKind::SU2: return {random_su2(rng), kind_};
      case GroupKind::U2: {
        const double theta = angle(rng);
        const Matrix su = random_su2(rng);
        return {std::polar(1.0, theta) * su, kind_};
      }
      case GroupKind::SO3: {
        const Matrix q = random_su2(rng);
        return {su2_to_so3(q), kind_};
      }
    }
    return identity();
  }

  template <class Rng>
  AlgebraElement random_algebra(Rng& rng, double scale = 1.0) const {
    std::normal_distribution<double> normal;
    Eigen::VectorXd c(basis_.size());
    for (auto& v : c) v = scale * normal(rng);
    return from_coordinates(c);
  }

  /// Adjoint action of an SU(2) element as a rotation of su(2) coordinates.
  static Matrix su2_to_so3(const Matrix& q) {
    Matrix r(3, 3);
    const Complex i(0, 1);
    for (int j = 1; j <= 3; ++j) {
      const Matrix img = q * (i * detail::pauli(j)) * q.adjoint();
      for (int k = 1; k <= 3; ++k)
        r(k - 1, j - 1) = ((i * detail::pauli(k)).adjoint() * img).trace().real() / 2.0;
    }
    return r;
  }

 private:
  template <class Rng>
  static Matrix random_su2(Rng& rng) {
    std::normal_distribution<double> normal;
    Eigen::Vector4d v;
    for (auto& x : v) x = normal(rng);
    v.normalize();
    Matrix m(2, 2);
    m << Complex(v[0], v[1]), Complex(v[2], v[3]), Complex(-v[2], v[3]), Complex(v[0], -v[1]);
    return m;
  }

  GroupKind kind_;
  int dim_ = 1;
  std::vector<Matrix> basis_;
};

inline const GroupInstance& group(GroupKind kind) {
  static const std::array<GroupInstance, 7> instances = {
      GroupInstance(GroupKind::Trivial), GroupInstance(GroupKind::U1),
      GroupInstance(GroupKind::R),       GroupInstance(GroupKind::Z2),
      GroupInstance(GroupKind::SU2),     GroupInstance(GroupKind::U2),
      GroupInstance(GroupKind::SO3)};
  return instances[static_cast<std::size_t>(kind)];
}

inline Matrix inverse_matrix(GroupKind kind, const Matrix& m) {
  if (kind == GroupKind::R) return Matrix::Constant(1, 1, 1.0 / m(0, 0));
  return m.adjoint();
}

inline GroupElement multiply(const GroupElement& a, const GroupElement& b) {
  if (a.group != b.group)
    throw Error("multiply: mismatched groups " + std::string(group_name(a.group)) +
                " and " + std::string(group_name(b.group)));
  return group(a.group).checked(a.value * b.value);
}

inline GroupElement inverse(const GroupElement& a) {
  return {inverse_matrix(a.group, a.value), a.group};
}

inline GroupElement exp(const AlgebraElement& x) {
  const GroupInstance& g = group(x.algebra);
  if (g.is_discrete()) return g.identity();
  if (x.value.rows() == 1) return g.projected(Matrix::Constant(1, 1, std::exp(x.value(0, 0))));
  Matrix e = x.value.exp();
  return g.checked(e);
}

/// Principal logarithm; elements with an eigenvalue on the negative real axis
/// are rejected.
inline AlgebraElement log(const GroupElement& a) {
  const GroupInstance& g = group(a.group);
  if (g.is_discrete()) {
    if ((a.value - Matrix::Identity(g.dim(), g.dim())).norm() > 1e-9)
      throw Error("log: discrete group element is not the identity");
    return g.zero();
  }
  Eigen::ComplexEigenSolver<Matrix> es(a.value);
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const Complex lambda = es.eigenvalues()[k];
    if (lambda.real() < 0 && std::abs(lambda.imag()) < 1e-9 * std::abs(lambda))
      throw Error("log: eigenvalue on the negative real axis (branch ambiguity)");
  }
  Matrix l;
  if (a.value.rows() == 1)
    l = Matrix::Constant(1, 1, std::log(a.value(0, 0)));
  else
    l = a.value.log();
  return {g.project_algebra(l), a.group};
}

inline AlgebraElement bracket(const AlgebraElement& x, const AlgebraElement& y) {
  if (x.algebra != y.algebra) throw Error("bracket: mismatched algebras");
  return {x.value * y.value - y.value * x.value, x.algebra};
}

/// Ad_g(η) = g η g⁻¹
inline AlgebraElement adjoint(const GroupElement& g, const AlgebraElement& eta) {
  if (g.group != eta.algebra) throw Error("adjoint: mismatched group and algebra");
  return {g.value * eta.value * inverse_matrix(g.group, g.value), eta.algebra};
}

inline AlgebraElement operator+(const AlgebraElement& a, const AlgebraElement& b) {
  return {a.value + b.value, a.algebra};
}
inline AlgebraElement operator-(const AlgebraElement& a, const AlgebraElement& b) {
  return {a.value - b.value, a.algebra};
}
inline AlgebraElement operator*(double s, const AlgebraElement& a) {
  return {s * a.value, a.algebra};
}

}  // namespace two_transport

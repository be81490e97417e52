#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "bayestomo/errors.hpp"

namespace bayestomo {

template <typename Scalar>
using ComplexMatrix =
    Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using ComplexVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;
template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using Matrix2c = Eigen::Matrix<std::complex<Scalar>, 2, 2>;

/// Hermitian, positive-semidefinite, unit-trace matrix. Inputs within
/// rounding of these constraints are repaired on construction: the matrix is
/// symmetrized, and eigenvalues in [-kClampTol, 0) are clamped to zero with
/// the trace renormalized. Anything further away throws DomainError.
template <typename Scalar>
class BasicDensityMatrix {
 public:
  using Complex = std::complex<Scalar>;
  using Matrix = ComplexMatrix<Scalar>;

  static constexpr Scalar kHermitianTol = Scalar(1e-12);
  static constexpr Scalar kTraceTol = Scalar(1e-12);
  static constexpr Scalar kClampTol = Scalar(1e-10);

  explicit BasicDensityMatrix(const Matrix& m) : m_(m) { validate(); }

  static BasicDensityMatrix maximally_mixed(Eigen::Index n) {
    if (n < 2) throw DomainError("density matrices need dim >= 2");
    return BasicDensityMatrix(Matrix::Identity(n, n) / Scalar(n));
  }

  /// |psi><psi| for a nonzero state vector (normalized here).
  static BasicDensityMatrix pure(const ComplexVector<Scalar>& psi) {
    const Scalar norm = psi.norm();
    if (!(norm > 0)) throw DomainError("zero state vector");
    const ComplexVector<Scalar> u = psi / norm;
    return BasicDensityMatrix(u * u.adjoint());
  }

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  /// Ascending eigenvalues.
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }

 private:
  void validate() {
    if (m_.rows() != m_.cols() || m_.rows() < 2) {
      throw DomainError("density matrix must be square with dim >= 2");
    }
    if (!m_.allFinite()) throw DomainError("density matrix has non-finite entries");
    const Scalar asym = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
    if (asym > kHermitianTol) throw DomainError("density matrix is not Hermitian");
    m_ = Scalar(0.5) * (m_ + m_.adjoint()).eval();
    if (std::abs(m_.trace().real() - Scalar(1)) > kTraceTol) {
      throw DomainError("density matrix trace differs from 1");
    }

    if (m_.rows() == 2) {
      // Closed form for the smaller eigenvalue of a 2x2 Hermitian matrix.
      const Scalar a = m_(0, 0).real(), d = m_(1, 1).real();
      const Scalar r = std::hypot(Scalar(0.5) * (a - d), std::abs(m_(1, 0)));
      if (Scalar(0.5) * (a + d) - r >= 0) return;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_);
    const auto& ev = es.eigenvalues();
    if (ev.minCoeff() >= 0) return;
    if (ev.minCoeff() < -kClampTol) {
      throw DomainError("density matrix has a negative eigenvalue");
    }
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> clamped = ev.cwiseMax(Scalar(0));
    clamped /= clamped.sum();
    const Matrix& v = es.eigenvectors();
    m_ = v * clamped.template cast<Complex>().asDiagonal() * v.adjoint();
    m_ = Scalar(0.5) * (m_ + m_.adjoint()).eval();
  }

  Matrix m_;
};

using DensityMatrix = BasicDensityMatrix<double>;

/// Qubit chart: rho = (I + x sx + y sy + z sz) / 2 with r = |(x, y, z)| <= 1.
template <typename Scalar>
struct BasicBlochVector {
  static constexpr Scalar kRadiusTol = Scalar(1e-12);

  Vector3<Scalar> v = Vector3<Scalar>::Zero();

  BasicBlochVector() = default;
  BasicBlochVector(Scalar x, Scalar y, Scalar z) : v(x, y, z) {}
  explicit BasicBlochVector(const Vector3<Scalar>& w) : v(w) {}

  Scalar x() const { return v.x(); }
  Scalar y() const { return v.y(); }
  Scalar z() const { return v.z(); }
  Scalar r() const { return v.norm(); }
  bool is_state() const { return r() <= Scalar(1) + kRadiusTol; }
};

using BlochVector = BasicBlochVector<double>;

/// Unit vector selecting a spin measurement direction.
template <typename Scalar>
class BasicMeasurementAxis {
 public:
  static constexpr Scalar kUnitTol = Scalar(1e-12);

  explicit BasicMeasurementAxis(const Vector3<Scalar>& a) : a_(a) {
    if (!a_.allFinite() || std::abs(a_.norm() - Scalar(1)) > kUnitTol) {
      throw DomainError("measurement axis must be a unit vector");
    }
  }
  BasicMeasurementAxis(Scalar ax, Scalar ay, Scalar az)
      : BasicMeasurementAxis(Vector3<Scalar>(ax, ay, az)) {}

  static BasicMeasurementAxis normalized(const Vector3<Scalar>& a) {
    const Scalar n = a.norm();
    if (!(n > 0)) throw DomainError("measurement axis must be nonzero");
    return BasicMeasurementAxis(Vector3<Scalar>(a / n));
  }
  static BasicMeasurementAxis x() { return {Scalar(1), Scalar(0), Scalar(0)}; }
  static BasicMeasurementAxis y() { return {Scalar(0), Scalar(1), Scalar(0)}; }
  static BasicMeasurementAxis z() { return {Scalar(0), Scalar(0), Scalar(1)}; }

  const Vector3<Scalar>& vector() const { return a_; }

  friend bool operator==(const BasicMeasurementAxis& l,
                         const BasicMeasurementAxis& r) {
    return l.a_ == r.a_;
  }

 private:
  Vector3<Scalar> a_;
};

using MeasurementAxis = BasicMeasurementAxis<double>;

inline void check_outcome(int outcome) {
  if (outcome != 1 && outcome != -1) {
    throw DomainError("measurement outcomes are +1 or -1");
  }
}

struct Measurement {
  MeasurementAxis axis;
  int outcome;
};

/// Ordered spin-measurement data.
class MeasurementRecord {
 public:
  MeasurementRecord() = default;

  void push(const MeasurementAxis& axis, int outcome) {
    check_outcome(outcome);
    entries_.push_back({axis, outcome});
  }
  void append(const MeasurementRecord& other) {
    entries_.insert(entries_.end(), other.entries_.begin(),
                    other.entries_.end());
  }
  MeasurementRecord prefix(std::size_t n) const {
    MeasurementRecord out;
    const auto end = entries_.begin() + static_cast<std::ptrdiff_t>(std::min(n, size()));
    out.entries_.assign(entries_.begin(), end);
    return out;
  }
  MeasurementRecord suffix(std::size_t from) const {
    MeasurementRecord out;
    const auto begin = entries_.begin() + static_cast<std::ptrdiff_t>(std::min(from, size()));
    out.entries_.assign(begin, entries_.end());
    return out;
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const Measurement& operator[](std::size_t i) const { return entries_[i]; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  std::vector<Measurement>& entries() { return entries_; }
  const std::vector<Measurement>& entries() const { return entries_; }

 private:
  std::vector<Measurement> entries_;
};

/// Pauli matrices sigma_x, sigma_y, sigma_z.
template <typename Scalar = double>
std::array<Matrix2c<Scalar>, 3> pauli() {
  using C = std::complex<Scalar>;
  Matrix2c<Scalar> sx, sy, sz;
  sx << C(0), C(1), C(1), C(0);
  sy << C(0), C(0, -1), C(0, 1), C(0);
  sz << C(1), C(0), C(0), C(-1);
  return {sx, sy, sz};
}

template <typename Scalar>
BasicDensityMatrix<Scalar> bloch_to_density(const BasicBlochVector<Scalar>& b) {
  if (!b.is_state()) throw DomainError("not a state: Bloch radius exceeds 1");
  using C = std::complex<Scalar>;
  ComplexMatrix<Scalar> m(2, 2);
  const Scalar h = Scalar(0.5);
  m << C(h * (1 + b.z())), C(h * b.x(), -h * b.y()),
      C(h * b.x(), h * b.y()), C(h * (1 - b.z()));
  return BasicDensityMatrix<Scalar>(m);
}

template <typename Scalar>
BasicBlochVector<Scalar> density_to_bloch(const BasicDensityMatrix<Scalar>& rho) {
  if (rho.dim() != 2) throw DomainError("Bloch vectors describe qubits only");
  const auto& m = rho.matrix();
  return {Scalar(2) * m(1, 0).real(), Scalar(2) * m(1, 0).imag(),
          m(0, 0).real() - m(1, 1).real()};
}

/// Born probability of `outcome` (+1 or -1) for a spin measurement along
/// `axis`: (1 + outcome * a.v) / 2. The two outcomes sum to exactly one.
template <typename Scalar>
Scalar born_prob(const BasicBlochVector<Scalar>& v,
                 const BasicMeasurementAxis<Scalar>& axis, int outcome) {
  check_outcome(outcome);
  const Scalar plus =
      std::clamp(Scalar(0.5) * (Scalar(1) + axis.vector().dot(v.v)), Scalar(0),
                 Scalar(1));
  return outcome > 0 ? plus : Scalar(1) - plus;
}

template <typename Scalar>
Scalar born_prob(const BasicDensityMatrix<Scalar>& rho,
                 const BasicMeasurementAxis<Scalar>& axis, int outcome) {
  return born_prob(density_to_bloch(rho), axis, outcome);
}

/// Tr[(I + outcome * a.sigma) rho] / 2, the projector route.
template <typename Scalar>
Scalar born_prob_trace(const BasicDensityMatrix<Scalar>& rho,
                       const BasicMeasurementAxis<Scalar>& axis, int outcome) {
  check_outcome(outcome);
  if (rho.dim() != 2) throw DomainError("spin measurements act on qubits");
  const auto s = pauli<Scalar>();
  const auto& a = axis.vector();
  const Matrix2c<Scalar> projector =
      Scalar(0.5) * (Matrix2c<Scalar>::Identity() +
                     Scalar(outcome) * (a.x() * s[0] + a.y() * s[1] + a.z() * s[2]));
  return (projector * rho.matrix()).trace().real();
}

/// Tr rho^2.
template <typename Scalar>
Scalar purity(const BasicDensityMatrix<Scalar>& rho) {
  return rho.matrix().cwiseAbs2().sum();
}

/// Tr rho^k for 2 <= k <= dim.
template <typename Scalar>
Scalar trace_moment(const BasicDensityMatrix<Scalar>& rho, int k) {
  if (k < 2 || k > rho.dim()) {
    throw DomainError("trace moment order must satisfy 2 <= k <= dim");
  }
  ComplexMatrix<Scalar> power = rho.matrix();
  for (int i = 1; i < k; ++i) power = (power * rho.matrix()).eval();
  return power.trace().real();
}

/// U rho U^dagger.
template <typename Scalar>
BasicDensityMatrix<Scalar> conjugate(const BasicDensityMatrix<Scalar>& rho,
                                     const ComplexMatrix<Scalar>& u) {
  if (u.rows() != rho.dim() || u.cols() != rho.dim()) {
    throw DomainError("unitary and state dimensions differ");
  }
  return BasicDensityMatrix<Scalar>(u * rho.matrix() * u.adjoint());
}

/// SO(3) rotation induced on Bloch vectors by rho -> U rho U^dagger:
/// R_ij = Tr(sigma_i U sigma_j U^dagger) / 2.
template <typename Scalar>
Matrix3<Scalar> rotation_from_su2(const ComplexMatrix<Scalar>& u) {
  if (u.rows() != 2 || u.cols() != 2) throw DomainError("expected a 2x2 unitary");
  const auto s = pauli<Scalar>();
  const Matrix2c<Scalar> uu = u;
  Matrix3<Scalar> r;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      r(i, j) = Scalar(0.5) * (s[i] * uu * s[j] * uu.adjoint()).trace().real();
    }
  }
  return r;
}

}  // namespace bayestomo

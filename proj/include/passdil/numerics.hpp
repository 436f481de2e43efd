#ifndef PASSDIL_NUMERICS_HPP
#define PASSDIL_NUMERICS_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace passdil {

using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input (shapes, symmetry, finiteness).
class InvalidInput : public Error {
public:
  using Error::Error;
};

/// Numerical tolerances. A residual r passes against a quantity of size
/// `scale` when r <= rel * scale + abs.
struct Tolerance {
  double rel = 1e-9;
  double abs = 1e-12;

  [[nodiscard]] double bound(double scale) const { return rel * scale + abs; }

  void validate() const {
    if (!(rel >= 0.0) || !(abs >= 0.0) || !std::isfinite(rel) || !std::isfinite(abs))
      throw InvalidInput("tolerance components must be finite and nonnegative");
  }
};

namespace detail {

inline void require_finite(const auto& a, const char* what) {
  if (!a.allFinite())
    throw InvalidInput(std::string(what) + ": matrix has non-finite entries");
}

inline void require_square(const auto& a, const char* what) {
  if (a.rows() != a.cols())
    throw InvalidInput(std::string(what) + ": matrix must be square");
}

}  // namespace detail

/// Largest absolute entry; zero for empty matrices.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().maxCoeff();
}

/// Spectral norm (largest singular value).
inline double spectral_norm(const RealMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<RealMatrix> svd(a);
  return svd.singularValues()(0);
}

inline RealMatrix symmetrize(const RealMatrix& a) { return 0.5 * (a + a.transpose()); }

inline double rank_threshold(double sigma_max, const Tolerance& tol) {
  return tol.rel * sigma_max + tol.abs;
}

inline std::size_t numerical_rank(const RealMatrix& a, const Tolerance& tol = {}) {
  detail::require_finite(a, "numerical_rank");
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<RealMatrix> svd(a);
  const auto& sv = svd.singularValues();
  const double cut = rank_threshold(sv(0), tol);
  return static_cast<std::size_t>((sv.array() > cut).count());
}

/// Moore-Penrose pseudoinverse. Singular values at or below
/// tol.rel * sigma_max + tol.abs are treated as zero.
inline RealMatrix pseudo_inverse(const RealMatrix& a, const Tolerance& tol = {}) {
  detail::require_finite(a, "pseudo_inverse");
  if (a.size() == 0) return RealMatrix::Zero(a.cols(), a.rows());
  Eigen::JacobiSVD<RealMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cut = rank_threshold(sv(0), tol);
  RealVector inv = RealVector::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) inv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

/// Orthogonal projector onto ker(a), built from the right singular vectors
/// whose singular values fall below the rank threshold.
inline RealMatrix kernel_projector(const RealMatrix& a, const Tolerance& tol = {}) {
  detail::require_finite(a, "kernel_projector");
  const Eigen::Index n = a.cols();
  if (n == 0) return RealMatrix(0, 0);
  if (a.rows() == 0) return RealMatrix::Identity(n, n);
  Eigen::JacobiSVD<RealMatrix> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cut = rank_threshold(sv(0), tol);
  Eigen::Index rank = (sv.array() > cut).count();
  const RealMatrix basis = svd.matrixV().rightCols(n - rank);
  return symmetrize(basis * basis.transpose());
}

/// Unique symmetric positive semidefinite square root.
///
/// Eigenvalues whose magnitude is within tol.rel * ||a|| + tol.abs of zero are
/// set to zero, so round-off in products such as I - X X^T neither produces
/// spurious O(sqrt(eps)) components nor trips the negativity check.
inline RealMatrix sqrt_psd(const RealMatrix& a, const Tolerance& tol = {}) {
  detail::require_finite(a, "sqrt_psd");
  detail::require_square(a, "sqrt_psd");
  if (a.size() == 0) return a;
  const double scale = max_abs(a);
  if (max_abs(a - a.transpose()) > tol.bound(std::max(scale, 1.0)))
    throw InvalidInput("sqrt_psd: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(symmetrize(a));
  RealVector ev = es.eigenvalues();
  const double norm = ev.cwiseAbs().maxCoeff();
  const double cut = tol.bound(norm);
  if (ev(0) < -cut)
    throw InvalidInput("sqrt_psd: matrix is not positive semidefinite (min eigenvalue " +
                       std::to_string(ev(0)) + ")");
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = ev(i) <= cut ? 0.0 : std::sqrt(ev(i));
  const RealMatrix& v = es.eigenvectors();
  return symmetrize(v * ev.asDiagonal() * v.transpose());
}

struct HermitianPsdCheck {
  bool ok = false;
  double min_eigenvalue = 0.0;
  double norm = 0.0;  // spectral norm of the embedded Hermitian matrix
};

/// Decides whether sym - i * anti is positive semidefinite, i.e. whether
/// sym >= i * anti as an operator inequality. Covers both gamma >= i sigma and
/// the complete-positivity condition Y >= i sigma - i X sigma X^T.
inline HermitianPsdCheck check_psd_hermitian_embedding(const RealMatrix& sym,
                                                       const RealMatrix& anti,
                                                       const Tolerance& tol = {}) {
  detail::require_finite(sym, "hermitian embedding");
  detail::require_finite(anti, "hermitian embedding");
  detail::require_square(sym, "hermitian embedding");
  if (sym.rows() != anti.rows() || sym.cols() != anti.cols() || sym.rows() % 2 != 0)
    throw InvalidInput("hermitian embedding: operands must share one even dimension");
  const double scale = std::max({1.0, max_abs(sym), max_abs(anti)});
  if (max_abs(sym - sym.transpose()) > tol.bound(scale))
    throw InvalidInput("hermitian embedding: real part is not symmetric");
  if (max_abs(anti + anti.transpose()) > tol.bound(scale))
    throw InvalidInput("hermitian embedding: imaginary part is not antisymmetric");

  const ComplexMatrix h = symmetrize(sym).cast<Complex>() -
                          Complex(0.0, 1.0) * (0.5 * (anti - anti.transpose())).cast<Complex>();
  HermitianPsdCheck out;
  if (h.size() == 0) {
    out.ok = true;
    return out;
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  out.min_eigenvalue = ev(0);
  out.norm = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  out.ok = out.min_eigenvalue >= -tol.bound(out.norm);
  return out;
}

inline bool is_psd_hermitian_embedding(const RealMatrix& sym, const RealMatrix& anti,
                                       const Tolerance& tol = {}) {
  return check_psd_hermitian_embedding(sym, anti, tol).ok;
}

/// Direct sum a (+) b.
inline RealMatrix direct_sum(const RealMatrix& a, const RealMatrix& b) {
  RealMatrix out = RealMatrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

}  // namespace passdil

#endif  // PASSDIL_NUMERICS_HPP

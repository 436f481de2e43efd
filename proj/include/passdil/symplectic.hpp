#ifndef PASSDIL_SYMPLECTIC_HPP
#define PASSDIL_SYMPLECTIC_HPP

#include "passdil/numerics.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace passdil {

/// Quadrature ordering. `blocked` is (Q_1..Q_m, P_1..P_m), `interleaved` is
/// (Q_1, P_1, ..., Q_m, P_m).
enum class ModeOrdering { blocked, interleaved };

inline std::string_view to_string(ModeOrdering o) {
  return o == ModeOrdering::blocked ? "blocked" : "interleaved";
}

inline ModeOrdering parse_ordering(std::string_view s) {
  if (s == "blocked") return ModeOrdering::blocked;
  if (s == "interleaved") return ModeOrdering::interleaved;
  throw InvalidInput("unknown mode ordering '" + std::string(s) + "'");
}

/// System/environment mode split. In blocked ordering a split matrix is laid
/// out as (Q_sys, P_sys, Q_env, P_env); with environment == 0 this is the plain
/// blocked ordering on `system` modes.
struct Split {
  Eigen::Index system = 0;
  Eigen::Index environment = 0;

  [[nodiscard]] Eigen::Index modes() const { return system + environment; }
  [[nodiscard]] Eigen::Index dim() const { return 2 * modes(); }
  friend bool operator==(const Split&, const Split&) = default;
};

struct SymplecticForm {
  Eigen::Index modes = 0;
  ModeOrdering ordering = ModeOrdering::blocked;
  RealMatrix matrix;
};

/// sigma_{2m} in blocked ordering: [[0, I], [-I, 0]].
inline RealMatrix sigma(Eigen::Index m) {
  RealMatrix s = RealMatrix::Zero(2 * m, 2 * m);
  s.topRightCorner(m, m).setIdentity();
  s.bottomLeftCorner(m, m) = -RealMatrix::Identity(m, m);
  return s;
}

/// sigma_{2n} (+) sigma_{2l} for a split.
inline RealMatrix sigma(const Split& split) {
  return direct_sum(sigma(split.system), sigma(split.environment));
}

/// Blocked position of each interleaved coordinate, for a split layout.
inline std::vector<Eigen::Index> interleaved_to_blocked(const Split& split) {
  std::vector<Eigen::Index> pos(static_cast<std::size_t>(split.dim()));
  const Eigen::Index n = split.system;
  const Eigen::Index l = split.environment;
  for (Eigen::Index k = 0; k < split.modes(); ++k) {
    const auto q = static_cast<std::size_t>(2 * k);
    if (k < n) {
      pos[q] = k;
      pos[q + 1] = n + k;
    } else {
      pos[q] = 2 * n + (k - n);
      pos[q + 1] = 2 * n + l + (k - n);
    }
  }
  return pos;
}

/// Permutation matrix P with v_blocked = P * v_interleaved.
inline RealMatrix interleaved_to_blocked_matrix(const Split& split) {
  const auto pos = interleaved_to_blocked(split);
  RealMatrix p = RealMatrix::Zero(split.dim(), split.dim());
  for (std::size_t i = 0; i < pos.size(); ++i) p(pos[i], static_cast<Eigen::Index>(i)) = 1.0;
  return p;
}

/// Conjugates a square matrix by the permutation between two orderings.
/// `split` selects the per-subsystem blocked layout; by default the whole
/// matrix is one subsystem.
inline RealMatrix reorder(const RealMatrix& m, ModeOrdering from, ModeOrdering to,
                          std::optional<Split> split = std::nullopt) {
  detail::require_square(m, "reorder");
  if (m.rows() % 2 != 0) throw InvalidInput("reorder: dimension must be even");
  const Split s = split.value_or(Split{m.rows() / 2, 0});
  if (s.dim() != m.rows()) throw InvalidInput("reorder: split does not match dimension");
  if (from == to) return m;
  const auto pos = interleaved_to_blocked(s);
  RealMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < pos.size(); ++i)
    for (std::size_t j = 0; j < pos.size(); ++j) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      if (from == ModeOrdering::interleaved)
        out(pos[i], pos[j]) = m(ii, jj);
      else
        out(ii, jj) = m(pos[i], pos[j]);
    }
  return out;
}

inline SymplecticForm standard_form(Eigen::Index m, ModeOrdering ordering) {
  if (m < 1) throw InvalidInput("standard_form: need at least one mode");
  return {m, ordering, reorder(sigma(m), ModeOrdering::blocked, ordering)};
}

/// Maps a complex p x q matrix u to the real 2p x 2q matrix
/// [[Re u, Im u], [-Im u, Re u]].
inline RealMatrix realify(const ComplexMatrix& u) {
  const Eigen::Index p = u.rows();
  const Eigen::Index q = u.cols();
  RealMatrix s(2 * p, 2 * q);
  s.topLeftCorner(p, q) = u.real();
  s.topRightCorner(p, q) = u.imag();
  s.bottomLeftCorner(p, q) = -u.imag();
  s.bottomRightCorner(p, q) = u.real();
  return s;
}

/// Deviation of a real 2p x 2q matrix from the [[A, B], [-B, A]] shape.
inline double complex_form_residual(const RealMatrix& s) {
  const Eigen::Index p = s.rows() / 2;
  const Eigen::Index q = s.cols() / 2;
  return std::max(max_abs(s.topLeftCorner(p, q) - s.bottomRightCorner(p, q)),
                  max_abs(s.topRightCorner(p, q) + s.bottomLeftCorner(p, q)));
}

/// Inverse of realify; averages the redundant blocks.
inline ComplexMatrix complexify(const RealMatrix& s) {
  if (s.rows() % 2 != 0 || s.cols() % 2 != 0)
    throw InvalidInput("complexify: dimensions must be even");
  const Eigen::Index p = s.rows() / 2;
  const Eigen::Index q = s.cols() / 2;
  const RealMatrix re = 0.5 * (s.topLeftCorner(p, q) + s.bottomRightCorner(p, q));
  const RealMatrix im = 0.5 * (s.topRightCorner(p, q) - s.bottomLeftCorner(p, q));
  ComplexMatrix u(p, q);
  u.real() = re;
  u.imag() = im;
  return u;
}

struct MembershipReport {
  bool ok = false;
  double orthogonality_residual = 0.0;  // max |M M^T - I|
  double symplectic_residual = 0.0;     // max |M sigma M^T - sigma|
  double commutator_residual = 0.0;     // max |M sigma - sigma M|
  bool orthogonal = false;
  bool symplectic = false;
  bool commutes = false;

  [[nodiscard]] std::string failure() const {
    if (ok) return {};
    if (!orthogonal && !symplectic) return "neither orthogonal nor symplectic";
    return orthogonal ? "not symplectic" : "not orthogonal";
  }
};

/// Membership test for Sp(2m) intersect O(2m) with respect to sigma(split).
inline MembershipReport is_orthogonal_symplectic(const RealMatrix& m, const Tolerance& tol = {},
                                                 std::optional<Split> split = std::nullopt) {
  detail::require_finite(m, "is_orthogonal_symplectic");
  detail::require_square(m, "is_orthogonal_symplectic");
  if (m.rows() % 2 != 0) throw InvalidInput("is_orthogonal_symplectic: dimension must be even");
  const Split s = split.value_or(Split{m.rows() / 2, 0});
  if (s.dim() != m.rows()) throw InvalidInput("is_orthogonal_symplectic: split mismatch");
  const RealMatrix form = sigma(s);
  const RealMatrix id = RealMatrix::Identity(m.rows(), m.cols());
  MembershipReport r;
  r.orthogonality_residual = max_abs(m * m.transpose() - id);
  r.symplectic_residual = max_abs(m * form * m.transpose() - form);
  r.commutator_residual = max_abs(m * form - form * m);
  const double bound = tol.bound(std::max(1.0, max_abs(m)));
  r.orthogonal = r.orthogonality_residual <= bound;
  r.symplectic = r.symplectic_residual <= bound;
  r.commutes = r.commutator_residual <= bound;
  r.ok = r.orthogonal && r.symplectic;
  return r;
}

/// A validated element of Sp(2m) intersect O(2m), optionally carrying a
/// system/environment split that exposes the blocks s1..s4.
class OrthogonalSymplectic {
public:
  OrthogonalSymplectic(RealMatrix m, Split split, const Tolerance& tol = {})
      : matrix_(std::move(m)), split_(split) {
    if (split_.dim() != matrix_.rows())
      throw InvalidInput("OrthogonalSymplectic: split does not match dimension");
    const auto r = is_orthogonal_symplectic(matrix_, tol, split_);
    if (!r.ok) throw InvalidInput("OrthogonalSymplectic: matrix is " + r.failure());
  }

  explicit OrthogonalSymplectic(RealMatrix m, const Tolerance& tol = {})
      : OrthogonalSymplectic(m, Split{m.rows() / 2, 0}, tol) {}

  [[nodiscard]] const RealMatrix& matrix() const { return matrix_; }
  [[nodiscard]] const Split& split() const { return split_; }
  [[nodiscard]] Eigen::Index modes() const { return split_.modes(); }

  [[nodiscard]] RealMatrix s1() const { return matrix_.topLeftCorner(2 * n(), 2 * n()); }
  [[nodiscard]] RealMatrix s2() const { return matrix_.topRightCorner(2 * n(), 2 * l()); }
  [[nodiscard]] RealMatrix s3() const { return matrix_.bottomLeftCorner(2 * l(), 2 * n()); }
  [[nodiscard]] RealMatrix s4() const { return matrix_.bottomRightCorner(2 * l(), 2 * l()); }

  [[nodiscard]] OrthogonalSymplectic transpose() const {
    return OrthogonalSymplectic(matrix_.transpose(), split_);
  }

private:
  [[nodiscard]] Eigen::Index n() const { return split_.system; }
  [[nodiscard]] Eigen::Index l() const { return split_.environment; }

  RealMatrix matrix_;
  Split split_;
};

inline bool is_unitary(const ComplexMatrix& u, const Tolerance& tol = {}) {
  if (u.rows() != u.cols()) return false;
  const ComplexMatrix id = ComplexMatrix::Identity(u.rows(), u.cols());
  return max_abs(u * u.adjoint() - id) <= tol.bound(1.0);
}

/// The isomorphism U(n+l) -> Sp(2(n+l)) intersect O(2(n+l)), block by block:
/// each u_i becomes [[Re u_i, Im u_i], [-Im u_i, Re u_i]]. `system_modes`
/// defaults to all modes (no environment).
inline OrthogonalSymplectic phi_iso(const ComplexMatrix& u,
                                    std::optional<Eigen::Index> system_modes = std::nullopt,
                                    const Tolerance& tol = {}) {
  detail::require_finite(u, "phi_iso");
  if (!is_unitary(u, tol)) throw InvalidInput("phi_iso: matrix is not unitary");
  const Eigen::Index total = u.rows();
  const Eigen::Index n = system_modes.value_or(total);
  if (n < 0 || n > total) throw InvalidInput("phi_iso: invalid system mode count");
  const Eigen::Index l = total - n;
  RealMatrix s(2 * total, 2 * total);
  s.topLeftCorner(2 * n, 2 * n) = realify(u.topLeftCorner(n, n));
  s.topRightCorner(2 * n, 2 * l) = realify(u.topRightCorner(n, l));
  s.bottomLeftCorner(2 * l, 2 * n) = realify(u.bottomLeftCorner(l, n));
  s.bottomRightCorner(2 * l, 2 * l) = realify(u.bottomRightCorner(l, l));
  return OrthogonalSymplectic(std::move(s), Split{n, l}, tol);
}

/// Recovers the unitary U with phi_iso(U) == s.
inline ComplexMatrix phi_inverse(const RealMatrix& s, const Split& split, const Tolerance& tol = {}) {
  detail::require_finite(s, "phi_inverse");
  if (split.dim() != s.rows() || s.rows() != s.cols())
    throw InvalidInput("phi_inverse: split does not match dimension");
  const Eigen::Index n = split.system;
  const Eigen::Index l = split.environment;
  const RealMatrix b1 = s.topLeftCorner(2 * n, 2 * n);
  const RealMatrix b2 = s.topRightCorner(2 * n, 2 * l);
  const RealMatrix b3 = s.bottomLeftCorner(2 * l, 2 * n);
  const RealMatrix b4 = s.bottomRightCorner(2 * l, 2 * l);
  const double bound = tol.bound(std::max(1.0, max_abs(s)));
  for (const RealMatrix* b : {&b1, &b2, &b3, &b4})
    if (b->size() != 0 && complex_form_residual(*b) > bound)
      throw InvalidInput("phi_inverse: matrix is not in the image of the unitary isomorphism");
  ComplexMatrix u(n + l, n + l);
  u.topLeftCorner(n, n) = complexify(b1);
  u.topRightCorner(n, l) = complexify(b2);
  u.bottomLeftCorner(l, n) = complexify(b3);
  u.bottomRightCorner(l, l) = complexify(b4);
  if (!is_unitary(u, tol)) throw InvalidInput("phi_inverse: matrix is not orthogonal symplectic");
  return u;
}

inline ComplexMatrix phi_inverse(const OrthogonalSymplectic& s, const Tolerance& tol = {}) {
  return phi_inverse(s.matrix(), s.split(), tol);
}

/// Completes (s1 s2) to an orthogonal symplectic (s1 s2; s3 s4).
///
/// The rows of V = (u1 u2) are completed to a unitary with an orthonormal
/// basis of ker(V) taken from a Householder QR of V^dagger, which fixes the
/// environment gauge deterministically.
inline OrthogonalSymplectic extend_to_orthogonal_symplectic(const RealMatrix& s1,
                                                            const RealMatrix& s2,
                                                            const Tolerance& tol = {}) {
  detail::require_finite(s1, "extend_to_orthogonal_symplectic");
  detail::require_finite(s2, "extend_to_orthogonal_symplectic");
  detail::require_square(s1, "extend_to_orthogonal_symplectic");
  if (s1.rows() % 2 != 0 || s2.rows() != s1.rows() || s2.cols() % 2 != 0)
    throw InvalidInput("extend_to_orthogonal_symplectic: block shapes are inconsistent");
  const Eigen::Index n = s1.rows() / 2;
  const Eigen::Index l = s2.cols() / 2;
  const double scale = std::max({1.0, max_abs(s1), max_abs(s2)});
  const double bound = tol.bound(scale);

  const RealMatrix id = RealMatrix::Identity(2 * n, 2 * n);
  const RealMatrix sn = sigma(n);
  const RealMatrix orth = s1 * s1.transpose() + s2 * s2.transpose() - id;
  const RealMatrix symp = s1 * sn * s1.transpose() + s2 * sigma(l) * s2.transpose() - sn;
  if (max_abs(orth) > bound || max_abs(symp) > bound)
    throw InvalidInput("extend_to_orthogonal_symplectic: rows of (s1 s2) are not orthonormal "
                       "and symplectic");
  if (complex_form_residual(s1) > bound || (l > 0 && complex_form_residual(s2) > bound))
    throw InvalidInput("extend_to_orthogonal_symplectic: blocks do not commute with sigma");

  ComplexMatrix v(n, n + l);
  v.leftCols(n) = complexify(s1);
  if (l > 0) v.rightCols(l) = complexify(s2);

  ComplexMatrix u(n + l, n + l);
  u.topRows(n) = v;
  if (l > 0) {
    Eigen::HouseholderQR<ComplexMatrix> qr(v.adjoint());
    const ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n + l, n + l);
    u.bottomRows(l) = q.rightCols(l).adjoint();
  }

  RealMatrix s(2 * (n + l), 2 * (n + l));
  s.topLeftCorner(2 * n, 2 * n) = s1;
  s.topRightCorner(2 * n, 2 * l) = s2;
  s.bottomLeftCorner(2 * l, 2 * n) = realify(u.bottomLeftCorner(l, n));
  s.bottomRightCorner(2 * l, 2 * l) = realify(u.bottomRightCorner(l, l));
  return OrthogonalSymplectic(std::move(s), Split{n, l}, tol);
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases
/// of diag(R) absorbed into Q.
inline ComplexMatrix random_unitary(Eigen::Index m, std::uint64_t seed) {
  if (m < 1) throw InvalidInput("random_unitary: need at least one mode");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix z(m, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < m; ++i) {
      const double re = normal(gen);
      const double im = normal(gen);
      z(i, j) = Complex(re, im) / std::sqrt(2.0);
    }
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(m, m);
  const ComplexMatrix& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < m; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0.0) q.col(j) *= r(j, j) / mag;
  }
  return q;
}

inline OrthogonalSymplectic random_orthogonal_symplectic(Eigen::Index m, std::uint64_t seed,
                                                         std::optional<Split> split = std::nullopt) {
  const Split s = split.value_or(Split{m, 0});
  if (s.modes() != m) throw InvalidInput("random_orthogonal_symplectic: split mismatch");
  return phi_iso(random_unitary(m, seed), s.system);
}

/// The (A, B) blocks of a matrix [[A, B], [-B, A]].
struct BlockForm {
  RealMatrix a;
  RealMatrix b;

  [[nodiscard]] RealMatrix matrix() const {
    const Eigen::Index m = a.rows();
    RealMatrix out(2 * m, 2 * m);
    out << a, b, -b, a;
    return out;
  }
  [[nodiscard]] ComplexMatrix complex() const {
    ComplexMatrix u(a.rows(), a.cols());
    u.real() = a;
    u.imag() = b;
    return u;
  }
};

inline double sigma_commutator(const RealMatrix& m) {
  const RealMatrix s = sigma(m.rows() / 2);
  return max_abs(m * s - s * m);
}

/// Returns (A, B) if m commutes with blocked sigma within tolerance.
inline std::optional<BlockForm> block_form_check(const RealMatrix& m, const Tolerance& tol = {}) {
  detail::require_finite(m, "block_form_check");
  detail::require_square(m, "block_form_check");
  if (m.rows() % 2 != 0) throw InvalidInput("block_form_check: dimension must be even");
  if (sigma_commutator(m) > tol.bound(std::max(1.0, max_abs(m)))) return std::nullopt;
  const Eigen::Index k = m.rows() / 2;
  BlockForm f;
  f.a = 0.5 * (m.topLeftCorner(k, k) + m.bottomRightCorner(k, k));
  f.b = 0.5 * (m.topRightCorner(k, k) - m.bottomLeftCorner(k, k));
  return f;
}

}  // namespace passdil

#endif  // PASSDIL_SYMPLECTIC_HPP

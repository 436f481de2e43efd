#ifndef PASSDIL_GAUSSIAN_HPP
#define PASSDIL_GAUSSIAN_HPP

#include "passdil/numerics.hpp"
#include "passdil/symplectic.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace passdil {

/// Gaussian state in blocked ordering: displacement d and covariance gamma.
struct GaussianState {
  RealVector d;
  RealMatrix gamma;

  [[nodiscard]] Eigen::Index modes() const { return gamma.rows() / 2; }

  static GaussianState with_covariance(RealMatrix gamma) {
    RealVector d = RealVector::Zero(gamma.rows());
    return {std::move(d), std::move(gamma)};
  }
};

/// Gaussian channel gamma -> X gamma X^T + Y, d -> X d (no displacement term).
struct GaussianChannel {
  RealMatrix x;
  RealMatrix y;

  [[nodiscard]] Eigen::Index modes() const { return x.rows() / 2; }

  static GaussianChannel identity(Eigen::Index n) {
    return {RealMatrix::Identity(2 * n, 2 * n), RealMatrix::Zero(2 * n, 2 * n)};
  }
};

struct Validation {
  bool ok = false;
  double symmetry_residual = 0.0;
  double min_eigenvalue = 0.0;  // of the Hermitian matrix tested for positivity
  std::string reason;
};

namespace detail {

inline void require_even_square(const RealMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() % 2 != 0 || m.rows() == 0)
    throw InvalidInput(std::string(what) + ": expected a nonempty square matrix of even dimension");
}

inline void require_channel_shape(const GaussianChannel& c) {
  require_even_square(c.x, "channel X");
  require_even_square(c.y, "channel Y");
  if (c.x.rows() != c.y.rows()) throw InvalidInput("channel: X and Y dimensions differ");
  require_finite(c.x, "channel X");
  require_finite(c.y, "channel Y");
}

}  // namespace detail

/// gamma symmetric and gamma >= i sigma.
inline Validation validate_covariance(const RealMatrix& gamma, const Tolerance& tol = {}) {
  detail::require_even_square(gamma, "covariance");
  detail::require_finite(gamma, "covariance");
  Validation v;
  v.symmetry_residual = max_abs(gamma - gamma.transpose());
  if (v.symmetry_residual > tol.bound(std::max(1.0, max_abs(gamma)))) {
    v.reason = "covariance matrix is not symmetric";
    return v;
  }
  const auto psd = check_psd_hermitian_embedding(symmetrize(gamma), sigma(gamma.rows() / 2), tol);
  v.min_eigenvalue = psd.min_eigenvalue;
  v.ok = psd.ok;
  if (!v.ok) v.reason = "covariance violates the uncertainty relation gamma >= i sigma";
  return v;
}

inline Validation validate_state(const GaussianState& s, const Tolerance& tol = {}) {
  if (s.d.size() != s.gamma.rows()) throw InvalidInput("state: displacement length mismatch");
  return validate_covariance(s.gamma, tol);
}

/// Y symmetric and Y >= i sigma - i X sigma X^T.
inline Validation validate_channel(const GaussianChannel& c, const Tolerance& tol = {}) {
  detail::require_channel_shape(c);
  Validation v;
  v.symmetry_residual = max_abs(c.y - c.y.transpose());
  if (v.symmetry_residual > tol.bound(std::max(1.0, max_abs(c.y)))) {
    v.reason = "Y is not symmetric";
    return v;
  }
  const RealMatrix s = sigma(c.modes());
  const RealMatrix anti = s - c.x * s * c.x.transpose();
  const auto psd = check_psd_hermitian_embedding(symmetrize(c.y), 0.5 * (anti - anti.transpose()), tol);
  v.min_eigenvalue = psd.min_eigenvalue;
  v.ok = psd.ok;
  if (!v.ok) v.reason = "channel is not completely positive";
  return v;
}

inline GaussianState apply(const GaussianChannel& c, const GaussianState& s) {
  detail::require_channel_shape(c);
  if (s.gamma.rows() != c.x.rows() || s.d.size() != c.x.rows())
    throw InvalidInput("apply: channel and state dimensions differ");
  return {c.x * s.d, symmetrize(c.x * s.gamma * c.x.transpose() + c.y)};
}

/// second o first.
inline GaussianChannel compose(const GaussianChannel& second, const GaussianChannel& first) {
  detail::require_channel_shape(second);
  detail::require_channel_shape(first);
  if (second.x.rows() != first.x.rows()) throw InvalidInput("compose: mode counts differ");
  return {second.x * first.x,
          symmetrize(second.x * first.y * second.x.transpose() + second.y)};
}

/// Channel (S, 0) of a symplectic S. Squeezers are accepted; only S sigma S^T
/// = sigma is required.
inline GaussianChannel unitary_channel(const RealMatrix& s, const Tolerance& tol = {}) {
  detail::require_even_square(s, "unitary_channel");
  detail::require_finite(s, "unitary_channel");
  const RealMatrix form = sigma(s.rows() / 2);
  if (max_abs(s * form * s.transpose() - form) > tol.bound(std::max(1.0, max_abs(s) * max_abs(s))))
    throw InvalidInput("unitary_channel: matrix is not symplectic");
  return {s, RealMatrix::Zero(s.rows(), s.cols())};
}

inline GaussianChannel unitary_channel(const OrthogonalSymplectic& s) {
  if (s.split().environment != 0)
    throw InvalidInput("unitary_channel: expected a matrix without environment split");
  return {s.matrix(), RealMatrix::Zero(s.matrix().rows(), s.matrix().cols())};
}

/// Two-mode beamsplitter of transmissivity lambda,
/// [[sqrt(l) I2, sqrt(1-l) I2], [sqrt(1-l) I2, -sqrt(l) I2]] in interleaved
/// ordering. With one system and one environment mode, the interleaved
/// layout coincides with the split blocked layout.
inline OrthogonalSymplectic beamsplitter(double lambda, ModeOrdering ordering) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw InvalidInput("beamsplitter: transmissivity must lie in [0, 1]");
  const double t = std::sqrt(lambda);
  const double r = std::sqrt(1.0 - lambda);
  const RealMatrix i2 = RealMatrix::Identity(2, 2);
  RealMatrix s(4, 4);
  s << t * i2, r * i2, r * i2, -t * i2;
  if (ordering == ModeOrdering::interleaved) return OrthogonalSymplectic(std::move(s), Split{1, 1});
  return OrthogonalSymplectic(reorder(s, ModeOrdering::interleaved, ModeOrdering::blocked));
}

/// diag(v) (+) diag(v) in blocked ordering.
inline RealMatrix doubled_diagonal(const RealVector& v) {
  RealVector dd(2 * v.size());
  dd << v, v;
  return dd.asDiagonal();
}

/// Multi-mode additive channel: system mode i meets environment mode i on a
/// beamsplitter of transmissivity lambda_i. X = diag(sqrt(lambda)) doubled,
/// Y = (I - X X^T)^{1/2} gamma_E (I - X X^T)^{1/2}.
inline GaussianChannel additive_channel(std::span<const double> lambda, const RealMatrix& gamma_e,
                                        const Tolerance& tol = {}) {
  const auto n = static_cast<Eigen::Index>(lambda.size());
  if (n == 0) throw InvalidInput("additive_channel: need at least one mode");
  if (gamma_e.rows() != 2 * n) throw InvalidInput("additive_channel: gamma_E dimension mismatch");
  const auto v = validate_covariance(gamma_e, tol);
  if (!v.ok) throw InvalidInput("additive_channel: " + v.reason);
  RealVector t(n);
  RealVector r(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double li = lambda[static_cast<std::size_t>(i)];
    if (!(li >= 0.0 && li <= 1.0))
      throw InvalidInput("additive_channel: transmissivities must lie in [0, 1]");
    t(i) = std::sqrt(li);
    r(i) = std::sqrt(1.0 - li);
  }
  const RealMatrix noise = doubled_diagonal(r);
  return {doubled_diagonal(t), symmetrize(noise * gamma_e * noise)};
}

inline GaussianChannel additive_channel(double lambda, const RealMatrix& gamma_e,
                                        const Tolerance& tol = {}) {
  const std::vector<double> lambdas(static_cast<std::size_t>(gamma_e.rows() / 2), lambda);
  return additive_channel(lambdas, gamma_e, tol);
}

/// [gamma, sigma] = 0, i.e. gamma is the covariance of a passive state.
inline bool is_passive_state(const RealMatrix& gamma, const Tolerance& tol = {}) {
  const auto v = validate_covariance(gamma, tol);
  if (!v.ok) throw InvalidInput("is_passive_state: " + v.reason);
  return sigma_commutator(gamma) <= tol.bound(std::max(1.0, max_abs(gamma)));
}

/// Random valid covariance. Passive: O diag(nu; nu) O^T with O Haar orthogonal
/// symplectic and nu_i in [1, 3]. Squeezed: additionally conjugated by
/// diag(e^r, e^-r) per mode with 0.1 <= |r| <= 1.
inline GaussianState random_state(Eigen::Index n, bool squeezed, std::uint64_t seed) {
  if (n < 1) throw InvalidInput("random_state: need at least one mode");
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> thermal(1.0, 3.0);
  std::uniform_real_distribution<double> squeeze(0.1, 1.0);
  std::bernoulli_distribution sign(0.5);
  RealVector nu(n);
  for (Eigen::Index i = 0; i < n; ++i) nu(i) = thermal(gen);
  const std::uint64_t rotation_seed = gen();
  const RealMatrix o = random_orthogonal_symplectic(n, rotation_seed).matrix();
  RealMatrix gamma = o * doubled_diagonal(nu) * o.transpose();
  if (squeezed) {
    RealVector z(2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double r = sign(gen) ? squeeze(gen) : -squeeze(gen);
      z(i) = std::exp(r);
      z(n + i) = std::exp(-r);
    }
    gamma = z.asDiagonal() * gamma * z.asDiagonal();
  }
  return GaussianState::with_covariance(symmetrize(gamma));
}

}  // namespace passdil

#endif  // PASSDIL_GAUSSIAN_HPP

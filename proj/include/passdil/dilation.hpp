#ifndef PASSDIL_DILATION_HPP
#define PASSDIL_DILATION_HPP

#include "passdil/gaussian.hpp"
#include "passdil/numerics.hpp"
#include "passdil/symplectic.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace passdil {

/// The conditions deciding whether a channel has a passive dilation with a
/// given number of environment modes. Sigma-hat denotes I - X X^T.
struct DilatabilityReport {
  Eigen::Index modes = 0;  // queried environment mode count l
  bool psd_ok = false;       // I - X X^T >= 0
  bool commutes_ok = false;  // [X, sigma] = 0
  bool kernel_ok = false;    // ker Y = ker(I - X X^T)
  bool modes_ok = false;     // 2 l >= rank(I - X X^T)
  std::size_t rank_sigma_hat = 0;
  std::size_t rank_y = 0;
  Eigen::Index min_modes = 0;  // ceil(rank(I - X X^T) / 2)

  double sigma_hat_min_eigenvalue = 0.0;
  double commutator_residual = 0.0;
  double kernel_residual = 0.0;  // max(|P_ker(Sigma-hat) Y|, |P_ker(Y) Sigma-hat|)

  [[nodiscard]] bool dilatable() const { return psd_ok && commutes_ok && kernel_ok; }
  [[nodiscard]] bool overall() const { return dilatable() && modes_ok; }

  /// First failing condition, empty when overall() holds.
  [[nodiscard]] std::string failure() const {
    if (!psd_ok) return "I - X X^T is not positive semidefinite";
    if (!commutes_ok) return "X does not commute with sigma";
    if (!kernel_ok) return "ker(Y) differs from ker(I - X X^T)";
    if (!modes_ok)
      return "too few environment modes: need at least " + std::to_string(min_modes);
    return {};
  }
};

/// Raised when a channel fails the passive dilatability conditions.
class NotDilatable : public Error {
public:
  explicit NotDilatable(DilatabilityReport report)
      : Error("channel is not passively dilatable: " + report.failure()), report_(std::move(report)) {}
  [[nodiscard]] const DilatabilityReport& report() const { return report_; }

private:
  DilatabilityReport report_;
};

/// Passive dilation: orthogonal symplectic S on n + l modes (split blocked
/// layout) and environment covariance gamma_E on l modes.
struct PassiveDilation {
  Split split;
  RealMatrix s;
  RealMatrix gamma_e;

  [[nodiscard]] Eigen::Index system_modes() const { return split.system; }
  [[nodiscard]] Eigen::Index environment_modes() const { return split.environment; }
  [[nodiscard]] RealMatrix s1() const { return s.topLeftCorner(2 * split.system, 2 * split.system); }
  [[nodiscard]] RealMatrix s2() const {
    return s.topRightCorner(2 * split.system, 2 * split.environment);
  }
  [[nodiscard]] RealMatrix s3() const {
    return s.bottomLeftCorner(2 * split.environment, 2 * split.system);
  }
  [[nodiscard]] RealMatrix s4() const {
    return s.bottomRightCorner(2 * split.environment, 2 * split.environment);
  }

  /// Covariance after the dilation acts on gamma: upper-left block of
  /// S (gamma (+) gamma_E) S^T.
  [[nodiscard]] RealMatrix act(const RealMatrix& gamma) const {
    const RealMatrix joint = s * direct_sum(gamma, gamma_e) * s.transpose();
    return symmetrize(joint.topLeftCorner(2 * split.system, 2 * split.system));
  }
};

inline DilatabilityReport check_dilatable(const GaussianChannel& c, Eigen::Index l,
                                          const Tolerance& tol = {}) {
  if (l < 0) throw InvalidInput("check_dilatable: negative environment mode count");
  const auto valid = validate_channel(c, tol);
  if (!valid.ok) throw InvalidInput("check_dilatable: invalid channel: " + valid.reason);

  const Eigen::Index dim = c.x.rows();
  const RealMatrix sigma_hat = symmetrize(RealMatrix::Identity(dim, dim) - c.x * c.x.transpose());
  const RealMatrix y = symmetrize(c.y);

  DilatabilityReport r;
  r.modes = l;
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(sigma_hat, Eigen::EigenvaluesOnly);
  r.sigma_hat_min_eigenvalue = es.eigenvalues()(0);
  r.psd_ok = r.sigma_hat_min_eigenvalue >= -tol.bound(std::max(1.0, max_abs(c.x) * max_abs(c.x)));

  r.commutator_residual = sigma_commutator(c.x);
  r.commutes_ok = r.commutator_residual <= tol.bound(std::max(1.0, max_abs(c.x)));

  r.rank_sigma_hat = numerical_rank(sigma_hat, tol);
  r.rank_y = numerical_rank(y, tol);
  const RealMatrix ker_sigma_hat = kernel_projector(sigma_hat, tol);
  const RealMatrix ker_y = kernel_projector(y, tol);
  r.kernel_residual = std::max(max_abs(ker_sigma_hat * y), max_abs(ker_y * sigma_hat));
  const double kernel_scale = std::max({1.0, max_abs(y), max_abs(sigma_hat)});
  r.kernel_ok = r.rank_y == r.rank_sigma_hat && r.kernel_residual <= tol.bound(kernel_scale);

  r.min_modes = static_cast<Eigen::Index>((r.rank_sigma_hat + 1) / 2);
  r.modes_ok = static_cast<std::size_t>(2 * l) >= r.rank_sigma_hat;
  return r;
}

/// Smallest environment mode count of a passive dilation: rank(Y) / 2.
inline Eigen::Index minimal_modes(const GaussianChannel& c, const Tolerance& tol = {}) {
  const auto r = check_dilatable(c, c.modes(), tol);
  if (!r.dilatable()) throw NotDilatable(r);
  return static_cast<Eigen::Index>(r.rank_y / 2);
}

namespace detail {

/// Widens a 2n x 2k commutant-form block to 2n x 2l by inserting zero
/// columns for environment modes k..l-1 (their Q and P columns).
inline RealMatrix pad_environment(const RealMatrix& s2, Eigen::Index l) {
  const Eigen::Index k = s2.cols() / 2;
  RealMatrix out = RealMatrix::Zero(s2.rows(), 2 * l);
  out.leftCols(k) = s2.leftCols(k);
  out.middleCols(l, k) = s2.rightCols(k);
  return out;
}

/// Environment coupling with fewer than n environment modes: diagonalize the
/// Hermitian matrix mu + i nu of sqrt(Sigma-hat) = [[mu, nu], [-nu, mu]] and
/// keep the columns of sqrt(Sigma-hat) phi(W) carrying nonzero eigenvalues.
inline RealMatrix compress_coupling(const RealMatrix& root, Eigen::Index k) {
  const Eigen::Index n = root.rows() / 2;
  const BlockForm f{0.5 * (root.topLeftCorner(n, n) + root.bottomRightCorner(n, n)),
                    0.5 * (root.topRightCorner(n, n) - root.bottomLeftCorner(n, n))};
  ComplexMatrix h = f.complex();
  h = 0.5 * (h + h.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);

  // Descending eigenvalues; each eigenvector's phase is fixed so that its
  // first non-negligible component is real and positive.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return es.eigenvalues()(a) > es.eigenvalues()(b);
  });
  ComplexMatrix w(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::VectorXcd v = es.eigenvectors().col(order[static_cast<std::size_t>(j)]);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(v(i)) > 1e-8) {
        v *= std::conj(v(i)) / std::abs(v(i));
        break;
      }
    }
    w.col(j) = v;
  }

  const RealMatrix rotated = root * realify(w);
  RealMatrix s2(2 * n, 2 * k);
  s2.leftCols(k) = rotated.leftCols(k);
  s2.rightCols(k) = rotated.middleCols(n, k);
  return s2;
}

}  // namespace detail

/// Builds a passive dilation with l environment modes.
///
/// l == n uses s2 = (I - X X^T)^{1/2}; l > n pads that coupling with vacuum
/// environment modes; l < n compresses the square root onto its 2k nonzero
/// directions (2k = rank(I - X X^T)) and pads to l. In every case
/// gamma_E = s2^+ Y s2^+T + P_ker(s2) and s1 = X.
inline PassiveDilation construct_dilation(const GaussianChannel& c, Eigen::Index l,
                                          const Tolerance& tol = {}) {
  const auto report = check_dilatable(c, l, tol);
  if (!report.overall()) throw NotDilatable(report);

  const Eigen::Index n = c.modes();
  const RealMatrix sigma_hat =
      symmetrize(RealMatrix::Identity(2 * n, 2 * n) - c.x * c.x.transpose());
  const RealMatrix root = sqrt_psd(sigma_hat, tol);

  RealMatrix s2;
  if (l >= n) {
    s2 = detail::pad_environment(root, l);
  } else {
    const auto k = static_cast<Eigen::Index>(report.rank_sigma_hat / 2);
    s2 = detail::pad_environment(detail::compress_coupling(root, k), l);
  }

  const RealMatrix s2_pinv = pseudo_inverse(s2, tol);
  RealMatrix gamma_e = s2_pinv * symmetrize(c.y) * s2_pinv.transpose() + kernel_projector(s2, tol);
  gamma_e = symmetrize(gamma_e);

  const auto s = extend_to_orthogonal_symplectic(c.x, s2, tol);
  return {s.split(), s.matrix(), std::move(gamma_e)};
}

struct DilationVerification {
  bool ok = false;
  int s1_sign = 1;               // s1 = s1_sign * X
  double s1_residual = 0.0;      // |s1 - s1_sign X|
  double sigma_residual = 0.0;   // |s2 sigma s2^T - (sigma - X sigma X^T)|
  double sigma_hat_residual = 0.0;  // |s2 s2^T - (I - X X^T)|
  double noise_residual = 0.0;   // |s2 gamma_E s2^T - Y|
  MembershipReport membership;
  double environment_min_eigenvalue = 0.0;
  bool environment_valid = false;
  double action_residual = 0.0;  // max over sampled states
  std::string failure;

  [[nodiscard]] double max_residual() const {
    return std::max({s1_residual, sigma_residual, sigma_hat_residual, noise_residual,
                     membership.orthogonality_residual, membership.symplectic_residual,
                     action_residual});
  }
};

/// Checks that dil dilates c: the block equations, membership of S, validity
/// of gamma_E and the action on `samples` seeded random states.
inline DilationVerification verify_dilation(const GaussianChannel& c, const PassiveDilation& dil,
                                            const Tolerance& tol = {}, int samples = 20,
                                            std::uint64_t seed = 0x5eedULL) {
  detail::require_channel_shape(c);
  const Eigen::Index n = c.modes();
  const Eigen::Index l = dil.environment_modes();
  if (dil.system_modes() != n || dil.s.rows() != 2 * (n + l) || dil.s.cols() != 2 * (n + l) ||
      dil.gamma_e.rows() != 2 * l || dil.gamma_e.cols() != 2 * l)
    throw InvalidInput("verify_dilation: dilation shape does not match the channel");
  detail::require_finite(dil.s, "dilation S");
  detail::require_finite(dil.gamma_e, "dilation gamma_E");

  DilationVerification v;
  const RealMatrix s1 = dil.s1();
  const RealMatrix s2 = dil.s2();
  const RealMatrix sn = sigma(n);
  const RealMatrix id = RealMatrix::Identity(2 * n, 2 * n);

  const double plus = max_abs(s1 - c.x);
  const double minus = max_abs(s1 + c.x);
  v.s1_sign = plus <= minus ? 1 : -1;
  v.s1_residual = std::min(plus, minus);
  v.sigma_residual =
      max_abs(s2 * sigma(l) * s2.transpose() - (sn - c.x * sn * c.x.transpose()));
  v.sigma_hat_residual = max_abs(s2 * s2.transpose() - (id - c.x * c.x.transpose()));
  v.noise_residual = max_abs(s2 * dil.gamma_e * s2.transpose() - c.y);
  v.membership = is_orthogonal_symplectic(dil.s, tol, dil.split);

  if (l > 0) {
    const auto env = validate_covariance(dil.gamma_e, tol);
    v.environment_min_eigenvalue = env.min_eigenvalue;
    v.environment_valid = env.ok;
  } else {
    v.environment_valid = true;
  }

  const double scale = std::max({1.0, max_abs(c.x), max_abs(c.y), max_abs(dil.gamma_e)});
  std::mt19937_64 gen(seed);
  double action_scale = 1.0;
  for (int k = 0; k < samples; ++k) {
    const auto state = random_state(n, k % 2 == 1, gen());
    const RealMatrix expected = c.x * state.gamma * c.x.transpose() + c.y;
    action_scale = std::max(action_scale, max_abs(expected));
    v.action_residual = std::max(v.action_residual, max_abs(dil.act(state.gamma) - expected));
  }

  const double bound = tol.bound(scale);
  if (v.s1_residual > bound) v.failure = "s1 differs from +-X";
  else if (v.sigma_residual > bound) v.failure = "s2 sigma s2^T != sigma - X sigma X^T";
  else if (v.sigma_hat_residual > bound) v.failure = "s2 s2^T != I - X X^T";
  else if (v.noise_residual > bound) v.failure = "s2 gamma_E s2^T != Y";
  else if (!v.membership.ok) v.failure = "S is " + v.membership.failure();
  else if (!v.environment_valid) v.failure = "gamma_E is not a valid covariance matrix";
  else if (v.action_residual > tol.bound(action_scale)) v.failure = "action on states differs";
  v.ok = v.failure.empty();
  return v;
}

/// Gauge relating two minimal dilations of one channel: o = s2^+ s2' with
/// s2' = s2 o and gamma_E' = o^T gamma_E o.
inline OrthogonalSymplectic relate_minimal_dilations(const PassiveDilation& d1,
                                                     const PassiveDilation& d2,
                                                     const Tolerance& tol = {}) {
  if (!(d1.split == d2.split))
    throw InvalidInput("relate_minimal_dilations: dilations use different mode counts");
  const Eigen::Index l = d1.environment_modes();
  if (l == 0) return OrthogonalSymplectic(RealMatrix(0, 0), Split{0, 0});
  const RealMatrix s2 = d1.s2();
  const RealMatrix s2p = d2.s2();
  if (numerical_rank(s2, tol) != static_cast<std::size_t>(2 * l) ||
      numerical_rank(s2p, tol) != static_cast<std::size_t>(2 * l))
    throw InvalidInput("relate_minimal_dilations: s2 is not injective, dilation is not minimal");
  const double scale = std::max({1.0, max_abs(d1.s), max_abs(d2.s)});
  if (max_abs(d1.s1() - d2.s1()) > tol.bound(scale) ||
      max_abs(s2 * s2.transpose() - s2p * s2p.transpose()) > tol.bound(scale))
    throw InvalidInput("relate_minimal_dilations: dilations describe different channels");
  const RealMatrix y1 = s2 * d1.gamma_e * s2.transpose();
  const RealMatrix y2 = s2p * d2.gamma_e * s2p.transpose();
  if (max_abs(y1 - y2) > tol.bound(std::max({1.0, max_abs(y1), max_abs(y2)})))
    throw InvalidInput("relate_minimal_dilations: dilations describe different channels");

  const RealMatrix o = pseudo_inverse(s2, tol) * s2p;
  const auto m = is_orthogonal_symplectic(o, tol);
  if (!m.ok) throw InvalidInput("relate_minimal_dilations: gauge is " + m.failure());
  return OrthogonalSymplectic(o, Split{l, 0}, tol);
}

/// [Y, sigma] = 0; for passively dilatable channels this is equivalent to
/// having a passive dilation with a passive environment state.
inline bool is_passive_channel(const GaussianChannel& c, const Tolerance& tol = {}) {
  const auto r = check_dilatable(c, c.modes(), tol);
  if (!r.dilatable()) throw NotDilatable(r);
  return sigma_commutator(c.y) <= tol.bound(std::max(1.0, max_abs(c.y)));
}

struct DilatableInstance {
  GaussianChannel channel;
  PassiveDilation dilation;
};

/// Random passively dilatable channel with its generating dilation: S is a
/// Haar orthogonal symplectic on n + l modes, gamma_E a random l-mode state
/// (passive or squeezed), X = s1 and Y = s2 gamma_E s2^T.
inline DilatableInstance random_dilatable_channel(Eigen::Index n, Eigen::Index l, bool passive_env,
                                                  std::uint64_t seed) {
  if (n < 1 || l < 1) throw InvalidInput("random_dilatable_channel: need n, l >= 1");
  std::mt19937_64 gen(seed);
  const std::uint64_t unitary_seed = gen();
  const std::uint64_t env_seed = gen();
  const auto s = random_orthogonal_symplectic(n + l, unitary_seed, Split{n, l});
  const auto env = random_state(l, !passive_env, env_seed);
  const RealMatrix s2 = s.s2();
  GaussianChannel c{s.s1(), symmetrize(s2 * env.gamma * s2.transpose())};
  return {std::move(c), PassiveDilation{s.split(), s.matrix(), env.gamma}};
}

}  // namespace passdil

#endif  // PASSDIL_DILATION_HPP

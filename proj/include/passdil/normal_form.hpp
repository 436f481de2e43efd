#ifndef PASSDIL_NORMAL_FORM_HPP
#define PASSDIL_NORMAL_FORM_HPP

#include "passdil/dilation.hpp"
#include "passdil/gaussian.hpp"
#include "passdil/symplectic.hpp"

#include <vector>

namespace passdil {

/// Factorization of a passively dilatable channel as
/// (G^T, 0) o additive(lambda, gamma_E~) o (F^T, 0), where the additive core
/// couples system mode i to environment mode i with transmissivity lambda_i.
struct NormalForm {
  OrthogonalSymplectic g;
  OrthogonalSymplectic f;
  std::vector<double> lambda;  // descending
  RealMatrix gamma_e;          // rotated environment covariance G gamma_E G^T

  [[nodiscard]] Eigen::Index modes() const { return static_cast<Eigen::Index>(lambda.size()); }

  /// D (+) D with D = diag(sqrt(lambda)).
  [[nodiscard]] RealMatrix core_x() const {
    RealVector d(modes());
    for (Eigen::Index i = 0; i < modes(); ++i) d(i) = std::sqrt(lambda[static_cast<std::size_t>(i)]);
    return doubled_diagonal(d);
  }

  /// (I - D^2 (+) D^2)^{1/2}.
  [[nodiscard]] RealMatrix core_coupling() const {
    RealVector r(modes());
    for (Eigen::Index i = 0; i < modes(); ++i)
      r(i) = std::sqrt(1.0 - lambda[static_cast<std::size_t>(i)]);
    return doubled_diagonal(r);
  }

  [[nodiscard]] GaussianChannel additive_core() const {
    const RealMatrix r = core_coupling();
    return {core_x(), symmetrize(r * gamma_e * r)};
  }
};

/// Clamps a transmissivity into [0, 1]; values outside by more than the
/// tolerance are an error.
inline double clamp_transmissivity(double lambda, const Tolerance& tol) {
  if (lambda < -tol.bound(1.0) || lambda > 1.0 + tol.bound(1.0))
    throw Error("normal form: transmissivity " + std::to_string(lambda) + " outside [0, 1]");
  return std::clamp(lambda, 0.0, 1.0);
}

inline NormalForm compute_normal_form(const GaussianChannel& c, const Tolerance& tol = {}) {
  const Eigen::Index n = c.modes();
  const auto report = check_dilatable(c, n, tol);
  if (!report.overall()) throw NotDilatable(report);

  const auto blocks = block_form_check(c.x, tol);
  if (!blocks) throw NotDilatable(report);

  // D = U^dagger (X1 + i X2) V; G = phi(U^dagger), F = phi(V).
  Eigen::JacobiSVD<ComplexMatrix> svd(blocks->complex(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto g = phi_iso(svd.matrixU().adjoint());
  const auto f = phi_iso(svd.matrixV());

  std::vector<double> lambda(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = svd.singularValues()(i);
    lambda[static_cast<std::size_t>(i)] = clamp_transmissivity(d * d, tol);
  }

  const auto dil = construct_dilation(c, n, tol);
  RealMatrix gamma_e = symmetrize(g.matrix() * dil.gamma_e * g.matrix().transpose());
  return {g, f, std::move(lambda), std::move(gamma_e)};
}

/// Composes the three factors back into (X, Y).
inline GaussianChannel reconstruct(const NormalForm& nf, const Tolerance& tol = {}) {
  const Eigen::Index n = nf.modes();
  if (nf.g.modes() != n || nf.f.modes() != n || nf.gamma_e.rows() != 2 * n ||
      nf.gamma_e.cols() != 2 * n)
    throw InvalidInput("reconstruct: normal form components have inconsistent sizes");
  for (double l : nf.lambda)
    if (!(l >= 0.0 && l <= 1.0)) throw InvalidInput("reconstruct: transmissivity outside [0, 1]");
  const auto env = validate_covariance(nf.gamma_e, tol);
  if (!env.ok) throw InvalidInput("reconstruct: " + env.reason);

  const GaussianChannel out = unitary_channel(nf.g.transpose());
  const GaussianChannel in = unitary_channel(nf.f.transpose());
  return compose(out, compose(nf.additive_core(), in));
}

}  // namespace passdil

#endif  // PASSDIL_NORMAL_FORM_HPP

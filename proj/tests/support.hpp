#ifndef PASSDIL_TESTS_SUPPORT_HPP
#define PASSDIL_TESTS_SUPPORT_HPP

#include "passdil/passdil.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace passdil::support {

// Seeded generators for property tests. Everything is reproducible from the
// seed printed in the failure message.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::uint64_t seed() { return rng_(); }
  double normal() { return normal_(rng_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  Eigen::Index index(Eigen::Index lo, Eigen::Index hi) {
    return std::uniform_int_distribution<Eigen::Index>(lo, hi)(rng_);
  }

  RealMatrix gaussian(Eigen::Index r, Eigen::Index c) {
    RealMatrix m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) m(i, j) = normal();
    return m;
  }

  /// r x c matrix of exact rank k (generically).
  RealMatrix with_rank(Eigen::Index r, Eigen::Index c, Eigen::Index k) {
    if (k == 0) return RealMatrix::Zero(r, c);
    return gaussian(r, k) * gaussian(k, c);
  }

  /// Symmetric PSD matrix of rank k.
  RealMatrix psd(Eigen::Index m, Eigen::Index k) {
    const RealMatrix b = gaussian(m, k);
    return b * b.transpose();
  }

  RealMatrix antisymmetric(Eigen::Index m) {
    const RealMatrix a = gaussian(m, m);
    return a - a.transpose();
  }

  RealMatrix symmetric(Eigen::Index m) {
    const RealMatrix a = gaussian(m, m);
    return a + a.transpose();
  }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Cayley transform (I - A)(I + A)^{-1}; orthogonal for antisymmetric A.
inline RealMatrix cayley(const RealMatrix& a) {
  const RealMatrix id = RealMatrix::Identity(a.rows(), a.cols());
  return (id - a) * (id + a).inverse();
}

/// Blocked single-mode phase rotation by theta on mode k of m modes.
inline RealMatrix phase_rotation(Eigen::Index m, Eigen::Index k, double theta) {
  RealMatrix r = RealMatrix::Identity(2 * m, 2 * m);
  r(k, k) = std::cos(theta);
  r(k, m + k) = std::sin(theta);
  r(m + k, k) = -std::sin(theta);
  r(m + k, m + k) = std::cos(theta);
  return r;
}

/// Blocked beamsplitter of transmissivity lambda between modes j and k of m.
inline RealMatrix mode_beamsplitter(Eigen::Index m, Eigen::Index j, Eigen::Index k, double lambda) {
  const double t = std::sqrt(lambda);
  const double r = std::sqrt(1.0 - lambda);
  RealMatrix b = RealMatrix::Identity(2 * m, 2 * m);
  for (Eigen::Index off : {Eigen::Index{0}, m}) {
    b(off + j, off + j) = t;
    b(off + j, off + k) = r;
    b(off + k, off + j) = -r;
    b(off + k, off + k) = t;
  }
  return b;
}

/// Single-mode squeezer on mode k of m (symplectic, not orthogonal).
inline RealMatrix squeezer(Eigen::Index m, Eigen::Index k, double r) {
  RealMatrix s = RealMatrix::Identity(2 * m, 2 * m);
  s(k, k) = std::exp(r);
  s(m + k, m + k) = std::exp(-r);
  return s;
}

inline GaussianChannel noisy_identity() { return {RealMatrix::Identity(2, 2), RealMatrix::Identity(2, 2)}; }

inline GaussianChannel loss(double lambda = 0.5) {
  return {std::sqrt(lambda) * RealMatrix::Identity(2, 2), (1.0 - lambda) * RealMatrix::Identity(2, 2)};
}

inline std::string data_path(const std::string& name) { return std::string(PASSDIL_TEST_DATA) + "/" + name; }

}  // namespace passdil::support

#endif  // PASSDIL_TESTS_SUPPORT_HPP

#ifndef SQHT_TESTS_HELPERS_HPP
#define SQHT_TESTS_HELPERS_HPP

#include <cmath>
#include <cstdint>

#include "sqht/divergences.hpp"
#include "sqht/rng.hpp"
#include "sqht/states.hpp"

namespace sqht::testing {

// Random full-support density matrix: Wishart sample mixed with the
// maximally mixed state to keep the spectrum well away from zero.
inline DensityMatrix random_density(int dim, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Cmat g(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) {
      const double u = 1.0 - rng.next_double();
      const double v = rng.next_double();
      const double r = std::sqrt(-2.0 * std::log(u));
      g(i, j) = std::complex<double>(r * std::cos(2 * M_PI * v), r * std::sin(2 * M_PI * v));
    }
  Cmat w = g * g.adjoint();
  w /= w.trace().real();
  const Cmat rho = 0.85 * w + 0.15 / dim * Cmat::Identity(dim, dim);
  return DensityMatrix(rho);
}

inline StatePair random_pair(int dim, std::uint64_t seed) {
  return StatePair(random_density(dim, derive_seed(seed, 11)),
                   random_density(dim, derive_seed(seed, 22)));
}

// Qubit with a real 2x2 matrix: Bloch vector confined to the x-z plane, so
// the optimal measurement axis lies on the real great circle that the grid
// oracle sweeps.
inline DensityMatrix random_real_qubit(std::uint64_t seed, double max_radius = 0.95) {
  SplitMix64 rng(seed);
  const double radius = max_radius * std::sqrt(rng.next_double());
  const double angle = 2.0 * M_PI * rng.next_double();
  const double x = radius * std::sin(angle);
  const double z = radius * std::cos(angle);
  Cmat rho(2, 2);
  rho << 0.5 * (1.0 + z), 0.5 * x, 0.5 * x, 0.5 * (1.0 - z);
  return DensityMatrix(rho);
}

inline StatePair random_real_qubit_pair(std::uint64_t seed) {
  return StatePair(random_real_qubit(derive_seed(seed, 11)),
                   random_real_qubit(derive_seed(seed, 22)));
}

// Commuting pair: both states diagonal in one random basis.
inline StatePair random_commuting_pair(int dim, std::uint64_t seed) {
  const Cmat u = random_unitary(dim, derive_seed(seed, 33));
  SplitMix64 rng(derive_seed(seed, 44));
  auto random_diag = [&] {
    Rvec p(dim);
    double sum = 0.0;
    for (int i = 0; i < dim; ++i) {
      p[i] = 0.1 + rng.next_double();
      sum += p[i];
    }
    p /= sum;
    return p;
  };
  const Rvec p = random_diag();
  const Rvec q = random_diag();
  return StatePair(DensityMatrix(u * p.asDiagonal() * u.adjoint()),
                   DensityMatrix(u * q.asDiagonal() * u.adjoint()));
}

// Closed-form qubit relative entropy from Bloch components; an independent
// route that never touches the library eigensolver.
inline double bloch_qubit_relative_entropy(const Cmat& rho0, const Cmat& rho1) {
  auto bloch = [](const Cmat& rho, double out[3]) {
    out[0] = 2.0 * rho(0, 1).real();
    out[1] = -2.0 * rho(0, 1).imag();
    out[2] = rho(0, 0).real() - rho(1, 1).real();
  };
  double a[3], b[3];
  bloch(rho0, a);
  bloch(rho1, b);
  const double na = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
  const double nb = std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
  auto log_terms = [](double n, double& mu, double& nu) {
    const double lp = 0.5 * (1.0 + n), lm = 0.5 * (1.0 - n);
    mu = 0.5 * std::log(lp * lm);
    nu = 0.5 * std::log(lp / lm);
  };
  double mu0, nu0, mu1, nu1;
  log_terms(na, mu0, nu0);
  log_terms(nb, mu1, nu1);
  const double dot =
      nb > 0 ? (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]) / nb : 0.0;
  return (mu0 + nu0 * na) - (mu1 + nu1 * dot);
}

inline StatePair diag_pair_example() {
  Cmat a = Cmat::Zero(2, 2), b = Cmat::Zero(2, 2);
  a(0, 0) = 0.6;
  a(1, 1) = 0.4;
  b(0, 0) = 0.3;
  b(1, 1) = 0.7;
  return StatePair(DensityMatrix(a), DensityMatrix(b), "diag example");
}

// KL((0.6,0.4)||(0.3,0.7)) and its reverse, evaluated in closed form.
inline double diag_kl_forward() {
  return 0.6 * std::log(2.0) + 0.4 * std::log(4.0 / 7.0);
}
inline double diag_kl_backward() {
  return 0.3 * std::log(0.5) + 0.7 * std::log(7.0 / 4.0);
}

}  // namespace sqht::testing

#endif

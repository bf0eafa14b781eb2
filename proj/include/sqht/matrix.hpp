#ifndef SQHT_MATRIX_HPP
#define SQHT_MATRIX_HPP

#include <Eigen/Dense>
#include <complex>
#include <functional>

#include "sqht/errors.hpp"

namespace sqht {

using Cmat = Eigen::MatrixXcd;
using Cvec = Eigen::VectorXcd;
using Rvec = Eigen::VectorXd;

// Numerical policy shared by all modules.
namespace tol {
inline constexpr double kHermitian = 1e-10;       // relative Frobenius
inline constexpr double kEigRecon = 1e-10;        // relative Frobenius
inline constexpr double kZeroEigenvalue = 1e-12;  // spectrum treated as zero
inline constexpr double kFullSupport = 1e-9;      // min eigenvalue threshold
inline constexpr double kPovmCompleteness = 1e-9; // sum-to-identity Frobenius
inline constexpr double kProbClip = 1e-12;        // negative Born round-off
inline constexpr double kProbZero = 1e-14;        // outcome considered absent
}  // namespace tol

inline constexpr int kDefaultDimensionCap = 64;

struct HermitianEig {
  Rvec eigenvalues;   // ascending
  Cmat eigenvectors;  // unitary, columns match eigenvalues
};

double frobenius_norm(const Cmat& m);
bool all_finite(const Cmat& m);

// Relative Hermiticity defect ||m - m^dag||_F / max(1, ||m||_F).
double hermiticity_defect(const Cmat& m);

// Eigendecomposition of a Hermitian matrix. Symmetrizes (m + m^dag)/2 first
// to absorb round-off from Kronecker chains; rejects inputs whose defect
// exceeds the tolerance.
HermitianEig hermitian_eig(const Cmat& m);

// V diag(f(lambda)) V^dag. Throws DomainError when f produces a non-finite
// value on the spectrum.
Cmat spectral_map(const Cmat& m, const std::function<double(double)>& f);

// spectral_map with f = log, rejecting eigenvalues at or below the zero
// threshold.
Cmat matrix_log(const Cmat& m);

// Kronecker product with a dimension cap on the result.
Cmat kron(const Cmat& a, const Cmat& b, int dimension_cap = kDefaultDimensionCap);

}  // namespace sqht

#endif

#include "sqht/matrix.hpp"

#include <cmath>
#include <sstream>

namespace sqht {

const char* error_tag(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonFinite: return "non-finite";
    case ErrorKind::NotHermitian: return "not-hermitian";
    case ErrorKind::DomainError: return "domain-error";
    case ErrorKind::Overflow: return "overflow";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::NotFullSupport: return "not-full-support";
    case ErrorKind::OutOfRange: return "out-of-range";
    case ErrorKind::SupportViolation: return "support-violation";
    case ErrorKind::TauTooLarge: return "tau-too-large";
    case ErrorKind::NotDistinguishable: return "not-distinguishable";
    case ErrorKind::ZeroProbabilityOutcome: return "zero-probability-outcome";
    case ErrorKind::EmptyInput: return "empty-input";
    case ErrorKind::TruncatedPresent: return "truncated-present";
    case ErrorKind::NoTrajectories: return "no-trajectories";
    case ErrorKind::WrongDimension: return "wrong-dimension";
    case ErrorKind::DegenerateRegion: return "degenerate-region";
    case ErrorKind::Config: return "config";
    case ErrorKind::Internal: return "internal";
  }
  return "unknown";
}

double frobenius_norm(const Cmat& m) { return m.norm(); }

bool all_finite(const Cmat& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag()))
        return false;
  return true;
}

double hermiticity_defect(const Cmat& m) {
  return (m - m.adjoint()).norm() / std::max(1.0, m.norm());
}

HermitianEig hermitian_eig(const Cmat& m) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw Error(ErrorKind::DimensionMismatch, "hermitian_eig requires a square matrix");
  if (!all_finite(m))
    throw Error(ErrorKind::NonFinite, "matrix has NaN or Inf entries");
  if (hermiticity_defect(m) > tol::kHermitian) {
    std::ostringstream os;
    os << "hermiticity defect " << hermiticity_defect(m) << " exceeds " << tol::kHermitian;
    throw Error(ErrorKind::NotHermitian, os.str());
  }
  Cmat sym = 0.5 * (m + m.adjoint().eval());
  Eigen::SelfAdjointEigenSolver<Cmat> solver(sym);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::Internal, "eigendecomposition failed to converge");
  HermitianEig out{solver.eigenvalues(), solver.eigenvectors()};
  const double scale = std::max(1.0, sym.norm());
  const Cmat recon = out.eigenvectors * out.eigenvalues.asDiagonal() * out.eigenvectors.adjoint();
  if ((recon - sym).norm() > tol::kEigRecon * scale)
    throw Error(ErrorKind::Internal, "eigendecomposition reconstruction error above tolerance");
  return out;
}

Cmat spectral_map(const Cmat& m, const std::function<double(double)>& f) {
  HermitianEig eig = hermitian_eig(m);
  Rvec mapped(eig.eigenvalues.size());
  for (Eigen::Index i = 0; i < eig.eigenvalues.size(); ++i) {
    const double v = f(eig.eigenvalues[i]);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "function not finite at eigenvalue " << eig.eigenvalues[i];
      throw Error(ErrorKind::DomainError, os.str());
    }
    mapped[i] = v;
  }
  Cmat out = eig.eigenvectors * mapped.asDiagonal() * eig.eigenvectors.adjoint();
  return 0.5 * (out + out.adjoint().eval());
}

Cmat matrix_log(const Cmat& m) {
  return spectral_map(m, [](double lambda) -> double {
    if (lambda <= tol::kZeroEigenvalue)
      throw Error(ErrorKind::DomainError, "log of eigenvalue at or below zero threshold");
    return std::log(lambda);
  });
}

Cmat kron(const Cmat& a, const Cmat& b, int dimension_cap) {
  if (!all_finite(a) || !all_finite(b))
    throw Error(ErrorKind::NonFinite, "kron input has NaN or Inf entries");
  const Eigen::Index rows = a.rows() * b.rows();
  const Eigen::Index cols = a.cols() * b.cols();
  if (rows > dimension_cap || cols > dimension_cap) {
    std::ostringstream os;
    os << "kron result " << rows << "x" << cols << " exceeds dimension cap " << dimension_cap;
    throw Error(ErrorKind::Overflow, os.str());
  }
  Cmat out(rows, cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace sqht

#include "sqht/divergences.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "sqht/parallel.hpp"
#include "sqht/rng.hpp"

namespace sqht {

namespace {

void require_full_support(const DensityMatrix& rho, const char* who) {
  if (!rho.full_support())
    throw Error(ErrorKind::NotFullSupport, std::string(who) + " requires full support");
}

double clamp_tiny_negative(double v) {
  return (v < 0.0 && v > -1e-11) ? 0.0 : v;
}

// KL with the both-vanish guard used throughout the optimizers: outcomes
// where both probabilities are below the zero threshold contribute nothing.
double guarded_kl(const Rvec& p, const Rvec& q) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] <= tol::kProbZero) continue;
    if (q[i] <= tol::kProbZero)
      throw Error(ErrorKind::Internal,
                  "positive probability against vanishing reference under full support");
    sum += p[i] * std::log(p[i] / q[i]);
  }
  return sum;
}

std::complex<double> gaussian(SplitMix64& rng) {
  // Box-Muller; the log argument is in (0, 1].
  const double u = 1.0 - rng.next_double();
  const double v = rng.next_double();
  const double r = std::sqrt(-2.0 * std::log(u));
  return {r * std::cos(2.0 * M_PI * v), r * std::sin(2.0 * M_PI * v)};
}

// Closest matrix with orthonormal columns: M (M^dag M)^{-1/2}.
Cmat reorthonormalize(const Cmat& m) {
  const Cmat gram = m.adjoint() * m;
  Eigen::SelfAdjointEigenSolver<Cmat> solver(gram);
  Rvec inv_sqrt(solver.eigenvalues().size());
  for (Eigen::Index i = 0; i < inv_sqrt.size(); ++i)
    inv_sqrt[i] = 1.0 / std::sqrt(std::max(solver.eigenvalues()[i], 1e-300));
  return m * (solver.eigenvectors() * inv_sqrt.asDiagonal() *
              solver.eigenvectors().adjoint());
}

struct AscentOutcome {
  double value = 0.0;
  Cmat point;
  bool converged = false;
  double gradient_norm = 0.0;
};

// Gradient ascent over matrices with orthonormal columns. Moves through
// M <- exp(i eta G) M with G the Hermitian ascent direction at the current
// anchor, plus a backtracking step size.
template <typename Objective, typename Gradient>
AscentOutcome ascend(Cmat point, const Objective& objective, const Gradient& gradient,
                     const OptimizerOptions& opts) {
  AscentOutcome out;
  double value = objective(point);
  double step = 0.5;
  std::deque<double> history{value};
  Cmat grad;
  bool converged = false;
  int accepted_since_cleanup = 0;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    grad = gradient(point);
    const double gnorm = grad.norm();
    out.gradient_norm = gnorm;
    if (gnorm < 1e-14) {
      converged = true;
      break;
    }
    Eigen::SelfAdjointEigenSolver<Cmat> solver(grad);
    const Cmat& basis = solver.eigenvectors();
    const Rvec& freqs = solver.eigenvalues();
    const Cmat rotated = basis.adjoint() * point;

    bool moved = false;
    double eta = step;
    for (int trial = 0; trial < 40; ++trial) {
      Cvec phases(freqs.size());
      for (Eigen::Index i = 0; i < freqs.size(); ++i)
        phases[i] = std::polar(1.0, eta * freqs[i]);
      Cmat candidate = basis * phases.asDiagonal() * rotated;
      const double candidate_value = objective(candidate);
      if (candidate_value > value) {
        point = std::move(candidate);
        value = candidate_value;
        step = std::min(eta * 1.3, 64.0);
        moved = true;
        break;
      }
      eta *= 0.5;
    }
    if (!moved) {
      // No improvement along the gradient down to machine-scale steps.
      converged = true;
      break;
    }

    if (++accepted_since_cleanup >= 50) {
      point = reorthonormalize(point);
      value = objective(point);
      accepted_since_cleanup = 0;
    }

    history.push_back(value);
    if (static_cast<int>(history.size()) > opts.stall_window + 1) history.pop_front();
    if (static_cast<int>(history.size()) == opts.stall_window + 1 &&
        value - history.front() < opts.stall_improvement) {
      converged = true;
      break;
    }
  }

  out.point = reorthonormalize(point);
  out.value = objective(out.point);
  out.converged = converged;
  return out;
}

// Runs one ascent per start in parallel and keeps the best value, ties broken
// by start index so results do not depend on the worker count.
template <typename Objective, typename Gradient>
AscentOutcome best_of_starts(const std::vector<Cmat>& starts, const Objective& objective,
                             const Gradient& gradient, const OptimizerOptions& opts,
                             int* best_index) {
  std::vector<AscentOutcome> results(starts.size());
  parallel_for(
      starts.size(),
      [&](std::size_t i) { results[i] = ascend(starts[i], objective, gradient, opts); },
      opts.threads);
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i)
    if (results[i].value > results[best].value) best = i;
  if (best_index) *best_index = static_cast<int>(best);
  return results[best];
}

}  // namespace

double classical_kl(const Rvec& p, const Rvec& q) {
  if (p.size() != q.size())
    throw Error(ErrorKind::DimensionMismatch, "probability vectors differ in length");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] <= tol::kProbZero) continue;
    if (q[i] <= tol::kProbZero)
      throw Error(ErrorKind::SupportViolation,
                  "q vanishes where p is positive at outcome " + std::to_string(i));
    sum += p[i] * std::log(p[i] / q[i]);
  }
  return sum;
}

double quantum_relative_entropy(const StatePair& pair) {
  require_full_support(pair.rho0, "quantum_relative_entropy");
  require_full_support(pair.rho1, "quantum_relative_entropy");
  const Cmat log0 = matrix_log(pair.rho0.matrix());
  const Cmat log1 = matrix_log(pair.rho1.matrix());
  const double value = (pair.rho0.matrix() * (log0 - log1)).trace().real();
  return clamp_tiny_negative(value);
}

double max_relative_entropy(const DensityMatrix& rho0, const DensityMatrix& rho1) {
  if (rho0.dim() != rho1.dim())
    throw Error(ErrorKind::DimensionMismatch, "state dimensions differ");
  require_full_support(rho0, "max_relative_entropy");
  require_full_support(rho1, "max_relative_entropy");
  const Cmat inv_sqrt =
      spectral_map(rho1.matrix(), [](double v) { return 1.0 / std::sqrt(v); });
  const Cmat conjugated = inv_sqrt * rho0.matrix() * inv_sqrt;
  const HermitianEig eig = hermitian_eig(conjugated);
  return clamp_tiny_negative(std::log(eig.eigenvalues.maxCoeff()));
}

double increment_bound(const StatePair& pair) {
  return std::max(max_relative_entropy(pair.rho0, pair.rho1),
                  max_relative_entropy(pair.rho1, pair.rho0));
}

double pvm_objective(const StatePair& pair, const Cmat& basis) {
  const Eigen::Index d = basis.rows();
  Rvec p(d), q(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const Cvec u = basis.col(j);
    p[j] = std::max(0.0, (u.adjoint() * pair.rho0.matrix() * u)(0, 0).real());
    q[j] = std::max(0.0, (u.adjoint() * pair.rho1.matrix() * u)(0, 0).real());
  }
  return guarded_kl(p, q);
}

Cmat pvm_objective_gradient(const StatePair& pair, const Cmat& basis) {
  const Eigen::Index d = basis.rows();
  Rvec a(d), b(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const Cvec u = basis.col(j);
    const double p = (u.adjoint() * pair.rho0.matrix() * u)(0, 0).real();
    const double q = (u.adjoint() * pair.rho1.matrix() * u)(0, 0).real();
    a[j] = std::log(p / q) + 1.0;
    b[j] = -p / q;
  }
  const Cmat wa = basis * a.asDiagonal() * basis.adjoint();
  const Cmat wb = basis * b.asDiagonal() * basis.adjoint();
  const std::complex<double> imag_unit(0.0, 1.0);
  Cmat grad = imag_unit * ((wa * pair.rho0.matrix() - pair.rho0.matrix() * wa) +
                           (wb * pair.rho1.matrix() - pair.rho1.matrix() * wb));
  return 0.5 * (grad + grad.adjoint().eval());
}

// Rows passing through zero can leave one Born weight just above the zero
// threshold and the other below it (the likelihood ratio is only bounded by
// e^{C}), so outcomes are skipped on their total mass and the survivors are
// floored against float-rounded zeros.
constexpr double kRowMassFloor = 1e-18;

double rank1_objective(const StatePair& pair, const Cmat& isometry, double t0, double t1) {
  const Rvec p = (isometry * pair.rho0.matrix() * isometry.adjoint()).diagonal().real();
  const Rvec q = (isometry * pair.rho1.matrix() * isometry.adjoint()).diagonal().real();
  double sum = 0.0;
  for (Eigen::Index x = 0; x < p.size(); ++x) {
    if (p[x] + q[x] <= 2.0 * tol::kProbZero) continue;
    const double pf = std::max(p[x], kRowMassFloor);
    const double qf = std::max(q[x], kRowMassFloor);
    const double ratio = std::log(pf / qf);
    sum += t0 * qf * (-ratio) + t1 * pf * ratio;
  }
  return sum;
}

Cmat rank1_objective_gradient(const StatePair& pair, const Cmat& isometry, double t0,
                              double t1) {
  const Cmat a0 = isometry * pair.rho0.matrix() * isometry.adjoint();
  const Cmat a1 = isometry * pair.rho1.matrix() * isometry.adjoint();
  const Eigen::Index n = a0.rows();
  Rvec cp(n), cq(n);
  for (Eigen::Index x = 0; x < n; ++x) {
    const double p = a0(x, x).real();
    const double q = a1(x, x).real();
    if (p + q <= 2.0 * tol::kProbZero) {
      cp[x] = 0.0;
      cq[x] = 0.0;
      continue;
    }
    const double pf = std::max(p, kRowMassFloor);
    const double qf = std::max(q, kRowMassFloor);
    const double ratio = std::log(pf / qf);
    cp[x] = -t0 * qf / pf + t1 * (ratio + 1.0);
    cq[x] = t0 * (-ratio + 1.0) - t1 * pf / qf;
  }
  const std::complex<double> imag_unit(0.0, 1.0);
  Cmat grad = imag_unit * ((a0 * cp.asDiagonal() - cp.asDiagonal() * a0) +
                           (a1 * cq.asDiagonal() - cq.asDiagonal() * a1));
  return 0.5 * (grad + grad.adjoint().eval());
}

Cmat random_unitary(int dim, std::uint64_t seed) {
  return random_isometry(dim, dim, seed);
}

Cmat random_isometry(int rows, int cols, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Cmat g(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) g(i, j) = gaussian(rng);
  Eigen::HouseholderQR<Cmat> qr(g);
  Cmat q = qr.householderQ() * Cmat::Identity(rows, cols);
  const Cmat r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  for (int j = 0; j < cols; ++j) {
    const std::complex<double> diag = r(j, j);
    if (std::abs(diag) > 0) q.col(j) *= diag / std::abs(diag);
  }
  return q;
}

MeasuredResult measured_relative_entropy(const StatePair& pair,
                                         const OptimizerOptions& opts) {
  if (opts.restarts < 1) throw Error(ErrorKind::OutOfRange, "restarts must be >= 1");
  if (!(opts.tolerance > 0)) throw Error(ErrorKind::OutOfRange, "tolerance must be > 0");
  require_full_support(pair.rho0, "measured_relative_entropy");
  require_full_support(pair.rho1, "measured_relative_entropy");
  const int d = pair.dim();

  std::vector<Cmat> starts;
  starts.push_back(hermitian_eig(pair.rho0.matrix()).eigenvectors);
  starts.push_back(hermitian_eig(pair.rho1.matrix()).eigenvectors);
  starts.push_back(hermitian_eig(pair.rho0.matrix() - pair.rho1.matrix()).eigenvectors);
  for (const Cmat& w : opts.warm_starts) {
    if (w.rows() != d || w.cols() != d)
      throw Error(ErrorKind::DimensionMismatch, "warm start has wrong dimension");
    starts.push_back(w);
  }
  for (int r = 0; r < opts.restarts; ++r)
    starts.push_back(random_unitary(d, derive_seed(opts.seed, 0xA11CE, r)));

  auto objective = [&](const Cmat& basis) { return pvm_objective(pair, basis); };
  auto gradient = [&](const Cmat& basis) { return pvm_objective_gradient(pair, basis); };

  int best_index = -1;
  const AscentOutcome best = best_of_starts(starts, objective, gradient, opts, &best_index);

  MeasuredResult out;
  out.basis = best.point;
  out.pvm = Povm::from_basis(best.point);
  out.value = classical_kl(born_distribution(pair.rho0, out.pvm),
                           born_distribution(pair.rho1, out.pvm));
  out.meta.restarts_used = static_cast<int>(starts.size());
  out.meta.converged = best.converged;
  out.meta.final_gradient_norm = best.gradient_norm;
  out.meta.best_restart = best_index;
  return out;
}

namespace {

// KL of the two-outcome Born distributions for the projector onto v.
double qubit_pvm_kl(const StatePair& pair, const Eigen::Vector2cd& v) {
  const double p = std::clamp((v.adjoint() * pair.rho0.matrix() * v)(0, 0).real(), 0.0, 1.0);
  const double q = std::clamp((v.adjoint() * pair.rho1.matrix() * v)(0, 0).real(), 0.0, 1.0);
  Rvec pv(2), qv(2);
  pv << p, 1.0 - p;
  qv << q, 1.0 - q;
  return guarded_kl(pv, qv);
}

}  // namespace

double qubit_grid_oracle(const StatePair& pair, long resolution) {
  if (pair.dim() != 2)
    throw Error(ErrorKind::WrongDimension, "grid oracle is defined for qubits only");
  if (resolution < 4) throw Error(ErrorKind::OutOfRange, "resolution too small");

  const std::complex<double> phases[2] = {{1.0, 0.0}, {0.0, 1.0}};
  double best = 0.0;
  double best_phi = 0.0;
  int best_family = 0;
  const double step = M_PI / static_cast<double>(resolution);
  for (int family = 0; family < 2; ++family) {
    for (long i = 0; i < resolution; ++i) {
      const double phi = step * static_cast<double>(i);
      const Eigen::Vector2cd v(std::cos(phi), phases[family] * std::sin(phi));
      const double value = qubit_pvm_kl(pair, v);
      if (value > best) {
        best = value;
        best_phi = phi;
        best_family = family;
      }
    }
  }

  // One golden-section pass around the best grid angle.
  auto eval = [&](double phi) {
    const Eigen::Vector2cd v(std::cos(phi), phases[best_family] * std::sin(phi));
    return qubit_pvm_kl(pair, v);
  };
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = best_phi - step, hi = best_phi + step;
  double x1 = hi - golden * (hi - lo);
  double x2 = lo + golden * (hi - lo);
  double f1 = eval(x1), f2 = eval(x2);
  for (int iter = 0; iter < 120 && hi - lo > 1e-14; ++iter) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + golden * (hi - lo);
      f2 = eval(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - golden * (hi - lo);
      f1 = eval(x1);
    }
  }
  return std::max(best, std::max(f1, f2));
}

double weighted_objective(const Povm& m, const StatePair& pair, double t0, double t1) {
  if (t0 < 0 || t1 < 0) throw Error(ErrorKind::OutOfRange, "weights must be nonnegative");
  if (m.dim() != pair.dim())
    throw Error(ErrorKind::DimensionMismatch, "POVM and state dimensions differ");
  const Rvec p = born_distribution(pair.rho0, m);
  const Rvec q = born_distribution(pair.rho1, m);
  return t0 * guarded_kl(q, p) + t1 * guarded_kl(p, q);
}

WeightedResult optimize_g(const StatePair& pair, double t0, double t1,
                          const OptimizerOptions& opts) {
  if (t0 < 0 || t1 < 0) throw Error(ErrorKind::OutOfRange, "weights must be nonnegative");
  if (opts.restarts < 1) throw Error(ErrorKind::OutOfRange, "restarts must be >= 1");
  require_full_support(pair.rho0, "optimize_g");
  require_full_support(pair.rho1, "optimize_g");
  const int d = pair.dim();
  const int n = d * d;

  // Embeddings of the best single PVMs give the sanity floor: ascent from a
  // feasible point never decreases the objective.
  OptimizerOptions inner = opts;
  inner.restarts = std::max(4, opts.restarts / 4);
  inner.warm_starts.clear();
  auto embed_pvm_basis = [&](const Cmat& basis) {
    Cmat k = Cmat::Zero(n, d);
    k.topRows(d) = basis.adjoint();
    return k;
  };
  std::vector<Cmat> starts;
  starts.push_back(embed_pvm_basis(measured_relative_entropy(pair, inner).basis));
  starts.push_back(embed_pvm_basis(measured_relative_entropy(pair.swapped(), inner).basis));
  for (const Cmat& w : opts.warm_starts) {
    if (w.rows() != n || w.cols() != d)
      throw Error(ErrorKind::DimensionMismatch, "warm start has wrong shape");
    starts.push_back(w);
  }
  for (int r = 0; r < opts.restarts; ++r)
    starts.push_back(random_isometry(n, d, derive_seed(opts.seed, 0xB0B5, r)));

  auto objective = [&](const Cmat& k) { return rank1_objective(pair, k, t0, t1); };
  auto gradient = [&](const Cmat& k) {
    return rank1_objective_gradient(pair, k, t0, t1);
  };
  int best_index = -1;
  const AscentOutcome best = best_of_starts(starts, objective, gradient, opts, &best_index);

  std::vector<std::string> labels;
  std::vector<Cmat> elements;
  for (int x = 0; x < n; ++x) {
    const Eigen::RowVectorXcd row = best.point.row(x);
    elements.push_back(row.adjoint() * row);
    labels.push_back(std::to_string(x));
  }
  WeightedResult out;
  out.povm = Povm(std::move(labels), std::move(elements));
  out.value = weighted_objective(out.povm, pair, t0, t1);
  out.meta.restarts_used = static_cast<int>(starts.size());
  out.meta.converged = best.converged;
  out.meta.final_gradient_norm = best.gradient_norm;
  out.meta.best_restart = best_index;
  return out;
}

DivergenceReport divergence_report(const StatePair& pair, const OptimizerOptions& opts) {
  DivergenceReport report;
  report.d_quantum = quantum_relative_entropy(pair);
  report.d_max = max_relative_entropy(pair.rho0, pair.rho1);
  MeasuredResult mre = measured_relative_entropy(pair, opts);
  report.d_measured = mre.value;
  report.optimal_pvm = mre.pvm;
  report.optimizer_meta = mre.meta;
  return report;
}

}  // namespace sqht

#ifndef SQHT_DIVERGENCES_HPP
#define SQHT_DIVERGENCES_HPP

#include <cstdint>
#include <vector>

#include "sqht/states.hpp"

namespace sqht {

// All divergences are in nats.

struct OptimizerOptions {
  int restarts = 20;                // random restarts (warm starts are extra)
  double tolerance = 1e-8;          // accuracy slack claimed for the optimum
  std::uint64_t seed = 0;           // master seed; restart seeds derive from it
  int max_iterations = 2000;
  int stall_window = 50;            // convergence: improvement below
  double stall_improvement = 1e-10; // this threshold over the window
  unsigned threads = 0;             // 0 = hardware concurrency
  std::vector<Cmat> warm_starts;    // extra starting bases/isometries
};

struct OptimizerMeta {
  int restarts_used = 0;
  bool converged = false;
  double final_gradient_norm = 0.0;
  int best_restart = -1;
};

struct MeasuredResult {
  double value = 0.0;
  Povm pvm;
  Cmat basis;  // orthonormal columns spanning the optimal projectors
  OptimizerMeta meta;
};

struct WeightedResult {
  double value = 0.0;
  Povm povm;
  OptimizerMeta meta;
};

// One direction of the report; the CLI assembles both directions plus the
// increment bound.
struct DivergenceReport {
  double d_quantum = 0.0;
  double d_measured = 0.0;
  double d_max = 0.0;
  Povm optimal_pvm;
  OptimizerMeta optimizer_meta;
};

// Sum p log(p/q) with 0 log 0 = 0. Outcomes with p below the zero threshold
// contribute nothing; p positive against vanishing q is a support violation.
double classical_kl(const Rvec& p, const Rvec& q);

// Tr[rho0 (log rho0 - log rho1)].
double quantum_relative_entropy(const StatePair& pair);

// log of the largest eigenvalue of rho1^{-1/2} rho0 rho1^{-1/2}.
double max_relative_entropy(const DensityMatrix& rho0, const DensityMatrix& rho1);

// C = max{D_max(rho0||rho1), D_max(rho1||rho0)}; bounds every log-likelihood
// increment of a sequential test on the pair.
double increment_bound(const StatePair& pair);

// KL of the Born distributions induced by the rank-1 PVM whose projectors
// are the columns of `basis`, and the ascent direction of that objective in
// the exp(iH) chart anchored at `basis` (H Hermitian, d^2 real parameters).
double pvm_objective(const StatePair& pair, const Cmat& basis);
Cmat pvm_objective_gradient(const StatePair& pair, const Cmat& basis);

// Weighted two-sided objective over rank-1 POVMs encoded as the rows of a
// column-orthonormal isometry (rows k_x give m(x) = k_x k_x^dag), and its
// ascent direction in the exp(iH) chart anchored at `isometry`.
double rank1_objective(const StatePair& pair, const Cmat& isometry, double t0, double t1);
Cmat rank1_objective_gradient(const StatePair& pair, const Cmat& isometry, double t0,
                              double t1);

// Best classical KL over rank-1 PVMs with d outcomes (gradient ascent with
// random restarts; warm starts at the natural eigenbases).
MeasuredResult measured_relative_entropy(const StatePair& pair,
                                         const OptimizerOptions& opts = {});

// Exhaustive two-circle sweep over qubit projective measurements, refined by
// one golden-section pass. Independent check for d = 2 results.
double qubit_grid_oracle(const StatePair& pair, long resolution);

// t0 * KL(P_{rho1,m} || P_{rho0,m}) + t1 * KL(P_{rho0,m} || P_{rho1,m}).
double weighted_objective(const Povm& m, const StatePair& pair, double t0, double t1);

// Maximum of the weighted objective over rank-1 POVMs with exactly d^2
// outcomes (zero elements permitted).
WeightedResult optimize_g(const StatePair& pair, double t0, double t1,
                          const OptimizerOptions& opts = {});

DivergenceReport divergence_report(const StatePair& pair,
                                   const OptimizerOptions& opts = {});

// Haar-like random unitary / column-orthonormal isometry (QR of a Ginibre
// sample with phase fix); used for optimizer restarts and randomized tests.
Cmat random_unitary(int dim, std::uint64_t seed);
Cmat random_isometry(int rows, int cols, std::uint64_t seed);

}  // namespace sqht

#endif

#ifndef SQHT_MONTECARLO_HPP
#define SQHT_MONTECARLO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sqht/sequential.hpp"

namespace sqht {

enum class Hypothesis { H0, H1, Both };

struct BatchConfig {
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;
  long n = 1;                        // sample budget of the constraint
  double tau = 0.0;                  // echoed alongside the resolved thresholds
  bool record_trajectories = false;
  Hypothesis hypothesis = Hypothesis::Both;
  unsigned threads = 0;
};

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

struct WilsonInterval {
  double lo = 0.0;
  double hi = 0.0;
};

struct ViolationCounts {
  long increment_bound = 0;
  long policy = 0;
  long stopping = 0;
  long overshoot = 0;
  long total() const { return increment_bound + policy + stopping + overshoot; }
  ViolationCounts& operator+=(const ViolationCounts& o) {
    increment_bound += o.increment_bound;
    policy += o.policy;
    stopping += o.stopping;
    overshoot += o.overshoot;
    return *this;
  }
};

struct HypothesisStats {
  std::uint64_t trials = 0;
  std::uint64_t decide0 = 0;
  std::uint64_t decide1 = 0;
  std::uint64_t truncated = 0;
  double mean_t = 0.0;
  double exceedance = 0.0;  // fraction of trials with T > n
};

struct BatchEstimate {
  Estimate alpha_hat;                    // direct, fraction of decision-1 under rho0
  Estimate beta_hat;                     // direct, fraction of decision-0 under rho1
  WilsonInterval alpha_wilson;
  WilsonInterval beta_wilson;
  std::optional<Estimate> beta_hat_is;   // change of measure from rho0 trials
  std::optional<Estimate> alpha_hat_is;  // change of measure from rho1 trials
  double mean_t0 = 0.0;
  double mean_t1 = 0.0;
  double exceedance_0 = 0.0;
  double exceedance_1 = 0.0;
  std::uint64_t truncated_count = 0;
  ViolationCounts violations;
  HypothesisStats h0;
  HypothesisStats h1;
  bool estimates_usable = true;  // false once truncation contaminates the batch
  // Trajectories in trial order (rho0 trials first), kept only on request.
  std::vector<TrialOutcome> recorded;
};

// N independent trials per requested hypothesis, per-trial RNG streams keyed
// by (seed, hypothesis, trial index); reduction is sequential in trial order
// so results do not depend on the worker count.
BatchEstimate run_batch(const StatePair& pair, const Strategy& strategy,
                        const SqprtParams& params, const BatchConfig& config);

enum class IsDirection {
  BetaFromH0Trials,   // E_1[Y] = E_0[Y e^{-S_T}] with Y = 1{decision 0}
  AlphaFromH1Trials,  // E_0[Y] = E_1[Y e^{+S_T}] with Y = 1{decision 1}
};

// Importance-sampled error estimate from trials run under the opposite
// hypothesis. Truncated trials break the stopped-martingale identity and are
// rejected.
Estimate importance_estimate(const std::vector<TrialOutcome>& outcomes, IsDirection dir);

// Streaming per-trial conformance checks: increment bound, policy branch,
// stopping rule, overshoot.
ViolationCounts check_trial(const TrialOutcome& outcome, const Strategy& strategy,
                            const SqprtParams& params, double c_bound);

ViolationCounts monitor_invariants(const std::vector<TrialOutcome>& outcomes,
                                   const StatePair& pair, const Strategy& strategy,
                                   const SqprtParams& params);

struct SweepRow {
  long n = 0;
  double a = 0.0;
  double b = 0.0;
  Estimate alpha_is;
  Estimate beta_is;
  double mean_t0 = 0.0;
  double mean_t1 = 0.0;
  double exceed0 = 0.0;
  double exceed1 = 0.0;
  std::uint64_t truncated = 0;
  double slope_beta = 0.0;   // log(1/beta_is) / mean_t0
  double slope_alpha = 0.0;  // log(1/alpha_is) / mean_t1
};

std::vector<SweepRow> exponent_sweep(const StatePair& pair, const Strategy& strategy,
                                     const std::vector<long>& n_values, double tau,
                                     std::uint64_t trials_per_n, std::uint64_t seed,
                                     double d_m_10, double d_m_01, unsigned threads = 0);

// CSV serializations (12 significant digits).
std::string sweep_table_csv(const std::vector<SweepRow>& rows);
std::string trajectories_csv(const std::vector<TrialOutcome>& outcomes,
                             const Strategy& strategy);

}  // namespace sqht

#endif

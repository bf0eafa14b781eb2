#ifndef SQHT_SEQUENTIAL_HPP
#define SQHT_SEQUENTIAL_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "sqht/divergences.hpp"
#include "sqht/rng.hpp"
#include "sqht/states.hpp"

namespace sqht {

// Stop thresholds of a sequential probability ratio test: declare hypothesis
// 0 once the running statistic reaches b, hypothesis 1 once it falls to -a.
struct SqprtParams {
  SqprtParams(double a_in, double b_in, long t_max_in);

  double a;
  double b;
  long t_max;
};

enum class StrategyKind { AdaptiveTwoPoint, Fixed, Cyclic };

// Measurement policy. Adaptive: measure with povms[0] (the maximizer of the
// forward measured relative entropy) while the running statistic is
// nonnegative, else povms[1]; the first step picks between them by fair coin.
// Fixed: one measurement throughout. Cyclic: deterministic time sharing with
// integer counts, period q = sum of counts.
class Strategy {
 public:
  static Strategy adaptive(Povm m_star_0, Povm m_star_1);
  static Strategy fixed(Povm m);
  static Strategy cyclic(std::vector<Povm> povms, std::vector<int> counts);

  StrategyKind kind() const { return kind_; }
  const std::vector<Povm>& povms() const { return povms_; }
  const Povm& povm(int index) const { return povms_.at(index); }
  const std::vector<int>& counts() const { return counts_; }
  int period() const { return period_; }
  int dim() const { return povms_.front().dim(); }

 private:
  Strategy(StrategyKind kind, std::vector<Povm> povms, std::vector<int> counts);

  StrategyKind kind_;
  std::vector<Povm> povms_;
  std::vector<int> counts_;  // cyclic block lengths; empty otherwise
  int period_ = 0;
};

enum class Decision { Hypothesis0, Hypothesis1, Truncated };

struct TrajectoryStep {
  int povm_index;
  int outcome;
  double z;  // log-likelihood increment
  double s;  // running statistic after this step
};

struct TrialOutcome {
  long stopping_time = 0;
  Decision decision = Decision::Truncated;
  double terminal_statistic = 0.0;
  bool hit_cap = false;
  std::optional<std::vector<TrajectoryStep>> trajectory;
};

// The two optimal single-copy PVMs of the adaptive policy. Refuses
// indistinguishable pairs before spending optimizer time.
Strategy build_adaptive_strategy(const StatePair& pair, const OptimizerOptions& opts = {});

// a = n (d_m_10 - tau), b = n (d_m_01 - tau); the step cap scales with the
// threshold-to-drift ratio and never drops below 10^4.
SqprtParams thresholds_for(long n, double tau, double d_m_10, double d_m_01);

// Per-sample drift of the running statistic: toward b under hypothesis 0 and
// toward -a under hypothesis 1 (both positive for a useful test). Adaptive
// strategies drift at the KLs of their two PVMs, fixed at the KLs of the one
// measurement, cyclic at the count-weighted averages over the schedule.
struct DriftRates {
  double under_h0 = 0.0;  // feeds threshold b
  double under_h1 = 0.0;  // feeds threshold a
};
DriftRates strategy_drifts(const Strategy& strategy, const StatePair& pair);

// Index of the measurement used at step k given the previous statistic.
int next_povm_index(const Strategy& strategy, long k, double s_prev, SplitMix64& rng);
const Povm& next_povm(const Strategy& strategy, long k, double s_prev, SplitMix64& rng);

// Z = log Tr[rho0 m(x)] - log Tr[rho1 m(x)].
double increment(const Povm& povm, int outcome, const StatePair& pair);

// One sequential test: sample with the policy's measurement each step,
// accumulate the statistic, stop at the first threshold crossing or at the
// step cap.
TrialOutcome run_trial(const DensityMatrix& true_state, const StatePair& pair,
                       const Strategy& strategy, const SqprtParams& params,
                       SplitMix64& rng, bool record_trajectory = false);

// Per-measurement tables (sampling CDF under the true state, increments per
// outcome) precomputed once and shared by every trial of a batch.
class CompiledStrategy {
 public:
  CompiledStrategy(const DensityMatrix& true_state, const StatePair& pair,
                   const Strategy& strategy);

  const Strategy& strategy() const { return *strategy_; }
  int sample_outcome(int povm_index, double u) const;
  double increment_for(int povm_index, int outcome) const {
    return increments_[povm_index][outcome];
  }

 private:
  const Strategy* strategy_;
  std::vector<std::vector<double>> cdf_;         // per povm, cumulative
  std::vector<std::vector<double>> increments_;  // per povm, per outcome
  std::vector<int> fallback_;                    // last positive-mass outcome
};

TrialOutcome run_trial(const CompiledStrategy& compiled, const SqprtParams& params,
                       SplitMix64& rng, bool record_trajectory = false);

}  // namespace sqht

#endif

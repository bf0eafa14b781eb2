#include "sqht/sequential.hpp"

#include <cmath>
#include <sstream>

namespace sqht {

SqprtParams::SqprtParams(double a_in, double b_in, long t_max_in)
    : a(a_in), b(b_in), t_max(t_max_in) {
  if (!(a > 0.0) || !(b > 0.0))
    throw Error(ErrorKind::OutOfRange, "thresholds must be positive");
  if (t_max < 1) throw Error(ErrorKind::OutOfRange, "t_max must be >= 1");
}

Strategy::Strategy(StrategyKind kind, std::vector<Povm> povms, std::vector<int> counts)
    : kind_(kind), povms_(std::move(povms)), counts_(std::move(counts)) {
  if (povms_.empty()) throw Error(ErrorKind::Validation, "strategy needs a measurement");
  const int d = povms_.front().dim();
  for (const Povm& m : povms_)
    if (m.dim() != d)
      throw Error(ErrorKind::DimensionMismatch, "strategy POVMs must share one dimension");
  if (kind_ == StrategyKind::Cyclic) {
    if (counts_.size() != povms_.size())
      throw Error(ErrorKind::Validation, "cyclic schedule needs one count per POVM");
    period_ = 0;
    for (int r : counts_) {
      if (r < 1) throw Error(ErrorKind::OutOfRange, "cyclic counts must be positive");
      period_ += r;
    }
  }
}

Strategy Strategy::adaptive(Povm m_star_0, Povm m_star_1) {
  return Strategy(StrategyKind::AdaptiveTwoPoint,
                  {std::move(m_star_0), std::move(m_star_1)}, {});
}

Strategy Strategy::fixed(Povm m) {
  return Strategy(StrategyKind::Fixed, {std::move(m)}, {});
}

Strategy Strategy::cyclic(std::vector<Povm> povms, std::vector<int> counts) {
  return Strategy(StrategyKind::Cyclic, std::move(povms), std::move(counts));
}

Strategy build_adaptive_strategy(const StatePair& pair, const OptimizerOptions& opts) {
  if (quantum_relative_entropy(pair) < 1e-10)
    throw Error(ErrorKind::NotDistinguishable,
                "states coincide; no informative measurement exists");
  MeasuredResult forward = measured_relative_entropy(pair, opts);
  MeasuredResult backward = measured_relative_entropy(pair.swapped(), opts);
  return Strategy::adaptive(std::move(forward.pvm), std::move(backward.pvm));
}

SqprtParams thresholds_for(long n, double tau, double d_m_10, double d_m_01) {
  if (n < 1) throw Error(ErrorKind::OutOfRange, "n must be >= 1");
  if (!(tau > 0.0) || tau >= std::min(d_m_10, d_m_01)) {
    std::ostringstream os;
    os << "tau = " << tau << " must lie in (0, " << std::min(d_m_10, d_m_01) << ")";
    throw Error(ErrorKind::TauTooLarge, os.str());
  }
  const double a = static_cast<double>(n) * (d_m_10 - tau);
  const double b = static_cast<double>(n) * (d_m_01 - tau);
  const double drift = std::max(std::min(d_m_10, d_m_01), 1e-6);
  const long t_max =
      std::max(10000L, static_cast<long>(std::ceil(50.0 * std::max(a, b) / drift)));
  return SqprtParams(a, b, t_max);
}

DriftRates strategy_drifts(const Strategy& strategy, const StatePair& pair) {
  auto kl_forward = [&](const Povm& m) {
    return classical_kl(born_distribution(pair.rho0, m), born_distribution(pair.rho1, m));
  };
  auto kl_backward = [&](const Povm& m) {
    return classical_kl(born_distribution(pair.rho1, m), born_distribution(pair.rho0, m));
  };
  DriftRates rates;
  switch (strategy.kind()) {
    case StrategyKind::AdaptiveTwoPoint:
      rates.under_h0 = kl_forward(strategy.povm(0));
      rates.under_h1 = kl_backward(strategy.povm(1));
      break;
    case StrategyKind::Fixed:
      rates.under_h0 = kl_forward(strategy.povm(0));
      rates.under_h1 = kl_backward(strategy.povm(0));
      break;
    case StrategyKind::Cyclic: {
      double sum0 = 0.0, sum1 = 0.0;
      for (std::size_t j = 0; j < strategy.povms().size(); ++j) {
        sum0 += strategy.counts()[j] * kl_forward(strategy.povm(j));
        sum1 += strategy.counts()[j] * kl_backward(strategy.povm(j));
      }
      rates.under_h0 = sum0 / strategy.period();
      rates.under_h1 = sum1 / strategy.period();
      break;
    }
  }
  return rates;
}

int next_povm_index(const Strategy& strategy, long k, double s_prev, SplitMix64& rng) {
  switch (strategy.kind()) {
    case StrategyKind::Fixed:
      return 0;
    case StrategyKind::AdaptiveTwoPoint:
      if (k <= 1) return rng.next_double() < 0.5 ? 0 : 1;
      return s_prev >= 0.0 ? 0 : 1;
    case StrategyKind::Cyclic: {
      // Blocks partition residues 1..q-1, 0; residue 0 belongs to the final
      // block.
      const int q = strategy.period();
      int r = static_cast<int>(k % q);
      if (r == 0) return static_cast<int>(strategy.povms().size()) - 1;
      int upper = 0;
      for (std::size_t j = 0; j < strategy.counts().size(); ++j) {
        upper += strategy.counts()[j];
        if (r <= upper) return static_cast<int>(j);
      }
      return static_cast<int>(strategy.povms().size()) - 1;
    }
  }
  throw Error(ErrorKind::Internal, "unknown strategy kind");
}

const Povm& next_povm(const Strategy& strategy, long k, double s_prev, SplitMix64& rng) {
  return strategy.povm(next_povm_index(strategy, k, s_prev, rng));
}

double increment(const Povm& povm, int outcome, const StatePair& pair) {
  if (outcome < 0 || outcome >= povm.size())
    throw Error(ErrorKind::OutOfRange, "outcome index outside POVM");
  if (povm.dim() != pair.dim())
    throw Error(ErrorKind::DimensionMismatch, "POVM and pair dimensions differ");
  const Cmat& element = povm.element(outcome);
  const double p0 = (pair.rho0.matrix() * element).trace().real();
  const double p1 = (pair.rho1.matrix() * element).trace().real();
  // The element is judged by its total Born mass: the likelihood ratio of a
  // tiny but nonzero element is still bounded by the increment bound, so only
  // genuinely vanishing elements are rejected.
  if (p0 + p1 <= 2.0 * tol::kProbZero || p0 <= 0.0 || p1 <= 0.0)
    throw Error(ErrorKind::ZeroProbabilityOutcome,
                "outcome element is numerically zero");
  return std::log(p0) - std::log(p1);
}

CompiledStrategy::CompiledStrategy(const DensityMatrix& true_state, const StatePair& pair,
                                   const Strategy& strategy)
    : strategy_(&strategy) {
  if (true_state.dim() != pair.dim() || strategy.dim() != pair.dim())
    throw Error(ErrorKind::DimensionMismatch, "trial inputs must share one dimension");
  for (const Povm& m : strategy.povms()) {
    const Rvec sample_p = born_distribution(true_state, m);
    const Rvec p0 = born_distribution(pair.rho0, m);
    const Rvec p1 = born_distribution(pair.rho1, m);
    std::vector<double> cdf(m.size());
    std::vector<double> z(m.size());
    double acc = 0.0;
    int last_positive = -1;
    for (int x = 0; x < m.size(); ++x) {
      acc += sample_p[x];
      cdf[x] = acc;
      if (sample_p[x] > 0.0) last_positive = x;
      if (p0[x] + p1[x] <= 2.0 * tol::kProbZero) {
        z[x] = 0.0;  // zero element; unreachable under the true state
      } else if (p0[x] <= 0.0 || p1[x] <= 0.0) {
        throw Error(ErrorKind::ZeroProbabilityOutcome,
                    "one-sided zero probability under full support");
      } else {
        z[x] = std::log(p0[x]) - std::log(p1[x]);
      }
    }
    if (last_positive < 0)
      throw Error(ErrorKind::Internal, "sampling distribution has no mass");
    cdf_.push_back(std::move(cdf));
    increments_.push_back(std::move(z));
    fallback_.push_back(last_positive);
  }
}

int CompiledStrategy::sample_outcome(int povm_index, double u) const {
  const std::vector<double>& cdf = cdf_[povm_index];
  for (std::size_t x = 0; x < cdf.size(); ++x)
    if (u < cdf[x]) return static_cast<int>(x);
  return fallback_[povm_index];
}

TrialOutcome run_trial(const CompiledStrategy& compiled, const SqprtParams& params,
                       SplitMix64& rng, bool record_trajectory) {
  const Strategy& strategy = compiled.strategy();
  TrialOutcome out;
  if (record_trajectory) out.trajectory.emplace();
  double s = 0.0;
  for (long k = 1; k <= params.t_max; ++k) {
    const int povm_index = next_povm_index(strategy, k, s, rng);
    const int outcome = compiled.sample_outcome(povm_index, rng.next_double());
    const double z = compiled.increment_for(povm_index, outcome);
    s += z;
    if (record_trajectory) out.trajectory->push_back({povm_index, outcome, z, s});
    if (s >= params.b) {
      out.stopping_time = k;
      out.decision = Decision::Hypothesis0;
      out.terminal_statistic = s;
      return out;
    }
    if (s <= -params.a) {
      out.stopping_time = k;
      out.decision = Decision::Hypothesis1;
      out.terminal_statistic = s;
      return out;
    }
  }
  out.stopping_time = params.t_max;
  out.decision = Decision::Truncated;
  out.terminal_statistic = s;
  out.hit_cap = true;
  return out;
}

TrialOutcome run_trial(const DensityMatrix& true_state, const StatePair& pair,
                       const Strategy& strategy, const SqprtParams& params,
                       SplitMix64& rng, bool record_trajectory) {
  const CompiledStrategy compiled(true_state, pair, strategy);
  return run_trial(compiled, params, rng, record_trajectory);
}

}  // namespace sqht

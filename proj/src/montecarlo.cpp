#include "sqht/montecarlo.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "sqht/parallel.hpp"

namespace sqht {

namespace {

constexpr double kMonitorSlack = 1e-9;

WilsonInterval wilson_95(std::uint64_t successes, std::uint64_t n) {
  if (n == 0) return {0.0, 1.0};
  const double z = 1.959963984540054;
  const double nn = static_cast<double>(n);
  const double phat = static_cast<double>(successes) / nn;
  const double denom = 1.0 + z * z / nn;
  const double center = (phat + z * z / (2.0 * nn)) / denom;
  const double half =
      z * std::sqrt(phat * (1.0 - phat) / nn + z * z / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

Estimate binomial_estimate(std::uint64_t successes, std::uint64_t n) {
  if (n == 0) return {0.0, 0.0};
  const double p = static_cast<double>(successes) / static_cast<double>(n);
  const double se = n > 1 ? std::sqrt(p * (1.0 - p) / static_cast<double>(n)) : 0.0;
  return {p, se};
}

struct HypothesisBatch {
  HypothesisStats stats;
  std::vector<TrialOutcome> outcomes;  // trajectories only when requested
  ViolationCounts violations;
};

HypothesisBatch simulate_hypothesis(const StatePair& pair, const Strategy& strategy,
                                    const SqprtParams& params, const BatchConfig& config,
                                    int hypothesis) {
  const DensityMatrix& true_state = hypothesis == 0 ? pair.rho0 : pair.rho1;
  const CompiledStrategy compiled(true_state, pair, strategy);
  const double c_bound = increment_bound(pair);
  const std::uint64_t n_trials = config.trials;

  std::vector<TrialOutcome> outcomes(n_trials);
  std::vector<ViolationCounts> violations(n_trials);
  parallel_for(
      n_trials,
      [&](std::size_t i) {
        SplitMix64 rng(derive_seed(config.seed, static_cast<std::uint64_t>(hypothesis),
                                   static_cast<std::uint64_t>(i)));
        TrialOutcome outcome = run_trial(compiled, params, rng, true);
        violations[i] = check_trial(outcome, strategy, params, c_bound);
        if (!config.record_trajectories) outcome.trajectory.reset();
        outcomes[i] = std::move(outcome);
      },
      config.threads);

  HypothesisBatch out;
  out.stats.trials = n_trials;
  std::uint64_t t_sum = 0;
  std::uint64_t exceed = 0;
  for (std::uint64_t i = 0; i < n_trials; ++i) {
    const TrialOutcome& o = outcomes[i];
    out.violations += violations[i];
    switch (o.decision) {
      case Decision::Hypothesis0: ++out.stats.decide0; break;
      case Decision::Hypothesis1: ++out.stats.decide1; break;
      case Decision::Truncated: ++out.stats.truncated; break;
    }
    t_sum += static_cast<std::uint64_t>(o.stopping_time);
    if (o.stopping_time > config.n) ++exceed;
  }
  out.stats.mean_t = n_trials ? static_cast<double>(t_sum) / static_cast<double>(n_trials) : 0.0;
  out.stats.exceedance =
      n_trials ? static_cast<double>(exceed) / static_cast<double>(n_trials) : 0.0;
  out.outcomes = std::move(outcomes);
  return out;
}

Estimate is_mean(const std::vector<double>& weights) {
  const std::size_t m = weights.size();
  double sum = 0.0;
  for (double w : weights) sum += w;
  const double mean = sum / static_cast<double>(m);
  if (m < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double w : weights) ss += (w - mean) * (w - mean);
  const double var = ss / static_cast<double>(m - 1);
  return {mean, std::sqrt(var / static_cast<double>(m))};
}

}  // namespace

Estimate importance_estimate(const std::vector<TrialOutcome>& outcomes, IsDirection dir) {
  if (outcomes.empty()) throw Error(ErrorKind::EmptyInput, "no trials supplied");
  std::vector<double> weights;
  weights.reserve(outcomes.size());
  for (const TrialOutcome& o : outcomes) {
    if (o.decision == Decision::Truncated || o.hit_cap)
      throw Error(ErrorKind::TruncatedPresent,
                  "truncated trial invalidates the stopped-likelihood identity");
    if (dir == IsDirection::BetaFromH0Trials) {
      weights.push_back(o.decision == Decision::Hypothesis0
                            ? std::exp(-o.terminal_statistic)
                            : 0.0);
    } else {
      weights.push_back(o.decision == Decision::Hypothesis1
                            ? std::exp(o.terminal_statistic)
                            : 0.0);
    }
  }
  return is_mean(weights);
}

ViolationCounts check_trial(const TrialOutcome& outcome, const Strategy& strategy,
                            const SqprtParams& params, double c_bound) {
  if (!outcome.trajectory.has_value())
    throw Error(ErrorKind::NoTrajectories, "trial carries no trajectory");
  ViolationCounts counts;
  const std::vector<TrajectoryStep>& steps = *outcome.trajectory;
  double s_prev = 0.0;
  for (std::size_t idx = 0; idx < steps.size(); ++idx) {
    const TrajectoryStep& step = steps[idx];
    const long k = static_cast<long>(idx) + 1;

    if (std::abs(step.z) > c_bound + kMonitorSlack) ++counts.increment_bound;

    switch (strategy.kind()) {
      case StrategyKind::AdaptiveTwoPoint:
        if (k >= 2) {
          const int expected = s_prev >= 0.0 ? 0 : 1;
          if (step.povm_index != expected) ++counts.policy;
        } else if (step.povm_index != 0 && step.povm_index != 1) {
          ++counts.policy;
        }
        break;
      case StrategyKind::Fixed:
        if (step.povm_index != 0) ++counts.policy;
        break;
      case StrategyKind::Cyclic: {
        SplitMix64 unused(0);
        if (step.povm_index != next_povm_index(strategy, k, s_prev, unused))
          ++counts.policy;
        break;
      }
    }

    if (std::abs(step.s - (s_prev + step.z)) > kMonitorSlack) ++counts.stopping;

    const bool inside = step.s > -params.a && step.s < params.b;
    const bool is_last = idx + 1 == steps.size();
    if (!is_last && !inside) ++counts.stopping;
    if (is_last) {
      switch (outcome.decision) {
        case Decision::Hypothesis0:
          if (step.s < params.b) ++counts.stopping;
          if (step.s > params.b + c_bound + kMonitorSlack) ++counts.overshoot;
          break;
        case Decision::Hypothesis1:
          if (step.s > -params.a) ++counts.stopping;
          if (step.s < -params.a - c_bound - kMonitorSlack) ++counts.overshoot;
          break;
        case Decision::Truncated:
          if (!inside || static_cast<long>(steps.size()) != params.t_max)
            ++counts.stopping;
          break;
      }
    }
    s_prev = step.s;
  }
  if (steps.empty() || static_cast<long>(steps.size()) != outcome.stopping_time)
    ++counts.stopping;
  return counts;
}

ViolationCounts monitor_invariants(const std::vector<TrialOutcome>& outcomes,
                                   const StatePair& pair, const Strategy& strategy,
                                   const SqprtParams& params) {
  if (outcomes.empty()) throw Error(ErrorKind::EmptyInput, "no trials supplied");
  const double c_bound = increment_bound(pair);
  ViolationCounts total;
  for (const TrialOutcome& o : outcomes) total += check_trial(o, strategy, params, c_bound);
  return total;
}

BatchEstimate run_batch(const StatePair& pair, const Strategy& strategy,
                        const SqprtParams& params, const BatchConfig& config) {
  if (config.trials < 1) throw Error(ErrorKind::OutOfRange, "trials must be >= 1");
  if (config.n < 1) throw Error(ErrorKind::OutOfRange, "n must be >= 1");

  BatchEstimate out;
  const bool want_h0 =
      config.hypothesis == Hypothesis::H0 || config.hypothesis == Hypothesis::Both;
  const bool want_h1 =
      config.hypothesis == Hypothesis::H1 || config.hypothesis == Hypothesis::Both;

  // Truncated trials are excluded from the change-of-measure estimates but
  // stay in the counts and in the recorded trajectories.
  auto complete_only = [](const std::vector<TrialOutcome>& all) {
    std::vector<TrialOutcome> complete;
    complete.reserve(all.size());
    for (const TrialOutcome& o : all) {
      if (o.decision == Decision::Truncated) continue;
      TrialOutcome lean;
      lean.stopping_time = o.stopping_time;
      lean.decision = o.decision;
      lean.terminal_statistic = o.terminal_statistic;
      lean.hit_cap = o.hit_cap;
      complete.push_back(std::move(lean));
    }
    return complete;
  };

  if (want_h0) {
    HypothesisBatch batch = simulate_hypothesis(pair, strategy, params, config, 0);
    out.h0 = batch.stats;
    out.violations += batch.violations;
    out.mean_t0 = batch.stats.mean_t;
    out.exceedance_0 = batch.stats.exceedance;
    out.alpha_hat = binomial_estimate(batch.stats.decide1, batch.stats.trials);
    out.alpha_wilson = wilson_95(batch.stats.decide1, batch.stats.trials);
    const std::vector<TrialOutcome> complete = complete_only(batch.outcomes);
    if (!complete.empty())
      out.beta_hat_is = importance_estimate(complete, IsDirection::BetaFromH0Trials);
    if (config.record_trajectories)
      for (TrialOutcome& o : batch.outcomes) out.recorded.push_back(std::move(o));
  }
  if (want_h1) {
    HypothesisBatch batch = simulate_hypothesis(pair, strategy, params, config, 1);
    out.h1 = batch.stats;
    out.violations += batch.violations;
    out.mean_t1 = batch.stats.mean_t;
    out.exceedance_1 = batch.stats.exceedance;
    out.beta_hat = binomial_estimate(batch.stats.decide0, batch.stats.trials);
    out.beta_wilson = wilson_95(batch.stats.decide0, batch.stats.trials);
    const std::vector<TrialOutcome> complete = complete_only(batch.outcomes);
    if (!complete.empty())
      out.alpha_hat_is = importance_estimate(complete, IsDirection::AlphaFromH1Trials);
    if (config.record_trajectories)
      for (TrialOutcome& o : batch.outcomes) out.recorded.push_back(std::move(o));
  }
  out.truncated_count = out.h0.truncated + out.h1.truncated;
  out.estimates_usable = out.truncated_count == 0;
  return out;
}

std::vector<SweepRow> exponent_sweep(const StatePair& pair, const Strategy& strategy,
                                     const std::vector<long>& n_values, double tau,
                                     std::uint64_t trials_per_n, std::uint64_t seed,
                                     double d_m_10, double d_m_01, unsigned threads) {
  if (n_values.empty()) throw Error(ErrorKind::EmptyInput, "no n values supplied");
  for (std::size_t i = 1; i < n_values.size(); ++i)
    if (n_values[i] <= n_values[i - 1])
      throw Error(ErrorKind::OutOfRange, "n values must be strictly ascending");

  std::vector<SweepRow> rows;
  for (long n : n_values) {
    const SqprtParams params = thresholds_for(n, tau, d_m_10, d_m_01);
    BatchConfig config;
    config.trials = trials_per_n;
    config.seed = derive_seed(seed, static_cast<std::uint64_t>(n));
    config.n = n;
    config.tau = tau;
    config.hypothesis = Hypothesis::Both;
    config.threads = threads;
    const BatchEstimate estimate = run_batch(pair, strategy, params, config);

    SweepRow row;
    row.n = n;
    row.a = params.a;
    row.b = params.b;
    if (estimate.alpha_hat_is) row.alpha_is = *estimate.alpha_hat_is;
    if (estimate.beta_hat_is) row.beta_is = *estimate.beta_hat_is;
    row.mean_t0 = estimate.mean_t0;
    row.mean_t1 = estimate.mean_t1;
    row.exceed0 = estimate.exceedance_0;
    row.exceed1 = estimate.exceedance_1;
    row.truncated = estimate.truncated_count;
    if (row.beta_is.value > 0.0 && row.mean_t0 > 0.0)
      row.slope_beta = std::log(1.0 / row.beta_is.value) / row.mean_t0;
    if (row.alpha_is.value > 0.0 && row.mean_t1 > 0.0)
      row.slope_alpha = std::log(1.0 / row.alpha_is.value) / row.mean_t1;
    rows.push_back(row);
  }
  return rows;
}

namespace {

std::string format_g12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

std::string sweep_table_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "n,a,b,alpha_is,alpha_is_se,beta_is,beta_is_se,mean_t0,mean_t1,exceed0,exceed1,"
        "truncated\n";
  for (const SweepRow& r : rows) {
    os << r.n << ',' << format_g12(r.a) << ',' << format_g12(r.b) << ','
       << format_g12(r.alpha_is.value) << ',' << format_g12(r.alpha_is.se) << ','
       << format_g12(r.beta_is.value) << ',' << format_g12(r.beta_is.se) << ','
       << format_g12(r.mean_t0) << ',' << format_g12(r.mean_t1) << ','
       << format_g12(r.exceed0) << ',' << format_g12(r.exceed1) << ',' << r.truncated
       << '\n';
  }
  return os.str();
}

std::string trajectories_csv(const std::vector<TrialOutcome>& outcomes,
                             const Strategy& strategy) {
  std::ostringstream os;
  os << "trial_id,k,povm_index,outcome,z_k,s_k\n";
  for (std::size_t trial = 0; trial < outcomes.size(); ++trial) {
    if (!outcomes[trial].trajectory.has_value())
      throw Error(ErrorKind::NoTrajectories, "trial carries no trajectory");
    const auto& steps = *outcomes[trial].trajectory;
    for (std::size_t idx = 0; idx < steps.size(); ++idx) {
      const TrajectoryStep& step = steps[idx];
      os << trial << ',' << idx + 1 << ',' << step.povm_index << ','
         << strategy.povm(step.povm_index).outcome(step.outcome) << ','
         << format_g12(step.z) << ',' << format_g12(step.s) << '\n';
    }
  }
  return os.str();
}

}  // namespace sqht

#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "sqht/montecarlo.hpp"

using namespace sqht;
using namespace sqht::testing;

namespace {

Strategy diag_fixed_strategy() { return Strategy::fixed(Povm::computational_basis(2)); }

BatchConfig config_for(std::uint64_t trials, std::uint64_t seed, long n,
                       bool record = false) {
  BatchConfig config;
  config.trials = trials;
  config.seed = seed;
  config.n = n;
  config.record_trajectories = record;
  return config;
}

TrialOutcome synthetic_trial(Decision decision, double terminal, long t = 5) {
  TrialOutcome outcome;
  outcome.decision = decision;
  outcome.terminal_statistic = terminal;
  outcome.stopping_time = t;
  return outcome;
}

}  // namespace

TEST_CASE("single-trial batch reports indicators with zero standard error") {
  const StatePair diag = diag_pair_example();
  const SqprtParams params(1.5, 1.5, 10000);
  const BatchEstimate est =
      run_batch(diag, diag_fixed_strategy(), params, config_for(1, 3, 10));
  CHECK((est.alpha_hat.value == 0.0 || est.alpha_hat.value == 1.0));
  CHECK(est.alpha_hat.se == 0.0);
  CHECK(est.h0.trials == 1);
  CHECK(est.h1.trials == 1);
}

TEST_CASE("batches are reproducible and thread-count independent") {
  const StatePair example = qubit_family(0.9, 0.8, 1.2);
  const Strategy fixed = diag_fixed_strategy();
  const SqprtParams params(2.0, 2.0, 10000);
  BatchConfig one = config_for(500, 11, 20);
  one.threads = 1;
  BatchConfig many = config_for(500, 11, 20);
  many.threads = 7;
  const BatchEstimate a = run_batch(example, fixed, params, one);
  const BatchEstimate b = run_batch(example, fixed, params, many);
  CHECK(a.alpha_hat.value == b.alpha_hat.value);
  CHECK(a.beta_hat.value == b.beta_hat.value);
  CHECK(a.mean_t0 == b.mean_t0);
  CHECK(a.mean_t1 == b.mean_t1);
  REQUIRE(a.beta_hat_is.has_value());
  REQUIRE(b.beta_hat_is.has_value());
  CHECK(a.beta_hat_is->value == b.beta_hat_is->value);
  CHECK(a.beta_hat_is->se == b.beta_hat_is->se);
}

TEST_CASE("degenerate equal pair truncates every trial") {
  const DensityMatrix rho = random_density(2, 8);
  const StatePair equal(rho, rho);
  const SqprtParams params(1.0, 1.0, 50);
  const BatchEstimate est =
      run_batch(equal, diag_fixed_strategy(), params, config_for(40, 1, 10));
  CHECK(est.truncated_count == 80);
  CHECK(!est.estimates_usable);
  CHECK(!est.alpha_hat_is.has_value());
  CHECK(!est.beta_hat_is.has_value());
  CHECK(est.exceedance_0 == 1.0);
}

TEST_CASE("importance estimate on synthetic outcomes") {
  std::vector<TrialOutcome> all_ones{synthetic_trial(Decision::Hypothesis1, -3.0),
                                     synthetic_trial(Decision::Hypothesis1, -2.5)};
  CHECK(importance_estimate(all_ones, IsDirection::BetaFromH0Trials).value ==
        doctest::Approx(0.0));

  std::vector<TrialOutcome> single{synthetic_trial(Decision::Hypothesis0, 2.0)};
  CHECK(importance_estimate(single, IsDirection::BetaFromH0Trials).value ==
        doctest::Approx(std::exp(-2.0)));

  CHECK_THROWS_AS(importance_estimate({}, IsDirection::BetaFromH0Trials), Error);
  std::vector<TrialOutcome> with_truncated{synthetic_trial(Decision::Truncated, 0.0)};
  with_truncated[0].hit_cap = true;
  try {
    importance_estimate(with_truncated, IsDirection::BetaFromH0Trials);
    FAIL("expected truncated-present");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TruncatedPresent);
  }
}

TEST_CASE("direct and importance-sampled estimators agree") {
  const StatePair diag = diag_pair_example();
  const SqprtParams params(2.0, 2.0, 100000);
  const BatchEstimate est =
      run_batch(diag, diag_fixed_strategy(), params, config_for(20000, 42, 30));
  REQUIRE(est.beta_hat_is.has_value());
  REQUIRE(est.alpha_hat_is.has_value());
  // Both sides have plenty of effective events at these thresholds.
  CHECK(est.h1.decide0 >= 100);
  CHECK(est.h0.decide1 >= 100);
  const double beta_gap = std::abs(est.beta_hat_is->value - est.beta_hat.value);
  CHECK(beta_gap <= 3.0 * std::hypot(est.beta_hat_is->se, est.beta_hat.se));
  const double alpha_gap = std::abs(est.alpha_hat_is->value - est.alpha_hat.value);
  CHECK(alpha_gap <= 3.0 * std::hypot(est.alpha_hat_is->se, est.alpha_hat.se));
}

TEST_CASE("achievability bounds hold with zero violations") {
  const StatePair example = qubit_family(0.98, 0.98, 1.57);
  OptimizerOptions opts;
  opts.restarts = 10;
  const Strategy adaptive = build_adaptive_strategy(example, opts);
  const DriftRates drifts = strategy_drifts(adaptive, example);
  const double tau = 0.1 * std::min(drifts.under_h0, drifts.under_h1);
  const long n = 30;
  const SqprtParams params = thresholds_for(n, tau, drifts.under_h1, drifts.under_h0);
  const BatchEstimate est =
      run_batch(example, adaptive, params, config_for(20000, 7, n));
  CHECK(est.violations.total() == 0);
  REQUIRE(est.alpha_hat_is.has_value());
  REQUIRE(est.beta_hat_is.has_value());
  const double alpha_rel = est.alpha_hat_is->se / est.alpha_hat_is->value;
  const double beta_rel = est.beta_hat_is->se / est.beta_hat_is->value;
  CHECK(est.alpha_hat_is->value <= std::exp(-params.a) * (1.0 + 3.0 * alpha_rel));
  CHECK(est.beta_hat_is->value <= std::exp(-params.b) * (1.0 + 3.0 * beta_rel));
}

TEST_CASE("mean stopping time obeys the stopped-boundary bound") {
  const StatePair example = qubit_family(0.98, 0.98, 1.57);
  OptimizerOptions opts;
  opts.restarts = 10;
  const Strategy adaptive = build_adaptive_strategy(example, opts);
  const DriftRates drifts = strategy_drifts(adaptive, example);
  const double tau = 0.1 * std::min(drifts.under_h0, drifts.under_h1);
  const SqprtParams params = thresholds_for(30, tau, drifts.under_h1, drifts.under_h0);
  const BatchEstimate est = run_batch(example, adaptive, params, config_for(20000, 13, 30));
  const double c = increment_bound(example);
  // Empirical slack on top of (b + C)/drift; the observed value is printed
  // so drift in either direction shows up in the log.
  const double slack = 2.0;
  const double cap = (params.b + c) / drifts.under_h0 + slack;
  MESSAGE("mean_t0 = ", est.mean_t0, ", bound = ", cap,
          ", observed slack = ", est.mean_t0 - (params.b + c) / drifts.under_h0);
  CHECK(est.mean_t0 <= cap);
  CHECK(est.mean_t1 <= (params.a + c) / drifts.under_h1 + slack);
}

TEST_CASE("regression fixture: diag pair batch, seed 42") {
  const StatePair diag = diag_pair_example();
  const double tau = 0.05;
  const DriftRates drifts = strategy_drifts(diag_fixed_strategy(), diag);
  const SqprtParams params = thresholds_for(40, tau, drifts.under_h1, drifts.under_h0);
  const BatchEstimate est =
      run_batch(diag, diag_fixed_strategy(), params, config_for(100000, 42, 40));
  REQUIRE(est.alpha_hat_is.has_value());
  const double alpha_rel = est.alpha_hat_is->se / est.alpha_hat_is->value;
  CHECK(est.alpha_hat_is->value <= std::exp(-params.a) * (1.0 + 3.0 * alpha_rel));
  // Frozen on first conforming run; guards the sampler and reduction paths.
  CHECK(est.alpha_hat_is->value ==
        doctest::Approx(0.0037443375574804298).epsilon(1e-9));
  CHECK(est.mean_t0 == doctest::Approx(30.98162).epsilon(1e-9));
}

TEST_CASE("monitors flag corrupted trajectories and foreign bounds") {
  const StatePair diag = diag_pair_example();
  const Strategy fixed = diag_fixed_strategy();
  const SqprtParams params(1.5, 1.5, 10000);
  BatchEstimate est = run_batch(diag, fixed, params, config_for(50, 5, 10, true));
  CHECK(est.violations.total() == 0);
  REQUIRE(!est.recorded.empty());
  CHECK(monitor_invariants(est.recorded, diag, fixed, params).total() == 0);

  // Editing a running statistic breaks the accumulation check.
  std::vector<TrialOutcome> corrupted = est.recorded;
  REQUIRE(corrupted[0].trajectory.has_value());
  (*corrupted[0].trajectory)[0].s += 0.5;
  CHECK(monitor_invariants(corrupted, diag, fixed, params).stopping >= 1);

  // A bound computed from a much closer pair must trip the increment check.
  const StatePair closer = qubit_family(0.05, 0.05, 0.2);
  CHECK(monitor_invariants(est.recorded, closer, fixed, params).increment_bound >= 1);

  TrialOutcome bare;
  bare.decision = Decision::Hypothesis0;
  try {
    monitor_invariants({bare}, diag, fixed, params);
    FAIL("expected no-trajectories");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoTrajectories);
  }
}

TEST_CASE("cyclic batches conform to the schedule") {
  const StatePair example = qubit_family(0.9, 0.8, 1.2);
  OptimizerOptions opts;
  opts.restarts = 8;
  const Povm forward = measured_relative_entropy(example, opts).pvm;
  const Povm backward = measured_relative_entropy(example.swapped(), opts).pvm;
  const Strategy cyclic = Strategy::cyclic(
      {forward.with_prefixed_labels("f/"), backward.with_prefixed_labels("b/")}, {2, 1});
  const DriftRates drifts = strategy_drifts(cyclic, example);
  const SqprtParams params =
      thresholds_for(20, 0.1 * std::min(drifts.under_h0, drifts.under_h1), drifts.under_h1,
                     drifts.under_h0);
  const BatchEstimate est = run_batch(example, cyclic, params, config_for(2000, 3, 20, true));
  CHECK(est.violations.total() == 0);
  // Spot-check the period-3 pattern on a recorded trajectory.
  REQUIRE(!est.recorded.empty());
  const auto& steps = *est.recorded.front().trajectory;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const long k = static_cast<long>(i) + 1;
    CHECK(steps[i].povm_index == (k % 3 == 0 ? 1 : 0));
  }
}

TEST_CASE("exponent sweep matches classical theory on a commuting pair") {
  const StatePair diag = diag_pair_example();
  const DriftRates drifts = strategy_drifts(diag_fixed_strategy(), diag);
  const std::vector<SweepRow> rows =
      exponent_sweep(diag, diag_fixed_strategy(), {20, 40, 80}, 0.02, 20000, 31,
                     drifts.under_h1, drifts.under_h0);
  REQUIRE(rows.size() == 3);
  const SweepRow& last = rows.back();
  CHECK(last.n == 80);
  CHECK(std::abs(last.slope_beta - diag_kl_forward()) <= 0.15 * diag_kl_forward());
  CHECK(std::abs(last.slope_alpha - diag_kl_backward()) <= 0.15 * diag_kl_backward());

  // A single-budget sweep is one batch with the derived seed.
  const std::vector<SweepRow> one =
      exponent_sweep(diag, diag_fixed_strategy(), {40}, 0.02, 500, 31, drifts.under_h1,
                     drifts.under_h0);
  const SqprtParams params = thresholds_for(40, 0.02, drifts.under_h1, drifts.under_h0);
  BatchConfig config = config_for(500, derive_seed(31, 40), 40);
  config.tau = 0.02;
  const BatchEstimate direct = run_batch(diag, diag_fixed_strategy(), params, config);
  REQUIRE(direct.beta_hat_is.has_value());
  CHECK(one[0].beta_is.value == direct.beta_hat_is->value);
  CHECK(one[0].mean_t0 == direct.mean_t0);

  try {
    exponent_sweep(diag, diag_fixed_strategy(), {40, 20}, 0.02, 10, 1, drifts.under_h1,
                   drifts.under_h0);
    FAIL("expected out-of-range");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OutOfRange);
  }
}

TEST_CASE("sweep and trajectory CSV schemas") {
  std::vector<SweepRow> rows(1);
  rows[0].n = 20;
  const std::string csv = sweep_table_csv(rows);
  CHECK(csv.rfind("n,a,b,alpha_is,alpha_is_se,beta_is,beta_is_se,mean_t0,mean_t1,"
                  "exceed0,exceed1,truncated\n",
                  0) == 0);

  const StatePair diag = diag_pair_example();
  const Strategy fixed = diag_fixed_strategy();
  const SqprtParams params(1.0, 1.0, 1000);
  const BatchEstimate est = run_batch(diag, fixed, params, config_for(2, 9, 10, true));
  const std::string traj = trajectories_csv(est.recorded, fixed);
  CHECK(traj.rfind("trial_id,k,povm_index,outcome,z_k,s_k\n", 0) == 0);
  CHECK(traj.find("\n0,1,0,") != std::string::npos);
}

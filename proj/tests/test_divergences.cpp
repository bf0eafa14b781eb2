#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "sqht/divergences.hpp"

using namespace sqht;
using namespace sqht::testing;

namespace {

OptimizerOptions quick_opts(std::uint64_t seed = 0, int restarts = 12) {
  OptimizerOptions opts;
  opts.restarts = restarts;
  opts.seed = seed;
  return opts;
}

StatePair equal_pair() {
  const DensityMatrix rho = random_density(2, 314);
  return StatePair(rho, rho);
}

// Random rank-1 POVM with extra outcomes, for data-processing checks.
Povm random_povm(int dim, int outcomes, std::uint64_t seed) {
  const Cmat k = random_isometry(outcomes, dim, seed);
  std::vector<std::string> labels;
  std::vector<Cmat> elements;
  for (int x = 0; x < outcomes; ++x) {
    const Eigen::RowVectorXcd row = k.row(x);
    elements.push_back(row.adjoint() * row);
    labels.push_back(std::to_string(x));
  }
  return Povm(std::move(labels), std::move(elements));
}

}  // namespace

TEST_CASE("classical KL basics") {
  Rvec p(2), q(2);
  p << 0.6, 0.4;
  q << 0.3, 0.7;
  CHECK(classical_kl(p, p) == doctest::Approx(0.0));
  CHECK(classical_kl(p, q) == doctest::Approx(diag_kl_forward()).epsilon(1e-12));

  Rvec degenerate(2), half(2);
  degenerate << 1.0, 0.0;
  half << 0.5, 0.5;
  CHECK(classical_kl(degenerate, half) == doctest::Approx(std::log(2.0)));

  Rvec zero_q(2);
  zero_q << 0.0, 1.0;
  try {
    classical_kl(p, zero_q);
    FAIL("expected support violation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SupportViolation);
  }
}

TEST_CASE("quantum relative entropy closed forms") {
  CHECK(quantum_relative_entropy(equal_pair()) == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(quantum_relative_entropy(diag_pair_example()) ==
        doctest::Approx(diag_kl_forward()).epsilon(1e-12));
  // Independently pinned by a spectral-decomposition script.
  const StatePair example = qubit_family(0.98, 0.98, 1.57);
  CHECK(quantum_relative_entropy(example) ==
        doctest::Approx(2.249815710394865).epsilon(1e-11));
}

TEST_CASE("quantum relative entropy agrees with the Bloch closed form") {
  for (int trial = 0; trial < 25; ++trial) {
    const StatePair pair = random_real_qubit_pair(1700 + trial);
    CHECK(quantum_relative_entropy(pair) ==
          doctest::Approx(bloch_qubit_relative_entropy(pair.rho0.matrix(),
                                                       pair.rho1.matrix()))
              .epsilon(1e-9));
  }
}

TEST_CASE("max relative entropy closed forms") {
  const StatePair diag = diag_pair_example();
  CHECK(max_relative_entropy(diag.rho0, diag.rho0) == doctest::Approx(0.0));
  CHECK(max_relative_entropy(diag.rho0, diag.rho1) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(max_relative_entropy(diag.rho1, diag.rho0) ==
        doctest::Approx(std::log(7.0 / 4.0)).epsilon(1e-12));
  const StatePair example = qubit_family(0.98, 0.98, 1.57);
  CHECK(max_relative_entropy(example.rho0, example.rho1) ==
        doctest::Approx(3.920915384707417).epsilon(1e-11));
}

TEST_CASE("increment bound") {
  CHECK(increment_bound(equal_pair()) == doctest::Approx(0.0));
  CHECK(increment_bound(diag_pair_example()) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("measured relative entropy on commuting and equal pairs") {
  const StatePair diag = diag_pair_example();
  const MeasuredResult res = measured_relative_entropy(diag, quick_opts(1));
  CHECK(res.value == doctest::Approx(diag_kl_forward()).epsilon(1e-6));
  CHECK(res.meta.converged);
  // The returned PVM reproduces the value through the Born rule.
  CHECK(classical_kl(born_distribution(diag.rho0, res.pvm),
                     born_distribution(diag.rho1, res.pvm)) ==
        doctest::Approx(res.value).epsilon(1e-8));

  CHECK(measured_relative_entropy(equal_pair(), quick_opts(2)).value ==
        doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("measured relative entropy matches the grid oracle on the example pair") {
  const StatePair example = qubit_family(0.98, 0.98, 1.57);
  const double optimized = measured_relative_entropy(example, quick_opts(3)).value;
  const double oracle = qubit_grid_oracle(example, 100000);
  CHECK(std::abs(optimized - oracle) <= 1e-6);
  CHECK(optimized <= quantum_relative_entropy(example) + 1e-9);
}

TEST_CASE("grid oracle covers the second circle") {
  // States with Bloch vectors in the y-z plane: the optimal axis sits on the
  // relative-phase sweep, not the real one.
  auto yz_state = [](double y, double z) {
    Cmat rho(2, 2);
    rho << 0.5 * (1.0 + z), std::complex<double>(0.0, -0.5 * y),
        std::complex<double>(0.0, 0.5 * y), 0.5 * (1.0 - z);
    return DensityMatrix(rho);
  };
  const StatePair pair(yz_state(0.7, 0.2), yz_state(-0.5, 0.3));
  const double oracle = qubit_grid_oracle(pair, 100000);
  const double optimized = measured_relative_entropy(pair, quick_opts(90)).value;
  CHECK(std::abs(oracle - optimized) <= 1e-6);
}

TEST_CASE("grid oracle behavior") {
  CHECK(qubit_grid_oracle(equal_pair(), 1000) == doctest::Approx(0.0));
  const StatePair diag = diag_pair_example();
  CHECK(qubit_grid_oracle(diag, 1000) == doctest::Approx(diag_kl_forward()).epsilon(1e-8));
  CHECK(qubit_grid_oracle(diag, 1000) <= qubit_grid_oracle(diag, 100000) + 1e-12);
  try {
    qubit_grid_oracle(random_pair(3, 5), 1000);
    FAIL("expected wrong dimension");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::WrongDimension);
  }
}

TEST_CASE("ordering chain and data processing on random pairs") {
  for (int trial = 0; trial < 12; ++trial) {
    const int dim = 2 + trial % 2;
    const StatePair pair = random_pair(dim, 2024 + trial);
    const double d_m = measured_relative_entropy(pair, quick_opts(trial)).value;
    const double d_q = quantum_relative_entropy(pair);
    const double d_max = max_relative_entropy(pair.rho0, pair.rho1);
    CHECK(d_m >= 0.0);
    CHECK(d_m <= d_q + 1e-9);
    CHECK(d_q <= d_max + 1e-9);
    const Povm sampled = random_povm(dim, dim + 2, 5000 + trial);
    const double kl = classical_kl(born_distribution(pair.rho0, sampled),
                                   born_distribution(pair.rho1, sampled));
    CHECK(kl <= d_m + 1e-6);
  }
}

TEST_CASE("unitary invariance of the divergences") {
  for (int trial = 0; trial < 4; ++trial) {
    const StatePair pair = random_pair(2, 6100 + trial);
    const Cmat u = random_unitary(2, 6200 + trial);
    const StatePair rotated(DensityMatrix(u * pair.rho0.matrix() * u.adjoint()),
                            DensityMatrix(u * pair.rho1.matrix() * u.adjoint()));
    CHECK(std::abs(quantum_relative_entropy(pair) - quantum_relative_entropy(rotated)) <=
          1e-9);
    CHECK(std::abs(max_relative_entropy(pair.rho0, pair.rho1) -
                   max_relative_entropy(rotated.rho0, rotated.rho1)) <= 1e-9);
    CHECK(std::abs(measured_relative_entropy(pair, quick_opts(trial)).value -
                   measured_relative_entropy(rotated, quick_opts(trial + 17)).value) <=
          1e-6);
  }
}

TEST_CASE("commuting pairs reach the quantum relative entropy") {
  for (int trial = 0; trial < 4; ++trial) {
    const StatePair pair = random_commuting_pair(2 + trial % 2, 777 + trial);
    CHECK(std::abs(measured_relative_entropy(pair, quick_opts(trial)).value -
                   quantum_relative_entropy(pair)) <= 1e-6);
  }
}

TEST_CASE("block superadditivity of the measured relative entropy") {
  const StatePair pair = qubit_family(0.9, 0.8, 1.2);
  const MeasuredResult single = measured_relative_entropy(pair, quick_opts(4));
  StatePair doubled(tensor_power(pair.rho0, 2), tensor_power(pair.rho1, 2));
  OptimizerOptions opts = quick_opts(5);
  opts.warm_starts.push_back(kron(single.basis, single.basis));
  const double two_copy = measured_relative_entropy(doubled, opts).value;
  CHECK(two_copy >= 2.0 * single.value - 1e-6);
}

TEST_CASE("pvm objective gradient matches central finite differences") {
  const StatePair pair = random_pair(2, 888);
  const StatePair pair3 = random_pair(3, 889);
  SplitMix64 rng(4321);
  for (int point = 0; point < 10; ++point) {
    const StatePair& p = point % 2 == 0 ? pair : pair3;
    const int d = p.dim();
    const Cmat basis = random_unitary(d, 9100 + point);
    const Cmat grad = pvm_objective_gradient(p, basis);

    Cmat direction(d, d);
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < d; ++i)
        direction(i, j) =
            std::complex<double>(rng.next_double() - 0.5, rng.next_double() - 0.5);
    direction = 0.5 * (direction + direction.adjoint().eval());

    const double analytic = (direction * grad).trace().real();
    const double eps = 1e-5;
    auto shifted = [&](double t) {
      Eigen::SelfAdjointEigenSolver<Cmat> solver(t * direction);
      Cvec phases(d);
      for (int i = 0; i < d; ++i) phases[i] = std::polar(1.0, solver.eigenvalues()[i]);
      const Cmat u = solver.eigenvectors() * phases.asDiagonal() *
                     solver.eigenvectors().adjoint() * basis;
      return pvm_objective(p, u);
    };
    const double numeric = (shifted(eps) - shifted(-eps)) / (2.0 * eps);
    CHECK(std::abs(analytic - numeric) <= 1e-5 * std::max(1.0, std::abs(analytic)));
  }
}

TEST_CASE("rank-1 objective gradient matches central finite differences") {
  const StatePair pair = random_pair(2, 808);
  SplitMix64 rng(8765);
  for (int point = 0; point < 10; ++point) {
    const int n = 4, d = 2;
    const Cmat iso = random_isometry(n, d, 9900 + point);
    const double t0 = 0.3 + rng.next_double();
    const double t1 = 0.3 + rng.next_double();
    const Cmat grad = rank1_objective_gradient(pair, iso, t0, t1);

    Cmat direction(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        direction(i, j) =
            std::complex<double>(rng.next_double() - 0.5, rng.next_double() - 0.5);
    direction = 0.5 * (direction + direction.adjoint().eval());

    const double analytic = (direction * grad).trace().real();
    const double eps = 1e-5;
    auto shifted = [&](double t) {
      Eigen::SelfAdjointEigenSolver<Cmat> solver(t * direction);
      Cvec phases(n);
      for (int i = 0; i < n; ++i) phases[i] = std::polar(1.0, solver.eigenvalues()[i]);
      const Cmat k = solver.eigenvectors() * phases.asDiagonal() *
                     solver.eigenvectors().adjoint() * iso;
      return rank1_objective(pair, k, t0, t1);
    };
    const double numeric = (shifted(eps) - shifted(-eps)) / (2.0 * eps);
    CHECK(std::abs(analytic - numeric) <= 1e-5 * std::max(1.0, std::abs(analytic)));
  }
}

TEST_CASE("weighted objective closed forms") {
  const StatePair diag = diag_pair_example();
  const Povm basis = Povm::computational_basis(2);
  CHECK(weighted_objective(basis, diag, 0.0, 0.0) == doctest::Approx(0.0));
  CHECK(weighted_objective(Povm::trivial(2), diag, 1.0, 1.0) == doctest::Approx(0.0));
  CHECK(weighted_objective(basis, diag, 1.0, 1.0) ==
        doctest::Approx(diag_kl_forward() + diag_kl_backward()).epsilon(1e-12));
}

TEST_CASE("optimize_g collapses to the measured relative entropy on one-sided weights") {
  const StatePair example = qubit_family(0.98, 0.98, 1.57);
  const WeightedResult one_sided = optimize_g(example, 1.0, 0.0, quick_opts(6));
  const double mre_backward =
      measured_relative_entropy(example.swapped(), quick_opts(7)).value;
  CHECK(std::abs(one_sided.value - mre_backward) <= 2e-6);
}

TEST_CASE("optimize_g on a commuting pair") {
  const StatePair diag = diag_pair_example();
  const WeightedResult res = optimize_g(diag, 1.0, 1.0, quick_opts(8));
  CHECK(res.value == doctest::Approx(diag_kl_forward() + diag_kl_backward()).epsilon(2e-6));
  // The returned POVM validates and reproduces the value.
  CHECK(weighted_objective(res.povm, diag, 1.0, 1.0) ==
        doctest::Approx(res.value).epsilon(1e-8));
  CHECK(res.povm.size() == 4);
}

TEST_CASE("optimize_g positive homogeneity in the weights") {
  const StatePair pair = qubit_family(0.9, 0.85, 1.3);
  const double base = optimize_g(pair, 0.7, 1.1, quick_opts(9)).value;
  for (double lambda : {0.5, 2.0}) {
    const double scaled = optimize_g(pair, lambda * 0.7, lambda * 1.1, quick_opts(9)).value;
    CHECK(std::abs(scaled - lambda * base) <= 1e-6 * lambda);
  }
}

TEST_CASE("optimize_g stays above the best single PVM") {
  const StatePair example = qubit_family(0.98, 0.98, 1.57);
  const WeightedResult g = optimize_g(example, 1.0, 1.0, quick_opts(10));
  const double floor0 =
      weighted_objective(measured_relative_entropy(example, quick_opts(11)).pvm, example,
                         1.0, 1.0);
  const double floor1 = weighted_objective(
      measured_relative_entropy(example.swapped(), quick_opts(12)).pvm, example, 1.0, 1.0);
  CHECK(g.value >= std::max(floor0, floor1) - 1e-8);
}

TEST_CASE("divergence report invariants") {
  const StatePair pair = random_pair(2, 31337);
  const DivergenceReport report = divergence_report(pair, quick_opts(13));
  CHECK(report.d_measured >= 0.0);
  CHECK(report.d_measured <= report.d_quantum + 1e-9);
  CHECK(report.d_quantum <= report.d_max + 1e-9);
  CHECK(classical_kl(born_distribution(pair.rho0, report.optimal_pvm),
                     born_distribution(pair.rho1, report.optimal_pvm)) ==
        doctest::Approx(report.d_measured).epsilon(1e-8));
}

#ifndef SQHT_STATES_HPP
#define SQHT_STATES_HPP

#include <string>
#include <vector>

#include "sqht/matrix.hpp"

namespace sqht {

// Validated quantum state: Hermitian, PSD, unit trace. "Full support" means
// every eigenvalue clears the support threshold; sequential tests require it
// so that log-likelihood increments stay finite.
class DensityMatrix {
 public:
  explicit DensityMatrix(Cmat matrix);

  int dim() const { return static_cast<int>(matrix_.rows()); }
  const Cmat& matrix() const { return matrix_; }
  double min_eigenvalue() const { return min_eigenvalue_; }
  bool full_support() const { return min_eigenvalue_ > tol::kFullSupport; }

 private:
  Cmat matrix_;
  double min_eigenvalue_;
};

// Finite outcome-indexed measurement: PSD elements summing to identity.
class Povm {
 public:
  // Default is the trivial one-outcome measurement on a one-dimensional
  // space; real instances come from the named constructors below.
  Povm() : outcomes_{"0"}, elements_{Cmat::Identity(1, 1)} {}
  Povm(std::vector<std::string> outcomes, std::vector<Cmat> elements);

  int dim() const { return static_cast<int>(elements_.front().rows()); }
  int size() const { return static_cast<int>(elements_.size()); }
  const std::vector<std::string>& outcomes() const { return outcomes_; }
  const std::vector<Cmat>& elements() const { return elements_; }
  const Cmat& element(int x) const { return elements_.at(x); }
  const std::string& outcome(int x) const { return outcomes_.at(x); }

  // Outcome sets are opaque labels; disjoint unions are formed by prefixing.
  Povm with_prefixed_labels(const std::string& prefix) const;

  // Computational-basis projectors with labels "0".."d-1".
  static Povm computational_basis(int dim);
  // Rank-1 projectors onto the columns of a unitary.
  static Povm from_basis(const Cmat& unitary);
  // Single-element POVM {I}.
  static Povm trivial(int dim);

 private:
  std::vector<std::string> outcomes_;
  std::vector<Cmat> elements_;
};

struct StatePair {
  StatePair(DensityMatrix rho0_in, DensityMatrix rho1_in, std::string label_in = "");

  DensityMatrix rho0;
  DensityMatrix rho1;
  std::string label;

  int dim() const { return rho0.dim(); }
  StatePair swapped() const { return StatePair(rho1, rho0, label); }
};

// Born's rule P(x) = Tr[rho m(x)], clipped into [0,1] against eigen
// round-off and renormalized.
Rvec born_distribution(const DensityMatrix& rho, const Povm& m);

DensityMatrix tensor_power(const DensityMatrix& rho, int l,
                           int dimension_cap = kDefaultDimensionCap);

// Two-parameter depolarized pure-state pair on a qubit:
//   rho_i = r_i |psi_i><psi_i| + (1 - r_i) I/2,
//   |psi_i> = cos(theta/4)|0> + (-1)^i sin(theta/4)|1>.
StatePair qubit_family(double r0, double r1, double theta);

// State-pair JSON document: {"dim": d, "rho0": [[[re,im],...],...],
// "rho1": ..., "label"?} or {"family": {"type":"qubit","r0":..,"r1":..,
// "theta":..}, "label"?}.
StatePair parse_state_pair(const std::string& json_text);
std::string state_pair_to_json(const StatePair& pair);

// POVM JSON document: {"dim": d, "elements": [[[ [re,im], ...], ...], ...],
// "labels"?: [...]}.
Povm parse_povm(const std::string& json_text);
std::string povm_to_json(const Povm& m);

}  // namespace sqht

#endif

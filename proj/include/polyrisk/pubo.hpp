#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "polyrisk/dataset.hpp"
#include "polyrisk/losses.hpp"
#include "polyrisk/types.hpp"

namespace polyrisk {

/// Fixed-point encoding of n real weights into N = n*d bits, with per-weight
/// bit coefficients (zeta, -zeta/2, ..., -zeta*2^(1-d)) so each decoded
/// weight lies in (-zeta, zeta].
struct FixedPointEncoding {
  int n = 0;
  int d = 1;
  Real zeta = 1.0;

  int num_bits() const { return n * d; }

  /// Coefficient of bit b (0 <= b < d) within one weight.
  Real bit_coeff(int b) const;

  /// Dense n x N coefficient matrix w = K q.
  MatX coeff_matrix() const;
};

VecX decode_weights(const FixedPointEncoding& e, const std::vector<int>& bits);

/// Canonical monomial: strictly increasing variable indices (idempotence
/// q^2 = q already applied). Empty monomial is the constant term.
using Monomial = std::vector<int>;

struct PuboTensor {
  int num_vars = 0;
  int num_logical = 0;  // == num_vars unless ancillae were appended
  std::map<Monomial, Real> terms;

  int degree() const;
  std::size_t num_terms() const { return terms.size(); }
  void add_term(Monomial vars_sorted_unique, Real coeff);
  Real eval(const std::vector<int>& bits) const;
};

/// Symmetric sparse moment tensors phi_j, keyed by sorted feature multiset
/// with multiplicity-weighted coefficients.
struct MomentTensors {
  int dim = 0;
  // degree j -> (sorted multiset of feature indices -> coefficient)
  std::map<int, std::map<std::vector<int>, Real>> phi;
};

MomentTensors build_moments(const Dataset& d, const PolyLossCoeffs& c);

/// Compiles the regularized polynomial risk into a PUBO over the encoded
/// bits: PUBO(q) == empirical_risk(decode(q)) + (lambda2/2)|decode(q)|^2.
PuboTensor assemble_pubo(const MomentTensors& mt, Real lambda2,
                         const FixedPointEncoding& e,
                         std::size_t term_cap = 10'000'000);

/// Appends n indicator ancillae implementing l0 regularization with weight
/// lambda0; requires phi > lambda0.
PuboTensor add_l0_regularizer(const PuboTensor& p, const FixedPointEncoding& e,
                              Real lambda0, Real phi);

struct QubitEstimate {
  std::int64_t logical = 0;
  std::int64_t ancilla = 0;        // N(N-2)/4, matching the published table
  std::int64_t ancilla_loose = 0;  // N^2/4 prose bound
  bool bound_implemented = false;  // true only for cubic
  std::int64_t total() const { return logical + ancilla; }
};

QubitEstimate qubit_estimate(int n, int d, int loss_degree);

void save_pubo(const PuboTensor& p, const std::string& path);
PuboTensor load_pubo(const std::string& path);

}  // namespace polyrisk

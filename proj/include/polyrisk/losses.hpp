#pragma once

#include <string>
#include <vector>

#include "polyrisk/dataset.hpp"
#include "polyrisk/types.hpp"

namespace polyrisk {

enum class LossKind { ZeroOne, Cubic, Sixth, Logistic, Square, SmoothHinge };

LossKind loss_kind_from_string(const std::string& s);
std::string to_string(LossKind k);
bool is_polynomial(LossKind k);
bool is_convex(LossKind k);

/// Polynomial loss coefficients. Degree 3 stores (alpha1, alpha3) with the
/// even terms zero; degree 6 stores (beta1..beta5) plus the fixed
/// sixth-order coefficient omega. beta0 is kept for reference but never
/// enters a training objective.
struct PolyLossCoeffs {
  int degree = 3;              // 3 or 6
  std::vector<Real> coeffs;    // degree 3: {a1, a3}; degree 6: {b1..b5}
  Real omega = 0.0;            // degree 6 only, > 0
  Real beta0 = 0.0;            // degree 6 only, informational

  static PolyLossCoeffs cubic(Real a1, Real a3) { return {3, {a1, a3}, 0.0, 0.0}; }
  void validate() const;

  /// Coefficient of gamma^j in the training objective; 0 outside the
  /// active degrees.
  Real poly_coeff(int j) const;
};

VecX margins(const Dataset& d, const VecX& w);

Real loss_eval(LossKind kind, const PolyLossCoeffs* c, Real gamma);

Real empirical_risk(LossKind kind, const PolyLossCoeffs* c, const Dataset& d,
                    const VecX& w);

Real regularized_objective(LossKind kind, const PolyLossCoeffs* c, const Dataset& d,
                           const VecX& w, Real lambda2);

/// Fraction of test examples misclassified (ties at margin 0 count 1/2).
Real test_error(const Dataset& d, const VecX& w);

}  // namespace polyrisk

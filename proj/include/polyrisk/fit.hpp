#pragma once

#include <optional>
#include <vector>

#include "polyrisk/dataset.hpp"
#include "polyrisk/losses.hpp"
#include "polyrisk/types.hpp"

namespace polyrisk {

/// Which printed variance formula backs sigma_i. The covariance-matrix
/// diagonal (x_i^T x_i / lambda2) is the default; the alternative per-feature
/// form is selectable for study since the source formulas disagree.
enum class SigmaConvention { CovarianceDiagonal, PerFeatureMean };

struct MarginPriorStats {
  VecX sigma;      // per-example margin std-dev
  Real lambda2 = 0.0;
};

/// Accumulated pair statistics of the cubic risk embedding, summed over all
/// m^2 ordered pairs (i, j) including i == j.
struct TStats {
  Real t0 = 0, t1 = 0, t2 = 0, t3 = 0, t4 = 0;

  TStats& operator+=(const TStats& o) {
    t0 += o.t0; t1 += o.t1; t2 += o.t2; t3 += o.t3; t4 += o.t4;
    return *this;
  }
};

MarginPriorStats margin_prior_stats(const Dataset& d, Real lambda2,
                                    SigmaConvention conv = SigmaConvention::CovarianceDiagonal);

/// Pairwise margin correlation rho_ij = y_i y_j x_i.x_j / (|x_i||x_j|);
/// 0 when either row is all-zero.
Real pair_correlation(const Dataset& d, int i, int j);

/// Exact O(m^2) accumulation. If pair_sample > 0, off-diagonal pairs are
/// uniformly subsampled (pair_sample pairs, unbiased rescaling) instead.
TStats accumulate_t(const MarginPriorStats& stats, const Dataset& d,
                    std::int64_t pair_sample = 0, std::uint64_t seed = 0);

/// Closed-form t-contribution of a single ordered pair.
TStats pair_t_contribution(Real sigma_i, Real sigma_j, Real rho);

/// Risk-level cubic fit (alpha1*, alpha3*) from the accumulated t statistics.
PolyLossCoeffs fit_cubic_risk(const Dataset& d, Real lambda2,
                              SigmaConvention conv = SigmaConvention::CovarianceDiagonal);
PolyLossCoeffs cubic_from_t(const TStats& t);

/// Loss-level cubic fit from the single-Gaussian margin prior with
/// sigma^2 = tr[X^T X] / (lambda2 m).
PolyLossCoeffs fit_cubic_direct(const Dataset& d, Real lambda2);

/// Sixth-order beta coefficients for a fixed omega, from the closed-form
/// Gamma-function solution of the least-squares embedding.
PolyLossCoeffs sixth_betas(Real omega);

/// Min-max normalizes the 0-1 risk and polynomial risk over the sampled
/// weight states and returns the standard deviation of their difference.
Real embedding_error(const Dataset& d, const PolyLossCoeffs& c,
                     const std::vector<VecX>& states);

/// Same, over precomputed risk vectors (one entry per sampled state).
Real embedding_error(const VecX& zero_one_risk, const VecX& poly_risk);

}  // namespace polyrisk

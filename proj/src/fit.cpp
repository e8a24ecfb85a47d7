#include "polyrisk/fit.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace polyrisk {

namespace {

constexpr Real kSqrt2Pi = 2.5066282746310005024;

MatX dense_matrix(const Dataset& d) {
  MatX x = MatX::Zero(d.num_examples(), d.dim);
  for (int i = 0; i < d.num_examples(); ++i)
    for (const auto& [idx, val] : d.rows[i]) x(i, idx) = val;
  return x;
}

}  // namespace

MarginPriorStats margin_prior_stats(const Dataset& d, Real lambda2, SigmaConvention conv) {
  if (!(lambda2 > 0.0)) throw std::invalid_argument("margin_prior_stats: lambda2 > 0");
  MarginPriorStats s;
  s.lambda2 = lambda2;
  s.sigma.resize(d.num_examples());
  for (int i = 0; i < d.num_examples(); ++i) {
    Real nsq = row_norm_sq(d.rows[i]);
    if (conv == SigmaConvention::CovarianceDiagonal) {
      s.sigma[i] = std::sqrt(nsq / lambda2);
    } else {
      // alternative printed form: (1/n) sum_j (x_ij / lambda2)^2
      s.sigma[i] = std::sqrt(nsq / (lambda2 * lambda2 * d.dim));
    }
  }
  return s;
}

Real pair_correlation(const Dataset& d, int i, int j) {
  Real ni = row_norm_sq(d.rows[i]);
  Real nj = row_norm_sq(d.rows[j]);
  if (ni == 0.0 || nj == 0.0) return 0.0;
  return d.labels[i] * d.labels[j] * sparse_dot(d.rows[i], d.rows[j]) /
         std::sqrt(ni * nj);
}

TStats pair_t_contribution(Real si, Real sj, Real rho) {
  TStats t;
  Real si3 = si * si * si;
  Real sj3 = sj * sj * sj;
  t.t0 = rho * (si + sj) / kSqrt2Pi;
  t.t1 = rho * (3.0 - rho * rho) * (si3 + sj3) / kSqrt2Pi;
  t.t2 = 3.0 * rho * si * sj * (si * si + sj * sj);
  t.t3 = rho * si * sj;
  t.t4 = 3.0 * rho * (3.0 + 2.0 * rho * rho) * si3 * sj3;
  return t;
}

TStats accumulate_t(const MarginPriorStats& stats, const Dataset& d,
                    std::int64_t pair_sample, std::uint64_t seed) {
  const int m = d.num_examples();
  if (stats.sigma.size() != m) throw std::invalid_argument("accumulate_t: stats/dataset mismatch");
  VecX norms(m);
  for (int i = 0; i < m; ++i) norms[i] = std::sqrt(row_norm_sq(d.rows[i]));

  TStats total;
  if (pair_sample > 0) {
    // unbiased estimator over uniformly sampled ordered pairs
    Rng rng(seed);
    for (std::int64_t s = 0; s < pair_sample; ++s) {
      int i = static_cast<int>(rng.uniform_int(m));
      int j = static_cast<int>(rng.uniform_int(m));
      Real rho = pair_correlation(d, i, j);
      total += pair_t_contribution(stats.sigma[i], stats.sigma[j], rho);
    }
    Real scale = static_cast<Real>(m) * m / static_cast<Real>(pair_sample);
    total.t0 *= scale; total.t1 *= scale; total.t2 *= scale;
    total.t3 *= scale; total.t4 *= scale;
    return total;
  }

  // exact O(m^2) via blocked Gram products
  MatX x = dense_matrix(d);
  const int block = 512;
  for (int lo = 0; lo < m; lo += block) {
    int b = std::min(block, m - lo);
    MatX g = x.middleRows(lo, b) * x.transpose();  // b x m
    for (int r = 0; r < b; ++r) {
      int i = lo + r;
      if (norms[i] == 0.0) continue;
      for (int j = 0; j < m; ++j) {
        if (norms[j] == 0.0) continue;
        Real rho = d.labels[i] * d.labels[j] * g(r, j) / (norms[i] * norms[j]);
        total += pair_t_contribution(stats.sigma[i], stats.sigma[j], rho);
      }
    }
  }
  return total;
}

PolyLossCoeffs cubic_from_t(const TStats& t) {
  Real den = t.t2 * t.t2 - 4.0 * t.t3 * t.t4;
  Real tol = 1e-12 * std::max(t.t2 * t.t2, 4.0 * std::abs(t.t3 * t.t4));
  if (std::abs(den) <= tol)
    throw std::runtime_error("cubic fit: degenerate pair statistics (t2^2 - 4 t3 t4 ~ 0)");
  Real a1 = (2.0 * t.t0 * t.t4 - t.t1 * t.t2) / den;
  Real a3 = (2.0 * t.t1 * t.t3 - t.t0 * t.t2) / den;
  return PolyLossCoeffs::cubic(a1, a3);
}

PolyLossCoeffs fit_cubic_risk(const Dataset& d, Real lambda2, SigmaConvention conv) {
  auto stats = margin_prior_stats(d, lambda2, conv);
  return cubic_from_t(accumulate_t(stats, d));
}

PolyLossCoeffs fit_cubic_direct(const Dataset& d, Real lambda2) {
  if (!(lambda2 > 0.0)) throw std::invalid_argument("fit_cubic_direct: lambda2 > 0");
  Real trace = 0.0;
  for (const auto& r : d.rows) trace += row_norm_sq(r);
  if (!(trace > 0.0)) throw std::runtime_error("fit_cubic_direct: all-zero data");
  Real sigma = std::sqrt(trace / (lambda2 * d.num_examples()));
  Real a1 = -3.0 / (2.0 * kSqrt2Pi * sigma);
  Real a3 = 1.0 / (6.0 * kSqrt2Pi * sigma * sigma * sigma);
  return PolyLossCoeffs::cubic(a1, a3);
}

namespace {

// Base solution of the sixth-order embedding at omega = 1. Moments of the
// prior exp(-g^6) are Gamma((p+1)/6)/Gamma(1/6); solving the 6x6 normal
// equations for (beta0..beta5) gives the closed form. betas at general omega
// follow from the exact scaling beta_k(omega) = beta_k(1) * omega^(k/6).
Eigen::Matrix<Real, 6, 1> sixth_base_betas() {
  auto mom = [](int p) -> Real {
    if (p % 2 == 1) return 0.0;
    return std::tgamma((p + 1) / 6.0) / std::tgamma(1.0 / 6.0);
  };
  auto mom_abs = [](int p) -> Real {
    return std::tgamma((p + 1) / 6.0) / std::tgamma(1.0 / 6.0);
  };
  Eigen::Matrix<Real, 6, 6> a;
  Eigen::Matrix<Real, 6, 1> b;
  for (int j = 0; j < 6; ++j) {
    for (int k = 0; k < 6; ++k) a(j, k) = mom(j + k);
    // target is L01(g) - g^6; E[g^j L01] = (-1)^j/2 E[|g|^j]
    b(j) = (j % 2 == 0 ? 0.5 : -0.5) * mom_abs(j) - mom(j + 6);
  }
  return a.fullPivLu().solve(b);
}

}  // namespace

PolyLossCoeffs sixth_betas(Real omega) {
  if (!(omega > 0.0)) throw std::invalid_argument("sixth_betas: omega > 0");
  static const Eigen::Matrix<Real, 6, 1> base = sixth_base_betas();
  PolyLossCoeffs c;
  c.degree = 6;
  c.omega = omega;
  c.beta0 = base(0);
  c.coeffs.resize(5);
  for (int k = 1; k <= 5; ++k)
    c.coeffs[k - 1] = base(k) * std::pow(omega, k / 6.0);
  c.validate();
  return c;
}

Real embedding_error(const VecX& zero_one_risk, const VecX& poly_risk) {
  if (zero_one_risk.size() != poly_risk.size() || zero_one_risk.size() < 2)
    throw std::invalid_argument("embedding_error: need >= 2 matching states");
  auto normalize = [](const VecX& v) {
    Real lo = v.minCoeff(), hi = v.maxCoeff();
    if (hi == lo) throw std::runtime_error("embedding_error: degenerate risk landscape");
    return VecX(((v.array() - lo) / (hi - lo)).matrix());
  };
  VecX diff = normalize(zero_one_risk) - normalize(poly_risk);
  Real mean = diff.mean();
  return std::sqrt((diff.array() - mean).square().mean());
}

Real embedding_error(const Dataset& d, const PolyLossCoeffs& c,
                     const std::vector<VecX>& states) {
  if (states.size() < 2) throw std::invalid_argument("embedding_error: need >= 2 states");
  VecX r01(states.size()), rp(states.size());
  for (std::size_t s = 0; s < states.size(); ++s) {
    r01[s] = empirical_risk(LossKind::ZeroOne, nullptr, d, states[s]);
    rp[s] = empirical_risk(c.degree == 3 ? LossKind::Cubic : LossKind::Sixth, &c, d,
                           states[s]);
  }
  return embedding_error(r01, rp);
}

}  // namespace polyrisk

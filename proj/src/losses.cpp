#include "polyrisk/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace polyrisk {

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "zero-one" || s == "01") return LossKind::ZeroOne;
  if (s == "cubic") return LossKind::Cubic;
  if (s == "sixth") return LossKind::Sixth;
  if (s == "logistic") return LossKind::Logistic;
  if (s == "square") return LossKind::Square;
  if (s == "smooth-hinge") return LossKind::SmoothHinge;
  throw std::invalid_argument("unknown loss kind: " + s);
}

std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::ZeroOne: return "zero-one";
    case LossKind::Cubic: return "cubic";
    case LossKind::Sixth: return "sixth";
    case LossKind::Logistic: return "logistic";
    case LossKind::Square: return "square";
    case LossKind::SmoothHinge: return "smooth-hinge";
  }
  return "?";
}

bool is_polynomial(LossKind k) { return k == LossKind::Cubic || k == LossKind::Sixth; }

bool is_convex(LossKind k) {
  return k == LossKind::Logistic || k == LossKind::Square || k == LossKind::SmoothHinge;
}

void PolyLossCoeffs::validate() const {
  if (degree == 3) {
    if (coeffs.size() != 2) throw std::invalid_argument("cubic coeffs: need (alpha1, alpha3)");
  } else if (degree == 6) {
    if (coeffs.size() != 5) throw std::invalid_argument("sixth coeffs: need (beta1..beta5)");
    if (!(omega > 0.0)) throw std::invalid_argument("sixth coeffs: omega > 0 required");
  } else {
    throw std::invalid_argument("loss degree must be 3 or 6");
  }
  for (Real c : coeffs)
    if (!std::isfinite(c)) throw std::invalid_argument("non-finite loss coefficient");
}

Real PolyLossCoeffs::poly_coeff(int j) const {
  if (degree == 3) {
    if (j == 1) return coeffs[0];
    if (j == 3) return coeffs[1];
    return 0.0;
  }
  if (j >= 1 && j <= 5) return coeffs[j - 1];
  if (j == 6) return omega;
  return 0.0;
}

VecX margins(const Dataset& d, const VecX& w) {
  if (w.size() != d.dim) throw std::invalid_argument("margins: dimension mismatch");
  VecX g(d.num_examples());
  for (int i = 0; i < d.num_examples(); ++i) {
    Real dot = 0.0;
    for (const auto& [idx, val] : d.rows[i]) dot += val * w[idx];
    g[i] = d.labels[i] * dot;
  }
  return g;
}

Real loss_eval(LossKind kind, const PolyLossCoeffs* c, Real gamma) {
  switch (kind) {
    case LossKind::ZeroOne: {
      Real sg = gamma > 0 ? 1.0 : (gamma < 0 ? -1.0 : 0.0);
      return (1.0 - sg) / 2.0;
    }
    case LossKind::Cubic:
    case LossKind::Sixth: {
      if (c == nullptr) throw std::invalid_argument("polynomial loss needs coefficients");
      Real v = 0.0;
      Real p = 1.0;
      int deg = c->degree;
      for (int j = 1; j <= deg; ++j) {
        p *= gamma;
        v += c->poly_coeff(j) * p;
      }
      return v;
    }
    case LossKind::Logistic:
      // stable log(1 + e^-g)
      return gamma > 0 ? std::log1p(std::exp(-gamma)) : -gamma + std::log1p(std::exp(gamma));
    case LossKind::Square:
      return (1.0 - gamma) * (1.0 - gamma);
    case LossKind::SmoothHinge:
      if (gamma >= 1.0) return 0.0;
      if (gamma > 0.0) return 0.5 * (1.0 - gamma) * (1.0 - gamma);
      return 0.5 - gamma;
  }
  return 0.0;
}

Real empirical_risk(LossKind kind, const PolyLossCoeffs* c, const Dataset& d,
                    const VecX& w) {
  if (d.num_examples() == 0) throw std::invalid_argument("empirical_risk: empty dataset");
  VecX g = margins(d, w);
  Real s = 0.0;
  for (Index i = 0; i < g.size(); ++i) s += loss_eval(kind, c, g[i]);
  return s / static_cast<Real>(g.size());
}

Real regularized_objective(LossKind kind, const PolyLossCoeffs* c, const Dataset& d,
                           const VecX& w, Real lambda2) {
  if (lambda2 < 0.0) throw std::invalid_argument("lambda2 >= 0 required");
  return empirical_risk(kind, c, d, w) + 0.5 * lambda2 * w.squaredNorm();
}

Real test_error(const Dataset& d, const VecX& w) {
  VecX g = margins(d, w);
  Real err = 0.0;
  for (Index i = 0; i < g.size(); ++i) {
    if (g[i] < 0) err += 1.0;
    else if (g[i] == 0) err += 0.5;
  }
  return err / static_cast<Real>(g.size());
}

}  // namespace polyrisk

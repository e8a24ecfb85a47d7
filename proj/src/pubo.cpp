#include "polyrisk/pubo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace polyrisk {

Real FixedPointEncoding::bit_coeff(int b) const {
  if (b == 0) return zeta;
  return -zeta * std::ldexp(1.0, -b);  // -zeta / 2^b
}

MatX FixedPointEncoding::coeff_matrix() const {
  MatX k = MatX::Zero(n, num_bits());
  for (int f = 0; f < n; ++f)
    for (int b = 0; b < d; ++b) k(f, f * d + b) = bit_coeff(b);
  return k;
}

VecX decode_weights(const FixedPointEncoding& e, const std::vector<int>& bits) {
  if (static_cast<int>(bits.size()) != e.num_bits())
    throw std::invalid_argument("decode_weights: bit vector length != n*d");
  VecX w = VecX::Zero(e.n);
  for (int f = 0; f < e.n; ++f)
    for (int b = 0; b < e.d; ++b)
      if (bits[f * e.d + b]) w[f] += e.bit_coeff(b);
  return w;
}

int PuboTensor::degree() const {
  std::size_t deg = 0;
  for (const auto& [mono, _] : terms) deg = std::max(deg, mono.size());
  return static_cast<int>(deg);
}

void PuboTensor::add_term(Monomial vars, Real coeff) {
  if (coeff == 0.0) return;
  auto it = terms.find(vars);
  if (it == terms.end()) {
    terms.emplace(std::move(vars), coeff);
  } else {
    it->second += coeff;
    if (it->second == 0.0) terms.erase(it);
  }
}

Real PuboTensor::eval(const std::vector<int>& bits) const {
  if (static_cast<int>(bits.size()) != num_vars)
    throw std::invalid_argument("PuboTensor::eval: wrong state length");
  Real e = 0.0;
  for (const auto& [mono, c] : terms) {
    bool on = true;
    for (int v : mono)
      if (!bits[v]) { on = false; break; }
    if (on) e += c;
  }
  return e;
}

namespace {

// combinations with repetition of a sparse row's support, depth j
void expand_moment(const SparseRow& row, std::size_t start, int remaining,
                   Real partial, std::vector<int>& multiset,
                   std::map<std::vector<int>, Real>& out, Real scale) {
  if (remaining == 0) {
    // multiplicity weight: multinomial j! / prod(count!)
    Real mult = 1.0;
    int run = 1;
    int total = static_cast<int>(multiset.size());
    // compute j! / prod over runs of equal indices
    auto fact = [](int k) { Real f = 1.0; for (int i = 2; i <= k; ++i) f *= i; return f; };
    Real denom = 1.0;
    for (std::size_t i = 1; i <= multiset.size(); ++i) {
      if (i < multiset.size() && multiset[i] == multiset[i - 1]) {
        ++run;
      } else {
        denom *= fact(run);
        run = 1;
      }
    }
    out[multiset] += scale * fact(total) / denom * partial;
    return;
  }
  for (std::size_t k = start; k < row.size(); ++k) {
    multiset.push_back(row[k].first);
    expand_moment(row, k, remaining - 1, partial * row[k].second, multiset, out, scale);
    multiset.pop_back();
  }
}

}  // namespace

MomentTensors build_moments(const Dataset& d, const PolyLossCoeffs& c) {
  c.validate();
  MomentTensors mt;
  mt.dim = d.dim;
  const int m = d.num_examples();
  for (int j = 1; j <= c.degree; ++j) {
    Real alpha = c.poly_coeff(j);
    if (alpha == 0.0) continue;
    auto& phi = mt.phi[j];
    for (int i = 0; i < m; ++i) {
      Real ypow = (j % 2 == 1 && d.labels[i] < 0) ? -1.0 : 1.0;
      std::vector<int> multiset;
      expand_moment(d.rows[i], 0, j, ypow, multiset, phi, alpha / m);
    }
    // drop exact zeros so sparsity invariants hold
    for (auto it = phi.begin(); it != phi.end();)
      it = (it->second == 0.0) ? phi.erase(it) : std::next(it);
  }
  return mt;
}

namespace {

// multiply a partial bit expansion by one weight factor w_f = sum_b k_b q_b
void multiply_factor(std::map<Monomial, Real>& acc, int feature,
                     const FixedPointEncoding& e, std::size_t term_cap) {
  std::map<Monomial, Real> next;
  for (const auto& [mono, c] : acc) {
    for (int b = 0; b < e.d; ++b) {
      int var = feature * e.d + b;
      Monomial nm = mono;
      auto pos = std::lower_bound(nm.begin(), nm.end(), var);
      if (pos == nm.end() || *pos != var) nm.insert(pos, var);  // q^2 = q
      next[std::move(nm)] += c * e.bit_coeff(b);
    }
    if (next.size() > term_cap)
      throw std::runtime_error("assemble_pubo: term cap exceeded");
  }
  acc = std::move(next);
}

}  // namespace

PuboTensor assemble_pubo(const MomentTensors& mt, Real lambda2,
                         const FixedPointEncoding& e, std::size_t term_cap) {
  if (e.n != mt.dim && mt.dim != 0)
    throw std::invalid_argument("assemble_pubo: encoding/moment dimension mismatch");
  PuboTensor p;
  p.num_vars = e.num_bits();
  p.num_logical = p.num_vars;

  auto expand_weight_monomial = [&](const std::vector<int>& features, Real coeff) {
    std::map<Monomial, Real> acc;
    acc[{}] = coeff;
    for (int f : features) multiply_factor(acc, f, e, term_cap);
    for (auto& [mono, c] : acc) p.add_term(mono, c);
    if (p.terms.size() > term_cap)
      throw std::runtime_error("assemble_pubo: term cap exceeded");
  };

  for (const auto& [j, phi] : mt.phi)
    for (const auto& [features, coeff] : phi) expand_weight_monomial(features, coeff);

  if (lambda2 != 0.0)
    for (int f = 0; f < e.n; ++f)
      expand_weight_monomial({f, f}, 0.5 * lambda2);

  return p;
}

PuboTensor add_l0_regularizer(const PuboTensor& p, const FixedPointEncoding& e,
                              Real lambda0, Real phi) {
  if (lambda0 < 0.0) throw std::invalid_argument("add_l0_regularizer: lambda0 >= 0");
  if (!(phi > lambda0)) throw std::invalid_argument("add_l0_regularizer: need phi > lambda0");
  if (p.num_vars != e.num_bits())
    throw std::invalid_argument("add_l0_regularizer: problem already has ancillae");
  PuboTensor out = p;
  int base = e.num_bits();
  out.num_vars = base + e.n;
  for (int j = 0; j < e.n; ++j) {
    int anc = base + j;
    out.add_term({anc}, lambda0);
    for (int b = 0; b < e.d; ++b) {
      int var = j * e.d + b;
      out.add_term({var}, phi);
      out.add_term({std::min(var, anc), std::max(var, anc)}, -phi);
    }
  }
  return out;
}

QubitEstimate qubit_estimate(int n, int d, int loss_degree) {
  if (n < 1 || d < 1) throw std::invalid_argument("qubit_estimate: n, d >= 1");
  QubitEstimate q;
  std::int64_t big_n = static_cast<std::int64_t>(n) * d;
  q.logical = big_n;
  q.ancilla_loose = big_n * big_n / 4;
  if (loss_degree == 3) {
    q.ancilla = big_n * (big_n - 2) / 4;
    q.bound_implemented = true;
  }
  return q;
}

void save_pubo(const PuboTensor& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "p pubo " << p.num_vars << ' ' << p.terms.size() << '\n';
  char buf[64];
  for (const auto& [mono, c] : p.terms) {
    std::snprintf(buf, sizeof(buf), "%.17g", c);
    out << buf;
    for (int v : mono) out << ' ' << v;
    out << '\n';
  }
}

PuboTensor load_pubo(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string tag, kind;
  std::size_t nterms = 0;
  PuboTensor p;
  in >> tag >> kind >> p.num_vars >> nterms;
  if (tag != "p" || kind != "pubo") throw std::runtime_error(path + ": not a pubo file");
  p.num_logical = p.num_vars;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    Real c;
    ls >> c;
    Monomial mono;
    int v;
    while (ls >> v) mono.push_back(v);
    std::sort(mono.begin(), mono.end());
    p.add_term(std::move(mono), c);
  }
  if (p.terms.size() != nterms)
    throw std::runtime_error(path + ": term count mismatch");
  return p;
}

}  // namespace polyrisk

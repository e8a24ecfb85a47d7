#include "polyrisk/solve.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <set>
#include <stdexcept>

namespace polyrisk {

namespace {

// flat term arrays plus var -> term adjacency for incremental updates
struct Compiled {
  int num_vars = 0;
  Real constant = 0.0;
  std::vector<Real> coeff;
  std::vector<std::vector<int>> vars;       // per term
  std::vector<std::vector<int>> adjacency;  // per var: term ids

  explicit Compiled(const PuboTensor& p) : num_vars(p.num_vars) {
    adjacency.resize(p.num_vars);
    for (const auto& [mono, c] : p.terms) {
      if (mono.empty()) { constant += c; continue; }
      int t = static_cast<int>(coeff.size());
      coeff.push_back(c);
      vars.push_back(mono);
      for (int v : mono) adjacency[v].push_back(t);
    }
  }

  Real eval(const std::vector<int>& bits) const {
    Real e = constant;
    for (std::size_t t = 0; t < coeff.size(); ++t) {
      bool on = true;
      for (int v : vars[t])
        if (!bits[v]) { on = false; break; }
      if (on) e += coeff[t];
    }
    return e;
  }
};

// per-term count of zero variables; a term is active iff its count is 0
struct ActiveState {
  std::vector<int> bits;
  std::vector<int> num_zero;

  ActiveState(const Compiled& c, std::vector<int> init) : bits(std::move(init)) {
    num_zero.resize(c.coeff.size());
    for (std::size_t t = 0; t < c.vars.size(); ++t) {
      int z = 0;
      for (int v : c.vars[t])
        if (!bits[v]) ++z;
      num_zero[t] = z;
    }
  }

  Real delta(const Compiled& c, int v) const {
    Real d = 0.0;
    if (bits[v]) {
      for (int t : c.adjacency[v])
        if (num_zero[t] == 0) d -= c.coeff[t];
    } else {
      for (int t : c.adjacency[v])
        if (num_zero[t] == 1) d += c.coeff[t];
    }
    return d;
  }

  void flip(const Compiled& c, int v) {
    if (bits[v]) {
      bits[v] = 0;
      for (int t : c.adjacency[v]) ++num_zero[t];
    } else {
      bits[v] = 1;
      for (int t : c.adjacency[v]) --num_zero[t];
    }
  }
};

// bounded set of distinct lowest-energy states; recorded energies come from
// a fresh evaluation so incremental drift never leaks into results
class TopK {
 public:
  explicit TopK(int k) : k_(k) {}

  bool would_accept(Real energy) const {
    return static_cast<int>(entries_.size()) < k_ || energy < worst_;
  }

  void offer(const Compiled& c, const std::vector<int>& bits, Real approx_energy) {
    if (!would_accept(approx_energy)) return;
    Real exact = c.eval(bits);
    auto [it, inserted] = seen_.insert(bits);
    if (!inserted) return;
    entries_.insert({exact, bits});
    if (static_cast<int>(entries_.size()) > k_) {
      auto last = std::prev(entries_.end());
      seen_.erase(last->second);
      entries_.erase(last);
    }
    worst_ = std::prev(entries_.end())->first;
  }

  std::vector<std::pair<std::vector<int>, Real>> sorted() const {
    std::vector<std::pair<std::vector<int>, Real>> out;
    out.reserve(entries_.size());
    for (const auto& [e, s] : entries_) out.emplace_back(s, e);
    return out;
  }

 private:
  int k_;
  Real worst_ = std::numeric_limits<Real>::infinity();
  std::multiset<std::pair<Real, std::vector<int>>> entries_;
  std::set<std::vector<int>> seen_;
};

}  // namespace

Real delta_energy(const PuboTensor& p, const std::vector<int>& state, int flip_var) {
  if (flip_var < 0 || flip_var >= p.num_vars)
    throw std::invalid_argument("delta_energy: bad variable index");
  Real d = 0.0;
  for (const auto& [mono, c] : p.terms) {
    bool contains = std::binary_search(mono.begin(), mono.end(), flip_var);
    if (!contains) continue;
    bool others_on = true;
    for (int v : mono)
      if (v != flip_var && !state[v]) { others_on = false; break; }
    if (!others_on) continue;
    d += state[flip_var] ? -c : c;
  }
  return d;
}

SolveResult exhaustive_topk(const PuboTensor& p, int k, int cap_bits) {
  if (p.num_vars > cap_bits)
    throw std::runtime_error("exhaustive_topk: enumeration cap exceeded (" +
                             std::to_string(p.num_vars) + " > " + std::to_string(cap_bits) + " bits)");
  auto t_start = std::chrono::steady_clock::now();
  Compiled c(p);
  ActiveState st(c, std::vector<int>(p.num_vars, 0));
  TopK top(k);
  // Kahan-compensated running energy along the Gray-code walk
  Real energy = c.constant, comp = 0.0;
  auto add = [&](Real d) {
    Real y = d - comp;
    Real t = energy + y;
    comp = (t - energy) - y;
    energy = t;
  };
  top.offer(c, st.bits, energy);
  std::uint64_t total = 1ULL << p.num_vars;
  for (std::uint64_t i = 1; i < total; ++i) {
    int v = std::countr_zero(i);
    add(st.delta(c, v));
    st.flip(c, v);
    top.offer(c, st.bits, energy);
  }
  SolveResult r;
  r.states = top.sorted();
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return r;
}

SolveResult exhaustive_topk(const QuboProblem& q, int k, int cap_bits) {
  return exhaustive_topk(q.to_pubo(), k, cap_bits);
}

SolveResult anneal(const PuboTensor& p, const AnnealSchedule& s, int k) {
  if (!(s.beta_initial > 0.0) || s.beta_final < s.beta_initial || s.sweeps < 1)
    throw std::invalid_argument("anneal: invalid schedule");
  auto t_start = std::chrono::steady_clock::now();
  Compiled c(p);
  TopK top(k);
  Rng master(s.seed);
  Real ratio = s.beta_final / s.beta_initial;
  for (int restart = 0; restart < s.restarts; ++restart) {
    Rng rng = master.derive(restart);
    std::vector<int> init(p.num_vars);
    for (int v = 0; v < p.num_vars; ++v) init[v] = rng.bernoulli(0.5) ? 1 : 0;
    ActiveState st(c, std::move(init));
    Real energy = c.eval(st.bits), comp = 0.0;
    auto add = [&](Real d) {
      Real y = d - comp;
      Real t = energy + y;
      comp = (t - energy) - y;
      energy = t;
    };
    top.offer(c, st.bits, energy);
    for (int sweep = 0; sweep < s.sweeps; ++sweep) {
      Real frac = s.sweeps == 1 ? 1.0 : static_cast<Real>(sweep) / (s.sweeps - 1);
      Real beta = s.beta_initial * std::pow(ratio, frac);
      for (int v = 0; v < p.num_vars; ++v) {
        Real d = st.delta(c, v);
        if (d <= 0.0 || rng.uniform() < std::exp(-beta * d)) {
          st.flip(c, v);
          add(d);
          top.offer(c, st.bits, energy);
        }
      }
    }
  }
  SolveResult r;
  r.states = top.sorted();
  r.seed = s.seed;
  r.sweeps = s.sweeps;
  r.restarts = s.restarts;
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return r;
}

SolveResult anneal(const QuboProblem& q, const AnnealSchedule& s, int k) {
  return anneal(q.to_pubo(), s, k);
}

}  // namespace polyrisk

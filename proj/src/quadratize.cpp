#include "polyrisk/quadratize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace polyrisk {

Real QuboProblem::eval(const std::vector<int>& bits) const {
  if (static_cast<int>(bits.size()) != num_vars)
    throw std::invalid_argument("QuboProblem::eval: wrong state length");
  Real e = constant;
  for (const auto& [v, c] : linear)
    if (bits[v]) e += c;
  for (const auto& [pr, c] : quadratic)
    if (bits[pr.first] && bits[pr.second]) e += c;
  return e;
}

PuboTensor QuboProblem::to_pubo() const {
  PuboTensor p;
  p.num_vars = num_vars;
  p.num_logical = num_logical;
  if (constant != 0.0) p.add_term({}, constant);
  for (const auto& [v, c] : linear) p.add_term({v}, c);
  for (const auto& [pr, c] : quadratic) p.add_term({pr.first, pr.second}, c);
  return p;
}

QuboProblem reduce_to_qubo(const PuboTensor& p) {
  std::map<Monomial, Real> terms = p.terms;
  int next_var = p.num_vars;
  std::vector<Substitution> subs;

  for (;;) {
    // count pair occurrences in monomials of degree >= 3
    std::map<std::pair<int, int>, int> counts;
    for (const auto& [mono, c] : terms) {
      if (mono.size() < 3) continue;
      for (std::size_t a = 0; a < mono.size(); ++a)
        for (std::size_t b = a + 1; b < mono.size(); ++b)
          ++counts[{mono[a], mono[b]}];
    }
    if (counts.empty()) break;
    // most frequent pair; std::map iteration already breaks ties toward the
    // lexicographically smallest key
    std::pair<int, int> best;
    int best_count = 0;
    for (const auto& [pr, cnt] : counts)
      if (cnt > best_count) { best = pr; best_count = cnt; }

    int z = next_var++;
    Real affected_abs = 0.0;
    std::map<Monomial, Real> rewritten;
    for (const auto& [mono, c] : terms) {
      bool has_a = std::binary_search(mono.begin(), mono.end(), best.first);
      bool has_b = std::binary_search(mono.begin(), mono.end(), best.second);
      if (has_a && has_b) {
        affected_abs += std::abs(c);
        Monomial nm;
        nm.reserve(mono.size() - 1);
        for (int v : mono)
          if (v != best.first && v != best.second) nm.push_back(v);
        nm.push_back(z);  // z index is largest so far, stays sorted
        rewritten[std::move(nm)] += c;
      } else {
        rewritten[mono] += c;
      }
    }
    Real m_pen = 1.0 + affected_abs;
    // penalty M (ab - 2az - 2bz + 3z), zero iff z = a*b at the minimum
    rewritten[{best.first, best.second}] += m_pen;
    rewritten[{std::min(best.first, z), std::max(best.first, z)}] += -2.0 * m_pen;
    rewritten[{std::min(best.second, z), std::max(best.second, z)}] += -2.0 * m_pen;
    rewritten[{z}] += 3.0 * m_pen;
    for (auto it = rewritten.begin(); it != rewritten.end();)
      it = (it->second == 0.0) ? rewritten.erase(it) : std::next(it);
    terms = std::move(rewritten);
    subs.push_back({z, best.first, best.second, m_pen});
  }

  QuboProblem q;
  q.num_vars = next_var;
  q.num_logical = p.num_logical;
  q.substitutions = std::move(subs);
  for (const auto& [mono, c] : terms) {
    if (mono.empty()) q.constant += c;
    else if (mono.size() == 1) q.linear[mono[0]] += c;
    else if (mono.size() == 2) q.quadratic[{mono[0], mono[1]}] += c;
    else throw std::logic_error("reduce_to_qubo: residual high-degree term");
  }
  return q;
}

Real qubo_eval(const QuboProblem& q, const std::vector<int>& bits) {
  return q.eval(bits);
}

LiftedSolution lift_solution(const QuboProblem& q, const std::vector<int>& bits) {
  if (static_cast<int>(bits.size()) != q.num_vars)
    throw std::invalid_argument("lift_solution: wrong state length");
  LiftedSolution out;
  out.logical_bits.assign(bits.begin(), bits.begin() + q.num_logical);
  // substitutions may chain (ancilla pairs containing earlier ancillae), so
  // check in insertion order against the full state
  for (const auto& s : q.substitutions)
    if (bits[s.ancilla] != (bits[s.a] & bits[s.b]))
      out.inconsistent_ancillae.push_back(s.ancilla);
  return out;
}

void save_qubo(const QuboProblem& q, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  std::size_t nterms = q.linear.size() + q.quadratic.size() + (q.constant != 0.0 ? 1 : 0);
  out << "p qubo " << q.num_vars << ' ' << q.num_logical << '\n';
  char buf[64];
  auto fmt = [&](Real v) { std::snprintf(buf, sizeof(buf), "%.17g", v); return std::string(buf); };
  (void)nterms;
  if (q.constant != 0.0) out << fmt(q.constant) << '\n';
  for (const auto& [v, c] : q.linear) out << fmt(c) << ' ' << v << '\n';
  for (const auto& [pr, c] : q.quadratic)
    out << fmt(c) << ' ' << pr.first << ' ' << pr.second << '\n';
  for (const auto& s : q.substitutions)
    out << "# anc " << s.ancilla << " = " << s.a << "*" << s.b << " M=" << fmt(s.penalty)
        << '\n';
}

QuboProblem load_qubo(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string tag, kind;
  QuboProblem q;
  in >> tag >> kind >> q.num_vars >> q.num_logical;
  if (tag != "p" || kind != "qubo") throw std::runtime_error(path + ": not a qubo file");
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      Substitution s;
      std::istringstream ls(line);
      std::string word;
      ls >> word >> word;  // "#", "anc"
      ls >> s.ancilla >> word;  // z, "="
      std::string prod;
      ls >> prod;  // a*b
      auto star = prod.find('*');
      s.a = std::stoi(prod.substr(0, star));
      s.b = std::stoi(prod.substr(star + 1));
      ls >> word;  // M=val
      s.penalty = std::stod(word.substr(2));
      q.substitutions.push_back(s);
      continue;
    }
    std::istringstream ls(line);
    Real c;
    ls >> c;
    std::vector<int> idx;
    int v;
    while (ls >> v) idx.push_back(v);
    if (idx.empty()) q.constant += c;
    else if (idx.size() == 1) q.linear[idx[0]] += c;
    else if (idx.size() == 2) {
      if (idx[0] > idx[1]) std::swap(idx[0], idx[1]);
      q.quadratic[{idx[0], idx[1]}] += c;
    } else throw std::runtime_error(path + ": term of degree > 2");
  }
  return q;
}

}  // namespace polyrisk

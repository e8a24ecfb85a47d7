#include <algorithm>
#include <set>

#include "doctest.h"
#include "polyrisk/rng.hpp"
#include "polyrisk/solve.hpp"

using namespace polyrisk;

namespace {

std::vector<int> bits_of(std::uint64_t code, int n) {
  std::vector<int> b(n);
  for (int i = 0; i < n; ++i) b[i] = (code >> i) & 1;
  return b;
}

PuboTensor random_pubo(int n, int degree, int nterms, std::uint64_t seed) {
  Rng rng(seed);
  PuboTensor p;
  p.num_vars = n;
  p.num_logical = n;
  for (int t = 0; t < nterms; ++t) {
    int deg = 1 + static_cast<int>(rng.uniform_int(degree));
    Monomial mono;
    while (static_cast<int>(mono.size()) < deg) {
      int v = static_cast<int>(rng.uniform_int(n));
      if (!std::binary_search(mono.begin(), mono.end(), v))
        mono.insert(std::lower_bound(mono.begin(), mono.end(), v), v);
    }
    p.add_term(mono, rng.uniform(-2.0, 2.0));
  }
  return p;
}

}  // namespace

TEST_CASE("delta energy") {
  PuboTensor p = random_pubo(8, 3, 20, 6);
  Rng rng(2);
  SUBCASE("matches full re-evaluation") {
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<int> state(8);
      for (auto& b : state) b = rng.bernoulli(0.5);
      int v = static_cast<int>(rng.uniform_int(8));
      auto flipped = state;
      flipped[v] ^= 1;
      CHECK(delta_energy(p, state, v) ==
            doctest::Approx(p.eval(flipped) - p.eval(state)).epsilon(1e-12));
    }
  }
  SUBCASE("double flip sums to zero") {
    std::vector<int> state(8, 0);
    for (int v = 0; v < 8; ++v) {
      Real d1 = delta_energy(p, state, v);
      auto flipped = state;
      flipped[v] ^= 1;
      CHECK(d1 + delta_energy(p, flipped, v) == doctest::Approx(0.0));
    }
  }
  SUBCASE("linear-only problem") {
    PuboTensor lin;
    lin.num_vars = 3;
    lin.num_logical = 3;
    lin.add_term({1}, 2.5);
    CHECK(delta_energy(lin, {0, 0, 0}, 1) == doctest::Approx(2.5));
    CHECK(delta_energy(lin, {0, 1, 0}, 1) == doctest::Approx(-2.5));
  }
}

TEST_CASE("exhaustive enumeration") {
  SUBCASE("single positive linear coefficient") {
    PuboTensor p;
    p.num_vars = 1;
    p.num_logical = 1;
    p.add_term({}, 4.0);
    p.add_term({0}, 1.0);
    SolveResult r = exhaustive_topk(p, 2);
    CHECK(r.best_state() == std::vector<int>{0});
    CHECK(r.best_energy() == doctest::Approx(4.0));
  }
  SUBCASE("top-K matches naive sort of all energies") {
    PuboTensor p = random_pubo(10, 4, 25, 8);
    SolveResult r = exhaustive_topk(p, 20);
    std::vector<Real> all;
    for (std::uint64_t code = 0; code < 1024; ++code) all.push_back(p.eval(bits_of(code, 10)));
    std::sort(all.begin(), all.end());
    REQUIRE(r.states.size() == 20);
    for (int i = 0; i < 20; ++i) CHECK(r.states[i].second == doctest::Approx(all[i]).epsilon(1e-12));
    // recorded energies re-evaluate exactly, states distinct
    std::set<std::vector<int>> seen;
    for (auto& [s, e] : r.states) {
      CHECK(p.eval(s) == doctest::Approx(e).epsilon(1e-12));
      CHECK(seen.insert(s).second);
    }
  }
  SUBCASE("enumeration cap") {
    PuboTensor p = random_pubo(30, 2, 5, 1);
    CHECK_THROWS_AS(exhaustive_topk(p, 1, 26), std::runtime_error);
  }
}

TEST_CASE("anneal") {
  SUBCASE("one-variable problem reaches the ground state") {
    PuboTensor p;
    p.num_vars = 1;
    p.num_logical = 1;
    p.add_term({0}, -1.0);
    AnnealSchedule s{1.0, 50.0, 50, 1, 3};
    SolveResult r = anneal(p, s, 1);
    CHECK(r.best_state() == std::vector<int>{1});
    CHECK(r.best_energy() == doctest::Approx(-1.0));
  }
  SUBCASE("finds the exhaustive ground state on random cubic pubos") {
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      PuboTensor p = random_pubo(12, 3, 30, 200 + seed);
      SolveResult exact = exhaustive_topk(p, 1);
      AnnealSchedule s{0.1, 10.0, 300, 20, seed};
      SolveResult sa = anneal(p, s, 1);
      if (std::abs(sa.best_energy() - exact.best_energy()) < 1e-9) ++hits;
    }
    CHECK(hits >= 19);
  }
  SUBCASE("identical seeds give identical results") {
    PuboTensor p = random_pubo(10, 3, 20, 5);
    AnnealSchedule s{0.1, 10.0, 100, 10, 77};
    SolveResult a = anneal(p, s, 5);
    SolveResult b = anneal(p, s, 5);
    REQUIRE(a.states.size() == b.states.size());
    for (std::size_t i = 0; i < a.states.size(); ++i) {
      CHECK(a.states[i].first == b.states[i].first);
      CHECK(a.states[i].second == b.states[i].second);
    }
  }
  SUBCASE("more sweeps do not hurt the best energy, statistically") {
    PuboTensor p = random_pubo(14, 3, 40, 33);
    int worse = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Real short_run = anneal(p, {0.1, 10.0, 20, 5, seed}, 1).best_energy();
      Real long_run = anneal(p, {0.1, 10.0, 200, 5, seed}, 1).best_energy();
      if (long_run > short_run + 1e-12) ++worse;
    }
    CHECK(worse <= 2);
  }
  SUBCASE("recorded energies survive re-evaluation after many flips") {
    PuboTensor p = random_pubo(16, 4, 60, 9);
    AnnealSchedule s{0.1, 5.0, 500, 10, 13};  // ~80k flips
    SolveResult r = anneal(p, s, 10);
    for (auto& [state, e] : r.states)
      CHECK(p.eval(state) == doctest::Approx(e).epsilon(1e-9));
  }
}

TEST_CASE("qubo overloads agree with pubo route") {
  PuboTensor p = random_pubo(8, 2, 16, 44);  // already quadratic
  QuboProblem q;
  q.num_vars = 8;
  q.num_logical = 8;
  for (const auto& [mono, c] : p.terms) {
    if (mono.empty()) q.constant += c;
    else if (mono.size() == 1) q.linear[mono[0]] += c;
    else q.quadratic[{mono[0], mono[1]}] += c;
  }
  SolveResult a = exhaustive_topk(p, 5);
  SolveResult b = exhaustive_topk(q, 5);
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t i = 0; i < a.states.size(); ++i)
    CHECK(a.states[i].second == doctest::Approx(b.states[i].second));
}

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "polyrisk/pubo.hpp"
#include "polyrisk/types.hpp"

namespace polyrisk {

struct Substitution {
  int ancilla = 0;
  int a = 0;
  int b = 0;
  Real penalty = 0.0;
};

struct QuboProblem {
  int num_vars = 0;
  int num_logical = 0;
  Real constant = 0.0;
  std::map<int, Real> linear;
  std::map<std::pair<int, int>, Real> quadratic;  // keys (i, j) with i < j
  std::vector<Substitution> substitutions;

  Real eval(const std::vector<int>& bits) const;
  /// View as a degree-2 PuboTensor (shared term representation for solvers).
  PuboTensor to_pubo() const;
};

/// Rosenberg-style reduction: iteratively substitute the pair occurring in
/// the most monomials of degree >= 3 (ties to the lexicographically smallest
/// pair) by a fresh ancilla z with penalty M(ab - 2az - 2bz + 3z).
QuboProblem reduce_to_qubo(const PuboTensor& p);

Real qubo_eval(const QuboProblem& q, const std::vector<int>& bits);

struct LiftedSolution {
  std::vector<int> logical_bits;
  std::vector<int> inconsistent_ancillae;  // ancillae with z != a*b
};

LiftedSolution lift_solution(const QuboProblem& q, const std::vector<int>& bits);

void save_qubo(const QuboProblem& q, const std::string& path);
QuboProblem load_qubo(const std::string& path);

}  // namespace polyrisk

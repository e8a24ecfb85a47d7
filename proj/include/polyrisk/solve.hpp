#pragma once

#include <cstdint>
#include <vector>

#include "polyrisk/pubo.hpp"
#include "polyrisk/quadratize.hpp"
#include "polyrisk/types.hpp"

namespace polyrisk {

struct SolveResult {
  /// Distinct states, energies non-decreasing, at most K entries.
  std::vector<std::pair<std::vector<int>, Real>> states;
  std::uint64_t seed = 0;
  int sweeps = 0;
  int restarts = 0;
  double wall_seconds = 0.0;

  const std::vector<int>& best_state() const { return states.front().first; }
  Real best_energy() const { return states.front().second; }
};

struct AnnealSchedule {
  Real beta_initial = 0.1;
  Real beta_final = 10.0;
  int sweeps = 1000;
  int restarts = 100;
  std::uint64_t seed = 0;
};

/// Gray-code enumeration of all 2^N states keeping the K lowest.
SolveResult exhaustive_topk(const PuboTensor& p, int k, int cap_bits = 26);
SolveResult exhaustive_topk(const QuboProblem& q, int k, int cap_bits = 26);

/// Restart-based simulated annealing with Metropolis single-bit flips and
/// a geometric inverse-temperature schedule.
SolveResult anneal(const PuboTensor& p, const AnnealSchedule& s, int k);
SolveResult anneal(const QuboProblem& q, const AnnealSchedule& s, int k);

/// E(state with bit flipped) - E(state), touching only monomials that
/// contain flip_var.
Real delta_energy(const PuboTensor& p, const std::vector<int>& state, int flip_var);

}  // namespace polyrisk

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "polyrisk/rng.hpp"
#include "polyrisk/types.hpp"

namespace polyrisk {

/// One sparse example row: (feature index, value) pairs with strictly
/// increasing 0-based indices.
using SparseRow = std::vector<std::pair<int, Real>>;

struct Dataset {
  std::vector<SparseRow> rows;
  std::vector<int> labels;  // each entry is -1 or +1
  int dim = 0;
  std::string name;

  int num_examples() const { return static_cast<int>(rows.size()); }
  Real density() const;

  /// Throws std::invalid_argument if any invariant is violated.
  void validate() const;

  Dataset subset(const std::vector<int>& indices) const;
};

struct FoldAssignment {
  std::vector<int> fold_of_example;
  int k = 0;
  std::uint64_t seed = 0;
};

Real sparse_dot(const SparseRow& a, const SparseRow& b);
Real row_norm_sq(const SparseRow& r);

Dataset load_libsvm(const std::string& path, int declared_dim = 0);
void save_libsvm(const Dataset& d, const std::string& path);

/// Synthetic set labeled by a random Gaussian classifier over uniform
/// [-1,1] features; zero-margin rows are resampled.
std::pair<Dataset, VecX> gen_random_classifier_set(int m, int n, std::uint64_t seed);

/// 21-dimensional Long-Servedio construction (large-margin / puller /
/// penalizer examples in proportions 1/4, 1/4, 1/2).
Dataset gen_long_servedio(int m, std::uint64_t seed);

/// 20-dimensional Mease-Wyner construction: label +1 iff the first five
/// uniform [0,1] features sum to at least 2.5.
Dataset gen_mease_wyner(int m, std::uint64_t seed);

/// Sparse binary-feature surrogate with a target positive-class fraction,
/// shaped like the UCI sets (used where the original files are unavailable).
Dataset gen_binary_surrogate(int m, int n, Real density, Real positive_fraction,
                             std::uint64_t seed);

/// Flips exactly round(rate*m) labels chosen uniformly without replacement.
Dataset inject_label_noise(const Dataset& d, Real rate, std::uint64_t seed);

FoldAssignment kfold_split(int m, int k, std::uint64_t seed);

}  // namespace polyrisk

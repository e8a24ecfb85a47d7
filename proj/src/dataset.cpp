#include "polyrisk/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace polyrisk {

Real Dataset::density() const {
  std::size_t nnz = 0;
  for (const auto& r : rows) nnz += r.size();
  if (rows.empty() || dim == 0) return 0.0;
  return static_cast<Real>(nnz) / (static_cast<Real>(rows.size()) * dim);
}

void Dataset::validate() const {
  if (labels.size() != rows.size())
    throw std::invalid_argument("dataset: |labels| != |rows|");
  for (int y : labels)
    if (y != -1 && y != 1) throw std::invalid_argument("dataset: label not in {-1,+1}");
  for (const auto& r : rows) {
    int prev = -1;
    for (const auto& [idx, val] : r) {
      if (idx <= prev) throw std::invalid_argument("dataset: indices not strictly increasing");
      if (idx >= dim) throw std::invalid_argument("dataset: feature index out of range");
      if (!std::isfinite(val)) throw std::invalid_argument("dataset: non-finite feature value");
      prev = idx;
    }
  }
}

Dataset Dataset::subset(const std::vector<int>& indices) const {
  Dataset out;
  out.dim = dim;
  out.name = name;
  out.rows.reserve(indices.size());
  out.labels.reserve(indices.size());
  for (int i : indices) {
    out.rows.push_back(rows.at(i));
    out.labels.push_back(labels.at(i));
  }
  return out;
}

Real sparse_dot(const SparseRow& a, const SparseRow& b) {
  Real s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first == b[j].first) {
      s += a[i].second * b[j].second;
      ++i; ++j;
    } else if (a[i].first < b[j].first) {
      ++i;
    } else {
      ++j;
    }
  }
  return s;
}

Real row_norm_sq(const SparseRow& r) {
  Real s = 0.0;
  for (const auto& [idx, val] : r) s += val * val;
  return s;
}

Dataset load_libsvm(const std::string& path, int declared_dim) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Dataset d;
  d.name = path;
  int max_index = -1;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank line
    int label;
    if (tok == "+1" || tok == "1") label = 1;
    else if (tok == "-1" || tok == "0") label = -1;
    else throw std::runtime_error("line " + std::to_string(lineno) + ": bad label '" + tok + "'");
    SparseRow row;
    while (ls >> tok) {
      auto colon = tok.find(':');
      if (colon == std::string::npos)
        throw std::runtime_error("line " + std::to_string(lineno) + ": expected idx:val, got '" + tok + "'");
      int idx;
      Real val;
      try {
        idx = std::stoi(tok.substr(0, colon));
        val = std::stod(tok.substr(colon + 1));
      } catch (const std::exception&) {
        throw std::runtime_error("line " + std::to_string(lineno) + ": malformed term '" + tok + "'");
      }
      if (idx < 1)
        throw std::runtime_error("line " + std::to_string(lineno) + ": index must be >= 1");
      row.emplace_back(idx - 1, val);  // 1-based on disk, 0-based in memory
    }
    std::sort(row.begin(), row.end());
    for (std::size_t i = 1; i < row.size(); ++i)
      if (row[i].first == row[i - 1].first)
        throw std::runtime_error("line " + std::to_string(lineno) + ": duplicate feature index");
    if (!row.empty()) max_index = std::max(max_index, row.back().first);
    d.rows.push_back(std::move(row));
    d.labels.push_back(label);
  }
  if (d.rows.empty()) throw std::runtime_error(path + ": no examples");
  d.dim = declared_dim > 0 ? declared_dim : max_index + 1;
  d.validate();
  return d;
}

void save_libsvm(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    out << (d.labels[i] > 0 ? "+1" : "-1");
    for (const auto& [idx, val] : d.rows[i]) out << ' ' << (idx + 1) << ':' << val;
    out << '\n';
  }
}

std::pair<Dataset, VecX> gen_random_classifier_set(int m, int n, std::uint64_t seed) {
  if (m < 1 || n < 1) throw std::invalid_argument("gen_random_classifier_set: m, n >= 1");
  Rng rng(seed);
  VecX w_true(n);
  for (int j = 0; j < n; ++j) w_true[j] = rng.normal();
  Dataset d;
  d.dim = n;
  d.name = "random";
  d.rows.reserve(m);
  d.labels.reserve(m);
  for (int i = 0; i < m; ++i) {
    SparseRow row(n);
    Real margin = 0.0;
    do {
      margin = 0.0;
      for (int j = 0; j < n; ++j) {
        Real v = rng.uniform(-1.0, 1.0);
        row[j] = {j, v};
        margin += v * w_true[j];
      }
    } while (margin == 0.0);  // resample zero-margin rows
    d.rows.push_back(std::move(row));
    d.labels.push_back(margin > 0 ? 1 : -1);
  }
  d.validate();
  return {std::move(d), std::move(w_true)};
}

Dataset gen_long_servedio(int m, std::uint64_t seed) {
  if (m < 4) throw std::invalid_argument("gen_long_servedio: m >= 4");
  constexpr int kDim = 21;
  Rng rng(seed);
  Dataset d;
  d.dim = kDim;
  d.name = "long-servedio";
  for (int i = 0; i < m; ++i) {
    int y = rng.bernoulli(0.5) ? 1 : -1;
    SparseRow row(kDim);
    int type = i % 4;  // fixed proportions 1/4 large-margin, 1/4 puller, 1/2 penalizer
    if (type == 0) {
      for (int j = 0; j < kDim; ++j) row[j] = {j, static_cast<Real>(y)};
    } else if (type == 1) {
      for (int j = 0; j < kDim; ++j) row[j] = {j, static_cast<Real>(j < 11 ? y : -y)};
    } else {
      // random pattern with exactly 11 of 21 coordinates equal to y
      std::vector<int> perm(kDim);
      std::iota(perm.begin(), perm.end(), 0);
      for (int j = kDim - 1; j > 0; --j)
        std::swap(perm[j], perm[rng.uniform_int(j + 1)]);
      for (int j = 0; j < kDim; ++j) row[j] = {j, static_cast<Real>(-y)};
      for (int j = 0; j < 11; ++j) row[perm[j]].second = static_cast<Real>(y);
    }
    d.rows.push_back(std::move(row));
    d.labels.push_back(y);
  }
  d.validate();
  return d;
}

Dataset gen_mease_wyner(int m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("gen_mease_wyner: m >= 1");
  constexpr int kDim = 20;
  Rng rng(seed);
  Dataset d;
  d.dim = kDim;
  d.name = "mease-wyner";
  for (int i = 0; i < m; ++i) {
    SparseRow row(kDim);
    Real head = 0.0;
    for (int j = 0; j < kDim; ++j) {
      Real v = rng.uniform();
      row[j] = {j, v};
      if (j < 5) head += v;
    }
    d.rows.push_back(std::move(row));
    d.labels.push_back(head >= 2.5 ? 1 : -1);
  }
  d.validate();
  return d;
}

Dataset gen_binary_surrogate(int m, int n, Real density, Real positive_fraction,
                             std::uint64_t seed) {
  if (m < 1 || n < 1) throw std::invalid_argument("gen_binary_surrogate: m, n >= 1");
  if (density <= 0.0 || density > 1.0)
    throw std::invalid_argument("gen_binary_surrogate: density in (0,1]");
  Rng rng(seed);
  VecX w_true(n);
  for (int j = 0; j < n; ++j) w_true[j] = rng.normal();
  Dataset d;
  d.dim = n;
  d.name = "binary-surrogate";
  std::vector<Real> scores(m);
  for (int i = 0; i < m; ++i) {
    SparseRow row;
    Real s = 0.0;
    for (int j = 0; j < n; ++j) {
      if (rng.bernoulli(density)) {
        row.emplace_back(j, 1.0);
        s += w_true[j];
      }
    }
    scores[i] = s;
    d.rows.push_back(std::move(row));
  }
  // threshold at the requested positive-class quantile
  std::vector<Real> sorted = scores;
  std::sort(sorted.begin(), sorted.end());
  int cut = std::clamp(static_cast<int>(std::llround((1.0 - positive_fraction) * m)), 0, m - 1);
  Real threshold = sorted[cut];
  d.labels.resize(m);
  for (int i = 0; i < m; ++i) d.labels[i] = scores[i] > threshold ? 1 : -1;
  d.validate();
  return d;
}

Dataset inject_label_noise(const Dataset& d, Real rate, std::uint64_t seed) {
  if (rate < 0.0 || rate >= 0.5)
    throw std::invalid_argument("inject_label_noise: rate in [0, 0.5)");
  Dataset out = d;
  int m = d.num_examples();
  int flips = static_cast<int>(std::llround(rate * m));
  if (flips == 0) return out;
  // Fisher-Yates prefix: first `flips` entries of a random permutation
  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  for (int i = 0; i < flips; ++i) {
    int j = i + static_cast<int>(rng.uniform_int(m - i));
    std::swap(perm[i], perm[j]);
  }
  for (int i = 0; i < flips; ++i) out.labels[perm[i]] = -out.labels[perm[i]];
  return out;
}

FoldAssignment kfold_split(int m, int k, std::uint64_t seed) {
  if (k < 2 || k > m) throw std::invalid_argument("kfold_split: 2 <= k <= m");
  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  for (int i = m - 1; i > 0; --i)
    std::swap(perm[i], perm[rng.uniform_int(i + 1)]);
  FoldAssignment f;
  f.k = k;
  f.seed = seed;
  f.fold_of_example.resize(m);
  for (int pos = 0; pos < m; ++pos)
    f.fold_of_example[perm[pos]] = pos % k;
  return f;
}

}  // namespace polyrisk

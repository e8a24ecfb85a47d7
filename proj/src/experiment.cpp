#include "polyrisk/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "polyrisk/pubo.hpp"
#include "polyrisk/rng.hpp"
#include "polyrisk/solve.hpp"

namespace polyrisk {

namespace {

using nlohmann::json;

std::string fmt(Real v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& out_dir, const std::string& name) {
  std::filesystem::create_directories(out_dir);
  auto path = std::filesystem::path(out_dir) / name;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open output file: " + path.string());
  return f;
}

void write_meta(const ExperimentConfig& cfg, const std::string& out_dir,
                const std::string& name);

/// Dense rows scaled by their labels: row i holds y_i * x_i.
MatX label_scaled_matrix(const Dataset& d) {
  MatX z = MatX::Zero(d.num_examples(), d.dim);
  for (int i = 0; i < d.num_examples(); ++i)
    for (const auto& [idx, val] : d.rows[i]) z(i, idx) = d.labels[i] * val;
  return z;
}

Real mean_of(const std::vector<Real>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<Real>(v.size());
}

Real std_of(const std::vector<Real>& v) {
  Real mu = mean_of(v);
  Real s = 0.0;
  for (Real x : v) s += (x - mu) * (x - mu);
  return std::sqrt(s / static_cast<Real>(v.size()));
}

Real loss_derivative(LossKind kind, Real gamma) {
  switch (kind) {
    case LossKind::Logistic:
      // -sigmoid(-gamma), stable on both sides
      return gamma > 0 ? -std::exp(-gamma) / (1.0 + std::exp(-gamma))
                       : -1.0 / (1.0 + std::exp(gamma));
    case LossKind::Square:
      return -2.0 * (1.0 - gamma);
    case LossKind::SmoothHinge:
      if (gamma >= 1.0) return 0.0;
      if (gamma > 0.0) return -(1.0 - gamma);
      return -1.0;
    default:
      throw std::invalid_argument("loss_derivative: convex losses only");
  }
}

std::uint64_t stream_seed(const ExperimentConfig& cfg, std::uint64_t a, std::uint64_t b) {
  return Rng(cfg.seed).derive(a).derive(b).next_u64();
}

}  // namespace

Dataset DatasetSpec::realize(int extra, std::uint64_t seed) const {
  int total = m + extra;
  if (kind == "random") return gen_random_classifier_set(total, n, seed).first;
  if (kind == "long-servedio") return gen_long_servedio(total, seed);
  if (kind == "mease-wyner") return gen_mease_wyner(total, seed);
  if (kind == "surrogate")
    return gen_binary_surrogate(total, n, density, positive_fraction, seed);
  if (kind == "file") {
    Dataset full = load_libsvm(path);
    int take = std::min(total, full.num_examples());
    Rng rng(seed);
    std::vector<int> perm(full.num_examples());
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = full.num_examples() - 1; i > 0; --i) {
      int j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(i) + 1));
      std::swap(perm[i], perm[j]);
    }
    perm.resize(take);
    return full.subset(perm);
  }
  throw std::invalid_argument("unknown dataset kind: " + kind);
}

void ExperimentConfig::validate() const {
  if (losses.empty()) throw std::invalid_argument("config: losses must be non-empty");
  if (lambda_grid.empty()) throw std::invalid_argument("config: lambda grid must be non-empty");
  for (Real l : lambda_grid)
    if (!(l > 0.0)) throw std::invalid_argument("config: lambda values must be positive");
  for (Real w : omega_grid)
    if (!(w > 0.0)) throw std::invalid_argument("config: omega values must be positive");
  for (Real nl : noise_levels)
    if (nl < 0.0 || nl >= 0.5)
      throw std::invalid_argument("config: noise levels must lie in [0, 0.5)");
  if (bit_depth < 1) throw std::invalid_argument("config: bit depth must be >= 1");
  if (!(weight_scale_r > 0.0)) throw std::invalid_argument("config: weight scale r must be positive");
  if (folds < 2) throw std::invalid_argument("config: folds must be >= 2");
  if (repetitions < 1) throw std::invalid_argument("config: repetitions must be >= 1");
  if (dataset.m < 1) throw std::invalid_argument("config: dataset m must be >= 1");
  if (!std::is_sorted(m_grid.begin(), m_grid.end()))
    throw std::invalid_argument("config: m grid must be ascending");
  for (int mv : m_grid)
    if (mv < 1) throw std::invalid_argument("config: m grid entries must be >= 1");
  if (solver.method != "exact" && solver.method != "sa")
    throw std::invalid_argument("config: solver method must be exact or sa");
  if (solver.topk < 1) throw std::invalid_argument("config: solver topk must be >= 1");
  if (dataset.kind == "file" && !std::filesystem::exists(dataset.path))
    throw std::invalid_argument("config: dataset file not found: " + dataset.path);
  // realize() rejects unknown kinds; check early for a better message
  if (dataset.kind != "random" && dataset.kind != "long-servedio" &&
      dataset.kind != "mease-wyner" && dataset.kind != "surrogate" &&
      dataset.kind != "file")
    throw std::invalid_argument("config: unknown dataset kind: " + dataset.kind);
}

namespace {

json to_json(const ExperimentConfig& cfg) {
  json j;
  j["dataset"] = {{"kind", cfg.dataset.kind},       {"path", cfg.dataset.path},
                  {"m", cfg.dataset.m},             {"n", cfg.dataset.n},
                  {"density", cfg.dataset.density}, {"positive_fraction", cfg.dataset.positive_fraction}};
  json losses = json::array();
  for (LossKind k : cfg.losses) losses.push_back(to_string(k));
  j["losses"] = losses;
  j["lambda_grid"] = cfg.lambda_grid;
  j["omega_grid"] = cfg.omega_grid;
  j["noise_levels"] = cfg.noise_levels;
  j["bit_depth"] = cfg.bit_depth;
  j["weight_scale_r"] = cfg.weight_scale_r;
  j["folds"] = cfg.folds;
  j["repetitions"] = cfg.repetitions;
  j["m_test"] = cfg.m_test;
  j["num_states"] = cfg.num_states;
  j["m_grid"] = cfg.m_grid;
  j["solver"] = {{"method", cfg.solver.method},
                 {"topk", cfg.solver.topk},
                 {"beta_initial", cfg.solver.beta_initial},
                 {"beta_final", cfg.solver.beta_final},
                 {"sweeps", cfg.solver.sweeps},
                 {"restarts", cfg.solver.restarts}};
  j["seed"] = cfg.seed;
  return j;
}

void write_meta(const ExperimentConfig& cfg, const std::string& out_dir,
                const std::string& name) {
  auto f = open_out(out_dir, name);
  f << to_json(cfg).dump(2) << "\n";
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j = json::parse(in);

  ExperimentConfig cfg;
  if (j.contains("dataset")) {
    const json& d = j["dataset"];
    cfg.dataset.kind = d.value("kind", cfg.dataset.kind);
    cfg.dataset.path = d.value("path", cfg.dataset.path);
    cfg.dataset.m = d.value("m", cfg.dataset.m);
    cfg.dataset.n = d.value("n", cfg.dataset.n);
    cfg.dataset.density = d.value("density", cfg.dataset.density);
    cfg.dataset.positive_fraction = d.value("positive_fraction", cfg.dataset.positive_fraction);
  }
  if (j.contains("losses")) {
    cfg.losses.clear();
    for (const auto& s : j["losses"]) cfg.losses.push_back(loss_kind_from_string(s));
  } else {
    cfg.losses = {LossKind::ZeroOne, LossKind::Cubic, LossKind::Logistic,
                  LossKind::Square, LossKind::SmoothHinge};
  }
  cfg.lambda_grid = j.value("lambda_grid", std::vector<Real>{0.1});
  cfg.omega_grid = j.value("omega_grid", std::vector<Real>{1.0});
  cfg.noise_levels = j.value("noise_levels", std::vector<Real>{0.0});
  cfg.bit_depth = j.value("bit_depth", cfg.bit_depth);
  cfg.weight_scale_r = j.value("weight_scale_r", cfg.weight_scale_r);
  cfg.folds = j.value("folds", cfg.folds);
  cfg.repetitions = j.value("repetitions", cfg.repetitions);
  cfg.m_test = j.value("m_test", cfg.m_test);
  cfg.num_states = j.value("num_states", cfg.num_states);
  cfg.m_grid = j.value("m_grid", cfg.m_grid);
  if (j.contains("solver")) {
    const json& s = j["solver"];
    cfg.solver.method = s.value("method", cfg.solver.method);
    cfg.solver.topk = s.value("topk", cfg.solver.topk);
    cfg.solver.beta_initial = s.value("beta_initial", cfg.solver.beta_initial);
    cfg.solver.beta_final = s.value("beta_final", cfg.solver.beta_final);
    cfg.solver.sweeps = s.value("sweeps", cfg.solver.sweeps);
    cfg.solver.restarts = s.value("restarts", cfg.solver.restarts);
  }
  cfg.seed = j.value("seed", cfg.seed);
  cfg.validate();
  return cfg;
}

std::vector<Fig2Row> run_fig2(const ExperimentConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  const int d = cfg.bit_depth;
  const int m = cfg.dataset.m;
  const Real lambda2 = cfg.lambda_grid.front();

  std::vector<Fig2Row> rows;
  for (std::size_t ni = 0; ni < cfg.noise_levels.size(); ++ni) {
    const Real noise = cfg.noise_levels[ni];
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
      // one dataset per repetition, shared across noise levels
      Dataset full = cfg.dataset.realize(cfg.m_test, stream_seed(cfg, 1, rep));
      const int n = full.dim;
      const int nbits = n * d;
      if (nbits > 26) throw std::runtime_error("fig2: n*d exceeds the enumeration cap");
      const std::size_t num_states = std::size_t{1} << nbits;

      std::vector<int> idx(m);
      std::iota(idx.begin(), idx.end(), 0);
      Dataset train = full.subset(idx);
      std::vector<int> tidx(full.num_examples() - m);
      std::iota(tidx.begin(), tidx.end(), m);
      Dataset test = full.subset(tidx);
      train = inject_label_noise(train, noise, stream_seed(cfg, 2, ni * 1000 + rep));

      PolyLossCoeffs cubic = fit_cubic_risk(train, lambda2);
      PolyLossCoeffs sixth;
      bool want_sixth = std::count(cfg.losses.begin(), cfg.losses.end(), LossKind::Sixth) > 0;
      if (want_sixth) sixth = sixth_betas(cfg.omega_grid.front());

      const Real zeta = cfg.weight_scale_r / std::sqrt(lambda2 * m);
      FixedPointEncoding enc{n, d, zeta};
      MatX kmat = enc.coeff_matrix().transpose();  // N x n, w = q^T kmat
      MatX ztrain = label_scaled_matrix(train);
      MatX ztest = label_scaled_matrix(test);

      std::map<LossKind, std::vector<Real>> risk;
      for (LossKind k : cfg.losses) risk[k].resize(num_states);
      std::vector<Real> terr(num_states);

      const std::size_t chunk = 4096;
      MatX bits(chunk, nbits);
      for (std::size_t lo = 0; lo < num_states; lo += chunk) {
        std::size_t hi = std::min(lo + chunk, num_states);
        std::size_t c = hi - lo;
        for (std::size_t s = 0; s < c; ++s)
          for (int b = 0; b < nbits; ++b) bits(s, b) = ((lo + s) >> b) & 1;
        MatX w = bits.topRows(c) * kmat;                 // c x n
        MatX gtr = ztrain * w.transpose();               // m x c
        MatX gte = ztest * w.transpose();                // m_test x c
        for (std::size_t s = 0; s < c; ++s) {
          auto col = gtr.col(s);
          for (LossKind k : cfg.losses) {
            Real acc = 0.0;
            switch (k) {
              case LossKind::ZeroOne:
                for (Index i = 0; i < col.size(); ++i)
                  acc += col[i] < 0 ? 1.0 : (col[i] == 0 ? 0.5 : 0.0);
                break;
              case LossKind::Cubic:
                for (Index i = 0; i < col.size(); ++i) {
                  Real g = col[i];
                  acc += g * (cubic.coeffs[0] + cubic.coeffs[1] * g * g);
                }
                break;
              case LossKind::Sixth:
                for (Index i = 0; i < col.size(); ++i)
                  acc += loss_eval(LossKind::Sixth, &sixth, col[i]);
                break;
              default:
                for (Index i = 0; i < col.size(); ++i) acc += loss_eval(k, nullptr, col[i]);
            }
            risk[k][lo + s] = acc / static_cast<Real>(col.size());
          }
          auto tcol = gte.col(s);
          Real e = 0.0;
          for (Index i = 0; i < tcol.size(); ++i)
            e += tcol[i] < 0 ? 1.0 : (tcol[i] == 0 ? 0.5 : 0.0);
          terr[lo + s] = e / static_cast<Real>(tcol.size());
        }
      }

      // all states attaining the minimal 0-1 empirical risk
      if (!risk.count(LossKind::ZeroOne))
        throw std::invalid_argument("fig2: losses must include zero-one");
      const std::vector<Real>& r01 = risk[LossKind::ZeroOne];
      Real min01 = *std::min_element(r01.begin(), r01.end());
      std::vector<std::size_t> optima01;
      for (std::size_t s = 0; s < num_states; ++s)
        if (r01[s] == min01) optima01.push_back(s);

      for (LossKind k : cfg.losses) {
        const std::vector<Real>& r = risk[k];
        std::vector<std::size_t> low(num_states);
        std::iota(low.begin(), low.end(), std::size_t{0});
        std::size_t keep = std::min<std::size_t>(50, num_states);
        std::partial_sort(low.begin(), low.begin() + keep, low.end(),
                          [&](std::size_t a, std::size_t b) {
                            return r[a] != r[b] ? r[a] < r[b] : a < b;
                          });

        Fig2Row row;
        row.noise = noise;
        row.repetition = rep;
        row.loss = k;
        row.err_lowest = terr[low[0]];
        row.err_best50 = terr[low[0]];
        for (std::size_t i = 1; i < keep; ++i)
          row.err_best50 = std::min(row.err_best50, terr[low[i]]);

        // best (1-based) rank of any 0-1 global minimum in this spectrum
        Real cut = std::numeric_limits<Real>::infinity();
        for (std::size_t s : optima01) cut = std::min(cut, r[s]);
        std::int64_t below = 0;
        for (std::size_t s = 0; s < num_states; ++s)
          if (r[s] < cut) ++below;
        row.rank01 = below + 1;
        row.rank_le50 = row.rank01 <= 50;
        rows.push_back(row);
      }
    }
  }

  auto f = open_out(out_dir, "fig2.csv");
  f << "# polyrisk fig2 v1\n";
  f << "noise,repetition,loss,err_lowest,err_best50,rank01,rank_le50\n";
  for (const Fig2Row& r : rows)
    f << fmt(r.noise) << ',' << r.repetition << ',' << to_string(r.loss) << ','
      << fmt(r.err_lowest) << ',' << fmt(r.err_best50) << ',' << r.rank01 << ','
      << (r.rank_le50 ? 1 : 0) << "\n";

  auto g = open_out(out_dir, "fig2_summary.csv");
  g << "# polyrisk fig2 summary v1\n";
  g << "noise,loss,err_lowest_mean,err_lowest_std,err_best50_mean,err_best50_std,"
       "rank01_mean,prob_rank_le50\n";
  for (Real noise : cfg.noise_levels) {
    for (LossKind k : cfg.losses) {
      std::vector<Real> e1, e50, rk, le;
      for (const Fig2Row& r : rows)
        if (r.noise == noise && r.loss == k) {
          e1.push_back(r.err_lowest);
          e50.push_back(r.err_best50);
          rk.push_back(static_cast<Real>(r.rank01));
          le.push_back(r.rank_le50 ? 1.0 : 0.0);
        }
      g << fmt(noise) << ',' << to_string(k) << ',' << fmt(mean_of(e1)) << ','
        << fmt(std_of(e1)) << ',' << fmt(mean_of(e50)) << ',' << fmt(std_of(e50)) << ','
        << fmt(mean_of(rk)) << ',' << fmt(mean_of(le)) << "\n";
    }
  }
  write_meta(cfg, out_dir, "fig2_meta.json");
  return rows;
}

namespace {

struct TrainedStates {
  std::vector<VecX> weights;  // lowest-objective first
};

TrainedStates solve_polynomial(const ExperimentConfig& cfg, const Dataset& train,
                               LossKind loss, Real lambda2, Real omega) {
  PolyLossCoeffs c = loss == LossKind::Cubic ? fit_cubic_risk(train, lambda2)
                                             : sixth_betas(omega);
  const Real zeta = cfg.weight_scale_r / std::sqrt(lambda2 * train.num_examples());
  FixedPointEncoding enc{train.dim, cfg.bit_depth, zeta};
  PuboTensor p = assemble_pubo(build_moments(train, c), lambda2, enc);

  SolveResult r;
  if (cfg.solver.method == "exact") {
    r = exhaustive_topk(p, cfg.solver.topk);
  } else {
    AnnealSchedule s{cfg.solver.beta_initial, cfg.solver.beta_final, cfg.solver.sweeps,
                     cfg.solver.restarts, stream_seed(cfg, 7, p.num_terms())};
    r = anneal(p, s, cfg.solver.topk);
  }
  TrainedStates out;
  for (const auto& [bits, energy] : r.states) out.weights.push_back(decode_weights(enc, bits));
  return out;
}

}  // namespace

CvResult run_cv(const ExperimentConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  const int m = cfg.dataset.m;
  Dataset full = cfg.dataset.realize(cfg.m_test, stream_seed(cfg, 11, 0));
  std::vector<int> pidx(std::min(m, full.num_examples()));
  std::iota(pidx.begin(), pidx.end(), 0);
  Dataset pool = full.subset(pidx);
  std::vector<int> tidx(full.num_examples() - pool.num_examples());
  std::iota(tidx.begin(), tidx.end(), pool.num_examples());
  Dataset test = full.subset(tidx);
  if (test.num_examples() == 0) throw std::invalid_argument("cv: empty test split");

  CvResult result;
  int minority = 0;
  for (int y : full.labels) minority += y > 0;
  result.baseline_error =
      std::min(minority, full.num_examples() - minority) / static_cast<Real>(full.num_examples());

  for (std::size_t ni = 0; ni < cfg.noise_levels.size(); ++ni) {
    const Real noise = cfg.noise_levels[ni];
    Dataset noisy = inject_label_noise(pool, noise, stream_seed(cfg, 12, ni));
    FoldAssignment folds = kfold_split(noisy.num_examples(), cfg.folds,
                                       stream_seed(cfg, 13, ni));

    for (LossKind loss : cfg.losses) {
      if (loss == LossKind::ZeroOne) continue;  // not trainable
      std::vector<std::pair<Real, Real>> grid;  // (lambda2, omega)
      for (Real l : cfg.lambda_grid) {
        if (loss == LossKind::Sixth) {
          for (Real w : cfg.omega_grid) grid.emplace_back(l, w);
        } else {
          grid.emplace_back(l, 0.0);
        }
      }

      std::vector<std::vector<CvCell>> by_grid(grid.size());
      for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        auto [lambda2, omega] = grid[gi];
        for (int f = 0; f < cfg.folds; ++f) {
          std::vector<int> tr, va;
          for (int i = 0; i < noisy.num_examples(); ++i)
            (folds.fold_of_example[i] == f ? va : tr).push_back(i);
          Dataset train = noisy.subset(tr);
          Dataset val = noisy.subset(va);

          CvCell cell;
          cell.loss = loss;
          cell.noise = noise;
          cell.lambda2 = lambda2;
          cell.omega = omega;
          cell.fold = f;
          if (is_polynomial(loss)) {
            TrainedStates states = solve_polynomial(cfg, train, loss, lambda2, omega);
            Real best = std::numeric_limits<Real>::infinity();
            const VecX* chosen = nullptr;
            for (const VecX& w : states.weights) {
              Real e = test_error(val, w);
              if (e < best) {
                best = e;
                chosen = &w;
              }
            }
            cell.validation_error = best;
            cell.test_error = test_error(test, *chosen);
          } else {
            VecX w = train_convex_baseline(loss, train, lambda2);
            cell.validation_error = test_error(val, w);
            cell.test_error = test_error(test, w);
          }
          by_grid[gi].push_back(cell);
          result.cells.push_back(cell);
        }
      }

      std::size_t best_gi = 0;
      Real best_val = std::numeric_limits<Real>::infinity();
      for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        std::vector<Real> vals;
        for (const CvCell& c : by_grid[gi]) vals.push_back(c.validation_error);
        Real mu = mean_of(vals);
        if (mu < best_val) {
          best_val = mu;
          best_gi = gi;
        }
      }
      CvSelection sel;
      sel.loss = loss;
      sel.noise = noise;
      sel.lambda2 = grid[best_gi].first;
      sel.omega = grid[best_gi].second;
      sel.validation_error_mean = best_val;
      std::vector<Real> terrs;
      for (const CvCell& c : by_grid[best_gi]) terrs.push_back(c.test_error);
      sel.test_error_mean = mean_of(terrs);
      sel.test_error_std = std_of(terrs);
      result.selected.push_back(sel);
    }
  }

  auto f = open_out(out_dir, "cv.csv");
  f << "# polyrisk cv v1\n";
  f << "loss,noise,lambda2,omega,fold,validation_error,test_error\n";
  for (const CvCell& c : result.cells)
    f << to_string(c.loss) << ',' << fmt(c.noise) << ',' << fmt(c.lambda2) << ','
      << fmt(c.omega) << ',' << c.fold << ',' << fmt(c.validation_error) << ','
      << fmt(c.test_error) << "\n";

  auto g = open_out(out_dir, "cv_selected.csv");
  g << "# polyrisk cv selection v1\n";
  g << "loss,noise,lambda2,omega,validation_error_mean,test_error_mean,test_error_std,"
       "baseline_error\n";
  for (const CvSelection& s : result.selected)
    g << to_string(s.loss) << ',' << fmt(s.noise) << ',' << fmt(s.lambda2) << ','
      << fmt(s.omega) << ',' << fmt(s.validation_error_mean) << ','
      << fmt(s.test_error_mean) << ',' << fmt(s.test_error_std) << ','
      << fmt(result.baseline_error) << "\n";
  write_meta(cfg, out_dir, "cv_meta.json");
  return result;
}

namespace {

/// num_states uniform bit states decoded against enc; one VecX per state.
std::vector<std::vector<int>> sample_bit_states(int nbits, int count, Rng& rng) {
  std::vector<std::vector<int>> states(count);
  for (int s = 0; s < count; ++s) {
    states[s].resize(nbits);
    for (int b = 0; b < nbits; ++b) states[s][b] = rng.bernoulli(0.5) ? 1 : 0;
  }
  return states;
}

VecX risks_over_states(LossKind kind, const PolyLossCoeffs* c, const Dataset& d,
                       const FixedPointEncoding& enc,
                       const std::vector<std::vector<int>>& states) {
  VecX out(static_cast<Index>(states.size()));
  for (std::size_t s = 0; s < states.size(); ++s)
    out[static_cast<Index>(s)] = empirical_risk(kind, c, d, decode_weights(enc, states[s]));
  return out;
}

VecX minmax_normalize(const VecX& v) {
  Real lo = v.minCoeff(), hi = v.maxCoeff();
  if (!(hi > lo)) throw std::runtime_error("degenerate risk normalization: constant values");
  return (v.array() - lo) / (hi - lo);
}

Real lsq_slope(const std::vector<Real>& x, const std::vector<Real>& y) {
  Real mx = mean_of(x), my = mean_of(y), num = 0, den = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return num / den;
}

}  // namespace

Real pearson(const VecX& a, const VecX& b) {
  if (a.size() != b.size() || a.size() < 2)
    throw std::invalid_argument("pearson: need two equal-length samples");
  VecX ca = a.array() - a.mean();
  VecX cb = b.array() - b.mean();
  Real den = std::sqrt(ca.squaredNorm() * cb.squaredNorm());
  if (den == 0.0) throw std::runtime_error("pearson: zero-variance sample");
  return ca.dot(cb) / den;
}

CorrelationResult run_correlation(const ExperimentConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  Dataset data = cfg.dataset.realize(0, stream_seed(cfg, 21, 0));
  const Real lambda2 = cfg.lambda_grid.front();
  const Real zeta = cfg.weight_scale_r / std::sqrt(lambda2 * data.num_examples());
  FixedPointEncoding enc{data.dim, cfg.bit_depth, zeta};

  Rng rng(stream_seed(cfg, 22, 0));
  auto states = sample_bit_states(enc.num_bits(), cfg.num_states, rng);

  PolyLossCoeffs cubic = fit_cubic_risk(data, lambda2);
  PolyLossCoeffs sixth;
  if (std::count(cfg.losses.begin(), cfg.losses.end(), LossKind::Sixth))
    sixth = sixth_betas(cfg.omega_grid.front());

  std::map<LossKind, VecX> norm;
  for (LossKind k : cfg.losses) {
    const PolyLossCoeffs* c =
        k == LossKind::Cubic ? &cubic : (k == LossKind::Sixth ? &sixth : nullptr);
    norm[k] = minmax_normalize(risks_over_states(k, c, data, enc, states));
  }
  if (!norm.count(LossKind::ZeroOne))
    throw std::invalid_argument("correlation: losses must include zero-one");

  CorrelationResult result;
  for (const auto& [k, v] : norm) result.pearson[k] = pearson(v, norm[LossKind::ZeroOne]);

  auto f = open_out(out_dir, "correlation.csv");
  f << "# polyrisk correlation v1\n";
  f << "loss,pearson_r\n";
  for (const auto& [k, r] : result.pearson) f << to_string(k) << ',' << fmt(r) << "\n";

  auto g = open_out(out_dir, "correlation_scatter.csv");
  g << "# polyrisk correlation scatter v1\n";
  g << "state";
  for (const auto& [k, v] : norm) g << ',' << to_string(k);
  g << "\n";
  for (int s = 0; s < cfg.num_states; ++s) {
    g << s;
    for (const auto& [k, v] : norm) g << ',' << fmt(v[s]);
    g << "\n";
  }
  write_meta(cfg, out_dir, "correlation_meta.json");
  return result;
}

ConvergenceResult run_convergence(const ExperimentConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  if (cfg.m_grid.empty()) throw std::invalid_argument("convergence: m grid must be non-empty");
  Dataset pool = cfg.dataset.realize(0, stream_seed(cfg, 31, 0));
  if (cfg.m_grid.back() > pool.num_examples())
    throw std::invalid_argument("convergence: m grid exceeds the dataset size");
  const Real lambda2 = cfg.lambda_grid.front();

  Rng srng(stream_seed(cfg, 32, 0));
  auto states = sample_bit_states(pool.dim * cfg.bit_depth, cfg.num_states, srng);

  ConvergenceResult result;
  for (std::size_t mi = 0; mi < cfg.m_grid.size(); ++mi) {
    const int m = cfg.m_grid[mi];
    Rng prng(stream_seed(cfg, 33, mi));
    std::vector<int> perm(pool.num_examples());
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = pool.num_examples() - 1; i > 0; --i) {
      int j = static_cast<int>(prng.uniform_int(static_cast<std::uint64_t>(i) + 1));
      std::swap(perm[i], perm[j]);
    }
    perm.resize(m);
    Dataset sub = pool.subset(perm);

    PolyLossCoeffs c = fit_cubic_risk(sub, lambda2);
    const Real zeta = cfg.weight_scale_r / std::sqrt(lambda2 * m);
    FixedPointEncoding enc{sub.dim, cfg.bit_depth, zeta};

    VecX r01 = risks_over_states(LossKind::ZeroOne, nullptr, sub, enc, states);
    VecX r3 = risks_over_states(LossKind::Cubic, &c, sub, enc, states);
    result.m_values.push_back(m);
    result.err_all.push_back(embedding_error(r01, r3));

    std::vector<Index> order(r3.size());
    std::iota(order.begin(), order.end(), Index{0});
    Index keep = std::min<Index>(50, r3.size());
    std::partial_sort(order.begin(), order.begin() + keep, order.end(),
                      [&](Index a, Index b) { return r3[a] != r3[b] ? r3[a] < r3[b] : a < b; });
    VecX l01(keep), l3(keep);
    for (Index i = 0; i < keep; ++i) {
      l01[i] = r01[order[i]];
      l3[i] = r3[order[i]];
    }
    result.err_low50.push_back(embedding_error(l01, l3));
  }

  std::vector<Real> logm, loga, logl;
  for (std::size_t i = 0; i < result.m_values.size(); ++i) {
    logm.push_back(std::log(static_cast<Real>(result.m_values[i])));
    loga.push_back(std::log(result.err_all[i]));
    logl.push_back(std::log(result.err_low50[i]));
  }
  result.slope_all = lsq_slope(logm, loga);
  result.slope_low50 = lsq_slope(logm, logl);

  auto f = open_out(out_dir, "convergence.csv");
  f << "# polyrisk convergence v1\n";
  f << "m,err_all,err_low50\n";
  for (std::size_t i = 0; i < result.m_values.size(); ++i)
    f << result.m_values[i] << ',' << fmt(result.err_all[i]) << ','
      << fmt(result.err_low50[i]) << "\n";
  f << "# slope_all=" << fmt(result.slope_all) << " slope_low50=" << fmt(result.slope_low50)
    << "\n";
  write_meta(cfg, out_dir, "convergence_meta.json");
  return result;
}

VecX train_convex_baseline(LossKind kind, const Dataset& d, Real lambda2) {
  if (!is_convex(kind))
    throw std::invalid_argument("train_convex_baseline: convex losses only");
  if (lambda2 < 0.0) throw std::invalid_argument("lambda2 >= 0 required");
  d.validate();

  const int m = d.num_examples();
  auto objective = [&](const VecX& w) {
    return regularized_objective(kind, nullptr, d, w, lambda2);
  };
  auto gradient = [&](const VecX& w) {
    VecX g = margins(d, w);
    VecX grad = lambda2 * w;
    for (int i = 0; i < m; ++i) {
      Real dl = loss_derivative(kind, g[i]) * d.labels[i] / static_cast<Real>(m);
      for (const auto& [idx, val] : d.rows[i]) grad[idx] += dl * val;
    }
    return grad;
  };

  VecX w = VecX::Zero(d.dim);
  Real fw = objective(w);
  const int max_iters = 100000;
  for (int it = 0; it < max_iters; ++it) {
    VecX grad = gradient(w);
    Real gn = grad.norm();
    if (gn < 1e-6) return w;
    Real step = 1.0;
    for (int bt = 0; bt < 60; ++bt) {
      VecX cand = w - step * grad;
      Real fc = objective(cand);
      if (fc <= fw - 1e-4 * step * gn * gn) {
        w = cand;
        fw = fc;
        break;
      }
      step *= 0.5;
      if (bt == 59)
        throw std::runtime_error("convex baseline: line search failed at |grad|=" +
                                 fmt(gn));
    }
  }
  throw std::runtime_error("convex baseline: no convergence after " +
                           std::to_string(max_iters) + " iterations; |grad|=" +
                           fmt(gradient(w).norm()));
}

}  // namespace polyrisk

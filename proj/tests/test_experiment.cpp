#include <Eigen/Cholesky>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "polyrisk/experiment.hpp"
#include "polyrisk/rng.hpp"

using namespace polyrisk;

namespace {

Dataset random_dense(int m, int n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  d.dim = n;
  for (int i = 0; i < m; ++i) {
    SparseRow r;
    for (int j = 0; j < n; ++j) r.emplace_back(j, rng.uniform(-1, 1));
    d.rows.push_back(std::move(r));
    d.labels.push_back(rng.bernoulli(0.5) ? 1 : -1);
  }
  d.validate();
  return d;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(p);
  return p;
}

ExperimentConfig tiny_fig2_config() {
  ExperimentConfig cfg;
  cfg.dataset = {"random", "", 200, 4};
  cfg.losses = {LossKind::ZeroOne, LossKind::Cubic};
  cfg.lambda_grid = {0.1};
  cfg.noise_levels = {0.0, 0.2};
  cfg.bit_depth = 1;
  cfg.repetitions = 2;
  cfg.m_test = 200;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("convex baseline training") {
  SUBCASE("square loss matches the linear-solve solution") {
    Dataset d = random_dense(60, 4, 1);
    Real lambda2 = 0.3;
    VecX w = train_convex_baseline(LossKind::Square, d, lambda2);

    // stationarity of (1/m) sum (1 - g_i)^2 + (lambda2/2)|w|^2:
    //   ((2/m) X^T X + lambda2 I) w = (2/m) X^T y
    int m = d.num_examples();
    MatX x = MatX::Zero(m, d.dim);
    VecX y(m);
    for (int i = 0; i < m; ++i) {
      for (const auto& [idx, val] : d.rows[i]) x(i, idx) = val;
      y[i] = d.labels[i];
    }
    MatX a = (2.0 / m) * x.transpose() * x + lambda2 * MatX::Identity(d.dim, d.dim);
    VecX b = (2.0 / m) * x.transpose() * y;
    VecX exact = a.ldlt().solve(b);
    CHECK((w - exact).norm() < 1e-6);
  }
  SUBCASE("returned point is stationary under finite differences") {
    Dataset d = random_dense(40, 3, 2);
    for (LossKind k : {LossKind::Logistic, LossKind::Square, LossKind::SmoothHinge}) {
      VecX w = train_convex_baseline(k, d, 0.2);
      Real f0 = regularized_objective(k, nullptr, d, w, 0.2);
      Real h = 1e-6;
      for (int j = 0; j < d.dim; ++j) {
        VecX wp = w, wm = w;
        wp[j] += h;
        wm[j] -= h;
        Real g = (regularized_objective(k, nullptr, d, wp, 0.2) -
                  regularized_objective(k, nullptr, d, wm, 0.2)) /
                 (2 * h);
        CHECK(std::abs(g) < 1e-5);
      }
      CHECK(std::isfinite(f0));
    }
  }
  SUBCASE("separable two-point set, logistic: both margins positive") {
    Dataset d;
    d.dim = 2;
    d.rows = {{{0, 1.0}}, {{1, 1.0}}};
    d.labels = {1, -1};
    VecX w = train_convex_baseline(LossKind::Logistic, d, 1e-3);
    VecX g = margins(d, w);
    CHECK(g[0] > 0);
    CHECK(g[1] > 0);
  }
  SUBCASE("huge lambda2 shrinks the solution to zero") {
    Dataset d = random_dense(30, 3, 3);
    VecX w = train_convex_baseline(LossKind::Logistic, d, 1e6);
    CHECK(w.norm() < 1e-4);
  }
  SUBCASE("non-convex losses are rejected") {
    Dataset d = random_dense(10, 2, 4);
    CHECK_THROWS_AS(train_convex_baseline(LossKind::Cubic, d, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(train_convex_baseline(LossKind::ZeroOne, d, 0.1), std::invalid_argument);
  }
}

TEST_CASE("pearson correlation") {
  VecX a(4), b(4);
  a << 1, 2, 3, 4;
  CHECK(pearson(a, a) == doctest::Approx(1.0));
  CHECK(pearson(a, VecX(-a)) == doctest::Approx(-1.0));
  b << 1, 2, 3, 100;
  CHECK(pearson(a, 2.0 * a.array() + 5.0) == doctest::Approx(1.0));
  CHECK(pearson(a, b) > 0.0);
  CHECK(pearson(a, b) < 1.0);
  VecX c = VecX::Constant(4, 2.0);
  CHECK_THROWS_AS(pearson(a, c), std::runtime_error);
}

TEST_CASE("experiment config") {
  SUBCASE("round-trips through a json file") {
    auto path = std::filesystem::temp_directory_path() / "polyrisk_cfg.json";
    {
      std::ofstream f(path);
      f << R"({
        "dataset": {"kind": "surrogate", "m": 500, "n": 30, "density": 0.2,
                    "positive_fraction": 0.4},
        "losses": ["zero-one", "cubic", "logistic"],
        "lambda_grid": [0.5, 0.1],
        "noise_levels": [0.0, 0.1],
        "bit_depth": 2,
        "weight_scale_r": 3.0,
        "repetitions": 4,
        "m_grid": [10, 100],
        "solver": {"method": "sa", "sweeps": 200},
        "seed": 42
      })";
    }
    ExperimentConfig cfg = load_experiment_config(path.string());
    CHECK(cfg.dataset.kind == "surrogate");
    CHECK(cfg.dataset.m == 500);
    CHECK(cfg.dataset.n == 30);
    CHECK(cfg.dataset.density == doctest::Approx(0.2));
    CHECK(cfg.losses == std::vector<LossKind>{LossKind::ZeroOne, LossKind::Cubic,
                                              LossKind::Logistic});
    CHECK(cfg.lambda_grid == std::vector<Real>{0.5, 0.1});
    CHECK(cfg.weight_scale_r == doctest::Approx(3.0));
    CHECK(cfg.repetitions == 4);
    CHECK(cfg.m_grid == std::vector<int>{10, 100});
    CHECK(cfg.solver.method == "sa");
    CHECK(cfg.solver.sweeps == 200);
    CHECK(cfg.solver.restarts == 100);  // default survives partial solver blocks
    CHECK(cfg.seed == 42);
    std::filesystem::remove(path);
  }
  SUBCASE("validation rejects bad values") {
    ExperimentConfig cfg = tiny_fig2_config();
    cfg.noise_levels = {0.6};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = tiny_fig2_config();
    cfg.lambda_grid = {};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = tiny_fig2_config();
    cfg.dataset.kind = "nope";
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = tiny_fig2_config();
    cfg.solver.method = "tabu";
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = tiny_fig2_config();
    cfg.m_grid = {100, 10};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
}

TEST_CASE("fig2 study") {
  ExperimentConfig cfg = tiny_fig2_config();
  auto dir = temp_dir("polyrisk_fig2");
  auto rows = run_fig2(cfg, dir.string());
  REQUIRE(rows.size() == 2 * 2 * 2);  // noise x rep x loss
  for (const Fig2Row& r : rows) {
    CHECK(r.err_lowest >= 0.0);
    CHECK(r.err_lowest <= 1.0);
    CHECK(r.err_best50 <= r.err_lowest);
    CHECK(r.rank01 >= 1);
    CHECK(r.rank01 <= 16);  // 2^(n*d)
    if (r.loss == LossKind::ZeroOne) CHECK(r.rank01 == 1);  // self-rank
    CHECK(r.rank_le50 == (r.rank01 <= 50));
  }
  CHECK(std::filesystem::exists(dir / "fig2.csv"));
  CHECK(std::filesystem::exists(dir / "fig2_summary.csv"));
  CHECK(std::filesystem::exists(dir / "fig2_meta.json"));

  SUBCASE("rerun is byte-identical") {
    auto dir2 = temp_dir("polyrisk_fig2_b");
    run_fig2(cfg, dir2.string());
    CHECK(slurp(dir / "fig2.csv") == slurp(dir2 / "fig2.csv"));
    CHECK(slurp(dir / "fig2_summary.csv") == slurp(dir2 / "fig2_summary.csv"));
    std::filesystem::remove_all(dir2);
  }
  SUBCASE("zero-one must be present") {
    ExperimentConfig bad = cfg;
    bad.losses = {LossKind::Cubic};
    CHECK_THROWS_AS(run_fig2(bad, temp_dir("polyrisk_fig2_c").string()),
                    std::invalid_argument);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("cv study") {
  ExperimentConfig cfg;
  cfg.dataset = {"random", "", 120, 3};
  cfg.losses = {LossKind::Cubic, LossKind::Logistic};
  cfg.lambda_grid = {0.5, 0.1};
  cfg.noise_levels = {0.1};
  cfg.bit_depth = 1;
  cfg.folds = 3;
  cfg.m_test = 100;
  cfg.solver.topk = 50;
  cfg.seed = 9;
  auto dir = temp_dir("polyrisk_cv");
  CvResult r = run_cv(cfg, dir.string());

  // noise x loss x lambda x fold
  CHECK(r.cells.size() == 1 * 2 * 2 * 3);
  for (const CvCell& c : r.cells) {
    CHECK(c.validation_error >= 0.0);
    CHECK(c.validation_error <= 1.0);
    CHECK(c.test_error >= 0.0);
    CHECK(c.test_error <= 1.0);
  }
  REQUIRE(r.selected.size() == 2);
  for (const CvSelection& s : r.selected) {
    bool in_grid = false;
    for (Real l : cfg.lambda_grid) in_grid |= (s.lambda2 == l);
    CHECK(in_grid);
    CHECK(s.test_error_mean >= 0.0);
    CHECK(s.test_error_mean <= 1.0);
  }
  CHECK(r.baseline_error >= 0.0);
  CHECK(r.baseline_error <= 0.5);
  CHECK(std::filesystem::exists(dir / "cv.csv"));
  CHECK(std::filesystem::exists(dir / "cv_selected.csv"));

  SUBCASE("rerun is byte-identical") {
    auto dir2 = temp_dir("polyrisk_cv_b");
    run_cv(cfg, dir2.string());
    CHECK(slurp(dir / "cv.csv") == slurp(dir2 / "cv.csv"));
    CHECK(slurp(dir / "cv_selected.csv") == slurp(dir2 / "cv_selected.csv"));
    std::filesystem::remove_all(dir2);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("correlation study") {
  ExperimentConfig cfg;
  cfg.dataset = {"surrogate", "", 300, 20, 0.15, 0.3};
  cfg.losses = {LossKind::ZeroOne, LossKind::Cubic, LossKind::Logistic};
  cfg.lambda_grid = {0.2};
  cfg.bit_depth = 1;
  cfg.num_states = 400;
  cfg.seed = 3;
  auto dir = temp_dir("polyrisk_corr");
  CorrelationResult r = run_correlation(cfg, dir.string());
  CHECK(r.pearson.at(LossKind::ZeroOne) == doctest::Approx(1.0));
  for (const auto& [k, v] : r.pearson) {
    CHECK(v >= -1.0);
    CHECK(v <= 1.0 + 1e-12);
  }
  CHECK(std::filesystem::exists(dir / "correlation.csv"));
  CHECK(std::filesystem::exists(dir / "correlation_scatter.csv"));

  SUBCASE("scatter values are normalized to [0, 1]") {
    std::ifstream f(dir / "correlation_scatter.csv");
    std::string line;
    std::getline(f, line);  // comment
    std::getline(f, line);  // header
    while (std::getline(f, line)) {
      std::istringstream ss(line);
      std::string cell;
      std::getline(ss, cell, ',');  // state index
      while (std::getline(ss, cell, ',')) {
        Real v = std::stod(cell);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
    }
  }
  SUBCASE("rerun is byte-identical") {
    auto dir2 = temp_dir("polyrisk_corr_b");
    run_correlation(cfg, dir2.string());
    CHECK(slurp(dir / "correlation_scatter.csv") == slurp(dir2 / "correlation_scatter.csv"));
    std::filesystem::remove_all(dir2);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("convergence study") {
  ExperimentConfig cfg;
  cfg.dataset = {"surrogate", "", 2000, 20, 0.15, 0.3};
  cfg.losses = {LossKind::ZeroOne, LossKind::Cubic};
  cfg.lambda_grid = {1.0};
  cfg.bit_depth = 2;
  cfg.num_states = 400;
  cfg.m_grid = {50, 200, 800};
  cfg.seed = 11;
  auto dir = temp_dir("polyrisk_conv");
  ConvergenceResult r = run_convergence(cfg, dir.string());
  REQUIRE(r.m_values == cfg.m_grid);
  for (Real e : r.err_all) {
    CHECK(e > 0.0);
    CHECK(e < 1.0);
  }
  for (Real e : r.err_low50) CHECK(e >= 0.0);
  CHECK(std::isfinite(r.slope_all));
  CHECK(std::isfinite(r.slope_low50));
  CHECK(std::filesystem::exists(dir / "convergence.csv"));

  SUBCASE("m grid larger than the pool is rejected") {
    ExperimentConfig bad = cfg;
    bad.m_grid = {50, 5000};
    CHECK_THROWS_AS(run_convergence(bad, temp_dir("polyrisk_conv_c").string()),
                    std::invalid_argument);
  }
  SUBCASE("rerun is byte-identical") {
    auto dir2 = temp_dir("polyrisk_conv_b");
    run_convergence(cfg, dir2.string());
    CHECK(slurp(dir / "convergence.csv") == slurp(dir2 / "convergence.csv"));
    std::filesystem::remove_all(dir2);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("dataset spec realize") {
  DatasetSpec spec;
  spec.kind = "random";
  spec.m = 100;
  spec.n = 5;
  Dataset d = spec.realize(20, 7);
  CHECK(d.num_examples() == 120);
  CHECK(d.dim == 5);
  spec.kind = "long-servedio";
  CHECK(spec.realize(0, 7).dim == 21);
  spec.kind = "mease-wyner";
  CHECK(spec.realize(0, 7).dim == 20);
  spec.kind = "bogus";
  CHECK_THROWS_AS(spec.realize(0, 7), std::invalid_argument);
}

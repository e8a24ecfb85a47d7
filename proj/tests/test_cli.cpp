#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "polyrisk/dataset.hpp"
#include "polyrisk/pubo.hpp"

using namespace polyrisk;
namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char* p = std::getenv("POLYRISK_CLI");
  REQUIRE_MESSAGE(p != nullptr, "POLYRISK_CLI must point at the cli binary");
  return p;
}

int run(const std::string& args) {
  std::string cmd = cli_path() + " " + args + " > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path work_dir() {
  auto p = fs::temp_directory_path() / "polyrisk_cli_test";
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("cli pipeline: gen, fit, compile, solve") {
  auto dir = work_dir();
  auto data = (dir / "train.libsvm").string();
  auto coeffs = (dir / "coeffs.json").string();
  auto model = (dir / "model.pubo").string();
  auto states = (dir / "states.json").string();

  REQUIRE(run("data gen --kind random --m 200 --n 3 --seed 7 --noise 0.1 --out " + data) == 0);
  Dataset d = load_libsvm(data);
  CHECK(d.num_examples() == 200);
  CHECK(d.dim == 3);

  REQUIRE(run("fit --loss cubic --lambda2 0.5 --data " + data + " --out " + coeffs) == 0);
  auto j = nlohmann::json::parse(slurp(coeffs));
  CHECK(j.at("degree") == 3);
  CHECK(j.at("coeffs").size() == 2);
  CHECK(j.at("lambda2") == doctest::Approx(0.5));

  REQUIRE(run("compile --coeffs " + coeffs + " --data " + data +
              " --bits 2 --zeta 0.2 --out " + model) == 0);
  PuboTensor p = load_pubo(model);
  CHECK(p.num_vars == 6);
  CHECK(p.degree() == 3);

  REQUIRE(run("solve --model " + model + " --method exact --topk 5 --out " + states) == 0);
  auto s = nlohmann::json::parse(slurp(states));
  REQUIRE(s.at("states").size() == 5);
  Real prev = -1e300;
  for (const auto& st : s.at("states")) {
    std::string hex = st.at("bits");
    CHECK(hex.substr(0, 2) == "0x");
    Real e = st.at("energy");
    CHECK(e >= prev);
    prev = e;
  }
  CHECK(s.at("method") == "exact");

  SUBCASE("sa solve records its seed and matches the exact optimum") {
    auto sa_states = (dir / "states_sa.json").string();
    REQUIRE(run("solve --model " + model + " --method sa --topk 1 --sweeps 500 "
                "--restarts 20 --seed 3 --out " + sa_states) == 0);
    auto sj = nlohmann::json::parse(slurp(sa_states));
    CHECK(sj.at("seed") == 3);
    Real sa_best = sj.at("states")[0].at("energy");
    Real exact_best = s.at("states")[0].at("energy");
    CHECK(sa_best == doctest::Approx(exact_best).epsilon(1e-9));
  }

  fs::remove_all(dir);
}

TEST_CASE("cli reruns are byte-identical") {
  auto dir = work_dir();
  auto data1 = (dir / "a.libsvm").string();
  auto data2 = (dir / "b.libsvm").string();
  std::string gen_args = "data gen --kind random --m 150 --n 4 --seed 11 --noise 0.2 --out ";
  REQUIRE(run(gen_args + data1) == 0);
  REQUIRE(run(gen_args + data2) == 0);
  CHECK(slurp(data1) == slurp(data2));

  auto c1 = (dir / "a.json").string();
  auto c2 = (dir / "b.json").string();
  REQUIRE(run("fit --loss cubic --lambda2 0.1 --data " + data1 + " --out " + c1) == 0);
  REQUIRE(run("fit --loss cubic --lambda2 0.1 --data " + data1 + " --out " + c2) == 0);
  CHECK(slurp(c1) == slurp(c2));

  auto m1 = (dir / "a.pubo").string();
  auto m2 = (dir / "b.pubo").string();
  std::string comp = " --data " + data1 + " --bits 1 --zeta 0.3 --out ";
  REQUIRE(run("compile --coeffs " + c1 + comp + m1) == 0);
  REQUIRE(run("compile --coeffs " + c1 + comp + m2) == 0);
  CHECK(slurp(m1) == slurp(m2));

  auto s1 = (dir / "a_states.json").string();
  auto s2 = (dir / "b_states.json").string();
  std::string solve_args = "solve --model " + m1 + " --method sa --topk 3 --sweeps 100 "
                           "--restarts 5 --seed 21 --out ";
  REQUIRE(run(solve_args + s1) == 0);
  REQUIRE(run(solve_args + s2) == 0);
  CHECK(slurp(s1) == slurp(s2));

  fs::remove_all(dir);
}

TEST_CASE("cli exp study runs from a config file") {
  auto dir = work_dir();
  auto cfg_path = dir / "cfg.json";
  {
    std::ofstream f(cfg_path);
    f << R"({
      "dataset": {"kind": "random", "m": 150, "n": 4},
      "losses": ["zero-one", "cubic"],
      "lambda_grid": [0.1],
      "noise_levels": [0.0],
      "bit_depth": 1,
      "repetitions": 2,
      "m_test": 150,
      "seed": 13
    })";
  }
  auto out1 = dir / "out1";
  auto out2 = dir / "out2";
  REQUIRE(run("exp fig2 --config " + cfg_path.string() + " --out-dir " + out1.string()) == 0);
  REQUIRE(run("exp fig2 --config " + cfg_path.string() + " --out-dir " + out2.string()) == 0);
  CHECK(fs::exists(out1 / "fig2.csv"));
  CHECK(slurp(out1 / "fig2.csv") == slurp(out2 / "fig2.csv"));
  CHECK(slurp(out1 / "fig2_summary.csv") == slurp(out2 / "fig2_summary.csv"));
  CHECK(slurp(out1 / "fig2_meta.json") == slurp(out2 / "fig2_meta.json"));
  fs::remove_all(dir);
}

TEST_CASE("cli error handling") {
  auto dir = work_dir();
  CHECK(run("fit --loss quartic --lambda2 0.1 --data nope.libsvm --out x.json") != 0);
  CHECK(run("fit --loss cubic --lambda2 0.1 --data " + (dir / "missing.libsvm").string() +
            " --out " + (dir / "x.json").string()) != 0);
  CHECK(run("solve --model " + (dir / "missing.pubo").string() + " --out " +
            (dir / "y.json").string()) != 0);
  CHECK(run("qubits --n 100 --d 1") == 0);
  CHECK(run("") != 0);  // a subcommand is required
  fs::remove_all(dir);
}

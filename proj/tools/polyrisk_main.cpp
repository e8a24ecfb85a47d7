#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "polyrisk/dataset.hpp"
#include "polyrisk/experiment.hpp"
#include "polyrisk/fit.hpp"
#include "polyrisk/losses.hpp"
#include "polyrisk/pubo.hpp"
#include "polyrisk/quadratize.hpp"
#include "polyrisk/solve.hpp"

using namespace polyrisk;
using nlohmann::json;

namespace {

std::string fmt(Real v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string bits_to_hex(const std::vector<int>& bits) {
  std::string hex;
  for (std::size_t lo = 0; lo < bits.size(); lo += 4) {
    int nibble = 0;
    for (std::size_t b = 0; b < 4 && lo + b < bits.size(); ++b)
      nibble |= bits[lo + b] << b;
    hex += "0123456789abcdef"[nibble];
  }
  return "0x" + hex;  // nibble order follows variable order, bit 0 first
}

int run_data_gen(const std::string& kind, int m, int n, std::uint64_t seed, Real noise,
                 Real density, Real positive_fraction, const std::string& out) {
  Dataset d;
  if (kind == "random") {
    d = gen_random_classifier_set(m, n, seed).first;
  } else if (kind == "long-servedio") {
    d = gen_long_servedio(m, seed);
  } else if (kind == "mease-wyner") {
    d = gen_mease_wyner(m, seed);
  } else if (kind == "surrogate") {
    d = gen_binary_surrogate(m, n, density, positive_fraction, seed);
  } else {
    throw CLI::ValidationError("--kind", "unknown dataset kind: " + kind);
  }
  if (noise > 0.0) d = inject_label_noise(d, noise, seed + 1);
  save_libsvm(d, out);
  std::cout << "wrote " << d.num_examples() << " examples, " << d.dim << " features to "
            << out << "\n";
  return 0;
}

int run_fit(const std::string& loss, Real lambda2, Real omega, const std::string& data,
            const std::string& out) {
  Dataset d = load_libsvm(data);
  PolyLossCoeffs c;
  if (loss == "cubic") {
    c = fit_cubic_risk(d, lambda2);
  } else if (loss == "cubic-direct") {
    c = fit_cubic_direct(d, lambda2);
  } else if (loss == "sixth") {
    if (!(omega > 0.0)) throw CLI::ValidationError("--omega", "sixth loss requires --omega > 0");
    c = sixth_betas(omega);
  } else {
    throw CLI::ValidationError("--loss", "unknown loss: " + loss);
  }
  json j;
  j["degree"] = c.degree;
  j["coeffs"] = c.coeffs;
  j["lambda2"] = lambda2;
  if (c.degree == 6) j["omega"] = c.omega;
  std::ofstream f(out);
  if (!f) throw std::runtime_error("cannot open output file: " + out);
  f << j.dump(2) << "\n";
  std::cout << "wrote degree-" << c.degree << " coefficients to " << out << "\n";
  return 0;
}

int run_compile(const std::string& coeffs_path, const std::string& data, int bits, Real zeta,
                Real lambda0, Real phi, bool with_l0, const std::string& out) {
  std::ifstream cf(coeffs_path);
  if (!cf) throw std::runtime_error("cannot open coefficients file: " + coeffs_path);
  json j = json::parse(cf);
  PolyLossCoeffs c;
  c.degree = j.at("degree");
  c.coeffs = j.at("coeffs").get<std::vector<Real>>();
  if (c.degree == 6) c.omega = j.at("omega");
  c.validate();
  Real lambda2 = j.at("lambda2");

  Dataset d = load_libsvm(data);
  FixedPointEncoding enc{d.dim, bits, zeta};
  PuboTensor p = assemble_pubo(build_moments(d, c), lambda2, enc);
  if (with_l0) p = add_l0_regularizer(p, enc, lambda0, phi);
  save_pubo(p, out);
  std::cout << "wrote pubo with " << p.num_vars << " variables, " << p.num_terms()
            << " terms to " << out << "\n";
  return 0;
}

int run_qubits(int n, int d) {
  QubitEstimate q = qubit_estimate(n, d, 3);
  std::cout << "logical " << q.logical << "\n";
  std::cout << "ancilla " << q.ancilla << " (loose bound " << q.ancilla_loose << ")\n";
  std::cout << "total " << q.total() << "\n";
  return 0;
}

int run_solve(const std::string& model, const std::string& method, int topk, int sweeps,
              int restarts, std::uint64_t seed, const std::string& out) {
  PuboTensor p = load_pubo(model);
  SolveResult r;
  if (method == "exact") {
    r = exhaustive_topk(p, topk);
  } else if (method == "sa") {
    AnnealSchedule s;
    s.sweeps = sweeps;
    s.restarts = restarts;
    s.seed = seed;
    r = anneal(p, s, topk);
  } else {
    throw CLI::ValidationError("--method", "unknown method: " + method);
  }
  json j;
  j["model"] = model;
  j["method"] = method;
  j["num_vars"] = p.num_vars;
  j["num_logical"] = p.num_logical;
  j["topk"] = topk;
  if (method == "sa") {
    j["seed"] = seed;
    j["sweeps"] = sweeps;
    j["restarts"] = restarts;
  }
  json states = json::array();
  for (const auto& [bits, energy] : r.states) {
    json s;
    s["bits"] = bits_to_hex(bits);
    s["energy"] = energy;
    states.push_back(s);
  }
  j["states"] = states;
  std::ofstream f(out);
  if (!f) throw std::runtime_error("cannot open output file: " + out);
  f << j.dump(2) << "\n";
  std::cout << "best energy " << fmt(r.best_energy()) << ", wrote " << r.states.size()
            << " states to " << out << "\n";
  return 0;
}

int run_exp(const std::string& study, const std::string& config, const std::string& out_dir) {
  ExperimentConfig cfg = load_experiment_config(config);
  if (study == "fig2") {
    run_fig2(cfg, out_dir);
  } else if (study == "cv") {
    run_cv(cfg, out_dir);
  } else if (study == "correlation") {
    run_correlation(cfg, out_dir);
  } else if (study == "convergence") {
    run_convergence(cfg, out_dir);
  } else {
    throw CLI::ValidationError("study", "unknown study: " + study);
  }
  std::cout << "wrote " << study << " outputs to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polynomial loss fitting and pseudo-Boolean compilation for binary classifiers"};
  app.require_subcommand(1);

  // data gen
  auto* data = app.add_subcommand("data", "dataset utilities");
  data->require_subcommand(1);
  auto* gen = data->add_subcommand("gen", "generate a synthetic dataset");
  std::string gen_kind = "random", gen_out;
  int gen_m = 1000, gen_n = 9;
  std::uint64_t gen_seed = 0;
  Real gen_noise = 0.0, gen_density = 0.113, gen_posfrac = 0.2393;
  gen->add_option("--kind", gen_kind, "random | long-servedio | mease-wyner | surrogate");
  gen->add_option("--m", gen_m, "number of examples");
  gen->add_option("--n", gen_n, "number of features (random/surrogate)");
  gen->add_option("--seed", gen_seed, "rng seed");
  gen->add_option("--noise", gen_noise, "label noise rate in [0, 0.5)");
  gen->add_option("--density", gen_density, "feature density (surrogate)");
  gen->add_option("--positive-fraction", gen_posfrac, "positive class fraction (surrogate)");
  gen->add_option("--out", gen_out, "output libsvm file")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "fit polynomial loss coefficients");
  std::string fit_loss, fit_data, fit_out;
  Real fit_lambda2 = 0.0, fit_omega = 0.0;
  fit->add_option("--loss", fit_loss, "cubic | cubic-direct | sixth")->required();
  fit->add_option("--lambda2", fit_lambda2, "l2 regularization strength")->required();
  fit->add_option("--omega", fit_omega, "sixth-order coefficient (sixth loss)");
  fit->add_option("--data", fit_data, "libsvm input")->required();
  fit->add_option("--out", fit_out, "output coefficients json")->required();

  // compile
  auto* compile = app.add_subcommand("compile", "compile the regularized risk to a pubo");
  std::string comp_coeffs, comp_data, comp_out;
  int comp_bits = 2;
  Real comp_zeta = 1.0, comp_l0 = 0.0, comp_phi = 0.0;
  compile->add_option("--coeffs", comp_coeffs, "coefficients json")->required();
  compile->add_option("--data", comp_data, "libsvm input")->required();
  compile->add_option("--bits", comp_bits, "bit depth d")->required();
  compile->add_option("--zeta", comp_zeta, "weight scale")->required();
  auto* l0_opt = compile->add_option("--l0", comp_l0, "l0 regularization weight");
  compile->add_option("--phi", comp_phi, "l0 indicator penalty (> l0)")->needs(l0_opt);
  compile->add_option("--out", comp_out, "output pubo file")->required();

  // qubits
  auto* qubits = app.add_subcommand("qubits", "estimate qubit requirements (cubic loss)");
  int qn = 0, qd = 1;
  qubits->add_option("--n", qn, "number of features")->required();
  qubits->add_option("--d", qd, "bit depth")->required();

  // solve
  auto* solve = app.add_subcommand("solve", "minimize a compiled pubo");
  std::string sol_model, sol_method = "exact", sol_out;
  int sol_topk = 50, sol_sweeps = 1000, sol_restarts = 100;
  std::uint64_t sol_seed = 0;
  solve->add_option("--model", sol_model, "pubo file")->required();
  solve->add_option("--method", sol_method, "exact | sa");
  solve->add_option("--topk", sol_topk, "number of lowest states to keep");
  solve->add_option("--sweeps", sol_sweeps, "sa sweeps per restart");
  solve->add_option("--restarts", sol_restarts, "sa restarts");
  solve->add_option("--seed", sol_seed, "sa rng seed");
  solve->add_option("--out", sol_out, "output states json")->required();

  // exp
  auto* exp = app.add_subcommand("exp", "run a study from a config file");
  exp->require_subcommand(1);
  std::string exp_config, exp_out_dir;
  std::vector<CLI::App*> studies;
  for (const char* name : {"fig2", "cv", "correlation", "convergence"})
    studies.push_back(exp->add_subcommand(name, std::string("run the ") + name + " study"));
  for (CLI::App* s : studies) {
    s->add_option("--config", exp_config, "experiment config json")->required();
    s->add_option("--out-dir", exp_out_dir, "output directory")->required();
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return run_data_gen(gen_kind, gen_m, gen_n, gen_seed, gen_noise, gen_density,
                          gen_posfrac, gen_out);
    if (fit->parsed()) return run_fit(fit_loss, fit_lambda2, fit_omega, fit_data, fit_out);
    if (compile->parsed())
      return run_compile(comp_coeffs, comp_data, comp_bits, comp_zeta, comp_l0, comp_phi,
                         l0_opt->count() > 0, comp_out);
    if (qubits->parsed()) return run_qubits(qn, qd);
    if (solve->parsed())
      return run_solve(sol_model, sol_method, sol_topk, sol_sweeps, sol_restarts, sol_seed,
                       sol_out);
    if (exp->parsed())
      for (CLI::App* s : studies)
        if (s->parsed()) return run_exp(s->get_name(), exp_config, exp_out_dir);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

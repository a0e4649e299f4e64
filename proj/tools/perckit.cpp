#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "perckit/perckit.hpp"

using nlohmann::json;

namespace {

void print15(double v) { std::printf("%.15g\n", v); }

std::vector<double> read_reals(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw perckit::io_error("cannot open " + path);
  std::vector<double> v{std::istream_iterator<double>(in), std::istream_iterator<double>()};
  if (!in.eof()) throw std::invalid_argument(path + ": not a whitespace-separated list of numbers");
  return v;
}

json pak_json(const perckit::PakResult& r) {
  return {{"value", r.value}, {"log_value", r.log_value}, {"error_bound", r.error_bound}, {"terms", r.terms}};
}

json report_json(const perckit::GrowthReport& r) {
  json cx = json::array();
  for (const auto& v : r.counterexamples) {
    cx.push_back({{"event", v.event}, {"params", v.params}, {"trial", v.trial}, {"q", v.q}, {"snapshot", v.snapshot}});
  }
  return {{"k", r.k},
          {"model", perckit::to_string(r.variant)},
          {"dk", {{"trials", r.dk_trials}, {"violations", r.dk_violations}}},
          {"jk", {{"trials", r.jk_trials}, {"violations", r.jk_violations}}},
          {"chain", {{"trials", r.chain_trials}, {"violations", r.chain_violations}}},
          {"violations", r.violations()},
          {"ok", r.ok()},
          {"counterexamples", cx}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"perckit: k-percolation growth, k-gap sequences and partition identities"};
  app.require_subcommand(1);

  // fk / gk / lambda / hk-scan
  int k = 2;
  std::vector<double> xs;
  auto* fk = app.add_subcommand("fk", "f_k(x), the root of f^k - f^{k+1} = x^k - x^{k+1} other than x");
  fk->add_option("--k", k, "k >= 1")->required();
  fk->add_option("--x", xs, "points in [0,1]")->required();

  bool deriv = false;
  auto* gk = app.add_subcommand("gk", "g_k(z) = -log f_k(e^{-z})");
  gk->add_option("--k", k)->required();
  gk->add_option("--z", xs, "points z > 0")->required();
  gk->add_flag("--derivative", deriv, "print g_k'(z) instead");

  std::vector<int> ks;
  bool integrate = false;
  auto* lam = app.add_subcommand("lambda", "lambda_k = pi^2 / (3k(k+1))");
  lam->add_option("--k", ks)->required();
  lam->add_flag("--integrate", integrate, "print the numerical integral of g_k instead");

  std::size_t count = 1000;
  std::optional<std::uint64_t> seed;
  bool tilde = false;
  auto* hks = app.add_subcommand("hk-scan", "H_k (or the decoupled H~_k) on random increasing tuples");
  hks->add_option("--k", k)->required();
  hks->add_option("--count", count, "number of tuples");
  hks->add_option("--seed", seed)->required();
  hks->add_flag("--tilde", tilde, "evaluate H~_k on 2k-1 arguments");

  // rho / pak
  std::string u_file;
  double s = 0.1;
  std::size_t n = 100;
  double tol = 1e-12;
  auto* rho = app.add_subcommand("rho", "probability of no k-gap among the first n events");
  rho->add_option("--k", k)->required();
  auto* uf = rho->add_option("--u-file", u_file, "file of probabilities u_1..u_n");
  auto* so = rho->add_option("--s", s, "u_i = 1 - e^{-is}");
  auto* no = rho->add_option("--n", n);
  uf->excludes(so)->excludes(no);
  so->needs(no);

  auto* pak = app.add_subcommand("pak", "P(A_k) for u_i = 1 - e^{-is}, with a rigorous error bound");
  pak->add_option("--k", k)->required();
  pak->add_option("--s", s)->required();
  pak->add_option("--tol", tol);

  // partitions / chi-identity
  std::size_t N = 50;
  bool andrews = false;
  auto* parts = app.add_subcommand("partitions", "p_k(n): partitions of n without k consecutive part sizes");
  parts->add_option("--k", k)->required();
  parts->add_option("--N", N)->required();
  parts->add_flag("--andrews-check", andrews, "also compare with the double series; nonzero exit on mismatch");

  auto* chi = app.add_subcommand("chi-identity", "checks G_2(q) against the mock theta product to order N");
  chi->add_option("--N", N)->required();

  // simulate
  std::string model = "local";
  double q = 0.5;
  int L = 64;
  std::string snapshot;
  bool binary = false;
  auto* sim = app.add_subcommand("simulate", "one lattice run to its fixpoint");
  sim->add_option("--model", model, "global|local|modified|frobose");
  sim->add_option("--k", k);
  sim->add_option("--q", q, "probability that a cell is empty")->required();
  sim->add_option("--L", L)->required();
  sim->add_option("--seed", seed)->required();
  sim->add_option("--snapshot", snapshot, "write the final lattice here");
  sim->add_flag("--binary", binary, "binary snapshot instead of text");

  // events
  auto* ev = app.add_subcommand("events", "growth events D_k, J_k and E_k");
  ev->require_subcommand(1);
  std::uint64_t trials = 500;
  std::optional<std::string> ev_model;
  auto* ver = ev->add_subcommand("verify", "random check that the events force growth");
  ver->add_option("--k", k)->required();
  ver->add_option("--trials", trials);
  ver->add_option("--seed", seed)->required();
  ver->add_option("--model", ev_model, "override the growth model");
  int a = 4, b = 9;
  std::string kind = "dk";
  auto* prob = ev->add_subcommand("prob", "exact event probability and its product bound");
  prob->add_option("--k", k)->required();
  prob->add_option("--a", a)->required();
  prob->add_option("--b", b)->required();
  prob->add_option("--q", q)->required();
  prob->add_option("--kind", kind)->check(CLI::IsMember({"dk", "jk"}));

  // scan
  std::string config_path;
  perckit::ExperimentConfig cfg;
  std::vector<int> l_values;
  std::vector<double> q_values, s_values;
  std::string format;
  auto* scan = app.add_subcommand("scan", "boundary-reaching frequency over a (k, q, L) grid");
  scan->add_option("--config", config_path, "JSON config; flags override its fields");
  scan->add_option("--model", model);
  scan->add_option("--k", ks);
  scan->add_option("--q", q_values);
  scan->add_option("--s", s_values);
  scan->add_option("--L", l_values);
  scan->add_option("--trials", trials);
  scan->add_option("--seed", seed);
  scan->add_option("--output", cfg.output);
  scan->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
  scan->add_flag("--crn", cfg.common_random_numbers, "share trial streams across points");
  unsigned workers = 0;
  scan->add_option("--workers", workers);

  // trend
  auto* trend = app.add_subcommand("trend", "fit log P(reach boundary) against 1/s");
  trend->add_option("--k", k)->required();
  trend->add_option("--s", s_values, "strictly decreasing")->required();
  trend->add_option("--trials", trials);
  trend->add_option("--seed", seed)->required();
  trend->add_option("--model", ev_model);
  trend->add_option("--workers", workers);

  // sweep-pak
  auto* sweep = app.add_subcommand("sweep-pak", "P(A_k) against its lower and upper bounds");
  sweep->add_option("--k", ks)->required();
  sweep->add_option("--s", s_values)->required();
  sweep->add_option("--tol", tol);
  sweep->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fk) {
      const perckit::FkEvaluator e(k);
      for (double x : xs) print15(e.f(x));
    } else if (*gk) {
      const perckit::FkEvaluator e(k);
      for (double z : xs) print15(deriv ? e.g_derivative(z) : e.g(z));
    } else if (*lam) {
      for (int kk : ks) print15(integrate ? perckit::integrate_gk(kk).value : perckit::lambda_k(kk));
    } else if (*hks) {
      const perckit::FkEvaluator e(k);
      const std::size_t dim = tilde ? 2 * static_cast<std::size_t>(k) - 1 : static_cast<std::size_t>(k);
      std::vector<double> y(dim);
      for (std::size_t i = 0; i < count; ++i) {
        perckit::CounterRng rng(perckit::derive_seed(*seed, i));
        for (auto& v : y) v = rng.uniform();
        std::sort(y.begin(), y.end());
        print15(tilde ? e.H_tilde(y) : e.H(y));
      }
    } else if (*rho) {
      if (u_file.empty() && so->count() == 0) throw std::invalid_argument("rho: give --u-file or --s with --n");
      const auto p = u_file.empty() ? perckit::GapProcess::exponential(k, s)
                                    : perckit::GapProcess::explicit_probabilities(k, read_reals(u_file));
      if (!u_file.empty()) n = read_reals(u_file).size();
      const auto t = perckit::rho_exact(p, n);
      std::cout << json{{"value", t.values.back()}, {"log_value", t.log_values.back()}, {"error_bound", 0.0}}.dump()
                << '\n';
    } else if (*pak) {
      std::cout << pak_json(perckit::prob_ak(k, s, tol)).dump() << '\n';
    } else if (*parts) {
      const auto t = perckit::partition_no_ksequences(k, N);
      for (std::size_t i = 0; i <= N; ++i) std::cout << i << ',' << t[i] << '\n';
      if (andrews && perckit::andrews_gk_series(k, N) != t.series()) {
        std::cerr << "perckit: double series disagrees with p_" << k << "(n)\n";
        return 1;
      }
    } else if (*chi) {
      const bool ok = perckit::chi_product_g2(N) == perckit::partition_no_ksequences(2, N).series();
      std::cout << (ok ? "ok" : "mismatch") << '\n';
      return ok ? 0 : 1;
    } else if (*sim) {
      const auto v = perckit::parse_variant(model);
      if (v == perckit::ModelVariant::kLocalModified || v == perckit::ModelVariant::kLocalFrobose) k = 1;
      const auto spec = perckit::ModelSpec::make(v, k, q);
      const auto r = perckit::run_to_fixpoint(perckit::sample_initial(spec, L, L, *seed, spec.is_local()), spec);
      json out{{"model", perckit::to_string(v)}, {"k", k},          {"q", q},
               {"L", L},                         {"seed", *seed},   {"steps", r.steps},
               {"converged", r.converged},       {"active", r.lattice.count(perckit::CellState::kActive)}};
      if (r.converged) {
        if (spec.is_local()) {
          out["reaches_boundary"] = perckit::reaches_boundary(r, spec);
        } else {
          out["spans"] = perckit::spans(r);
        }
      }
      if (!snapshot.empty()) {
        std::ofstream f(snapshot, std::ios::binary);
        if (!f) throw perckit::io_error("cannot open " + snapshot);
        if (binary) {
          perckit::write_binary(f, r.lattice);
        } else {
          f << perckit::to_text(r.lattice);
        }
        if (!f) throw perckit::io_error("write failed for " + snapshot);
      }
      std::cout << out.dump() << '\n';
    } else if (*ver) {
      std::optional<perckit::ModelVariant> v;
      if (ev_model) v = perckit::parse_variant(*ev_model);
      std::cout << report_json(perckit::verify_growth_guarantee(k, trials, *seed, v)).dump(2) << '\n';
    } else if (*prob) {
      const double sv = -std::log(q);
      json out{{"k", k}, {"a", a}, {"b", b}, {"q", q}, {"kind", kind}};
      if (kind == "dk") {
        const perckit::StairGeometry g(k, a, b);
        out["probability"] = perckit::prob_dk(g, q);
        out["product_bound"] = perckit::prob_dk_lower_bound(g, sv);
      } else {
        const perckit::SkewGeometry g(k, a, b);
        out["probability"] = perckit::prob_jk(g, q);
        out["product_bound"] = perckit::prob_jk_product_bound(g, sv);
      }
      std::cout << out.dump() << '\n';
    } else if (*scan) {
      if (!config_path.empty()) {
        const std::string out = cfg.output;
        const bool crn = cfg.common_random_numbers;
        cfg = perckit::ExperimentConfig::load(config_path);
        if (!out.empty()) cfg.output = out;
        cfg.common_random_numbers = cfg.common_random_numbers || crn;
      }
      if (scan->count("--model")) cfg.variant = perckit::parse_variant(model);
      if (!ks.empty()) cfg.k_values = ks;
      if (!q_values.empty()) {
        cfg.q_values = q_values;
        cfg.s_values.clear();
      }
      if (!s_values.empty()) {
        cfg.s_values = s_values;
        cfg.q_values.clear();
      }
      if (!l_values.empty()) cfg.l_values = l_values;
      if (scan->count("--trials")) cfg.trials = trials;
      if (seed) cfg.seed = seed;
      if (!format.empty()) cfg.format = perckit::parse_format(format);
      if (scan->count("--workers")) cfg.workers = workers;
      if (!cfg.seed) throw std::invalid_argument("scan: --seed is required (flag or config field)");
      perckit::write_results(cfg, perckit::scan_threshold(cfg), std::cout);
    } else if (*trend) {
      std::optional<perckit::ModelVariant> v;
      if (ev_model) v = perckit::parse_variant(*ev_model);
      const auto r = perckit::trend_check_theorem1(k, s_values, trials, *seed, v, perckit::default_l_rule, workers);
      std::cout << perckit::to_json(r).dump(2) << '\n';
    } else if (*sweep) {
      const auto rows = perckit::sweep_pak_bounds(ks, s_values, tol);
      if (format == "json") {
        json arr = json::array();
        for (const auto& r : rows) arr.push_back(perckit::to_json(r));
        std::cout << arr.dump(2) << '\n';
      } else {
        std::cout << "k,s,value,error_bound,lower,upper,inside,ratio_to_upper,product\n";
        for (const auto& r : rows) {
          std::printf("%d,%.15g,%.15g,%.3g,%.15g,%.15g,%d,%.15g,", r.k, r.s, r.pak.value, r.pak.error_bound,
                      r.bounds.lower, r.bounds.upper, r.inside ? 1 : 0, r.ratio_to_upper);
          if (r.product) std::printf("%.15g", *r.product);
          std::printf("\n");
        }
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "perckit: error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

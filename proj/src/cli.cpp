#include "degen/cli.hpp"

#include <omp.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "degen/acceptance.hpp"
#include "degen/analysis.hpp"
#include "degen/barriers.hpp"
#include "degen/config.hpp"
#include "degen/expr.hpp"
#include "degen/manufactured.hpp"
#include "degen/operator.hpp"
#include "degen/solver.hpp"

namespace degen {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config;
  std::string out = "degen-out";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  bool quiet = false;
  std::string scope;
  double exponent = 0.5;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// A verification stage reported FAIL.
struct VerificationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Runner {
 public:
  explicit Runner(Options opt) : opt_(std::move(opt)) {}

  int indicial();
  int manufacture();
  int solve();
  int analyze();
  int barrier();
  int full_verify();

 private:
  ProblemConfig load(bool require_problem = true) {
    if (opt_.config.empty()) throw ConfigError("--config is required for this command");
    ProblemConfig cfg = load_config(opt_.config, require_problem);
    if (opt_.seed) cfg.seed = *opt_.seed;
    if (opt_.mode) {
      try {
        cfg.solve.mode = solve_mode_from_string(*opt_.mode);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
    return cfg;
  }

  fs::path out_dir() {
    fs::create_directories(opt_.out);
    return opt_.out;
  }

  void write_json(const std::string& name, const nlohmann::json& j) {
    std::ofstream os(out_dir() / name);
    os << j.dump(2) << '\n';
    if (!os) throw std::runtime_error("cannot write " + (fs::path(opt_.out) / name).string());
  }

  void write_field(const std::string& name, const ScalarField& f) {
    std::ofstream os(out_dir() / name);
    write_field_csv(os, f);
  }

  void say(const std::string& line) {
    if (!opt_.quiet) std::cout << line << '\n';
  }

  Solution solve_problem(const ProblemConfig& cfg, const Problem& p) {
    return degen::solve(p.coeffs, p.f, p.boundary, cfg.solve);
  }

  Options opt_;
};

int Runner::indicial() {
  if (opt_.scope != "boundary" && opt_.scope != "domain")
    throw ConfigError("--scope must be 'boundary' (roots of P on t = 0) or 'domain' (margins of Q)");
  const ProblemConfig cfg = load();
  const Problem p = build_problem(cfg);
  const CharacteristicReport rep = verify_conditions(p.coeffs, *p.grid, opt_.exponent);
  const int n = p.grid->dim();
  nlohmann::json j = rep.to_json(n);
  j["operation"] = "indicial";
  j["scope"] = opt_.scope;
  if (opt_.scope == "boundary") {
    nlohmann::json roots = nlohmann::json::array();
    for (const auto& s : rep.boundary) {
      nlohmann::json r{{"x", std::vector<double>(s.point.begin(), s.point.begin() + n - 1)},
                       {"c", s.c}};
      if (s.roots) {
        r["mu_minus"] = s.roots->minus;
        r["mu_plus"] = s.roots->plus;
      } else {
        r["mu_minus"] = nullptr;
        r["mu_plus"] = nullptr;
      }
      roots.push_back(r);
    }
    j["roots"] = roots;
    for (const char* k : {"c_exponent", "worst_q_point"}) j.erase(k);
  }
  write_json("indicial.json", j);
  if (opt_.scope == "boundary" && j.contains("mu_plus_range")) {
    say("mu_minus in [" + j["mu_minus_range"][0].dump() + ", " + j["mu_minus_range"][1].dump() +
        "], mu_plus in [" + j["mu_plus_range"][0].dump() + ", " + j["mu_plus_range"][1].dump() +
        "] over " + std::to_string(rep.boundary.size()) + " boundary nodes");
  }
  say("c0 = " + num(rep.c0) +
      (opt_.scope == "domain" ? ", c_" + num(opt_.exponent) + " = -sup Q = " +
                                    num(rep.c_exponent)
                              : ""));
  const bool ok = opt_.scope == "boundary" ? rep.c0 > 0.0 && j["root_failures"] == 0
                                           : rep.passed();
  if (!ok) throw VerificationFailure("structural conditions fail; see indicial.json");
  return kExitOk;
}

int Runner::manufacture() {
  const ProblemConfig cfg = load();
  if (!cfg.manufactured) throw ConfigError("manufacture needs a [manufactured] table");
  const Problem p = build_problem(cfg);
  const ManufacturedCase& mc = *p.manufactured;
  if (std::abs(mc.root_residual()) > 1e-12)
    throw VerificationFailure("root condition violated: Q(s) = " + num(mc.root_residual()));
  write_field("u.csv", *p.exact);
  write_field("f.csv", p.f);
  nlohmann::json d = mc.descriptor();
  d["grid"] = p.grid->to_json();
  write_json("descriptor.json", d);
  for (const auto& w : mc.warnings()) say("warning: " + w);
  say("wrote u.csv, f.csv, descriptor.json to " + opt_.out);
  return kExitOk;
}

int Runner::solve() {
  const ProblemConfig cfg = load();
  const Problem p = build_problem(cfg);
  const Solution sol = solve_problem(cfg, p);
  const ScalarField res = residual(p.coeffs, sol.u, p.f);
  write_field("solution.csv", sol.u);
  write_field("residual.csv", res);
  nlohmann::json j = sol.report.to_json();
  j["operation"] = "solve";
  j["grid"] = p.grid->to_json();
  j["max_residual"] = res.max_abs();
  if (p.exact) {
    double err = 0.0;
    for (std::size_t k = 0; k < sol.u.size(); ++k)
      err = std::max(err, std::abs(sol.u[k] - (*p.exact)[k]));
    j["max_error_vs_exact"] = err;
    say("max error vs exact solution " + num(err));
  }
  write_json("report.json", j);
  say(std::string("mode ") + to_string(cfg.solve.mode) + ", " +
      std::to_string(sol.report.steps.size()) + " step(s), sup bound " +
      (sol.report.sup_bound_respected ? "held" : "VIOLATED"));
  if (sol.report.mode_agreement_gap)
    say("mode agreement gap " + num(*sol.report.mode_agreement_gap));
  if (!sol.report.converged) say("warning: continuation stop tolerance not reached");
  return kExitOk;
}

int Runner::analyze() {
  const ProblemConfig cfg = load();
  const Problem p = build_problem(cfg);
  const AnalysisConfig& a = cfg.analysis;
  ScalarField u = [&] {
    if (a.u_file) {
      std::ifstream in(*a.u_file);
      try {
        return read_field_csv(in, p.grid);
      } catch (const std::exception& e) {
        throw ConfigError("analysis.u_file: " + std::string(e.what()));
      }
    }
    return solve_problem(cfg, p).u;
  }();
  std::vector<std::string> ops = a.operations;
  if (ops.empty()) ops = {"fit_boundary_decay", "weighted_derivative_decay"};
  const int n = p.grid->dim();
  const Point anchor = a.anchor;
  nlohmann::json records = nlohmann::json::object();
  auto profile = [&](const std::string& name, const DecayFit& fit) {
    std::ofstream os(out_dir() / ("profile_" + name + ".csv"));
    write_profile_csv(os, fit.t, fit.values);
  };
  for (const auto& op : ops) {
    if (op == "fit_boundary_decay") {
      std::optional<double> u0;
      if (p.manufactured) u0 = p.manufactured->u0(anchor);
      const DecayFit fit = fit_boundary_decay(u, anchor, u0, a.window);
      records[op] = fit.to_json();
      profile(op, fit);
      say(op + ": exponent " + (fit.exact ? "exact" : num(fit.exponent)) +
          ", R^2 " + num(fit.r_squared));
    } else if (op == "weighted_derivative_decay") {
      const WeightedDecay wd = weighted_derivative_decay(u, anchor, a.window);
      records[op] = wd.to_json();
      profile("t_Du", wd.gradient);
      profile("t2_D2u", wd.hessian);
      say(op + ": t|Du| exponent " + num(wd.gradient.exponent) +
          ", t^2|D^2u| exponent " + num(wd.hessian.exponent));
    } else if (op == "holder_seminorm") {
      const Region r = a.inner.value_or(Region::whole(*p.grid));
      const HolderEstimate h = holder_seminorm(u, a.alpha, r, a.sample_pairs, cfg.seed);
      records[op] = h.to_json(n);
      say(op + ": >= " + num(h.value));
    } else if (op == "weighted_norm") {
      const WeightedNorm w = weighted_norm_C_k_alpha_2(u, a.k, a.alpha, a.sample_pairs, cfg.seed);
      records[op] = w.to_json();
      say(op + ": >= " + num(w.value));
    } else if (op == "normal_trace_check") {
      const NormalTraceCheck nt = normal_trace_check(p.coeffs, u, p.f);
      records[op] = nt.to_json(n);
      say(op + ": max discrepancy " + num(nt.max_discrepancy));
    } else if (op == "tangential_bound_check") {
      Region r;
      if (a.inner) {
        r = *a.inner;
      } else {
        r = Region::whole(*p.grid);
        for (int k = 0; k < n - 1; ++k) {
          r.lo[k] = -0.5;
          r.hi[k] = 0.5;
        }
        r.hi[n - 1] = 0.5;
      }
      const TangentialBound tb = tangential_bound_check(u, r);
      records[op] = tb.to_json(n);
      say(op + ": sup |D_x' u| " + num(tb.sup));
    } else if (op == "detect_log_factor") {
      double s = 0.0;
      if (a.s)
        s = *a.s;
      else if (p.manufactured)
        s = p.manufactured->s();
      else
        throw ConfigError("detect_log_factor needs analysis.s");
      const LogFactor lf = detect_log_factor(u, anchor, s, a.window);
      records[op] = lf.to_json();
      say(op + ": slope " + num(lf.slope) + ", R^2 " + num(lf.r_squared) +
          ", verdict " + lf.verdict);
    }
  }
  write_json("analysis.json", records);
  return kExitOk;
}

int Runner::barrier() {
  const ProblemConfig cfg = load();
  const Problem p = build_problem(cfg);
  const BarrierConfig b = cfg.barrier.value_or(BarrierConfig{});
  const BarrierSpec spec = construct_barrier(p.coeffs, *p.grid, b.sigma, b.mu);
  const auto sample = barrier_sample(p.grid->dim(), b.tangential, b.levels, b.t_min);
  const BarrierCertificate cert = verify_barrier(p.coeffs, spec, sample);
  nlohmann::json j = cert.to_json();
  j["spec"] = spec.to_json();
  write_json("barrier.json", j);
  say(std::string(cert.passed ? "PASS" : "FAIL") + ": worst ratio " +
      num(cert.worst_ratio) + " vs threshold " + num(cert.threshold) +
      " over " + std::to_string(cert.sample_size) + " points");
  if (!cert.passed) throw VerificationFailure("barrier certificate FAIL");
  return kExitOk;
}

int Runner::full_verify() {
  AcceptanceTolerances tol;
  std::uint64_t seed = opt_.seed.value_or(0);
  if (!opt_.config.empty()) {
    const nlohmann::json raw = load_toml(opt_.config);
    if (raw.empty()) throw ConfigError("empty config; omit --config to run with the defaults");
    const ProblemConfig cfg = ProblemConfig::from_json(raw, fs::path(opt_.config).parent_path(), false);
    if (!opt_.seed) seed = cfg.seed;
    try {
      tol = AcceptanceTolerances::from_overrides(cfg.acceptance);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("acceptance: ") + e.what());
    }
  }
  const auto results =
      run_acceptance(tol, seed, [&](const CriterionResult& r) { say(format_result(r)); });
  nlohmann::json summary{{"operation", "full_verify"}, {"seed", seed},
                         {"tolerances", tol.to_json()}};
  nlohmann::json rows = nlohmann::json::array();
  bool all = true;
  for (const auto& r : results) {
    all = all && r.passed;
    rows.push_back({{"id", r.id},
                    {"name", r.name},
                    {"status", r.passed ? "PASS" : "FAIL"},
                    {"seconds", r.seconds},
                    {"detail", r.detail},
                    {"metrics", r.metrics}});
  }
  summary["criteria"] = rows;
  summary["status"] = all ? "PASS" : "FAIL";
  write_json("summary.json", summary);
  if (!all) throw VerificationFailure("acceptance suite has failing criteria");
  return kExitOk;
}

void apply_thread_env() {
  if (const char* env = std::getenv("DEGEN_NUM_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 1) throw ConfigError("DEGEN_NUM_THREADS must be a positive integer");
    omp_set_num_threads(static_cast<int>(n));
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Degenerate elliptic Dirichlet problems on the half-cube: solve, verify, analyze."};
  app.footer(
      "Expressions: variables x1 [x2] t, functions sin cos exp log sqrt abs, constant pi.\n"
      "^ binds tightest and is right-associative: 2^3^2 = 512, -t^2 = -(t^2).\n"
      "Exit codes: 0 ok, 1 verification failure, 2 configuration error, 3 numerical failure.\n"
      "DEGEN_NUM_THREADS sets the OpenMP thread count.");
  app.require_subcommand(1);
  Options opt;
  app.add_option("--config", opt.config, "TOML problem file");
  app.add_option("--out", opt.out, "output directory")->capture_default_str();
  app.add_option("--seed", opt.seed, "sampling seed (overrides the config)");
  app.add_option("--mode", opt.mode, "solve mode")
      ->check(CLI::IsMember({"direct", "continuation", "both"}));
  app.add_flag("--quiet", opt.quiet, "suppress console output");

  auto* ind = app.add_subcommand("indicial", "characteristic roots and margins");
  ind->add_option("--scope", opt.scope, "boundary: roots of P on t = 0; domain: margins of Q")
      ->required()
      ->check(CLI::IsMember({"boundary", "domain"}));
  ind->add_option("--exponent", opt.exponent, "exponent at which Q is checked (> 0)")
      ->capture_default_str();
  auto* man = app.add_subcommand("manufacture", "emit a manufactured (u, f) pair");
  auto* sol = app.add_subcommand("solve", "solve the Dirichlet problem");
  auto* ana = app.add_subcommand("analyze", "decay fits and regularity checks");
  auto* bar = app.add_subcommand("barrier", "construct and certify a barrier");
  auto* full = app.add_subcommand("full-verify", "run the acceptance suite");
  for (auto* sub : {ind, man, sol, ana, bar, full}) sub->fallthrough();

  std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  Runner run(opt);
  try {
    apply_thread_env();
    if (*ind) return run.indicial();
    if (*man) return run.manufacture();
    if (*sol) return run.solve();
    if (*ana) return run.analyze();
    if (*bar) return run.barrier();
    if (*full) return run.full_verify();
  } catch (const VerificationFailure& e) {
    std::cerr << "verification failure: " << e.what() << '\n';
    return kExitVerificationFailure;
  } catch (const ConditionError& e) {
    std::cerr << "condition failure: " << e.what() << '\n';
    return kExitVerificationFailure;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const GridError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumericalFailure;
  }
  return kExitConfigError;
}

}  // namespace degen

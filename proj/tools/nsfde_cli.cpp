// Batch front door: sample fBm paths, certify the Wiener-integral and
// Bihari bounds, validate scenario hypotheses, and run the Picard solver.
// Exit codes: 0 all certifications pass, 1 a certification failed,
// 2 usage/config error, 3 numeric failure.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nsfde/bihari.hpp"
#include "nsfde/csv.hpp"
#include "nsfde/errors.hpp"
#include "nsfde/fbm.hpp"
#include "nsfde/hilbert.hpp"
#include "nsfde/report.hpp"
#include "nsfde/scenario.hpp"
#include "nsfde/solver.hpp"
#include "nsfde/stats.hpp"
#include "nsfde/wiener.hpp"

namespace {

using namespace nsfde;

struct FbmSampleOpts {
  double hurst = 0.75;
  double t_end = 1.0;
  int steps = 64;
  int paths = 100;
  std::uint64_t seed = 1;
  std::string out;
  bool volterra = false;
  bool no_timestamp = false;
};

int run_fbm_sample(const FbmSampleOpts& o) {
  const fbm::Hurst h(o.hurst);
  const TimeGrid grid(o.t_end, o.steps);
  const auto paths = o.volterra
                         ? fbm::sample_volterra(grid, h, o.paths, o.seed)
                         : fbm::sample_cholesky(fbm::CovMatrix::build(grid, h), o.paths, o.seed);
  csv::Writer w(o.out, "path_id,t,value", !o.no_timestamp);
  for (int p = 0; p < static_cast<int>(paths.size()); ++p)
    for (int k = 0; k < grid.n_nodes(); ++k) {
      w.field(p);
      w.field(grid.node(k));
      w.field(paths[p].values[k]);
      w.endrow();
    }
  std::cout << "wrote " << paths.size() << " paths to " << o.out << "\n";
  return 0;
}

int run_fbm_verify_cov(const FbmSampleOpts& o) {
  const fbm::Hurst h(o.hurst);
  const TimeGrid grid(o.t_end, o.steps);
  const fbm::CovMatrix cov = fbm::CovMatrix::build(grid, h);
  const auto paths = fbm::sample_cholesky(cov, o.paths, o.seed);

  csv::Writer w(o.out, "i,j,t_i,t_j,r_true,c_hat,se_jack,abs_err,z_score", !o.no_timestamp);
  std::vector<double> prod(paths.size());
  bool all_pass = true;
  for (int i = 0; i < cov.size(); ++i) {
    for (int j = i; j < cov.size(); ++j) {
      for (std::size_t p = 0; p < paths.size(); ++p)
        prod[p] = paths[p].values[i + 1] * paths[p].values[j + 1];
      const double est = stats::mean(prod);
      const double se = stats::jackknife_se(prod);
      const double err = std::abs(est - cov.at(i, j));
      const double z = se > 0.0 ? err / se : 0.0;
      if (z > 5.0) all_pass = false;
      w.field(i + 1);
      w.field(j + 1);
      w.field(grid.node(i + 1));
      w.field(grid.node(j + 1));
      w.field(cov.at(i, j));
      w.field(est);
      w.field(se);
      w.field(err);
      w.field(z);
      w.endrow();
    }
  }
  std::cout << (all_pass ? "covariance verification PASS" : "covariance verification FAIL")
            << " (report: " << o.out << ")\n";
  return all_pass ? 0 : 1;
}

struct BoundsOpts {
  std::string which;
  std::string fixtures;
  std::string out;
  bool no_timestamp = false;
};

struct BoundsFixtureConfig {
  std::vector<double> hursts = {0.6, 0.75, 0.9};
  double t_end = 1.0;
  int cells = 12;
  int count = 100;       // lemma1 fixtures per Hurst value
  int op_fixtures = 3;   // lemma2 fixtures per Hurst value
  int n_modes = 4;
  int n_paths = 10000;
  int n_steps = 32;
  std::uint64_t seed = 1;
  double amplitude = 2.0;
};

BoundsFixtureConfig read_fixture_config(const std::string& path) {
  BoundsFixtureConfig cfg;
  if (path.empty()) return cfg;
  auto kv = solver::parse_config_file(path);
  auto take = [&kv](const std::string& key, double fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    const double v = std::stod(it->second);
    kv.erase(it);
    return v;
  };
  cfg.t_end = take("fixtures.t_end", cfg.t_end);
  cfg.cells = static_cast<int>(take("fixtures.cells", cfg.cells));
  cfg.count = static_cast<int>(take("fixtures.count", cfg.count));
  cfg.op_fixtures = static_cast<int>(take("fixtures.op_fixtures", cfg.op_fixtures));
  cfg.n_modes = static_cast<int>(take("fixtures.n_modes", cfg.n_modes));
  cfg.n_paths = static_cast<int>(take("fixtures.n_paths", cfg.n_paths));
  cfg.n_steps = static_cast<int>(take("fixtures.n_steps", cfg.n_steps));
  cfg.seed = static_cast<std::uint64_t>(take("fixtures.seed", static_cast<double>(cfg.seed)));
  cfg.amplitude = take("fixtures.amplitude", cfg.amplitude);
  if (auto it = kv.find("fixtures.hurst"); it != kv.end()) {
    cfg.hursts.clear();
    std::istringstream in(it->second);
    std::string item;
    while (std::getline(in, item, ',')) cfg.hursts.push_back(std::stod(item));
    kv.erase(it);
  }
  if (!kv.empty()) throw ConfigError("fixtures: unknown key '" + kv.begin()->first + "'");
  return cfg;
}

int run_verify_bounds(const BoundsOpts& o) {
  const BoundsFixtureConfig cfg = read_fixture_config(o.fixtures);
  bool all_pass = true;

  if (o.which == "lemma1") {
    csv::Writer w(o.out, "fixture,hurst,lhs_abs_h_norm_sq,rhs_bound,pass", !o.no_timestamp);
    std::mt19937_64 gen(cfg.seed);
    std::uniform_real_distribution<double> u(-cfg.amplitude, cfg.amplitude);
    std::uniform_int_distribution<int> cells(1, cfg.cells);
    int fixture_id = 0;
    for (double hv : cfg.hursts) {
      const fbm::Hurst h(hv);
      for (int c = 0; c < cfg.count; ++c) {
        const int n_cells = cells(gen);
        std::vector<double> breaks(n_cells + 1), vals(n_cells);
        for (int i = 0; i <= n_cells; ++i) breaks[i] = cfg.t_end * i / n_cells;
        for (double& v : vals) v = u(gen);
        const wiener::StepFunction psi(breaks, vals);
        const double lhs = wiener::norm_abs_h_sq(psi, h);
        const double rhs =
            2.0 * hv * std::pow(cfg.t_end, 2.0 * hv - 1.0) * psi.l2_norm_sq();
        const bool pass = lhs <= rhs + 1e-12;
        all_pass = all_pass && pass;
        w.field(fixture_id++);
        w.field(hv);
        w.field(lhs);
        w.field(rhs);
        w.field(std::string(pass ? "PASS" : "FAIL"));
        w.endrow();
      }
    }
  } else if (o.which == "lemma2") {
    csv::Writer w(o.out, "fixture,hurst,lhs,rhs,mc_margin,pass", !o.no_timestamp);
    const TimeGrid grid(cfg.t_end, cfg.n_steps);
    const hilbert::TraceClassQ q = hilbert::TraceClassQ::power_law(cfg.n_modes, 1.0, 2.0);
    std::mt19937_64 gen(cfg.seed);
    std::normal_distribution<double> z(0.0, cfg.amplitude / 2.0);
    int fixture_id = 0;
    for (double hv : cfg.hursts) {
      for (int c = 0; c < cfg.op_fixtures; ++c) {
        std::vector<hilbert::HSOperator> ops;
        for (int j = 0; j < grid.n_steps(); ++j) {
          hilbert::HSOperator op = hilbert::HSOperator::zero(cfg.n_modes);
          for (double& v : op.m) v = z(gen);
          ops.push_back(op);
        }
        const auto cert =
            wiener::lemma2_certify(wiener::OperatorStepFunction(grid, ops), fbm::Hurst(hv), q,
                                   grid.n_steps(), cfg.n_paths, cfg.seed + fixture_id);
        all_pass = all_pass && cert.pass;
        w.field(fixture_id++);
        w.field(hv);
        w.field(cert.lhs);
        w.field(cert.rhs);
        w.field(cert.mc_margin);
        w.field(std::string(cert.pass ? "PASS" : "FAIL"));
        w.endrow();
      }
    }
  } else {
    std::cerr << "unknown --which '" << o.which << "' (expected lemma1 or lemma2)\n";
    return 2;
  }
  std::cout << (all_pass ? "bounds verification PASS" : "bounds verification FAIL")
            << " (report: " << o.out << ")\n";
  return all_pass ? 0 : 1;
}

struct BihariOpts {
  std::string modulus;
  double l = 1.0;
  double delta = 0.1;
  double p = 0.5;
  double scale = 1.0;
  std::string out;
  bool no_timestamp = false;
};

int run_verify_bihari(const BihariOpts& o) {
  bihari::ConcaveModulus mod = bihari::ConcaveModulus::linear(1.0);
  if (o.modulus == "linear")
    mod = bihari::ConcaveModulus::linear(o.l, o.scale);
  else if (o.modulus == "log_splice")
    mod = bihari::ConcaveModulus::log_splice(o.delta, o.scale);
  else if (o.modulus == "power")
    mod = bihari::ConcaveModulus::power(o.p, o.scale);
  else {
    std::cerr << "unknown --modulus '" << o.modulus << "'\n";
    return 2;
  }

  std::vector<bihari::CheckRow> rows = bihari::modulus_check(mod);

  // x0 invariance of the Bihari bound on a fixed curve pair
  {
    const TimeGrid grid(1.0, 16);
    std::vector<double> h(grid.n_nodes()), lam(grid.n_nodes(), 0.8);
    for (int k = 0; k < grid.n_nodes(); ++k) h[k] = 0.2 + 0.1 * grid.node(k);
    const auto a = bihari::bihari_bound(h, lam, mod, 1e-6, grid);
    const auto b = bihari::bihari_bound(h, lam, mod, 1e-3, grid);
    const auto c = bihari::bihari_bound(h, lam, mod, 1.0, grid);
    double worst = 0.0;
    for (int k = 0; k < grid.n_nodes(); ++k)
      worst = std::max({worst, std::abs(a[k] - b[k]), std::abs(b[k] - c[k])});
    rows.push_back({"bihari x0 invariance", worst, 1e-8, 0.0, worst <= 1e-8,
                    "max spread across x0 in {1e-6, 1e-3, 1}"});
  }
  if (o.modulus == "linear") {
    const TimeGrid grid(1.0, 16);
    std::vector<double> h(grid.n_nodes(), 0.5), lam(grid.n_nodes(), 1.0);
    std::vector<double> scaled_lam(lam);
    for (double& v : scaled_lam) v *= o.l * o.scale;
    const auto gron = bihari::gronwall_bound(h, scaled_lam, grid);
    const auto biha = bihari::bihari_bound(h, lam, mod, 1e-3, grid);
    double worst = 0.0;
    for (int k = 0; k < grid.n_nodes(); ++k)
      worst = std::max(worst, std::abs(gron[k] - biha[k]) / gron[k]);
    rows.push_back({"bihari reduces to gronwall", worst, 1e-8, 0.0, worst <= 1e-8,
                    "relative gap for rho(y) = L y"});
  }

  csv::Writer w(o.out, "check,lhs,rhs,pass,note", !o.no_timestamp);
  bool all_pass = true;
  for (const auto& row : rows) {
    all_pass = all_pass && row.pass;
    w.field(row.name);
    w.field(row.lhs);
    w.field(row.rhs);
    w.field(std::string(row.pass ? "PASS" : "FAIL"));
    w.field(row.note);
    w.endrow();
  }
  std::cout << (all_pass ? "bihari verification PASS" : "bihari verification FAIL")
            << " (report: " << o.out << ")\n";
  return all_pass ? 0 : 1;
}

int run_hypotheses(const std::string& scenario_path) {
  const solver::Scenario s = solver::scenario_from_file(scenario_path);
  const auto report = solver::validate_hypotheses(s);
  std::cout << solver::format_hypothesis_table(report);
  return report.hypotheses_pass ? 0 : 1;
}

struct SolveOpts {
  std::string scenario_path;
  std::string out_dir;
  bool print_defaults = false;
  bool force = false;
  bool no_timestamp = false;
  bool has_seed = false;
  std::uint64_t seed = 0;
};

void write_solve_outputs(const solver::Scenario& s, const solver::PicardRun& run,
                         const std::string& out_dir, bool timestamp) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const TimeGrid grid = s.main_grid();
  const auto& rep = run.report;

  {
    csv::Writer w(out_dir + "/iterates.csv", "iter,path,t,mode,value", timestamp);
    const int paths_out = std::min(s.out_paths, s.n_paths);
    for (std::size_t it = 0; it < run.iterates.size(); ++it) {
      const auto& field = run.iterates[it];
      for (int p = 0; p < paths_out; ++p) {
        // phi nodes except t = 0, which the main grid provides
        for (int i = 0; i < run.phi.n_steps; ++i) {
          const double t = run.phi.node(i);
          for (int m = 0; m < field.n_modes(); ++m) {
            w.field(static_cast<int>(it));
            w.field(p);
            w.field(t);
            w.field(m + 1);
            w.field(run.phi.at(i)[m]);
            w.endrow();
          }
        }
        for (int k = 0; k < grid.n_nodes(); ++k)
          for (int m = 0; m < field.n_modes(); ++m) {
            w.field(static_cast<int>(it));
            w.field(p);
            w.field(grid.node(k));
            w.field(m + 1);
            w.field(field.at(p, k)[m]);
            w.endrow();
          }
      }
    }
  }
  {
    csv::Writer w(out_dir + "/moments.csv", "iter,t,m_n,u_of_t", timestamp);
    for (std::size_t it = 0; it < rep.iterate_stats.size(); ++it)
      for (int k = 0; k < grid.n_nodes(); ++k) {
        w.field(static_cast<int>(it));
        w.field(grid.node(k));
        w.field(rep.iterate_stats[it].m[k]);
        w.field(rep.u_curve.empty() ? std::nan("") : rep.u_curve[k]);
        w.endrow();
      }
  }
  {
    csv::Writer w(out_dir + "/cauchy.csv", "iter,t,d", timestamp);
    for (std::size_t it = 1; it < rep.iterate_stats.size(); ++it)
      for (int k = 0; k < grid.n_nodes(); ++k) {
        w.field(static_cast<int>(it));
        w.field(grid.node(k));
        w.field(rep.iterate_stats[it].d[k]);
        w.endrow();
      }
  }
  std::ofstream report_file(out_dir + "/report.txt");
  report_file << solver::format_report(s, rep);
}

int run_solve(const SolveOpts& o) {
  if (o.print_defaults) {
    std::cout << solver::print_default_config();
    return 0;
  }
  if (o.scenario_path.empty()) {
    std::cerr << "solve: --scenario is required (or --print-defaults)\n";
    return 2;
  }
  solver::Scenario s = solver::scenario_from_file(o.scenario_path);
  if (o.has_seed) s.seed = o.seed;
  if (o.force) s.force = true;
  if (o.no_timestamp) s.timestamp = false;
  const std::string out_dir = o.out_dir.empty() ? "." : o.out_dir;

  try {
    const solver::PicardRun run = solver::picard_run(s);
    write_solve_outputs(s, run, out_dir, s.timestamp);
    std::cout << solver::format_report(s, run.report);
    return run.report.all_pass() ? 0 : 1;
  } catch (const HypothesisViolation& e) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::ofstream report_file(out_dir + "/report.txt");
    const auto report = solver::validate_hypotheses(s);
    report_file << "refused: " << e.what() << "\n\n" << solver::format_hypothesis_table(report);
    std::cerr << "refused: " << e.what() << "\n";
    return 1;
  } catch (const solver::ConvergenceFailure& e) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::ofstream report_file(out_dir + "/report.txt");
    report_file << "convergence failure: " << e.what() << "\n\n"
                << solver::format_report(s, e.report());
    std::cerr << "convergence failure: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic numerics for neutral delay equations driven by fractional noise"};
  app.require_subcommand(1);

  FbmSampleOpts fbm_opts;
  CLI::App* fbm_cmd = app.add_subcommand("fbm", "fractional Brownian motion generators");
  fbm_cmd->require_subcommand(1);
  CLI::App* sample = fbm_cmd->add_subcommand("sample", "sample scalar fBm paths to CSV");
  sample->add_option("--hurst", fbm_opts.hurst, "Hurst parameter in (1/2, 1)");
  sample->add_option("--t-end", fbm_opts.t_end, "horizon T");
  sample->add_option("--steps", fbm_opts.steps, "uniform steps");
  sample->add_option("--paths", fbm_opts.paths, "number of paths");
  sample->add_option("--seed", fbm_opts.seed, "RNG seed");
  sample->add_option("--out", fbm_opts.out, "output CSV")->required();
  sample->add_flag("--volterra", fbm_opts.volterra, "use the Volterra cross-check generator");
  sample->add_flag("--no-timestamp", fbm_opts.no_timestamp, "omit the generated-at comment");

  CLI::App* verify_cov =
      fbm_cmd->add_subcommand("verify-cov", "compare sample covariance against R_H");
  verify_cov->add_option("--hurst", fbm_opts.hurst, "Hurst parameter in (1/2, 1)");
  verify_cov->add_option("--t-end", fbm_opts.t_end, "horizon T");
  verify_cov->add_option("--steps", fbm_opts.steps, "uniform steps");
  verify_cov->add_option("--paths", fbm_opts.paths, "number of paths");
  verify_cov->add_option("--seed", fbm_opts.seed, "RNG seed");
  verify_cov->add_option("--out", fbm_opts.out, "output CSV")->required();
  verify_cov->add_flag("--no-timestamp", fbm_opts.no_timestamp, "omit the generated-at comment");

  BoundsOpts bounds_opts;
  BihariOpts bihari_opts;
  CLI::App* verify_cmd = app.add_subcommand("verify", "certify the integral bounds");
  verify_cmd->require_subcommand(1);
  CLI::App* bounds = verify_cmd->add_subcommand("bounds", "Wiener-integral norm bounds");
  bounds->add_option("--which", bounds_opts.which, "lemma1 | lemma2")->required();
  bounds->add_option("--fixtures", bounds_opts.fixtures, "fixture config file (optional)");
  bounds->add_option("--out", bounds_opts.out, "output CSV")->required();
  bounds->add_flag("--no-timestamp", bounds_opts.no_timestamp, "omit the generated-at comment");

  CLI::App* bihari_cmd = verify_cmd->add_subcommand("bihari", "concave-modulus checks");
  bihari_cmd->add_option("--modulus", bihari_opts.modulus, "linear | log_splice | power")
      ->required();
  bihari_cmd->add_option("--L", bihari_opts.l, "linear slope");
  bihari_cmd->add_option("--delta", bihari_opts.delta, "log splice point");
  bihari_cmd->add_option("--p", bihari_opts.p, "power exponent");
  bihari_cmd->add_option("--scale", bihari_opts.scale, "overall scale");
  bihari_cmd->add_option("--out", bihari_opts.out, "output CSV")->required();
  bihari_cmd->add_flag("--no-timestamp", bihari_opts.no_timestamp,
                       "omit the generated-at comment");

  std::string hyp_scenario;
  CLI::App* hyp = app.add_subcommand("hypotheses", "validate (H.1)-(H.4) for a scenario");
  hyp->add_option("--scenario", hyp_scenario, "scenario config file")->required();

  SolveOpts solve_opts;
  CLI::App* solve = app.add_subcommand("solve", "run the Picard solver and certifications");
  solve->add_option("--scenario", solve_opts.scenario_path, "scenario config file");
  solve->add_option("--out-dir", solve_opts.out_dir, "output directory");
  CLI::Option* seed_opt = solve->add_option("--seed", solve_opts.seed, "override scenario seed");
  solve->add_flag("--force", solve_opts.force, "run even if hypothesis validation fails");
  solve->add_flag("--no-timestamp", solve_opts.no_timestamp, "omit generated-at comments");
  solve->add_flag("--print-defaults", solve_opts.print_defaults,
                  "print the default config with schema comments and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (sample->parsed()) return run_fbm_sample(fbm_opts);
    if (verify_cov->parsed()) return run_fbm_verify_cov(fbm_opts);
    if (bounds->parsed()) return run_verify_bounds(bounds_opts);
    if (bihari_cmd->parsed()) return run_verify_bihari(bihari_opts);
    if (hyp->parsed()) return run_hypotheses(hyp_scenario);
    if (solve->parsed()) {
      solve_opts.has_seed = seed_opt->count() > 0;
      return run_solve(solve_opts);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

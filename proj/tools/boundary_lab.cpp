// boundary-lab: command-line front end for simulation, estimation, Monte
// Carlo risk grids, tests, lower-bound certificates and inequality checks.
//
// Exit codes: 0 success, 1 usage or precondition error, 2 validation failure.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "boundary_lab/boundary_lab.hpp"
#include "boundary_lab/io.hpp"

namespace bl = boundary_lab;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;

struct ValidationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  double beta = 1.0;
  double radius = 1.0;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::size_t grid = bl::kDefaultGridSize;
  std::string out;
};

void add_holder(CLI::App* app, Common& c) {
  app->add_option("--beta", c.beta, "Hölder exponent in (0, 1]")->capture_default_str();
  app->add_option("--radius", c.radius, "Hölder radius R > 0")->capture_default_str();
}

void add_seed(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "master seed")->capture_default_str();
}

void add_grid(CLI::App* app, Common& c) {
  app->add_option("--grid", c.grid, "quadrature grid size (>= 2)")->capture_default_str();
}

bl::FunctionalSpec parse_functional(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "power" && !arg.empty()) return bl::FunctionalSpec::power_preset(bl::parse_real(arg, "power"));
  if (head == "exp" && !arg.empty()) return bl::FunctionalSpec::exponential(bl::parse_real(arg, "exp"));
  if (head == "const" && !arg.empty()) return bl::FunctionalSpec::constant(bl::parse_real(arg, "const"));
  throw std::invalid_argument("unknown functional '" + text + "' (power:<p>|exp:<a>|const:<v>)");
}

std::vector<long> parse_ns(const std::string& text) {
  std::vector<long> ns;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    long v = 0;
    try {
      v = std::stol(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != cell.size()) throw std::invalid_argument("--ns: bad entry '" + cell + "'");
    ns.push_back(v);
  }
  return ns;
}

// Resolved configuration of the invoked subcommand chain.
json echo_config(const CLI::App& app) {
  json j;
  for (const CLI::Option* opt : app.get_options()) {
    if (opt->get_name().empty() || opt->get_name() == "--help") continue;
    std::string key = opt->get_name();
    while (!key.empty() && key.front() == '-') key.erase(key.begin());
    if (opt->count() > 0) {
      const auto& res = opt->results();
      j[key] = res.size() == 1 ? json(res.front()) : json(res);
    } else if (!opt->get_default_str().empty()) {
      j[key] = opt->get_default_str();
    } else {
      j[key] = nullptr;
    }
  }
  for (const CLI::App* sub : app.get_subcommands()) j["subcommand"][sub->get_name()] = echo_config(*sub);
  return j;
}

void write_config_sidecar(const CLI::App& root, const std::string& name, const Common& c) {
  json j = echo_config(root);
  j["resolved_threads"] = bl::resolve_threads(c.threads);
  const std::string path =
      c.out.empty() ? "boundary-lab-" + name + ".config.json" : c.out + ".config.json";
  bl::write_json_file(path, j);
}

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

json estimate_json(const bl::EstimateResult& r) {
  return {{"value", r.value},
          {"integral_term", r.integral_term},
          {"sum_term", r.sum_term},
          {"count_on_envelope", r.count_on_envelope},
          {"cap_valid", r.cap_valid}};
}

json fit_json(const bl::RateFit& f) {
  return {{"slope", f.slope},
          {"intercept", f.intercept},
          {"slope_stderr", f.slope_stderr},
          {"target_exponent", f.target_exponent},
          {"within_tolerance", f.within_tolerance}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Poisson point process support-boundary lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "boundary-lab 0.1.0");

  // simulate ---------------------------------------------------------------
  Common sim;
  long sim_n = 100;
  std::string sim_g = "const:0";
  std::optional<double> sim_cap;
  double sim_margin = 0.0;
  auto* simulate = app.add_subcommand("simulate", "draw one PPP sample, write x,y CSV");
  add_holder(simulate, sim);
  add_seed(simulate, sim);
  add_grid(simulate, sim);
  simulate->add_option("--n", sim_n, "intensity scale n")->capture_default_str();
  simulate->add_option("--g", sim_g, "boundary spec")->capture_default_str();
  simulate->add_option("--cap", sim_cap, "truncation ceiling (default max g + 2R + margin)");
  simulate->add_option("--margin", sim_margin, "extra cap margin")->capture_default_str();
  simulate->add_option("--out", sim.out, "output CSV (stdout if absent)");

  // envelope ---------------------------------------------------------------
  Common env_c;
  std::string env_in;
  std::optional<long> env_n;
  auto* envelope = app.add_subcommand("envelope", "evaluate the MLE envelope on a grid");
  add_holder(envelope, env_c);
  add_grid(envelope, env_c);
  envelope->add_option("--in", env_in, "sample CSV")->required();
  envelope->add_option("--n", env_n, "intensity scale (overrides the sidecar)");
  envelope->add_option("--out", env_c.out, "output CSV x,ghat (stdout if absent)");

  // estimate ---------------------------------------------------------------
  Common est_c;
  std::string est_in;
  std::string est_functional = "power:1";
  std::optional<long> est_n;
  auto* estimate = app.add_subcommand("estimate", "estimate F_phi from a sample");
  add_holder(estimate, est_c);
  add_grid(estimate, est_c);
  estimate->add_option("--in", est_in, "sample CSV")->required();
  estimate->add_option("--functional", est_functional, "power:<p> | exp:<a> | const:<v>")
      ->capture_default_str();
  estimate->add_option("--n", est_n, "intensity scale (overrides the sidecar)");

  // mc ---------------------------------------------------------------------
  Common mc_c;
  std::string mc_estimator = "fp";
  double mc_p = 1.0;
  std::string mc_functional;
  std::string mc_g = "const:1";
  std::string mc_ns = "32,64,128,256,512,1024,2048,4096";
  long mc_reps = 2000;
  bool mc_no_var = false;
  auto* mc = app.add_subcommand("mc", "Monte Carlo risk over an n grid");
  add_holder(mc, mc_c);
  add_seed(mc, mc_c);
  add_grid(mc, mc_c);
  mc->add_option("--estimator", mc_estimator, "fphi | fp | that")->capture_default_str();
  mc->add_option("--p", mc_p, "power p >= 1")->capture_default_str();
  mc->add_option("--functional", mc_functional, "phi for fphi (default power:<p>)");
  mc->add_option("--g", mc_g, "boundary spec")->capture_default_str();
  mc->add_option("--ns", mc_ns, "comma-separated increasing n values")->capture_default_str();
  mc->add_option("--reps", mc_reps, "replications per n (>= 100)")->capture_default_str();
  mc->add_option("--threads", mc_c.threads, "worker threads (0: BOUNDARY_LAB_THREADS or all)")
      ->capture_default_str();
  mc->add_flag("--no-var-rhs", mc_no_var, "skip the variance-identity column");
  mc->add_option("--out", mc_c.out, "risk CSV (stdout if absent)");

  // rates ------------------------------------------------------------------
  Common rates_c;
  std::string rates_in;
  double rates_target = 0.75;
  double rates_tol = 0.08;
  std::string rates_column = "rmse";
  auto* rates = app.add_subcommand("rates", "fit the log-log slope of a risk CSV");
  rates->add_option("--in", rates_in, "risk CSV")->required();
  rates->add_option("--target-exponent", rates_target, "expected decay exponent")
      ->capture_default_str();
  rates->add_option("--tol", rates_tol, "slope tolerance")->capture_default_str();
  rates->add_option("--column", rates_column, "rmse | mean_abs_error")->capture_default_str();

  // test -------------------------------------------------------------------
  Common test_c;
  double test_p = 1.0;
  long test_n = 1024;
  std::optional<double> test_rn;
  std::string test_g0 = "const:0";
  long test_reps = 2000;
  auto* test = app.add_subcommand("test", "plug-in test error experiment");
  add_holder(test, test_c);
  add_seed(test, test_c);
  add_grid(test, test_c);
  test->add_option("--p", test_p, "power p >= 1")->capture_default_str();
  test->add_option("--n", test_n, "intensity scale")->capture_default_str();
  test->add_option("--rn", test_rn, "separation radius (default 5 r_n^*)");
  test->add_option("--g0", test_g0, "null boundary spec")->capture_default_str();
  test->add_option("--reps", test_reps, "replications per hypothesis")->capture_default_str();
  test->add_option("--threads", test_c.threads, "worker threads")->capture_default_str();
  test->add_option("--out", test_c.out, "per-replication CSV hypothesis,rep,statistic,decision");

  // lowerbound -------------------------------------------------------------
  Common lb_c;
  long lb_n = 1024;
  std::optional<std::size_t> lb_m;
  std::optional<double> lb_r;
  double lb_p = 1.0;
  double lb_c_amp = 0.25;
  std::string lb_weights = "uniform";
  std::string lb_base = "const:0";
  std::string lb_functional;
  long lb_reps = 0;
  auto* lowerbound = app.add_subcommand("lowerbound", "chi-square certificate of the bump prior");
  add_holder(lowerbound, lb_c);
  add_seed(lowerbound, lb_c);
  add_grid(lowerbound, lb_c);
  lowerbound->add_option("--n", lb_n, "intensity scale")->capture_default_str();
  lowerbound->add_option("--m", lb_m, "number of cells");
  lowerbound->add_option("--r-target", lb_r, "size m from a separation radius instead of --m");
  lowerbound->add_option("--p", lb_p, "power p for --r-target and matched weights")
      ->capture_default_str();
  lowerbound->add_option("--c", lb_c_amp, "bump amplitude factor")->capture_default_str();
  lowerbound->add_option("--weights", lb_weights, "uniform | matched")->capture_default_str();
  lowerbound->add_option("--base", lb_base, "base boundary spec f")->capture_default_str();
  lowerbound->add_option("--functional", lb_functional, "phi for matched weights (default power:<p>)");
  lowerbound->add_option("--reps", lb_reps, "Monte Carlo replications (0 skips)")
      ->capture_default_str();
  lowerbound->add_option("--threads", lb_c.threads, "worker threads")->capture_default_str();

  // check ------------------------------------------------------------------
  auto* check = app.add_subcommand("check", "deterministic checks");
  check->require_subcommand(1);
  Common interp_c;
  std::size_t interp_corpus = 1000;
  std::optional<double> interp_beta;
  std::optional<double> interp_p;
  auto* interp = check->add_subcommand("interp", "interpolation inequality on a certified corpus");
  interp->add_option("--corpus", interp_corpus, "corpus size")->capture_default_str();
  interp->add_option("--beta", interp_beta, "fix beta (default cycles 0.3, 0.5, 1)");
  interp->add_option("--radius", interp_c.radius, "Hölder radius")->capture_default_str();
  interp->add_option("--p", interp_p, "fix p (default cycles 1, 2, 4)");
  add_seed(interp, interp_c);
  add_grid(interp, interp_c);
  interp->add_option("--out", interp_c.out, "CSV case,lhs,rhs,holds (stdout if absent)");
  Common holder_c;
  std::string holder_g = "powb";
  std::size_t holder_grid = 256;
  auto* holder_cmd = check->add_subcommand("holder", "grid check of Hölder membership");
  add_holder(holder_cmd, holder_c);
  holder_cmd->add_option("--g", holder_g, "boundary spec")->capture_default_str();
  holder_cmd->add_option("--grid", holder_grid, "grid size")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*simulate) {
      write_config_sidecar(app, "simulate", sim);
      const bl::HolderClass holder(sim.beta, sim.radius);
      const bl::ModelConfig model(sim_n, bl::parse_boundary(sim_g, holder), holder);
      const double cap = sim_cap ? *sim_cap : bl::default_cap(model, sim_margin, sim.grid);
      const bl::PppSample sample = bl::sample_ppp(model, cap, sim.seed, sim.grid);
      if (sim.out.empty()) {
        bl::write_sample_csv(std::cout, sample);
      } else {
        bl::write_sample(sim.out, sample, sim_g, holder);
      }
    } else if (*envelope) {
      write_config_sidecar(app, "envelope", env_c);
      const bl::HolderClass holder(env_c.beta, env_c.radius);
      bl::require_grid(env_c.grid);
      const bl::PppSample sample = bl::read_sample(env_in, holder, env_n);
      const bl::Envelope env(sample, holder);
      const std::vector<double> ghat = env.evaluate_grid(env_c.grid);
      std::ofstream file;
      if (!env_c.out.empty()) file = open_out(env_c.out);
      std::ostream& out = env_c.out.empty() ? std::cout : file;
      out << "x,ghat\n";
      for (std::size_t i = 0; i < ghat.size(); ++i) {
        out << bl::format_double(bl::grid_node(i, env_c.grid)) << ',' << bl::format_double(ghat[i])
            << '\n';
      }
    } else if (*estimate) {
      write_config_sidecar(app, "estimate", est_c);
      const bl::HolderClass holder(est_c.beta, est_c.radius);
      const bl::PppSample sample = bl::read_sample(est_in, holder, est_n);
      const auto result =
          bl::estimate_functional(sample, holder, parse_functional(est_functional), est_c.grid);
      print_json(estimate_json(result));
    } else if (*mc) {
      write_config_sidecar(app, "mc", mc_c);
      const bl::HolderClass holder(mc_c.beta, mc_c.radius);
      bl::RiskGridConfig cfg{
          .boundary = bl::parse_boundary(mc_g, holder),
          .holder = holder,
          .estimator = bl::parse_estimator(mc_estimator),
          .spec = mc_functional.empty() ? bl::FunctionalSpec::power_preset(mc_p)
                                        : parse_functional(mc_functional),
          .ns = parse_ns(mc_ns),
          .reps = mc_reps,
          .seed = mc_c.seed,
          .threads = mc_c.threads,
          .grid_size = mc_c.grid,
      };
      cfg.with_var_rhs = !mc_no_var;
      const bl::RiskTable table = bl::run_risk_grid(cfg);
      if (mc_c.out.empty()) {
        bl::write_risk_csv(std::cout, table);
      } else {
        bl::write_risk_csv(mc_c.out, table);
      }
      if (!table.valid) throw ValidationFailure("more than 1% of replications were discarded");
    } else if (*rates) {
      write_config_sidecar(app, "rates", rates_c);
      const bl::RiskTable table = bl::read_risk_csv(rates_in);
      const bl::RateFit fit =
          bl::fit_rate_slope(table, bl::parse_risk_column(rates_column), rates_target, rates_tol);
      print_json(fit_json(fit));
      if (!fit.within_tolerance) throw ValidationFailure("fitted slope outside tolerance");
    } else if (*test) {
      write_config_sidecar(app, "test", test_c);
      const bl::HolderClass holder(test_c.beta, test_c.radius);
      const double rn = test_rn ? *test_rn
                                : 5.0 * bl::separation_rate(holder.beta, test_p,
                                                            static_cast<double>(test_n));
      const bl::TestConfig cfg(test_p, rn, holder, test_n, bl::parse_boundary(test_g0, holder));
      const auto alternatives = bl::bump_alternatives(cfg);
      const auto res = bl::error_experiment(cfg, alternatives, test_reps, test_c.seed,
                                            test_c.threads, test_c.grid, !test_c.out.empty());
      if (!test_c.out.empty()) {
        std::ofstream out = open_out(test_c.out);
        out << "hypothesis,rep,statistic,decision\n";
        for (const auto& rec : res.records) {
          if (!rec.valid) continue;
          out << (rec.hypothesis == 0 ? std::string("null")
                                      : "alt" + std::to_string(rec.hypothesis - 1))
              << ',' << rec.rep << ',' << bl::format_double(rec.statistic) << ',' << rec.decision
              << '\n';
        }
      }
      json alts = json::array();
      for (std::size_t a = 0; a < alternatives.size(); ++a) {
        alts.push_back({{"boundary", alternatives[a].describe()}, {"type2", res.type2[a]}});
      }
      print_json({{"r_n", rn},
                  {"threshold", cfg.threshold()},
                  {"type1", res.type1},
                  {"type1_stderr", res.type1_stderr},
                  {"worst_type2", res.worst_type2},
                  {"worst_type2_stderr", res.worst_type2_stderr},
                  {"type1_chebyshev_bound", bl::type1_chebyshev_bound(cfg)},
                  {"discarded", res.discarded},
                  {"alternatives", alts}});
    } else if (*lowerbound) {
      write_config_sidecar(app, "lowerbound", lb_c);
      const bl::HolderClass holder(lb_c.beta, lb_c.radius);
      const bl::BoundaryFunction base = bl::parse_boundary(lb_base, holder);
      std::size_t m = 0;
      if (lb_m) {
        m = *lb_m;
      } else if (lb_r) {
        m = bl::prior_geometry(lb_c_amp, holder, *lb_r, lb_p).m;
      } else {
        throw std::invalid_argument("lowerbound: pass --m or --r-target");
      }
      std::vector<double> weights;
      if (lb_weights == "uniform") {
        weights = bl::uniform_weights(m);
      } else if (lb_weights == "matched") {
        const auto spec = lb_functional.empty() ? bl::FunctionalSpec::power_preset(lb_p)
                                                : parse_functional(lb_functional);
        weights = bl::matched_weights(m, base, spec);
      } else {
        throw std::invalid_argument("--weights must be uniform or matched");
      }
      const bl::PriorConfig prior(m, lb_c_amp, holder, weights, base);
      const bl::Chi2Report rep =
          bl::chi2_certificate(prior, lb_n, lb_reps, lb_c.seed, lb_c.threads, lb_c.grid);
      const auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
      print_json({{"m", m},
                  {"h", prior.h()},
                  {"bump_mass", rep.bump_mass},
                  {"exact_value", rep.exact_value},
                  {"lemma_bound", num(rep.lemma_bound)},
                  {"mc_estimate", num(rep.mc_estimate)},
                  {"mc_stderr", num(rep.mc_stderr)},
                  {"mean_lr", num(rep.mean_lr)},
                  {"mean_lr_stderr", num(rep.mean_lr_stderr)},
                  {"mc_reps", rep.mc_reps}});
    } else if (*check) {
      if (*interp) {
        write_config_sidecar(app, "check-interp", interp_c);
        const auto corpus =
            bl::interpolation_corpus(interp_corpus, interp_c.seed, interp_c.radius, interp_beta, interp_p);
        std::ofstream file;
        if (!interp_c.out.empty()) file = open_out(interp_c.out);
        std::ostream& out = interp_c.out.empty() ? std::cout : file;
        out << "case,lhs,rhs,holds\n";
        std::size_t violations = 0;
        for (std::size_t i = 0; i < corpus.size(); ++i) {
          const auto res = bl::interpolation_check(corpus[i].f, corpus[i].p, interp_c.grid);
          if (!res.holds) ++violations;
          out << i << ',' << bl::format_double(res.lhs) << ',' << bl::format_double(res.rhs) << ','
              << (res.holds ? 1 : 0) << '\n';
        }
        if (violations > 0) {
          throw ValidationFailure(std::to_string(violations) + " interpolation violations");
        }
      } else if (*holder_cmd) {
        write_config_sidecar(app, "check-holder", holder_c);
        const bl::HolderClass holder(holder_c.beta, holder_c.radius);
        const bool ok = bl::holder_membership_check(bl::parse_boundary(holder_g, holder), holder_grid);
        print_json({{"boundary", holder_g}, {"holds", ok}});
        if (!ok) throw ValidationFailure("Hölder check failed");
      }
    }
  } catch (const ValidationFailure& e) {
    std::cerr << "validation failed: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

// polythresh command-line entry point.
//
//   dist info | cramer table | threshold constants | simulate sweep | verify all
//
// Exit status: 0 success, 2 invalid input, 1 numerical failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "polythresh/cramer.hpp"
#include "polythresh/errors.hpp"
#include "polythresh/io.hpp"
#include "polythresh/polytope_sim.hpp"
#include "polythresh/thresholds.hpp"
#include "polythresh/verify.hpp"

using namespace polythresh;
using json = nlohmann::ordered_json;

namespace {

struct MeasureArgs {
  std::string name;
  std::optional<double> p;
  double half_width = 1.0;
  std::string density_file;
};

struct ToleranceArgs {
  CramerOptions cramer;
};

void add_measure_options(CLI::App* cmd, MeasureArgs& m) {
  cmd->add_option("--measure", m.name, "rademacher | uniform | exp | pnorm | tabulated")->required();
  cmd->add_option("--p", m.p, "exponent for pnorm (p >= 1)");
  cmd->add_option("--half-width", m.half_width, "half width a of uniform on [-a, a]");
  cmd->add_option("--density-file", m.density_file, "CSV x,f with header (tabulated)");
}

void add_tolerance_options(CLI::App* cmd, ToleranceArgs& t) {
  cmd->add_option("--tol-newton", t.cramer.tol_newton, "Newton tolerance for h = (Lambda')^-1");
  cmd->add_option("--tol-quad", t.cramer.tol_quad, "quadrature tolerance");
  cmd->add_option("--tail-cap", t.cramer.tail_log_cap, "largest x evaluated has m(x) <= cap");
}

MeasureSpec resolve_measure(const MeasureArgs& m) {
  if (m.p && m.name != "pnorm") throw ValidationError("measure", "--p is only valid with --measure pnorm");
  if (!m.density_file.empty() && m.name != "tabulated")
    throw ValidationError("measure", "--density-file requires --measure tabulated");
  if (m.name == "rademacher") return MeasureSpec::rademacher();
  if (m.name == "uniform") return MeasureSpec::uniform(m.half_width);
  if (m.name == "exp") return MeasureSpec::sym_exponential();
  if (m.name == "pnorm") {
    if (!m.p) throw ValidationError("measure", "--measure pnorm needs --p");
    return MeasureSpec::pnorm(*m.p);
  }
  if (m.name == "tabulated") {
    if (m.density_file.empty()) throw ValidationError("measure", "--measure tabulated needs --density-file");
    return MeasureSpec::from_csv(m.density_file);
  }
  throw ValidationError("measure", "unknown measure '" + m.name + "'");
}

json measure_json(const MeasureArgs& m) {
  json j;
  j["name"] = m.name;
  if (m.name == "pnorm") j["p"] = json_number(m.p);
  if (m.name == "uniform") j["half_width"] = m.half_width;
  if (m.name == "tabulated") j["density_file"] = m.density_file;
  return j;
}

json tolerance_json(const ToleranceArgs& t) {
  json j;
  j["tol_newton"] = t.cramer.tol_newton;
  j["tol_quad"] = t.cramer.tol_quad;
  j["tail_cap"] = t.cramer.tail_log_cap;
  return j;
}

void check_tolerances(const ToleranceArgs& t) {
  if (!(t.cramer.tol_newton > 0.0 && t.cramer.tol_newton < 1e-2))
    throw ValidationError("config", "--tol-newton must lie in (0, 1e-2)");
  if (!(t.cramer.tol_quad > 0.0 && t.cramer.tol_quad < 1e-2))
    throw ValidationError("config", "--tol-quad must lie in (0, 1e-2)");
  if (!(t.cramer.tail_log_cap >= 5.0 && t.cramer.tail_log_cap <= 700.0))
    throw ValidationError("config", "--tail-cap must lie in [5, 700]");
}

json envelope(const std::string& subcommand, json config) {
  json c;
  c["subcommand"] = subcommand;
  for (auto it = config.begin(); it != config.end(); ++it) c[it.key()] = it.value();
  return c;
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw ValidationError("output", "cannot open " + path);
  return file;
}

void finish(std::ofstream& file, const std::string& path) {
  if (file.is_open()) {
    file.flush();
    if (!file) throw ValidationError("output", "write failed for " + path);
  }
}

double resolve_operation_cap(const std::optional<double>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("POLYTHRESH_OPERATION_CAP")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(v > 0.0))
      throw ValidationError("config", "POLYTHRESH_OPERATION_CAP must be a positive number");
    return v;
  }
  return SweepOptions{}.operation_cap;
}

// ---- dist info -------------------------------------------------------------

int run_dist_info(const MeasureArgs& m) {
  const MeasureSpec spec = resolve_measure(m);
  json out;
  out["name"] = spec.name();
  out["kind"] = to_string(spec.kind());
  out["x_star"] = json_number(spec.x_star());
  out["t_star"] = json_number(spec.t_star());
  out["atom_at_x_star"] = spec.atom_at_x_star();
  out["variance"] = spec.variance();
  out["has_closed_lambda"] = spec.has_closed_lambda();
  if (spec.admissible() == Admissibility::Unknown)
    out["admissible"] = "unknown";
  else
    out["admissible"] = spec.admissible() == Admissibility::Yes;
  out["lambda_star_condition"] = spec.lambda_star_condition();
  json cfg;
  cfg["measure"] = measure_json(m);
  out["config"] = envelope("dist info", cfg);
  out["version"] = kVersion;
  std::cout << dump_json(out) << '\n';
  return 0;
}

// ---- cramer table ----------------------------------------------------------

struct TableArgs {
  double x_min = 0.0;
  double x_max = 1.0;
  int steps = 0;
  std::string out;
};

int run_cramer_table(const MeasureArgs& m, const ToleranceArgs& tol, const TableArgs& a) {
  check_tolerances(tol);
  if (a.steps < 1) throw ValidationError("cramer table", "--steps must be >= 1");
  if (!(a.x_min <= a.x_max)) throw ValidationError("cramer table", "--x-min must not exceed --x-max");
  const MeasureSpec spec = resolve_measure(m);
  const CramerProfile profile(spec, tol.cramer);
  const double limit = spec.is_atomic() ? spec.x_star() : profile.x_max_eval();
  if (std::max(std::abs(a.x_min), std::abs(a.x_max)) > limit)
    throw DomainError("cramer table", "|x| must not exceed " + format_double(limit) + " for " + spec.name());

  std::vector<CramerEval> rows;
  for (int k = 0; k < a.steps; ++k) {
    const double x = a.steps == 1 ? a.x_min : a.x_min + (a.x_max - a.x_min) * k / (a.steps - 1);
    rows.push_back(cramer_transform(profile, x));
  }
  json cfg;
  cfg["measure"] = measure_json(m);
  cfg["x_min"] = a.x_min;
  cfg["x_max"] = a.x_max;
  cfg["steps"] = a.steps;
  cfg["out"] = a.out;
  cfg["tolerances"] = tolerance_json(tol);
  cfg["x_max_eval"] = json_number(profile.x_max_eval());
  json tail;
  tail["config"] = envelope("cramer table", cfg);
  tail["version"] = kVersion;

  std::ofstream file;
  std::ostream& os = open_out(a.out, file);
  write_cramer_table(os, rows);
  os << dump_json(tail) << '\n';
  finish(file, a.out);
  return 0;
}

// ---- threshold constants ---------------------------------------------------

struct ConstantsArgs {
  std::optional<int> n;
  double delta = 0.25;
  double epsilon = 0.1;
};

int run_threshold_constants(const MeasureArgs& m, const ToleranceArgs& tol, const ConstantsArgs& a) {
  check_tolerances(tol);
  if (a.n && *a.n < 1) throw ValidationError("threshold constants", "--n must be >= 1");
  if (!(a.delta > 0.0 && a.delta < 0.5)) throw ValidationError("threshold constants", "--delta must lie in (0, 1/2)");
  if (!(a.epsilon > 0.0 && a.epsilon < 1.0))
    throw ValidationError("threshold constants", "--epsilon must lie in (0, 1)");
  const MeasureSpec spec = resolve_measure(m);
  const CramerProfile profile(spec, tol.cramer);
  const ThresholdConstants c = constants(profile);

  json out;
  out["t1"] = c.t1;
  out["var_star"] = c.var_star;
  out["beta"] = c.beta;
  out["kappa_vol"] = json_number(c.kappa_vol);
  out["rho1_lower"] = nullptr;
  out["rho2_upper"] = nullptr;
  if (a.n) {
    try {
      const TheoreticalWindow w = theoretical_window(c, *a.n, a.delta, a.epsilon);
      out["rho1_lower"] = w.rho1_lower;
      out["rho2_upper"] = w.rho2_upper;
      out["chebyshev_ok"] = w.chebyshev_ok;
    } catch (const NotApplicable& e) {
      out["window_note"] = e.what();
    }
  }
  if (c.admissible == Admissibility::Unknown)
    out["admissible"] = "unknown";
  else
    out["admissible"] = c.admissible == Admissibility::Yes;
  out["warnings"] = c.warnings;
  json cfg;
  cfg["measure"] = measure_json(m);
  cfg["n"] = a.n ? json(*a.n) : json(nullptr);
  cfg["delta"] = a.delta;
  cfg["epsilon"] = a.epsilon;
  cfg["tolerances"] = tolerance_json(tol);
  out["config"] = envelope("threshold constants", cfg);
  out["version"] = kVersion;
  std::cout << dump_json(out) << '\n';
  return 0;
}

// ---- simulate sweep --------------------------------------------------------

struct SweepArgs {
  int n = 0;
  double rho_min = 0.0;
  double rho_max = 0.0;
  int rho_steps = 0;
  int replicates = 1;
  std::size_t test_points = 1000;
  double delta = 0.25;
  std::uint64_t seed = 0;
  std::string out;
  std::string plot_out;
  std::optional<double> operation_cap;
};

int run_simulate_sweep(const MeasureArgs& m, const ToleranceArgs& tol, const SweepArgs& a) {
  check_tolerances(tol);
  if (a.n < 1) throw ValidationError("simulate sweep", "--n must be >= 1");
  if (a.rho_steps < 1) throw ValidationError("simulate sweep", "--rho-steps must be >= 1");
  if (!(a.rho_min > 0.0 && a.rho_min <= a.rho_max))
    throw ValidationError("simulate sweep", "need 0 < --rho-min <= --rho-max");
  if (a.rho_steps > 1 && !(a.rho_min < a.rho_max))
    throw ValidationError("simulate sweep", "--rho-min must be below --rho-max when --rho-steps > 1");
  if (a.replicates < 1 || a.test_points < 1)
    throw ValidationError("simulate sweep", "--replicates and --test-points must be positive");
  if (!(a.delta > 0.0 && a.delta < 0.5)) throw ValidationError("simulate sweep", "--delta must lie in (0, 1/2)");
  const double cap = resolve_operation_cap(a.operation_cap);
  const MeasureSpec spec = resolve_measure(m);
  if (spec.is_atomic()) throw AtomicMeasure("simulate sweep", "the sweep needs an atomless measure");

  std::vector<double> grid;
  for (int k = 0; k < a.rho_steps; ++k)
    grid.push_back(a.rho_steps == 1 ? a.rho_min : a.rho_min + (a.rho_max - a.rho_min) * k / (a.rho_steps - 1));
  SweepOptions opt;
  opt.delta = a.delta;
  opt.operation_cap = cap;

  // Constants first: a failure there costs seconds, not the sweep.
  const CramerProfile profile(spec, tol.cramer);
  const ThresholdConstants c = constants(profile);
  const SweepGrid g = sweep(spec, a.n, grid, a.replicates, a.test_points, a.seed, opt);
  if (g.unverified > 0)
    throw NumericalInstability("simulate sweep", std::to_string(g.unverified) + " membership certificates failed");

  json cfg;
  cfg["measure"] = measure_json(m);
  cfg["n"] = a.n;
  cfg["rho_min"] = a.rho_min;
  cfg["rho_max"] = a.rho_max;
  cfg["rho_steps"] = a.rho_steps;
  cfg["replicates"] = a.replicates;
  cfg["test_points"] = a.test_points;
  cfg["delta"] = a.delta;
  cfg["seed"] = a.seed;
  cfg["out"] = a.out;
  cfg["plot_out"] = a.plot_out;
  cfg["operation_cap"] = cap;
  cfg["tolerances"] = tolerance_json(tol);
  const json config = envelope("simulate sweep", cfg);

  json tail;
  tail["rho_hat_low"] = json_number(g.rho_hat_low);
  tail["rho_hat_high"] = json_number(g.rho_hat_high);
  tail["t1_reference"] = c.t1;
  tail["config"] = config;
  tail["version"] = kVersion;

  std::ofstream file;
  std::ostream& os = open_out(a.out, file);
  write_sweep_csv(os, g);
  os << dump_json(tail) << '\n';
  finish(file, a.out);

  if (!a.plot_out.empty()) {
    std::optional<TheoreticalWindow> window;
    try {
      window = theoretical_window(c, a.n, a.delta);
    } catch (const NotApplicable&) {
    }
    json head;
    head["config"] = config;
    head["version"] = kVersion;
    emit_plot_data(g, c.t1, window, a.plot_out, dump_json(head));
  }
  return 0;
}

// ---- verify all ------------------------------------------------------------

struct VerifyArgs {
  std::uint64_t seed = 42;
  std::string out;
  std::vector<int> only;
  bool check_determinism = false;
};

int run_verify_all(const VerifyArgs& a) {
  for (int id : a.only)
    if (id < 1 || id > 11) throw ValidationError("verify all", "--only takes criterion numbers 1..11");
  AcceptanceOptions opt;
  opt.seed = a.seed;
  opt.only = a.only;
  opt.on_result = [](const CriterionOutcome& o) { std::cerr << format_outcome(o) << '\n'; };
  const AcceptanceReport first = run_acceptance(opt);

  std::string text = "# polythresh " + std::string(kVersion) + " verify all seed=" + std::to_string(a.seed) + '\n';
  text += first.text();
  bool pass = first.all_pass();
  if (a.check_determinism) {
    opt.on_result = nullptr;
    const AcceptanceReport second = run_acceptance(opt);
    const bool same = second.text() == first.text();
    text += std::string(same ? "PASS" : "FAIL") + " [12] determinism: second run byte-identical=" +
            (same ? "yes" : "no") + '\n';
    pass = pass && same;
  }
  std::ofstream file;
  std::ostream& os = open_out(a.out, file);
  os << text;
  finish(file, a.out);
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sharp thresholds for random polytopes: rate functions, constants and sweeps"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  MeasureArgs measure;
  ToleranceArgs tol;

  auto* dist = app.add_subcommand("dist", "measure information")->require_subcommand(1);
  auto* dist_info = dist->add_subcommand("info", "support, MGF domain and admissibility as JSON");
  add_measure_options(dist_info, measure);

  TableArgs table;
  auto* cramer = app.add_subcommand("cramer", "Cramer transform")->require_subcommand(1);
  auto* cramer_table = cramer->add_subcommand("table", "CSV of Lambda*, h, m and m/Lambda* on a grid");
  add_measure_options(cramer_table, measure);
  add_tolerance_options(cramer_table, tol);
  cramer_table->add_option("--x-min", table.x_min)->required();
  cramer_table->add_option("--x-max", table.x_max)->required();
  cramer_table->add_option("--steps", table.steps, "number of grid points")->required();
  cramer_table->add_option("--out", table.out, "output file (default stdout)");

  ConstantsArgs cons;
  auto* threshold = app.add_subcommand("threshold", "threshold constants")->require_subcommand(1);
  auto* threshold_constants = threshold->add_subcommand("constants", "T1, Var Lambda*, beta, kappa and window");
  add_measure_options(threshold_constants, measure);
  add_tolerance_options(threshold_constants, tol);
  threshold_constants->add_option("--n", cons.n, "dimension for the theoretical window");
  threshold_constants->add_option("--delta", cons.delta, "threshold level in (0, 1/2)");
  threshold_constants->add_option("--epsilon", cons.epsilon, "slack in the window bounds");

  SweepArgs sw;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo simulation")->require_subcommand(1);
  auto* simulate_sweep = simulate->add_subcommand("sweep", "E mu_n(K_N) over N = ceil(exp(rho n))");
  add_measure_options(simulate_sweep, measure);
  add_tolerance_options(simulate_sweep, tol);
  simulate_sweep->add_option("--n", sw.n)->required();
  simulate_sweep->add_option("--rho-min", sw.rho_min)->required();
  simulate_sweep->add_option("--rho-max", sw.rho_max)->required();
  simulate_sweep->add_option("--rho-steps", sw.rho_steps)->required();
  simulate_sweep->add_option("--replicates", sw.replicates)->required();
  simulate_sweep->add_option("--test-points", sw.test_points)->required();
  simulate_sweep->add_option("--delta", sw.delta);
  simulate_sweep->add_option("--seed", sw.seed)->required();
  simulate_sweep->add_option("--out", sw.out, "CSV output (default stdout)");
  simulate_sweep->add_option("--plot-out", sw.plot_out, "plot data file");
  simulate_sweep->add_option("--operation-cap", sw.operation_cap,
                             "bound on N_max * M * R (env POLYTHRESH_OPERATION_CAP)");

  VerifyArgs ver;
  auto* verify = app.add_subcommand("verify", "acceptance suite")->require_subcommand(1);
  auto* verify_all = verify->add_subcommand("all", "run every acceptance criterion");
  verify_all->add_option("--seed", ver.seed);
  verify_all->add_option("--out", ver.out, "report file (default stdout)");
  verify_all->add_option("--only", ver.only, "criterion numbers to run");
  verify_all->add_flag("--check-determinism", ver.check_determinism, "run twice and compare reports");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*dist_info) return run_dist_info(measure);
    if (*cramer_table) return run_cramer_table(measure, tol, table);
    if (*threshold_constants) return run_threshold_constants(measure, tol, cons);
    if (*simulate_sweep) return run_simulate_sweep(measure, tol, sw);
    if (*verify_all) return run_verify_all(ver);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure in " << e.operation() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

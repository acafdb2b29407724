// purity_ctl: command-line front end.
//
//   purity_ctl apogee   --config run.json
//   purity_ctl solve    --config run.json [--seed N] [--order M] [--out-dir D]
//   purity_ctl simulate --solution solution.json [--out timeseries.csv]
//   purity_ctl validate --config run.json [--cases 200]
//   purity_ctl reproduce-tables --table 1|2
//
// Flags override the config document, which overrides PURITY_SEED, which
// overrides built-in defaults. Exit status: 0 success, 2 invalid input or a
// failed check, 3 no convergence.

#include "purity/chimney.hpp"
#include "purity/config.hpp"
#include "purity/errors.hpp"
#include "purity/kernels.hpp"
#include "purity/report.hpp"
#include "purity/validation.hpp"
#include "purity/variational.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

using namespace purity;

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitNoConvergence = 3;

struct Flags {
  std::string config;
  int table = 0;
  std::uint64_t seed = 0;
  int order = 0;
  std::string objective;
  int panels = 0;
  int multistart = 0;
  int zeroed = 0;
  std::string warm;
  std::string out_dir;
};

void add_model_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("-c,--config", f.config, "run configuration (JSON)");
  cmd->add_option("--reference-model", f.table, "use the model of reference table 1 (2D) or 2 (3D)")
      ->check(CLI::Range(1, 2));
}

void add_run_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--seed", f.seed, "multistart seed");
  cmd->add_option("-M,--order", f.order, "basis order")->check(CLI::Range(1, 20));
  cmd->add_option("--objective", f.objective, "time or energy")
      ->check(CLI::IsMember({"time", "energy"}));
  cmd->add_option("-N,--panels", f.panels, "grid panels")->check(CLI::PositiveNumber);
  cmd->add_option("-K,--multistart", f.multistart, "number of random starts")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--zeroed-control", f.zeroed, "control held at zero in 3D energy runs")
      ->check(CLI::Range(1, 3));
  cmd->add_option("--warm-start", f.warm, "never, fallback or always")
      ->check(CLI::IsMember({"never", "fallback", "always"}));
}

ConfigOverrides overrides_from(const CLI::App* cmd, const Flags& f) {
  ConfigOverrides o;
  auto given = [cmd](const char* name) {
    const CLI::Option* opt = cmd->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--seed")) o.seed = f.seed;
  if (given("--order")) o.order = f.order;
  if (given("--objective")) o.objective = f.objective == "time" ? CostKind::time : CostKind::energy;
  if (given("--panels")) o.panels = f.panels;
  if (given("--multistart")) o.multistart = f.multistart;
  if (given("--zeroed-control")) o.zeroed_control = f.zeroed;
  if (given("--warm-start")) {
    o.warm_start = f.warm == "never" ? WarmStart::never
                   : f.warm == "always" ? WarmStart::always
                                        : WarmStart::fallback;
  }
  if (given("--out-dir")) o.output_dir = f.out_dir;
  return o;
}

RunConfig resolve_config(const CLI::App* cmd, const Flags& f) {
  const ConfigOverrides o = overrides_from(cmd, f);
  if (!f.config.empty() && f.table != 0) {
    throw ValidationError("--config and --reference-model are mutually exclusive");
  }
  if (!f.config.empty()) return load_config(f.config, o);
  if (f.table != 0) return parse_config(Json{{"model", reference_model(f.table)}}, o);
  throw ValidationError("config: give --config FILE or --reference-model 1|2");
}

std::ofstream open_output(const std::string& path) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  return std::ofstream(path, std::ios::binary);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out = open_output(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << text;
}

template <typename Writer>
void write_with(const std::string& path, Writer&& w) {
  std::ofstream out = open_output(path);
  if (!out) throw ValidationError("cannot write " + path);
  w(out);
}

int cmd_apogee(const RunConfig& c) {
  const ChimneyGeometry geom = find_apogee(c.model);
  const BoundaryConditions bc = boundary_conditions(geom, c.epsilon, c.delta);
  std::cout << apogee_document(c, geom, bc).dump(2) << '\n';
  return 0;
}

void print_solution_summary(const Solution& s) {
  const Vec3 u = s.endpoint_control();
  std::fprintf(stderr,
               "t_f = %.6f  E = %.6f  nu = %.3e  accepted %d/%d starts%s\n"
               "u(x_f) = (%.5f, %.5f, %.5f)\n",
               s.time, s.energy, s.residual, s.starts_accepted, s.starts_used,
               s.warm_started ? " (descent-first pass)" : "", u[0], u[1], u[2]);
}

int cmd_solve(const RunConfig& c) {
  const ProblemSpec spec = make_problem(c);
  std::fprintf(stderr, "solving %dD %s-minimal problem, M = %d, K = %d, seed %llu, kernel %s\n",
               c.dimension, std::string(to_string(c.objective)).c_str(), c.order, c.multistart,
               static_cast<unsigned long long>(c.seed),
               std::string(kernels::to_string(kernels::active_simd_level())).c_str());
  const Solution s = solve(spec);
  print_solution_summary(s);
  write_file(c.outputs.solution, solution_document(c, s).dump(2) + "\n");
  write_with(c.outputs.trajectory, [&](std::ostream& o) { write_trajectory_csv(o, s); });
  write_with(c.outputs.controls, [&](std::ostream& o) { write_controls_csv(o, s); });
  std::fprintf(stderr, "wrote %s, %s, %s\n", c.outputs.solution.c_str(),
               c.outputs.trajectory.c_str(), c.outputs.controls.c_str());
  return 0;
}

int cmd_simulate(const std::string& solution_path, const std::string& out_path, double step,
                 const CLI::App* cmd, const Flags& f) {
  RunConfig c;
  Solution s = [&] {
    if (!solution_path.empty()) {
      std::ifstream in(solution_path);
      if (!in) throw ValidationError("cannot open " + solution_path);
      Json doc;
      try {
        doc = Json::parse(in);
      } catch (const Json::parse_error& e) {
        throw ValidationError(solution_path + " is not valid JSON (" + e.what() + ")");
      }
      return solution_from_document(doc, &c);
    }
    c = resolve_config(cmd, f);
    return solve(make_problem(c));
  }();
  SimulationOptions opt;
  opt.step = step;
  const SimulationReport r = forward_simulate(s.spec, s, opt);
  const std::string path = out_path.empty() ? c.outputs.timeseries : out_path;
  write_with(path, [&](std::ostream& o) { write_timeseries_csv(o, r, c.dimension); });
  Json doc = simulation_document(r);
  doc["reported_time"] = s.time;
  doc["reported_energy"] = s.energy;
  doc["timeseries"] = path;
  std::cout << doc.dump(2) << '\n';
  if (!r.ok()) {
    std::fprintf(stderr, "simulation check failed: %s\n",
                 r.message.empty() ? "terminal error or time mismatch too large" : r.message.c_str());
    return kExitInvalid;
  }
  return 0;
}

int cmd_validate(const RunConfig& c, int cases, std::uint64_t seed) {
  const auto results = run_validation(c, cases, seed);
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%-4s %-40s max err %.3e  tol %.1e%s%s\n", r.passed ? "ok" : "FAIL", r.name.c_str(),
                r.max_error, r.tolerance, r.note.empty() ? "" : "  ", r.note.c_str());
    ok = ok && r.passed;
  }
  return ok ? 0 : kExitInvalid;
}

int cmd_reproduce(int table, const CLI::App* cmd, const Flags& f, const std::vector<int>& orders,
                  const std::string& json_out) {
  const auto rows = reference_rows(table);
  ConfigOverrides o = overrides_from(cmd, f);
  Json report = Json::array();
  bool all_converged = true;

  std::printf("reference table %d (%s model)\n", table, table == 1 ? "2D" : "3D");
  std::printf("%-3s | %-31s | %-31s | %-31s | %-31s\n", "M", "time-min t_f (ref, delta)",
              "time-min E (ref, delta)", "energy-min t_f (ref, delta)", "energy-min E (ref, delta)");
  for (const auto& ref : rows) {
    if (!orders.empty() && std::find(orders.begin(), orders.end(), ref.order) == orders.end()) {
      continue;
    }
    Json entry{{"table", table}, {"order", ref.order}};
    std::map<CostKind, std::pair<double, double>> got;
    for (CostKind kind : {CostKind::time, CostKind::energy}) {
      ConfigOverrides oo = o;
      oo.order = ref.order;
      oo.objective = kind;
      const RunConfig c = parse_config(Json{{"model", reference_model(table)}}, oo);
      const std::string key = std::string(to_string(kind)) + "_objective";
      try {
        const Solution s = solve(make_problem(c));
        got[kind] = {s.time, s.energy};
        entry[key] = {{"time", s.time},
                      {"energy", s.energy},
                      {"residual", s.residual},
                      {"starts_accepted", s.starts_accepted},
                      {"warm_started", s.warm_started},
                      {"seed", c.seed},
                      {"multistart", c.multistart},
                      {"panels", c.panels}};
      } catch (const NoConvergence& e) {
        all_converged = false;
        got[kind] = {std::nan(""), std::nan("")};
        entry[key] = {{"error", e.what()}, {"best_residual", e.best_residual()}};
      }
    }
    auto cell = [](double v, double r) {
      char buf[64];
      if (std::isnan(v)) {
        std::snprintf(buf, sizeof buf, "no convergence (%.4f)", r);
      } else {
        std::snprintf(buf, sizeof buf, "%.4f (%.4f, %+.4f)", v, r, v - r);
      }
      return std::string(buf);
    };
    std::printf("%-3d | %-31s | %-31s | %-31s | %-31s\n", ref.order,
                cell(got[CostKind::time].first, ref.time_objective_time).c_str(),
                cell(got[CostKind::time].second, ref.time_objective_energy).c_str(),
                cell(got[CostKind::energy].first, ref.energy_objective_time).c_str(),
                cell(got[CostKind::energy].second, ref.energy_objective_energy).c_str());
    std::fflush(stdout);
    entry["reference"] = {{"time_objective", {ref.time_objective_time, ref.time_objective_energy}},
                          {"energy_objective",
                           {ref.energy_objective_time, ref.energy_objective_energy}}};
    report.push_back(entry);
  }
  if (!json_out.empty()) write_file(json_out, report.dump(2) + "\n");
  return all_converged ? 0 : kExitNoConvergence;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Purity steering of a dissipative qubit: chimney geometry, time- and "
               "energy-minimal Rayleigh-Ritz solutions, forward simulation."};
  app.require_subcommand(1);
  Flags f;

  auto* apogee = app.add_subcommand("apogee", "escape-chimney apogee and boundary states");
  add_model_flags(apogee, f);

  auto* solve_cmd = app.add_subcommand("solve", "multistart Rayleigh-Ritz solve");
  add_model_flags(solve_cmd, f);
  add_run_flags(solve_cmd, f);
  solve_cmd->add_option("--out-dir", f.out_dir, "write solution.json, trajectory.csv, controls.csv here");

  std::string solution_path;
  std::string timeseries_path;
  double step = 1e-5;
  auto* simulate = app.add_subcommand("simulate", "integrate the Bloch equation under a solution's control");
  simulate->add_option("--solution", solution_path, "solution document from `solve`");
  add_model_flags(simulate, f);
  add_run_flags(simulate, f);
  simulate->add_option("-o,--out", timeseries_path, "time-series CSV path");
  simulate->add_option("--step", step, "RK4 time step")->check(CLI::PositiveNumber);

  int cases = 200;
  std::uint64_t check_seed = 1;
  auto* validate = app.add_subcommand("validate", "correspondence and invariant checks for a model");
  add_model_flags(validate, f);
  validate->add_option("--cases", cases, "random cases per check")->check(CLI::PositiveNumber);
  validate->add_option("--check-seed", check_seed, "seed for the random cases");

  int table = 1;
  std::vector<int> orders;
  std::string json_out;
  auto* reproduce = app.add_subcommand("reproduce-tables", "solve every row of a reference table");
  reproduce->add_option("--table", table, "1 (2D) or 2 (3D)")->check(CLI::Range(1, 2));
  reproduce->add_option("--orders", orders, "subset of rows to run");
  reproduce->add_option("--json", json_out, "also write the comparison as JSON");
  add_run_flags(reproduce, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (apogee->parsed()) return cmd_apogee(resolve_config(apogee, f));
    if (solve_cmd->parsed()) return cmd_solve(resolve_config(solve_cmd, f));
    if (simulate->parsed()) return cmd_simulate(solution_path, timeseries_path, step, simulate, f);
    if (validate->parsed()) return cmd_validate(resolve_config(validate, f), cases, check_seed);
    if (reproduce->parsed()) return cmd_reproduce(table, reproduce, f, orders, json_out);
  } catch (const NoConvergence& e) {
    std::fprintf(stderr, "error: %s (best nu %.3e, value %.6g)\n", e.what(), e.best_residual(),
                 e.best_value());
    return kExitNoConvergence;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kExitInvalid;
  } catch (const PreconditionError& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

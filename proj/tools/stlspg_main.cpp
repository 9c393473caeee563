// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: campaign runner, full-order solves, stability
// bound sweeps, and Pareto extraction over existing run tables.
#include "CLI11.hpp"

#include "stlspg/bench.hpp"
#include "stlspg/error_analysis.hpp"
#include "stlspg/io.hpp"
#include "stlspg/models.hpp"
#include "stlspg/time_integration.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace stlspg;

int cmd_run(const std::string& config_path, const std::string& output) {
  ExperimentConfig config = load_config(config_path);
  if (!output.empty()) config.output_dir = output;
  if (config.output_dir.empty()) config.output_dir = "stlspg_out";

  const CampaignResult result = run_campaign(config);
  emit_reports(result, config, config.output_dir);

  std::cout << "variant            mu                   dim      error  ok\n";
  for (const RunRecord& r : result.records) {
    std::ostringstream mu;
    mu << std::setprecision(6);
    for (Index i = 0; i < r.mu.size(); ++i) mu << (i ? "," : "") << r.mu(i);
    std::cout << std::left << std::setw(18) << r.variant << ' '
              << std::setw(20) << mu.str() << ' ' << std::right
              << std::setw(4) << r.dim << ' ' << std::setw(10)
              << std::setprecision(4) << r.error << "  "
              << (r.ok ? "yes" : ("no: " + r.message)) << '\n';
  }
  std::cout << "pareto-optimal records:";
  for (std::size_t idx : result.pareto) std::cout << ' ' << idx;
  std::cout << "\nreports written to " << config.output_dir << '\n';

  for (const RunRecord& r : result.records)
    if (!r.ok && r.message.rfind("constraint filter", 0) != 0)
      return 2;  // a run that should have succeeded failed
  return 0;
}

int cmd_fom(const std::string& problem, const std::vector<double>& mu_values,
            std::string scheme, double dt, Index steps, double newton_tol,
            std::string out) {
  auto model = problem == "burgers" ? make_burgers() : make_euler_nozzle();
  if (dt <= 0.0) dt = problem == "burgers" ? 2.5e-4 : 1e-3;
  if (steps <= 0) steps = problem == "burgers" ? 2000 : 600;
  if (out.empty()) out = "fom_" + problem;

  Vector mu(Index(mu_values.size()));
  for (std::size_t i = 0; i < mu_values.size(); ++i)
    mu(Index(i)) = mu_values[i];

  NewtonOptions newton;
  newton.tol = newton_tol;
  newton.max_iters = 200;
  const Trajectory traj = solve_fom(
      *model, LinearMultistepScheme::from_name(scheme), mu, dt, steps, newton);

  write_trajectory(out + ".bin", traj);
  write_trajectory_csv(out + ".csv", traj);
  std::cout << "solved " << problem << " with " << model->dim()
            << " unknowns over " << steps << " steps; final state norm "
            << std::setprecision(8) << traj.states.rightCols(1).norm() << '\n'
            << "wrote " << out << ".bin and " << out << ".csv\n";
  return 0;
}

int cmd_bounds(const std::string& scheme_name, double dt, double lf,
               double t_max, double t_min, Index points,
               const std::string& out) {
  require(t_max > 0.0, "--T-max must be positive");
  if (t_min <= 0.0) t_min = t_max / 100.0;
  require(t_min < t_max, "--T-min must be below --T-max");
  require(points >= 2, "--points must be at least 2");

  std::vector<double> horizons;
  for (Index i = 0; i < points; ++i)
    horizons.push_back(t_min * std::pow(t_max / t_min,
                                        double(i) / double(points - 1)));
  const auto scheme = LinearMultistepScheme::from_name(scheme_name);
  const auto sweep = lebesgue_growth_sweep(scheme, dt, lf, horizons);
  write_growth_csv(out, sweep);

  std::vector<double> T, one_plus, bound;
  for (const auto& pt : sweep) {
    if (!pt.valid) continue;
    T.push_back(pt.horizon);
    one_plus.push_back(pt.one_plus_lambda);
    bound.push_back(pt.sqrt_steps_bound);
  }
  std::cout << "wrote " << out << " (" << T.size() << " of " << sweep.size()
            << " horizons satisfy the time-step assumption)\n";
  if (T.size() >= 2) {
    std::cout << std::setprecision(4)
              << "log-log slope of 1+Lambda vs T:          "
              << fitted_loglog_slope(T, one_plus) << '\n'
              << "log-log slope of sqrt(N_t)(1+Lambda) vs T: "
              << fitted_loglog_slope(T, bound) << '\n';
  }
  return 0;
}

int cmd_pareto(const std::string& runs_path, const std::string& out) {
  std::ifstream in(runs_path);
  require(in.good(), "cannot open " + runs_path);
  std::string header;
  require(static_cast<bool>(std::getline(in, header)), "empty runs table");

  auto split = [](const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) fields.push_back(field);
    return fields;
  };
  const std::vector<std::string> cols = split(header);
  auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < cols.size(); ++i)
      if (cols[i] == name) return i;
    fail(runs_path + " has no '" + name + "' column");
  };
  const std::size_t c_err = col("error");
  const std::size_t c_rwt = col("relative_wall_time");
  const std::size_t c_ok = col("ok");

  std::vector<RunRecord> records;
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split(line);
    require(fields.size() >= cols.size() - 1,
            "malformed row in " + runs_path + ": " + line);
    RunRecord r;
    r.error = std::stod(fields[c_err]);
    r.relative_wall_time = std::stod(fields[c_rwt]);
    r.ok = fields[c_ok] == "1";
    records.push_back(std::move(r));
    lines.push_back(line);
  }

  const std::vector<std::size_t> front = pareto_front(records);
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!out.empty()) {
    file.open(out);
    require(file.good(), "cannot write " + out);
    os = &file;
  }
  *os << "record," << header << '\n';
  for (std::size_t idx : front) *os << idx << ',' << lines[idx] << '\n';
  if (!out.empty())
    std::cout << "wrote " << out << " (" << front.size()
              << " pareto-optimal of " << records.size() << " records)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "space-time least-squares reduced-order modeling toolkit"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand(
      "run", "run a benchmark campaign described by a JSON config");
  std::string config_path, run_output;
  run->add_option("config", config_path, "campaign configuration file")
      ->required();
  run->add_option("--output", run_output,
                  "report directory (overrides the config's output_dir)");

  auto* fom = app.add_subcommand(
      "fom", "solve the full-order model and store the trajectory");
  std::string fom_problem, fom_scheme = "BE", fom_out;
  std::vector<double> fom_mu;
  double fom_dt = 0.0, fom_newton_tol = 1e-8;
  Index fom_steps = 0;
  fom->add_option("problem", fom_problem, "burgers or euler_nozzle")
      ->required()
      ->check(CLI::IsMember({"burgers", "euler_nozzle"}));
  fom->add_option("--mu", fom_mu, "parameter vector, comma separated")
      ->required()
      ->delimiter(',');
  fom->add_option("--scheme", fom_scheme, "time integrator name");
  fom->add_option("--dt", fom_dt, "time-step size (default per problem)");
  fom->add_option("--steps", fom_steps, "step count (default per problem)");
  fom->add_option("--newton-tol", fom_newton_tol, "Newton residual tolerance");
  fom->add_option("--out", fom_out, "output basename (.bin/.csv appended)");

  auto* bounds = app.add_subcommand(
      "bounds", "stability-constant growth sweep over time horizons");
  std::string bounds_scheme = "BE", bounds_out = "growth.csv";
  double bounds_dt = 1e-4, bounds_lf = 1.0, bounds_tmax = 0.0,
         bounds_tmin = 0.0;
  Index bounds_points = 9;
  bounds->add_option("--scheme", bounds_scheme, "time integrator name");
  bounds->add_option("--dt", bounds_dt, "time-step size");
  bounds->add_option("--lf", bounds_lf, "velocity Lipschitz constant");
  bounds->add_option("--T-max", bounds_tmax, "largest horizon")->required();
  bounds->add_option("--T-min", bounds_tmin,
                     "smallest horizon (default T-max/100)");
  bounds->add_option("--points", bounds_points, "horizon count");
  bounds->add_option("--out", bounds_out, "output CSV path");

  auto* pareto = app.add_subcommand(
      "pareto", "extract the non-dominated rows from a runs.csv table");
  std::string pareto_in, pareto_out;
  pareto->add_option("runs", pareto_in, "runs.csv produced by `run`")
      ->required();
  pareto->add_option("--out", pareto_out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
    if (*run) return cmd_run(config_path, run_output);
    if (*fom)
      return cmd_fom(fom_problem, fom_mu, fom_scheme, fom_dt, fom_steps,
                     fom_newton_tol, fom_out);
    if (*bounds)
      return cmd_bounds(bounds_scheme, bounds_dt, bounds_lf, bounds_tmax,
                        bounds_tmin, bounds_points, bounds_out);
    if (*pareto) return cmd_pareto(pareto_in, pareto_out);
    return 1;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

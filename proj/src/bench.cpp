// SPDX-License-Identifier: Apache-2.0
#include "stlspg/bench.hpp"

#include "stlspg/hyper_reduction.hpp"
#include "stlspg/io.hpp"
#include "stlspg/models.hpp"
#include "stlspg/spatial_rom.hpp"
#include "stlspg/tensor_decomp.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

namespace stlspg {

namespace {

using nlohmann::json;

const std::set<std::string>& known_variants() {
  static const std::set<std::string> names = {
      "lspg", "gnat", "st-lspg-1", "st-lspg-2", "st-gnat-1", "st-gnat-2"};
  return names;
}

bool is_spacetime(const std::string& name) {
  return name.rfind("st-", 0) == 0;
}

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  for (const auto& el : j.items())
    require(allowed.count(el.key()) != 0,
            "unknown key '" + el.key() + "' in " + where);
}

Vector parse_vector(const json& j, const std::string& where) {
  require(j.is_array() && !j.empty(), where + " must be a nonempty array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    require(j[i].is_number(), where + " entries must be numbers");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

std::vector<Vector> parse_points(const json& j, const std::string& where) {
  require(j.is_array() && !j.empty(), where + " must be a nonempty array");
  std::vector<Vector> pts;
  pts.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    pts.push_back(parse_vector(j[i], where + " entry"));
  for (const Vector& p : pts)
    require(p.size() == pts.front().size(),
            where + " entries must all have the same length");
  return pts;
}

Index parse_count(const json& j, const std::string& where) {
  require(j.is_number_integer(), where + " must be an integer");
  const auto v = j.get<std::int64_t>();
  require(v >= 0, where + " must be nonnegative");
  return static_cast<Index>(v);
}

json points_to_json(const std::vector<Vector>& pts) {
  json arr = json::array();
  for (const Vector& p : pts) {
    json row = json::array();
    for (Index i = 0; i < p.size(); ++i) row.push_back(p(i));
    arr.push_back(row);
  }
  return arr;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["problem"] = c.problem;
  j["scheme"] = c.scheme;
  j["dt"] = c.dt;
  j["num_steps"] = static_cast<std::int64_t>(c.num_steps);
  j["training"] = points_to_json(c.training);
  j["online"] = points_to_json(c.online);
  j["seed"] = c.seed;
  j["timing_repeats"] = static_cast<std::int64_t>(c.timing_repeats);
  j["newton_tol"] = c.newton_tol;
  j["output_dir"] = c.output_dir;
  json vars = json::array();
  for (const RomVariantConfig& v : c.variants) {
    json jv;
    jv["name"] = v.name;
    auto put = [&jv](const char* key, Index value) {
      if (value != 0) jv[key] = static_cast<std::int64_t>(value);
    };
    put("n_s", v.n_s);
    put("n_t", v.n_t);
    put("n_t_per_mode", v.n_t_per_mode);
    put("n_z", v.n_z);
    put("n_r", v.n_r);
    put("n_rs", v.n_rs);
    put("n_rt", v.n_rt);
    put("n_bar_s", v.n_bar_s);
    put("n_bar_t", v.n_bar_t);
    vars.push_back(jv);
  }
  j["variants"] = vars;
  return j;
}

double now_seconds(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string format_mu(const Vector& mu) {
  std::ostringstream os;
  os << std::setprecision(12);
  for (Index i = 0; i < mu.size(); ++i) {
    if (i) os << ";";
    os << mu(i);
  }
  return os.str();
}

std::string csv_number(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

std::string sanitize_field(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ' ';
  return s;
}

std::string record_row(const RunRecord& r) {
  std::ostringstream os;
  const Index iters = r.history.objective.empty()
                          ? Index(0)
                          : Index(r.history.objective.size()) - 1;
  os << r.variant << ',' << format_mu(r.mu) << ',' << r.dim << ','
     << csv_number(r.error) << ',' << r.component_evals << ',' << iters << ','
     << (r.ok ? 1 : 0) << ',' << sanitize_field(r.message) << ','
     << csv_number(r.online_seconds) << ',' << csv_number(r.fom_seconds) << ','
     << csv_number(r.relative_wall_time) << ',' << csv_number(r.speedup);
  return os.str();
}

const char* kRunsHeader =
    "variant,mu,dim,error,component_evals,iterations,ok,message,"
    "online_seconds,fom_seconds,relative_wall_time,speedup";

// ---------------------------------------------------------------------------
// Offline artifacts shared by every variant of one campaign.
struct CampaignContext {
  std::unique_ptr<SemiDiscreteModel> model;
  LinearMultistepScheme scheme = LinearMultistepScheme::from_name("BE");
  std::vector<Trajectory> training;
  StateTensor states;
  std::vector<Trajectory> fom_online;   // one per online point
  std::vector<double> fom_seconds;      // averaged solve time per point
};

std::unique_ptr<SemiDiscreteModel> make_model(const std::string& problem) {
  if (problem == "burgers") return make_burgers();
  if (problem == "euler_nozzle") return make_euler_nozzle();
  fail("unknown problem '" + problem + "'");
}

// Spatial trial basis shared by lspg/gnat and as the spatial factor of every
// space-time basis.
Matrix trial_spatial(const CampaignContext& ctx, Index n_s) {
  require(n_s >= 1, "n_s must be positive");
  return spatial_pod(ctx.states, n_s);
}

SpaceTimeBasis trial_st_basis(const CampaignContext& ctx,
                              const RomVariantConfig& v) {
  const Matrix spatial = trial_spatial(ctx, v.n_s);
  if (v.name == "st-lspg-1" || v.name == "st-gnat-1") {
    require(v.n_t_per_mode >= 1, v.name + " needs n_t_per_mode");
    return assemble_st_basis(
        spatial, temporal_basis_tailored(ctx.states, spatial, v.n_t_per_mode));
  }
  require(v.n_t >= 1, v.name + " needs n_t");
  return assemble_st_basis(
      spatial, temporal_basis_sthosvd(ctx.states, spatial, v.n_t));
}

// Projected training coordinates, one column per training parameter: initial
// guesses for residual-snapshot training solves and the data the online
// radial-basis initial guess interpolates.
Matrix projected_training_coordinates(const CampaignContext& ctx,
                                      const SpaceTimeBasis& trial) {
  Matrix coords(trial.total_dim(), Index(ctx.training.size()));
  for (std::size_t k = 0; k < ctx.training.size(); ++k)
    coords.col(Index(k)) = project_fom_solution(trial, ctx.training[k]);
  return coords;
}

GaussNewtonOptions training_gn_options() {
  GaussNewtonOptions gn;
  gn.max_iters = 12;
  gn.grad_tol = 1e-7;
  gn.normal_equations = true;  // streamed Gram: no dense space-time Jacobian
  return gn;
}

// Hyper-reduction offline chain for one st-gnat variant: residual snapshots
// from identity-weighted training solves, the factored residual basis, and
// the sequential greedy sample mesh (time steps first against all spatial
// rows, then spatial rows against the chosen steps).
SpaceTimeWeighting st_gnat_weighting(const CampaignContext& ctx,
                                     const RomVariantConfig& v,
                                     const SpaceTimeBasis& trial,
                                     const Matrix& train_coords) {
  ResidualSnapshotOptions snap;
  snap.method = ResidualSnapshotMethod::RomTraining;
  snap.parameters = std::vector<Vector>();
  for (const Trajectory& t : ctx.training) snap.parameters.push_back(t.mu);
  snap.training_coordinates = train_coords;
  snap.gauss_newton = training_gn_options();
  const StateTensor residuals = collect_residual_snapshots(
      *ctx.model, ctx.scheme, trial, ctx.training.front().dt, snap);

  const TemporalVariant variant = v.name == "st-gnat-1"
                                      ? TemporalVariant::Tailored
                                      : TemporalVariant::Sthosvd;
  const SpaceTimeBasis res_basis =
      residual_basis(residuals, variant, v.n_rs, v.n_rt);

  std::vector<Index> all_rows(std::size_t(ctx.model->dim()));
  std::iota(all_rows.begin(), all_rows.end(), Index(0));
  const std::vector<Index> times =
      greedy_temporal_samples(res_basis, v.n_bar_t, all_rows);
  const std::vector<Index> rows =
      greedy_spatial_samples(res_basis, v.n_bar_s, times);
  return SpaceTimeWeighting::gappy(res_basis,
                                   SampleSet::product_of(rows, times));
}

// Spatial GNAT offline chain: residual snapshots harvested from the
// Gauss-Newton iterates of identity-weighted training solves, POD, then
// greedy row selection.
SpatialWeighting gnat_weighting_from_training(const CampaignContext& ctx,
                                              const RomVariantConfig& v,
                                              const Matrix& trial,
                                              const ExperimentConfig& config) {
  std::vector<Vector> snaps;
  LspgOptions opts;
  opts.residual_observer = [&snaps](Index, Index, const Vector& r) {
    snaps.push_back(r);
  };
  for (const Trajectory& t : ctx.training)
    lspg_solve(*ctx.model, ctx.scheme, trial, SpatialWeighting::identity(),
               t.mu, config.dt, config.num_steps, opts);
  require(!snaps.empty(), "no residual snapshots collected");
  Matrix R(ctx.model->dim(), Index(snaps.size()));
  for (std::size_t k = 0; k < snaps.size(); ++k) R.col(Index(k)) = snaps[k];
  const Matrix res_basis = truncated_svd(R, v.n_r).U;
  return gnat_weighting(res_basis, greedy_rows(res_basis, v.n_z));
}

}  // namespace

// ---------------------------------------------------------------------------

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail("config parse error in " + path + ": " + e.what());
  }
  require(j.is_object(), "config root must be a JSON object");
  check_keys(j,
             {"problem", "scheme", "dt", "num_steps", "training", "online",
              "variants", "seed", "timing_repeats", "newton_tol",
              "output_dir"},
             "config");

  ExperimentConfig c;
  require(j.contains("problem"), "config needs 'problem'");
  c.problem = j.at("problem").get<std::string>();
  require(c.problem == "burgers" || c.problem == "euler_nozzle",
          "problem must be burgers or euler_nozzle");
  if (j.contains("scheme")) c.scheme = j.at("scheme").get<std::string>();
  LinearMultistepScheme::from_name(c.scheme);  // validates the name
  require(j.contains("dt"), "config needs 'dt'");
  c.dt = j.at("dt").get<double>();
  require(c.dt > 0.0, "dt must be positive");
  require(j.contains("num_steps"), "config needs 'num_steps'");
  c.num_steps = parse_count(j.at("num_steps"), "num_steps");
  require(c.num_steps >= 1, "num_steps must be positive");
  require(j.contains("training"), "config needs 'training'");
  c.training = parse_points(j.at("training"), "training");
  require(j.contains("online"), "config needs 'online'");
  c.online = parse_points(j.at("online"), "online");
  require(c.online.front().size() == c.training.front().size(),
          "training and online points must have the same length");
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("timing_repeats")) {
    c.timing_repeats = parse_count(j.at("timing_repeats"), "timing_repeats");
    require(c.timing_repeats >= 1, "timing_repeats must be positive");
  }
  if (j.contains("newton_tol")) {
    c.newton_tol = j.at("newton_tol").get<double>();
    require(c.newton_tol > 0.0, "newton_tol must be positive");
  }
  if (j.contains("output_dir"))
    c.output_dir = j.at("output_dir").get<std::string>();

  require(j.contains("variants"), "config needs 'variants'");
  const json& vars = j.at("variants");
  require(vars.is_array() && !vars.empty(),
          "variants must be a nonempty array");
  for (const json& jv : vars) {
    require(jv.is_object(), "variant entries must be objects");
    check_keys(jv,
               {"name", "n_s", "n_t", "n_t_per_mode", "n_z", "n_r", "n_rs",
                "n_rt", "n_bar_s", "n_bar_t"},
               "variant");
    RomVariantConfig v;
    require(jv.contains("name"), "variant needs 'name'");
    v.name = jv.at("name").get<std::string>();
    require(known_variants().count(v.name) != 0,
            "unknown variant '" + v.name + "'");
    auto get = [&jv](const char* key) {
      return jv.contains(key) ? parse_count(jv.at(key), key) : Index(0);
    };
    v.n_s = get("n_s");
    v.n_t = get("n_t");
    v.n_t_per_mode = get("n_t_per_mode");
    v.n_z = get("n_z");
    v.n_r = get("n_r");
    v.n_rs = get("n_rs");
    v.n_rt = get("n_rt");
    v.n_bar_s = get("n_bar_s");
    v.n_bar_t = get("n_bar_t");
    require(v.n_s >= 1, "variant '" + v.name + "' needs n_s >= 1");
    c.variants.push_back(std::move(v));
  }
  return c;
}

double relative_error(const Matrix& rom_states, const Matrix& fom_states) {
  require(rom_states.rows() == fom_states.rows() &&
              rom_states.cols() == fom_states.cols(),
          "trajectory shapes differ");
  require(fom_states.cols() >= 2, "need at least one time step");
  const Index nt = fom_states.cols() - 1;
  const double den = fom_states.rightCols(nt).norm();
  require(den > 0.0, "reference trajectory is identically zero");
  return (rom_states.rightCols(nt) - fom_states.rightCols(nt)).norm() / den;
}

bool variant_constraints_ok(const RomVariantConfig& v, std::string* why) {
  auto reject = [why](const std::string& reason) {
    if (why) *why = reason;
    return false;
  };
  if (v.name == "gnat") {
    if (2 * v.n_r < 3 * v.n_s)
      return reject("requires 1.5*n_s <= n_r (n_s=" + std::to_string(v.n_s) +
                    ", n_r=" + std::to_string(v.n_r) + ")");
    if (v.n_r > v.n_z)
      return reject("requires n_r <= n_z (n_r=" + std::to_string(v.n_r) +
                    ", n_z=" + std::to_string(v.n_z) + ")");
  } else if (v.name == "st-gnat-1" || v.name == "st-gnat-2") {
    const Index n_st =
        v.n_s * (v.name == "st-gnat-1" ? v.n_t_per_mode : v.n_t);
    const Index n_bar_r = v.n_rs * v.n_rt;
    if (2 * n_bar_r < 3 * n_st)
      return reject("requires 1.5*n_st <= n_rs*n_rt (n_st=" +
                    std::to_string(n_st) +
                    ", n_rs*n_rt=" + std::to_string(n_bar_r) + ")");
    if (n_bar_r > v.n_bar_s * v.n_bar_t)
      return reject("requires n_rs*n_rt <= n_bar_s*n_bar_t (n_rs*n_rt=" +
                    std::to_string(n_bar_r) + ", n_bar_s*n_bar_t=" +
                    std::to_string(v.n_bar_s * v.n_bar_t) + ")");
  }
  if (why) why->clear();
  return true;
}

CampaignResult run_campaign(const ExperimentConfig& config) {
  require(!config.variants.empty(), "config has no variants");
  require(!config.online.empty(), "config has no online points");

  CampaignContext ctx;
  ctx.model = make_model(config.problem);
  ctx.scheme = LinearMultistepScheme::from_name(config.scheme);
  for (const Vector& mu : config.training)
    require(mu.size() == ctx.model->parameter_dim(),
            "training parameter dimension mismatch");

  NewtonOptions newton;
  newton.tol = config.newton_tol;
  newton.max_iters = 200;

  // Offline: training trajectories and the centered state tensor.
  for (const Vector& mu : config.training)
    ctx.training.push_back(solve_fom(*ctx.model, ctx.scheme, mu, config.dt,
                                     config.num_steps, newton));
  ctx.states = build_state_tensor(ctx.training);

  // Reference solves at the online points, timed.
  for (const Vector& mu : config.online) {
    require(mu.size() == ctx.model->parameter_dim(),
            "online parameter dimension mismatch");
    double secs = 0.0;
    Trajectory traj;
    for (Index rep = 0; rep < config.timing_repeats; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      traj = solve_fom(*ctx.model, ctx.scheme, mu, config.dt,
                       config.num_steps, newton);
      secs += now_seconds(t0);
    }
    ctx.fom_online.push_back(std::move(traj));
    ctx.fom_seconds.push_back(secs / double(config.timing_repeats));
  }

  CampaignResult result;
  for (const RomVariantConfig& v : config.variants) {
    // Records for runs that never start (constraint violations, offline
    // failures) still appear once per online point.
    auto record_failure = [&](const std::string& message) {
      for (const Vector& mu : config.online) {
        RunRecord r;
        r.variant = v.name;
        r.mu = mu;
        r.ok = false;
        r.message = message;
        result.records.push_back(std::move(r));
      }
    };

    std::string why;
    if (!variant_constraints_ok(v, &why)) {
      record_failure("constraint filter: " + why);
      continue;
    }

    try {
      if (v.name == "lspg" || v.name == "gnat") {
        const Matrix trial = trial_spatial(ctx, v.n_s);
        const SpatialWeighting weighting =
            v.name == "lspg"
                ? SpatialWeighting::identity()
                : gnat_weighting_from_training(ctx, v, trial, config);
        for (std::size_t q = 0; q < config.online.size(); ++q) {
          RunRecord r;
          r.variant = v.name;
          r.mu = config.online[q];
          r.dim = trial.cols();
          r.fom_seconds = ctx.fom_seconds[q];
          try {
            LspgResult sol;
            ctx.model->reset_component_evaluations();
            double secs = 0.0;
            for (Index rep = 0; rep < config.timing_repeats; ++rep) {
              ctx.model->reset_component_evaluations();
              const auto t0 = std::chrono::steady_clock::now();
              sol = lspg_solve(*ctx.model, ctx.scheme, trial, weighting, r.mu,
                               config.dt, config.num_steps);
              secs += now_seconds(t0);
            }
            r.component_evals = ctx.model->component_evaluations();
            r.online_seconds = secs / double(config.timing_repeats);
            r.error = relative_error(sol.trajectory.states,
                                     ctx.fom_online[q].states);
            r.relative_wall_time = r.online_seconds / r.fom_seconds;
            r.speedup = r.fom_seconds / r.online_seconds;
            r.ok = true;
          } catch (const std::exception& e) {
            r.ok = false;
            r.message = e.what();
          }
          result.records.push_back(std::move(r));
        }
      } else {
        const SpaceTimeBasis trial = trial_st_basis(ctx, v);
        const Matrix train_coords =
            projected_training_coordinates(ctx, trial);
        const bool gappy = is_spacetime(v.name) && v.name.find("gnat") !=
                                                       std::string::npos;
        const SpaceTimeWeighting weighting =
            gappy ? st_gnat_weighting(ctx, v, trial, train_coords)
                  : SpaceTimeWeighting::identity();
        std::vector<Vector> train_mu;
        for (const Trajectory& t : ctx.training) train_mu.push_back(t.mu);

        for (std::size_t q = 0; q < config.online.size(); ++q) {
          RunRecord r;
          r.variant = v.name;
          r.mu = config.online[q];
          r.dim = trial.total_dim();
          r.fom_seconds = ctx.fom_seconds[q];
          try {
            StProblem problem;
            problem.model = ctx.model.get();
            problem.scheme = &ctx.scheme;
            problem.basis = &trial;
            problem.mu = r.mu;
            problem.dt = config.dt;

            GaussNewtonOptions gn;
            gn.normal_equations = !weighting.sampled();

            StRomSolution sol;
            double secs = 0.0;
            for (Index rep = 0; rep < config.timing_repeats; ++rep) {
              ctx.model->reset_component_evaluations();
              const auto t0 = std::chrono::steady_clock::now();
              const Vector y0 =
                  rbf_initial_guess(train_mu, train_coords, r.mu);
              sol = st_gauss_newton(problem, weighting, y0, gn);
              secs += now_seconds(t0);
            }
            r.component_evals = ctx.model->component_evaluations();
            r.online_seconds = secs / double(config.timing_repeats);
            const Matrix states = reconstruct_solution(
                trial, ctx.model->initial_state(r.mu), sol.yhat);
            r.error = relative_error(states, ctx.fom_online[q].states);
            r.relative_wall_time = r.online_seconds / r.fom_seconds;
            r.speedup = r.fom_seconds / r.online_seconds;
            r.history = sol.history;
            r.ok = true;
          } catch (const std::exception& e) {
            r.ok = false;
            r.message = e.what();
          }
          result.records.push_back(std::move(r));
        }
      }
    } catch (const std::exception& e) {
      record_failure(std::string("offline phase failed: ") + e.what());
    }
  }

  result.pareto = pareto_front(result.records);
  return result;
}

std::vector<std::size_t> pareto_front(const std::vector<RunRecord>& records) {
  std::vector<std::size_t> front;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].ok) continue;
    bool dominated = false;
    for (std::size_t j = 0; j < records.size() && !dominated; ++j) {
      if (j == i || !records[j].ok) continue;
      const bool no_worse =
          records[j].error <= records[i].error &&
          records[j].relative_wall_time <= records[i].relative_wall_time;
      const bool better =
          records[j].error < records[i].error ||
          records[j].relative_wall_time < records[i].relative_wall_time;
      dominated = no_worse && better;
    }
    if (!dominated) front.push_back(i);
  }
  return front;
}

void emit_reports(const CampaignResult& result, const ExperimentConfig& config,
                  const std::string& dir) {
  require(!result.records.empty(), "no run records to report");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);

  auto open = [&](const std::string& name) {
    std::ofstream out(dir + "/" + name);
    require(out.good(), "cannot write " + dir + "/" + name);
    return out;
  };

  {
    std::ofstream out = open("runs.csv");
    out << kRunsHeader << '\n';
    for (const RunRecord& r : result.records) out << record_row(r) << '\n';
    require(out.good(), "write failure on runs.csv");
  }
  {
    std::ofstream out = open("pareto.csv");
    out << "record," << kRunsHeader << '\n';
    for (std::size_t idx : result.pareto)
      out << idx << ',' << record_row(result.records[idx]) << '\n';
    require(out.good(), "write failure on pareto.csv");
  }
  {
    std::ofstream out = open("config_echo.json");
    out << config_to_json(config).dump(2) << '\n';
    require(out.good(), "write failure on config_echo.json");
  }
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    const RunRecord& r = result.records[i];
    if (r.history.objective.empty()) continue;
    std::ostringstream name;
    name << "conv_" << std::setw(4) << std::setfill('0') << i << '_'
         << r.variant << ".csv";
    std::ofstream out = open(name.str());
    out << "iteration,objective,gradient_norm\n";
    for (std::size_t k = 0; k < r.history.objective.size(); ++k)
      out << k << ',' << csv_number(r.history.objective[k]) << ','
          << csv_number(r.history.gradient_norm[k]) << '\n';
    require(out.good(), "write failure on " + name.str());
  }
}

}  // namespace stlspg

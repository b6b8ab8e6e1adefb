#include "lowmach/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <thread>

namespace lowmach {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

[[noreturn]] void bad_key(const std::string& where, const std::string& key) {
  throw ConfigurationError("unknown config key " + where + key);
}

GridSpec grid_from_json(const json& j) {
  GridSpec g;
  for (const auto& [key, value] : j.items()) {
    if (key == "dim") g.dim = value.get<int>();
    else if (key == "n") g.n = value.get<Index>();
    else if (key == "length") g.length = value.get<double>();
    else bad_key("grid.", key);
  }
  return g;
}

Eos eos_from_json(const json& j) {
  Eos e;
  for (const auto& [key, value] : j.items()) {
    if (key == "gamma") e.gamma = value.get<double>();
    else if (key == "p_bar") e.p_bar = value.get<double>();
    else bad_key("eos.", key);
  }
  return e;
}

DataRecipe recipe_from_json(const json& j) {
  DataRecipe r;
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") r.kind = data_kind_from_string(value.get<std::string>());
    else if (key == "amplitude") r.amplitude = value.get<double>();
    else if (key == "k_min") r.k_min = value.get<int>();
    else if (key == "k_max") r.k_max = value.get<int>();
    else if (key == "entropy_amplitude") r.entropy_amplitude = value.get<double>();
    else if (key == "base_entropy") r.base_entropy = value.get<double>();
    else if (key == "bump_radius") r.bump_radius = value.get<double>();
    else if (key == "bump_steepness") r.bump_steepness = value.get<double>();
    else bad_key("recipe.", key);
  }
  return r;
}

json record_json(const DiagnosticsRecord& r) {
  json j;
  const auto row = as_row(r);
  for (std::size_t c = 0; c < row.size(); ++c) j[std::string(kDiagnosticsColumns[c])] = row[c];
  return j;
}

json invariants_json(const InvariantSummary& s) {
  return {{"max_divH_residual", s.max_divH},
          {"max_coupling_residual", s.max_coupling},
          {"max_identity112_residual", s.max_identity112},
          {"entropy_max_rise", s.entropy_max_rise},
          {"entropy_min_drop", s.entropy_min_drop},
          {"total_energy_drift", s.energy_drift},
          {"sup_sobolev4", s.sup_sobolev4},
          {"initial_sobolev4", s.sobolev4_initial},
          {"left_smooth_window", s.left_smooth_window}};
}

std::vector<std::string> csv_comments(const std::string& title, const std::string& hash,
                                      const std::vector<std::string>& warnings) {
  std::vector<std::string> out{title, "config_hash: " + hash};
  for (const auto& w : warnings) out.push_back("warning: " + w);
  return out;
}

std::vector<std::vector<double>> compressible_rows(const std::vector<DiagnosticsRecord>& records) {
  std::vector<std::vector<double>> rows;
  for (const auto& r : records) {
    const auto a = as_row(r);
    rows.emplace_back(a.begin(), a.end());
  }
  return rows;
}

std::vector<std::vector<double>> reference_rows(const std::vector<ReferenceRecord>& records) {
  std::vector<std::vector<double>> rows;
  for (const auto& r : records) {
    const auto a = as_row(r);
    rows.emplace_back(a.begin(), a.end());
  }
  return rows;
}

void save_snapshot(const fs::path& path, Snapshot snap, const std::string& hash,
                   const std::vector<std::string>& warnings) {
  snap.metadata["config_hash"] = hash;
  snap.metadata["warnings"] = warnings;
  write_snapshot(path, snap);
}

std::string torus_warning(const RunConfig& config) {
  return "torus substitution: periodic box of side " + short_double(config.grid.length) +
         " stands in for the whole space; the entropy perturbation is compactly supported inside the box and "
         "dispersive decay to infinity is not represented";
}

bool on_sample_grid(double t, double t0, double interval) {
  const double k = std::round((t - t0) / interval);
  return std::abs(t - t0 - k * interval) <= 1e-9 * interval;
}

std::vector<std::string> run_warnings(const RunConfig& config, const CompressibleRunResult& r) {
  std::vector<std::string> w = limitation_warnings(config, r.initial);
  if (!r.record.complete) {
    w.push_back("eps=" + short_double(r.eps) + ": run stopped at t=" + short_double(r.record.final_state.t) +
                ": " + r.record.failure);
  }
  if (r.invariants.left_smooth_window) {
    w.push_back("eps=" + short_double(r.eps) + ": left the smooth window (non-finite state or sobolev4 doubled)");
  }
  return w;
}

json order_json(const OrderFit& fit, const std::vector<double>& pairwise) {
  json j;
  j["defined"] = fit.defined;
  j["order"] = fit.defined ? json(fit.order) : json(nullptr);
  j["fit_residual"] = fit.defined ? json(fit.fit_residual) : json(nullptr);
  j["reliable"] = fit.reliable;
  j["pairwise"] = pairwise;
  return j;
}

double spread(const std::vector<double>& values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo <= 0.0) return std::numeric_limits<double>::infinity();
  return *hi / *lo;
}

int fail_with(const RunConfig& config, const std::string& type, const std::string& message) {
  std::string hash;
  try {
    hash = config_hash(config);
  } catch (...) {
  }
  report_error(config.out_dir, type, message, hash);
  return type == "configuration_error" || type == "snapshot_error" ? 2 : 1;
}

template <class Body>
int guarded(const RunConfig& config, Body body) {
  try {
    config.validate();
    return body();
  } catch (const SnapshotError& e) {
    return fail_with(config, "snapshot_error", e.what());
  } catch (const ConvergenceError& e) {
    return fail_with(config, "convergence_error", e.what());
  } catch (const std::invalid_argument& e) {
    return fail_with(config, "configuration_error", e.what());
  } catch (const std::exception& e) {
    return fail_with(config, "runtime_error", e.what());
  }
}

double single_eps(const RunConfig& config, const char* verb) {
  if (config.eps_list.size() != 1) {
    throw ConfigurationError(std::string(verb) + " needs exactly one eps; pass --eps-override");
  }
  return config.eps_list.front();
}

}  // namespace

void RunConfig::validate() const {
  try {
    grid.validate();
    eos.validate();
    seeded_recipe().validate(grid);
  } catch (const ConfigurationError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigurationError(e.what());
  }
  if (eps_list.empty()) throw ConfigurationError("eps_list must not be empty");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0 && eps_list[i] <= 1.0)) throw ConfigurationError("every eps must lie in (0, 1]");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1])) {
      throw ConfigurationError("eps_list must be strictly decreasing");
    }
  }
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigurationError("T must be positive");
  if (!(cfl > 0.0 && cfl < 1.0)) throw ConfigurationError("cfl must lie in (0, 1)");
  if (observer_cadence < 1) throw ConfigurationError("observer_cadence must be >= 1");
  if (samples < 1) throw ConfigurationError("samples must be >= 1");
  if (!(tol_elliptic > 0.0)) throw ConfigurationError("tol_elliptic must be positive");
  if (identity_fields < 1) throw ConfigurationError("identities.fields must be >= 1");
  if (!(identity_threshold >= 0.0)) throw ConfigurationError("identities.threshold must be >= 0");
}

DataRecipe RunConfig::seeded_recipe() const {
  DataRecipe r = recipe;
  r.seed = seed;
  return r;
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigurationError("config must be a JSON object");
  RunConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "grid") c.grid = grid_from_json(value);
      else if (key == "eos") c.eos = eos_from_json(value);
      else if (key == "recipe") c.recipe = recipe_from_json(value);
      else if (key == "eps_list") c.eps_list = value.get<std::vector<double>>();
      else if (key == "T") c.T = value.get<double>();
      else if (key == "cfl") c.cfl = value.get<double>();
      else if (key == "observer_cadence") c.observer_cadence = value.get<int>();
      else if (key == "samples") c.samples = value.get<int>();
      else if (key == "tol_elliptic") c.tol_elliptic = value.get<double>();
      else if (key == "out_dir") c.out_dir = value.get<std::string>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "snapshots") c.snapshots = value.get<bool>();
      else if (key == "restart") c.restart = value.get<std::string>();
      else if (key == "identities") {
        for (const auto& [k, v] : value.items()) {
          if (k == "fields") c.identity_fields = v.get<int>();
          else if (k == "threshold") c.identity_threshold = v.get<double>();
          else bad_key("identities.", k);
        }
      } else {
        bad_key("", key);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigurationError(std::string("config: ") + e.what());
  }
  return c;
}

json to_json(const RunConfig& c) {
  return {{"grid", {{"dim", c.grid.dim}, {"n", c.grid.n}, {"length", c.grid.length}}},
          {"eos", {{"gamma", c.eos.gamma}, {"p_bar", c.eos.p_bar}}},
          {"recipe",
           {{"kind", to_string(c.recipe.kind)},
            {"amplitude", c.recipe.amplitude},
            {"k_min", c.recipe.k_min},
            {"k_max", c.recipe.k_max},
            {"entropy_amplitude", c.recipe.entropy_amplitude},
            {"base_entropy", c.recipe.base_entropy},
            {"bump_radius", c.recipe.bump_radius},
            {"bump_steepness", c.recipe.bump_steepness}}},
          {"eps_list", c.eps_list},
          {"T", c.T},
          {"cfl", c.cfl},
          {"observer_cadence", c.observer_cadence},
          {"samples", c.samples},
          {"tol_elliptic", c.tol_elliptic},
          {"out_dir", c.out_dir},
          {"seed", c.seed},
          {"snapshots", c.snapshots},
          {"restart", c.restart},
          {"identities", {{"fields", c.identity_fields}, {"threshold", c.identity_threshold}}}};
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open config " + path.string());
  try {
    return config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigurationError("config " + path.string() + ": " + e.what());
  }
}

std::string config_hash(const RunConfig& config) {
  json j = to_json(config);
  j.erase("out_dir");
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double wrap_around_time(const CompressibleState& state, const Eos& eos, double length) {
  const CoefficientFields c = coefficients(state, eos);
  return state.eps * length * std::sqrt((c.a * c.r).minCoeff());
}

std::vector<std::string> limitation_warnings(const RunConfig& config, const CompressibleState& state) {
  std::vector<std::string> w{torus_warning(config)};
  const double t_wrap = wrap_around_time(state, config.eos, config.grid.length);
  if (config.T > t_wrap) {
    w.push_back("wrap-around: T=" + short_double(config.T) + " exceeds the acoustic crossing time " +
                short_double(t_wrap) + " at eps=" + short_double(state.eps) +
                "; sound waves re-enter the periodic box");
  }
  return w;
}

void write_csv(const fs::path& path, const std::vector<std::string>& comments,
               std::span<const std::string_view> columns, const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  for (const auto& c : comments) out << "# " << c << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

CompressibleRunResult run_compressible_from(const RunConfig& config, const CompressibleState& state0) {
  const SpectralGrid grid(config.grid);
  validate(grid, state0);
  CompressibleRunResult result;
  result.eps = state0.eps;
  result.initial = state0;
  result.wrap_around_time = wrap_around_time(state0, config.eos, config.grid.length);

  RunOptions options;
  options.T = config.T;
  options.cfl = config.cfl;
  options.observer_cadence = config.observer_cadence;
  options.sample_interval = config.T / config.samples;

  InvariantSummary& inv = result.invariants;
  const double s_max0 = state0.S.maxCoeff();
  const double s_min0 = state0.S.minCoeff();
  double energy0 = 0.0;
  const std::vector<CompressibleObserver> observers{[&](const CompressibleState& s) {
    const DiagnosticsRecord row = observe(grid, s, config.eos);
    if (result.rows.empty()) {
      energy0 = row.total_energy;
      inv.sobolev4_initial = row.sobolev4;
    }
    result.rows.push_back(row);
    inv.max_divH = std::max(inv.max_divH, row.divH_residual);
    inv.max_coupling = std::max(inv.max_coupling, row.coupling_residual);
    inv.max_identity112 = std::max(inv.max_identity112, row.identity112_residual);
    inv.entropy_max_rise = std::max(inv.entropy_max_rise, s.S.maxCoeff() - s_max0);
    inv.entropy_min_drop = std::max(inv.entropy_min_drop, s_min0 - s.S.minCoeff());
    inv.energy_drift = std::max(inv.energy_drift, std::abs(row.total_energy / energy0 - 1.0));
    inv.sup_sobolev4 = std::max(inv.sup_sobolev4, row.sobolev4);
    if (on_sample_grid(s.t, state0.t, options.sample_interval) &&
        (result.samples.empty() || result.samples.back().t != s.t)) {
      result.samples.push_back(s);
    }
  }};
  result.record = run(grid, state0, config.eos, options, observers);
  inv.left_smooth_window = !result.record.complete || inv.sup_sobolev4 > 2.0 * inv.sobolev4_initial;
  return result;
}

CompressibleRunResult run_compressible_case(const RunConfig& config, double eps) {
  const SpectralGrid grid(config.grid);
  if (!config.restart.empty()) {
    const CompressibleState s = compressible_from_snapshot(grid, read_snapshot(config.restart));
    if (s.eps != eps) {
      throw ConfigurationError("restart snapshot has eps=" + format_double(s.eps) + ", config asks for " +
                               format_double(eps));
    }
    return run_compressible_from(config, s);
  }
  const CompressibleData data = make_compressible_data(config.seeded_recipe(), eps, grid, config.eos);
  CompressibleRunResult result = run_compressible_from(config, data.state);
  result.h4_norm = data.h4_norm;
  result.m0_bound = data.m0_bound;
  return result;
}

IncompressibleState reference_initial_data(const RunConfig& config) {
  const SpectralGrid grid(config.grid);
  const DataRecipe recipe = config.seeded_recipe();
  if (recipe.kind == DataKind::general) {
    return make_family_limit_data(recipe, grid, config.eos, config.tol_elliptic);
  }
  const CompressibleData smallest = make_compressible_data(recipe, config.eps_list.back(), grid, config.eos);
  return make_limit_data(grid, smallest.state, config.eos, config.tol_elliptic);
}

ReferenceRunResult run_reference(const RunConfig& config, const IncompressibleState& state0) {
  const SpectralGrid grid(config.grid);
  ReferenceRunResult result;
  result.initial = state0;
  RunOptions options;
  options.T = config.T;
  options.cfl = config.cfl;
  options.observer_cadence = config.observer_cadence;
  options.sample_interval = config.T / config.samples;
  const std::vector<IncompressibleObserver> observers{[&](const IncompressibleState& s) {
    const ReferenceRecord row = observe(grid, s, config.eos);
    result.rows.push_back(row);
    const double e0 = result.rows.front().energy;
    if (e0 > 0.0) result.energy_drift = std::max(result.energy_drift, std::abs(row.energy / e0 - 1.0));
    if (on_sample_grid(s.t, state0.t, options.sample_interval) &&
        (result.samples.empty() || result.samples.back().t != s.t)) {
      result.samples.push_back(s);
    }
  }};
  result.record = run(grid, state0, config.eos, options, config.tol_elliptic, observers);
  return result;
}

AcousticRefinement acoustic_refinement(const SpectralGrid& grid, const CompressibleState& state, const Eos& eos,
                                       double cfl) {
  AcousticRefinement a;
  a.h = stable_dt(grid, state, eos, cfl) / 4.0;
  a.coarse = acoustic_residual_at(grid, state, a.h, eos);
  a.fine = acoustic_residual_at(grid, state, a.h / 2.0, eos);
  a.ratio = a.coarse / a.fine;
  return a;
}

int worker_count() {
  if (const char* env = std::getenv("LOWMACH_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SweepOutcome run_sweep(const RunConfig& config, int workers) {
  config.validate();
  if (config.eps_list.size() < 2) throw ConfigurationError("sweep needs ≥ 2 eps values");
  if (!config.restart.empty()) throw ConfigurationError("restart is only supported by the run verbs");
  const SpectralGrid grid(config.grid);

  SweepOutcome out;
  out.config_hash = config_hash(config);
  out.reference = run_reference(config, reference_initial_data(config));

  out.members.resize(config.eps_list.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < out.members.size(); i = next++) {
      SweepMember& m = out.members[i];
      m.run.eps = config.eps_list[i];
      try {
        m.run = run_compressible_case(config, config.eps_list[i]);
        if (m.run.record.complete) {
          m.acoustic = acoustic_refinement(grid, m.run.record.final_state, config.eos, config.cfl);
        }
      } catch (const std::exception& e) {
        m.error = e.what();
      }
    }
  };
  const int n_threads = std::clamp(workers, 1, static_cast<int>(out.members.size()));
  std::vector<std::thread> pool;
  for (int k = 1; k < n_threads; ++k) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  // Assembly below is sequential and in eps order, so the outputs do not
  // depend on the worker count.
  out.warnings.push_back(torus_warning(config));
  std::vector<CompressibleTrajectory> completed;
  for (const SweepMember& m : out.members) {
    if (!m.error.empty()) {
      out.warnings.push_back("eps=" + short_double(m.run.eps) + ": failed: " + m.error);
      continue;
    }
    for (const auto& w : run_warnings(config, m.run)) {
      if (w != out.warnings.front()) out.warnings.push_back(w);
    }
    if (m.run.record.complete && out.reference.record.complete) {
      completed.push_back({m.run.eps, m.run.samples});
    }
  }
  if (!out.reference.record.complete) {
    out.warnings.push_back("reference run stopped: " + out.reference.record.failure +
                           "; no errors against the reference");
  } else if (!completed.empty()) {
    out.report = convergence_metrics(grid, completed, out.reference.samples, config.eos);
  }
  const bool general = config.recipe.kind == DataKind::general;
  const bool with_orders = out.report.per_eps.size() >= 3;
  if (!with_orders) out.warnings.push_back("fewer than 3 completed eps values: orders omitted");

  json summary;
  summary["config_hash"] = out.config_hash;
  summary["config"] = to_json(config);
  summary["eps0"] = config.eps0();
  summary["data_kind"] = to_string(config.recipe.kind);

  json per_eps = json::array();
  double m0 = 0.0;
  for (const SweepMember& m : out.members) {
    json e;
    e["eps"] = m.run.eps;
    if (!m.error.empty()) {
      e["complete"] = false;
      e["error"] = m.error;
      per_eps.push_back(e);
      continue;
    }
    m0 = std::max(m0, m.run.m0_bound);
    e["complete"] = m.run.record.complete;
    e["steps"] = m.run.record.steps;
    e["failure"] = m.run.record.failure;
    e["initial_h4_norm"] = m.run.h4_norm;
    e["wrap_around_time"] = m.run.wrap_around_time;
    e["final"] = m.run.rows.empty() ? json(nullptr) : record_json(m.run.rows.back());
    e["invariants"] = invariants_json(m.run.invariants);
    if (m.acoustic) {
      e["acoustic_residual"] = {{"h", m.acoustic->h},
                                {"residual_h", m.acoustic->coarse},
                                {"residual_h_half", m.acoustic->fine},
                                {"ratio", m.acoustic->ratio}};
    }
    per_eps.push_back(e);
  }
  summary["per_eps"] = per_eps;
  summary["m0_bound"] = m0;

  const std::vector<std::string_view> general_metrics = {"linf_q", "l2t_forcing", "sup_sobolev4",
                                                         "quad_energy_growth"};
  auto reported = [&](std::string_view name) {
    return !general || std::find(general_metrics.begin(), general_metrics.end(), name) != general_metrics.end();
  };
  json errors = json::array();
  for (const EpsMetrics& m : out.report.per_eps) {
    json e;
    e["eps"] = m.eps;
    for (std::string_view name : kOrderMetrics) {
      if (reported(name)) e[std::string(name)] = metric_value(m, name);
    }
    errors.push_back(e);
  }
  summary["errors_vs_ref"] = errors;

  if (with_orders) {
    json orders;
    for (std::string_view name : kOrderMetrics) {
      const std::string key(name);
      // Uniform-bound quantities are not expected to converge.
      if (!reported(name) || name == "sup_sobolev4" || name == "quad_energy_growth") continue;
      if (general && name != "l2t_forcing") continue;
      const OrderFit& fit = out.report.orders.at(key);
      orders[key] = order_json(fit, out.report.pairwise.at(key));
      if (fit.defined && !fit.reliable) out.warnings.push_back("order unreliable: " + key);
    }
    summary["orders"] = orders;
  }

  std::vector<double> sob, growth;
  for (const EpsMetrics& m : out.report.per_eps) {
    sob.push_back(m.sup_sobolev4);
    growth.push_back(m.quad_energy_growth);
  }
  summary["uniform_bounds"] = {
      {"sup_sobolev4_spread", spread(sob)},
      {"quad_energy_growth_spread", spread(growth)},
      {"shared_growth_constant", growth.empty() ? 0.0 : std::max(0.0, *std::max_element(growth.begin(), growth.end()))}};

  summary["reference"] = {{"complete", out.reference.record.complete},
                          {"steps", out.reference.record.steps},
                          {"failure", out.reference.record.failure},
                          {"energy_drift", out.reference.energy_drift}};
  summary["warnings"] = out.warnings;
  out.summary = std::move(summary);
  return out;
}

double IdentityResiduals::max() const {
  return std::max({skew_adjoint, div_curl, curl_grad, identity112, coupling});
}

IdentityResiduals identity_residuals(const SpectralGrid& grid, std::uint64_t seed, int index) {
  const int k_max = static_cast<int>((grid.spec().n - 1) / 3);
  const int dim = grid.dim();
  std::uint64_t stream = static_cast<std::uint64_t>(index) * 16;
  auto scalar = [&] { return grid.dealias(random_band_limited_field(grid, 1, k_max, 1.0, seed, stream++)); };
  auto vector = [&](int cols) {
    VectorField v(grid.size(), cols);
    for (int c = 0; c < cols; ++c) v.col(c) = scalar();
    return v;
  };
  const ScalarField q = scalar();
  const VectorField u = vector(dim);
  const VectorField H = vector(dim);
  const VectorField A = vector(dim == 2 ? 1 : 3);

  IdentityResiduals r;
  r.skew_adjoint = skew_adjoint_residual(grid, q, u);
  r.div_curl = grid.norm_l2(grid.div(grid.curl(A))) / grid.sobolev_norm(A, 2.0);
  r.curl_grad = grid.norm_l2(grid.curl(grid.grad(q))) / grid.sobolev_norm(q, 2.0);
  r.identity112 = identity112_residual(grid, u, H);
  r.coupling = coupling_cancellation_residual(grid, u, H);
  return r;
}

void report_error(const fs::path& out_dir, const std::string& type, const std::string& message,
                  const std::string& hash) {
  json j = {{"error", {{"type", type}, {"message", message}}}};
  if (!hash.empty()) j["config_hash"] = hash;
  std::cout << j.dump() << std::endl;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!ec) {
    std::ofstream out(out_dir / "error.json");
    out << j.dump(2) << '\n';
  }
}

int cmd_run_compressible(const RunConfig& config) {
  return guarded(config, [&] {
    const double eps = single_eps(config, "run-compressible");
    const fs::path dir(config.out_dir);
    fs::create_directories(dir);
    const std::string hash = config_hash(config);
    const CompressibleRunResult r = run_compressible_case(config, eps);
    const std::vector<std::string> warnings = run_warnings(config, r);

    std::vector<std::string> comments = csv_comments("lowmach compressible diagnostics", hash, warnings);
    comments.insert(comments.begin() + 2, "eps: " + format_double(eps));
    write_csv(dir / "diagnostics.csv", comments, kDiagnosticsColumns, compressible_rows(r.rows));

    const SpectralGrid grid(config.grid);
    if (config.snapshots) {
      save_snapshot(dir / "state_initial.lmsnap", to_snapshot(grid, r.initial), hash, warnings);
      save_snapshot(dir / (r.record.complete ? "state_final.lmsnap" : "state_failure.lmsnap"),
                    to_snapshot(grid, r.record.final_state), hash, warnings);
    }
    json summary = {{"config_hash", hash},
                    {"config", to_json(config)},
                    {"eps", eps},
                    {"complete", r.record.complete},
                    {"steps", r.record.steps},
                    {"failure", r.record.failure},
                    {"initial_h4_norm", r.h4_norm},
                    {"m0_bound", r.m0_bound},
                    {"wrap_around_time", r.wrap_around_time},
                    {"final", r.rows.empty() ? json(nullptr) : record_json(r.rows.back())},
                    {"invariants", invariants_json(r.invariants)},
                    {"warnings", warnings}};
    write_json(dir / "run.json", summary);
    if (!r.record.complete) {
      report_error(dir, "integration_failure", r.record.failure, hash);
      return 1;
    }
    return 0;
  });
}

int cmd_run_incompressible(const RunConfig& config) {
  return guarded(config, [&] {
    const fs::path dir(config.out_dir);
    fs::create_directories(dir);
    const std::string hash = config_hash(config);
    const SpectralGrid grid(config.grid);
    const IncompressibleState init = config.restart.empty()
                                         ? reference_initial_data(config)
                                         : incompressible_from_snapshot(grid, read_snapshot(config.restart));
    const ReferenceRunResult r = run_reference(config, init);
    std::vector<std::string> warnings{torus_warning(config)};
    if (!r.record.complete) warnings.push_back("reference run stopped: " + r.record.failure);

    write_csv(dir / "reference.csv", csv_comments("lowmach incompressible reference", hash, warnings),
              kReferenceColumns, reference_rows(r.rows));
    if (config.snapshots) {
      save_snapshot(dir / "reference_initial.lmsnap", to_snapshot(grid, r.initial), hash, warnings);
      save_snapshot(dir / (r.record.complete ? "reference_final.lmsnap" : "reference_failure.lmsnap"),
                    to_snapshot(grid, r.record.final_state), hash, warnings);
    }
    write_json(dir / "run.json", {{"config_hash", hash},
                                  {"config", to_json(config)},
                                  {"complete", r.record.complete},
                                  {"steps", r.record.steps},
                                  {"failure", r.record.failure},
                                  {"energy_drift", r.energy_drift},
                                  {"warnings", warnings}});
    if (!r.record.complete) {
      report_error(dir, "integration_failure", r.record.failure, hash);
      return 1;
    }
    return 0;
  });
}

int cmd_sweep(const RunConfig& config) {
  return guarded(config, [&] {
    const SweepOutcome s = run_sweep(config, worker_count());
    const fs::path dir(config.out_dir);
    fs::create_directories(dir / "reference");
    const SpectralGrid grid(config.grid);
    const std::vector<std::string> torus{torus_warning(config)};
    write_csv(dir / "reference" / "reference.csv",
              csv_comments("lowmach incompressible reference", s.config_hash, torus), kReferenceColumns,
              reference_rows(s.reference.rows));
    for (const SweepMember& m : s.members) {
      if (!m.error.empty()) continue;
      const fs::path sub = dir / ("eps_" + short_double(m.run.eps));
      fs::create_directories(sub);
      const std::vector<std::string> warnings = run_warnings(config, m.run);
      std::vector<std::string> comments = csv_comments("lowmach compressible diagnostics", s.config_hash, warnings);
      comments.insert(comments.begin() + 2, "eps: " + format_double(m.run.eps));
      write_csv(sub / "diagnostics.csv", comments, kDiagnosticsColumns, compressible_rows(m.run.rows));
      if (config.snapshots) {
        save_snapshot(sub / "state_final.lmsnap", to_snapshot(grid, m.run.record.final_state), s.config_hash,
                      warnings);
      }
    }
    write_json(dir / "sweep.json", s.summary);
    for (const SweepMember& m : s.members) {
      if (!m.error.empty() || !m.run.record.complete) return 1;
    }
    return s.reference.record.complete ? 0 : 1;
  });
}

int cmd_check_identities(const RunConfig& config) {
  return guarded(config, [&] {
    const fs::path dir(config.out_dir);
    fs::create_directories(dir);
    const std::string hash = config_hash(config);
    const SpectralGrid grid(config.grid);
    IdentityResiduals worst;
    int failures = 0;
    json fields = json::array();
    for (int i = 0; i < config.identity_fields; ++i) {
      const IdentityResiduals r = identity_residuals(grid, config.seed, i);
      worst.skew_adjoint = std::max(worst.skew_adjoint, r.skew_adjoint);
      worst.div_curl = std::max(worst.div_curl, r.div_curl);
      worst.curl_grad = std::max(worst.curl_grad, r.curl_grad);
      worst.identity112 = std::max(worst.identity112, r.identity112);
      worst.coupling = std::max(worst.coupling, r.coupling);
      // Strict: a zero threshold fails every field, roundoff-exact zeros included.
      const bool pass = r.max() < config.identity_threshold;
      if (!pass) ++failures;
      fields.push_back({{"index", i},
                        {"skew_adjoint", r.skew_adjoint},
                        {"div_curl", r.div_curl},
                        {"curl_grad", r.curl_grad},
                        {"identity112", r.identity112},
                        {"coupling", r.coupling},
                        {"pass", pass}});
    }
    const std::vector<std::pair<std::string, double>> rows = {{"skew_adjoint", worst.skew_adjoint},
                                                              {"div_curl", worst.div_curl},
                                                              {"curl_grad", worst.curl_grad},
                                                              {"identity112", worst.identity112},
                                                              {"coupling", worst.coupling}};
    json max_json;
    for (const auto& [name, value] : rows) {
      max_json[name] = value;
      std::cout << name << " max=" << format_double(value)
                << (value < config.identity_threshold ? " PASS" : " FAIL") << '\n';
    }
    std::cout << (failures == 0 ? "all identities pass" : std::to_string(failures) + " field sets failed") << " ("
              << config.identity_fields << " fields, threshold " << short_double(config.identity_threshold)
              << ")\n";
    write_json(dir / "identities.json", {{"config_hash", hash},
                                         {"seed", config.seed},
                                         {"threshold", config.identity_threshold},
                                         {"fields", config.identity_fields},
                                         {"failures", failures},
                                         {"passed", failures == 0},
                                         {"max_residuals", max_json},
                                         {"per_field", fields},
                                         {"warnings", {torus_warning(config)}}});
    return failures == 0 ? 0 : 1;
  });
}

}  // namespace lowmach

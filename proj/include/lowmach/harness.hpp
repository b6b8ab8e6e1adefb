// Run configuration, single runs, eps sweeps and their on-disk outputs.
#pragma once

#include "lowmach/diagnostics.hpp"
#include "lowmach/initial_data.hpp"
#include "lowmach/snapshot.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace lowmach {

struct RunConfig {
  GridSpec grid;
  Eos eos;
  DataRecipe recipe;
  std::vector<double> eps_list = {0.2, 0.1, 0.05, 0.025};
  double T = 0.5;
  double cfl = 0.4;
  int observer_cadence = 10;
  /// Convergence metrics use T / samples as the common time grid.
  int samples = 20;
  double tol_elliptic = 1e-12;
  std::string out_dir = "out";
  /// Global seed; overrides recipe.seed.
  std::uint64_t seed = 1;
  bool snapshots = true;
  /// Snapshot to start from instead of generated data (empty: none).
  std::string restart;
  int identity_fields = 100;
  double identity_threshold = 1e-10;

  /// Throws ConfigurationError.
  void validate() const;
  /// max(eps_list).
  double eps0() const { return eps_list.front(); }
  DataRecipe seeded_recipe() const;
};

/// Missing keys keep their defaults; unknown keys are an error.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& config);
RunConfig load_config(const std::filesystem::path& path);

/// 64-bit FNV-1a of the canonical JSON of everything except out_dir, as
/// 16 hex digits.
std::string config_hash(const RunConfig& config);

/// Fastest sound crossing of the box: eps L min sqrt(a r).
double wrap_around_time(const CompressibleState& state, const Eos& eos, double length);

/// Torus substitution note plus, when T exceeds the wrap-around time of
/// `state`, the wrap-around warning.
std::vector<std::string> limitation_warnings(const RunConfig& config, const CompressibleState& state);

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& comments,
               std::span<const std::string_view> columns, const std::vector<std::vector<double>>& rows);

struct InvariantSummary {
  double max_divH = 0.0;
  double max_coupling = 0.0;
  double max_identity112 = 0.0;
  /// max S(t) - max S(0) and min S(0) - min S(t), floored at 0.
  double entropy_max_rise = 0.0;
  double entropy_min_drop = 0.0;
  double energy_drift = 0.0;
  double sup_sobolev4 = 0.0;
  double sobolev4_initial = 0.0;
  bool left_smooth_window = false;
};

struct CompressibleRunResult {
  double eps = 0.0;
  RunRecord record;
  std::vector<DiagnosticsRecord> rows;
  /// States on the T / samples grid.
  std::vector<CompressibleState> samples;
  InvariantSummary invariants;
  CompressibleState initial;
  double h4_norm = 0.0;
  double m0_bound = 0.0;
  double wrap_around_time = 0.0;
};

/// Generated data for `eps` (or the restart snapshot), integrated to T.
CompressibleRunResult run_compressible_case(const RunConfig& config, double eps);
CompressibleRunResult run_compressible_from(const RunConfig& config, const CompressibleState& state0);

struct ReferenceRunResult {
  IncompressibleRunRecord record;
  std::vector<ReferenceRecord> rows;
  std::vector<IncompressibleState> samples;
  IncompressibleState initial;
  double energy_drift = 0.0;
};

/// make_limit_data of the smallest-eps member for well-prepared recipes,
/// of the solenoidal core for general ones.
IncompressibleState reference_initial_data(const RunConfig& config);
ReferenceRunResult run_reference(const RunConfig& config, const IncompressibleState& state0);

struct AcousticRefinement {
  double h = 0.0;
  double coarse = 0.0;
  double fine = 0.0;
  double ratio = 0.0;
};

/// Wave-equation residual at `state` with steps h = stable_dt / 4 and h / 2.
AcousticRefinement acoustic_refinement(const SpectralGrid& grid, const CompressibleState& state, const Eos& eos,
                                       double cfl);

struct SweepMember {
  CompressibleRunResult run;
  std::optional<AcousticRefinement> acoustic;
  /// Exception text when the member could not be run at all.
  std::string error;
};

struct SweepOutcome {
  std::string config_hash;
  std::vector<std::string> warnings;
  ReferenceRunResult reference;
  std::vector<SweepMember> members;
  /// Over the completed members only.
  ConvergenceReport report;
  nlohmann::json summary;
};

/// Worker count from LOWMACH_WORKERS, else the hardware concurrency.
int worker_count();

/// Throws ConfigurationError for fewer than two eps values.
SweepOutcome run_sweep(const RunConfig& config, int workers);

struct IdentityResiduals {
  double skew_adjoint = 0.0;
  double div_curl = 0.0;
  double curl_grad = 0.0;
  double identity112 = 0.0;
  double coupling = 0.0;

  double max() const;
};

/// Residuals on the `index`-th seeded random field set, every field
/// supported inside the dealiasing band.
IdentityResiduals identity_residuals(const SpectralGrid& grid, std::uint64_t seed, int index);

// CLI verbs. Each writes its files under config.out_dir and returns the
// process exit code: 0 success, 1 failed run or check, 2 bad input.
int cmd_run_compressible(const RunConfig& config);
int cmd_run_incompressible(const RunConfig& config);
int cmd_sweep(const RunConfig& config);
int cmd_check_identities(const RunConfig& config);

/// {"error": {"type", "message"}, ...} printed to stdout and, when the
/// directory is usable, written to out_dir/error.json.
void report_error(const std::filesystem::path& out_dir, const std::string& type, const std::string& message,
                  const std::string& hash = "");

}  // namespace lowmach

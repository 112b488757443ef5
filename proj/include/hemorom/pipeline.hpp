#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hemorom/config.hpp"
#include "hemorom/fom.hpp"
#include "hemorom/nn.hpp"
#include "hemorom/reduced.hpp"

namespace hemorom {

/// Typed, validated view of the flat configuration.
struct PipelineConfig {
  int nx = 40, ny = 8, n_outlets = 1;
  double length = 0.3, radius = 0.02;
  FluidParams fluid;
  TimeGrid time;
  FomOptions fom;  ///< includes u0 and the Windkessel blocks
  bool wk_decaying_exponential = false;
  double lifting_outlet_neumann = 1.0;
  double pod_delta = 0.9999;
  int rom_n_modes = 0;  ///< 0 = pick by pod_delta
  Stabilization stabilization = Stabilization::Supremizer;
  SupremizerVariant supremizer = SupremizerVariant::Exact;
  int rom_substeps = 1;
  NetworkConfig nn;
  bool nn_per_outlet = false;
  std::filesystem::path database_dir = "fom_db";
  std::filesystem::path bundle_dir = "rom_bundle";
  std::filesystem::path report_dir = "report";

  static PipelineConfig from(const Config& cfg);
  StructuredMesh make_mesh() const;
  FomSolver make_solver() const;
};

/// Per-time and averaged ROM error accounting plus timing/speedup figures.
struct ErrorReport {
  std::vector<double> times;
  std::vector<double> eps_u, eps_p;      ///< relative weighted L2 errors
  std::vector<double> abs_u, abs_p;      ///< absolute weighted L2 errors
  std::vector<double> proj_u, proj_p;    ///< relative projection errors
  std::vector<int> gp_from_nn;           ///< 1 when g_p came from the network
  std::vector<int> extrapolated;
  double avg_eps_u = 0, avg_eps_p = 0, avg_abs_u = 0, avg_abs_p = 0;
  /// Space-time aggregates: sqrt(sum abs^2) / sqrt(sum ref^2). Robust against
  /// times where the reference field is close to zero, where the pointwise
  /// relative series spikes.
  double agg_eps_u = 0, agg_eps_p = 0;
  double offline_seconds = 0, online_seconds = 0, fom_seconds = 0;
  double speedup = 0;
  bool projection_optimality_ok = true;

  void finalize_averages();
};

/// In-memory rom bundle: everything the online phase may read.
struct RomBundle {
  PipelineConfig config;
  StructuredMesh mesh;
  LiftingSet lifting;
  RomBases bases;
  ReducedOperators ops;
  std::vector<double> u_eigenvalues, p_eigenvalues;
  OutflowModel outflow;
  std::vector<double> initial_a, initial_b;
  double initial_time = 0.0;
  double offline_seconds = 0.0;
};

/// Run the FOM and persist the snapshot database (plus a timing sidecar).
SnapshotDatabase run_fom(const PipelineConfig& cfg, std::ostream& log);

/// Offline phase: lifting, homogenization, both PODs, rank selection,
/// supremizers, tensor assembly, network training; persists the bundle.
RomBundle run_offline(const PipelineConfig& cfg, bool with_fom,
                      std::ostream& log);

RomBundle load_bundle(const std::filesystem::path& dir);

struct OnlineResult {
  ReducedTrajectory trajectory;
  ErrorReport report;
  std::vector<VectorField> u_fields;
  std::vector<ScalarField> p_fields;
};

/// Online phase: integrate the reduced system at the requested times with
/// boundary traces from the bundle (stored samples when a time matches, the
/// network otherwise) and report errors when the FOM database is available.
OnlineResult run_online(const RomBundle& bundle, const std::vector<double>& times,
                        Stabilization stab, std::ostream& log);

/// Relative (weighted L2, normalized by the reference norm) and absolute
/// reconstruction errors for one time level.
struct FieldErrors {
  double eps_u = 0.0, eps_p = 0.0;
  double abs_u = 0.0, abs_p = 0.0;
};

FieldErrors field_errors(const VectorField& u_ref, const ScalarField& p_ref,
                         const VectorField& u_rom, const ScalarField& p_rom,
                         const StructuredMesh& mesh);

/// Persist errors.csv, spectrum.csv and timings.txt; print a summary.
void write_report(const std::filesystem::path& dir, const ErrorReport& report,
                  const RomBundle& bundle, std::ostream& log);

ErrorReport read_errors_csv(const std::filesystem::path& file);

/// Parse "0.1,0.2,..." or an @file with one time per line.
std::vector<double> parse_time_list(const std::string& spec);

}  // namespace hemorom

#pragma once

// End-to-end runs behind the command-line tool: solve, assembly benchmark
// and mesh inspection.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sfem/assembly.hpp"
#include "sfem/config.hpp"
#include "sfem/mesh_io.hpp"
#include "sfem/recovery.hpp"
#include "sfem/solver.hpp"

namespace sfem {

struct MatrixStats {
  std::size_t dimension = 0;
  /// Triplet buffer length (0 on the direct assembly route).
  std::size_t triplets = 0;
  std::size_t nnz = 0;
  std::size_t csc_bytes = 0;
  double dense_bytes = 0.0;
  /// csc_bytes / dense_bytes.
  double compression_ratio = 0.0;
};

MatrixStats matrix_stats(const CscMatrix& k, std::size_t triplets);

struct RunResult {
  MeshTopology mesh;
  Diagnostics diagnostics;
  MatrixStats matrix;
  /// Only set when the triplet route was used.
  std::optional<std::uint64_t> triplet_digest;
  /// Assembled matrix before boundary conditions, kept for the MatrixMarket dump.
  std::optional<CscMatrix> stiffness;
  std::size_t constrained_dofs = 0;
  double penalty = 0.0;
  Vec3 total_load = Vec3::Zero();
  SolveReport report;
  /// Set when the solver failed; `report` then holds its best iterate.
  std::optional<std::string> solver_error;
  std::vector<DomainState> states;
  NodalField field;
  std::vector<DeflectionSample> deflections;
  std::vector<double> stations;
  DeflectionProbe probe;
  bool solved() const noexcept { return report.displacements.size() > 0; }
  bool success() const noexcept { return solved() && report.converged && !solver_error; }
};

/// Reads the mesh named by the config, recording the parse time.
MeshTopology load_mesh(const RunConfig& config, Diagnostics* diag, double* seconds = nullptr);

/// Assembled stiffness for the configured method and route, with its stats.
CscMatrix assemble_stiffness(const MeshTopology& mesh, const RunConfig& config, MatrixStats* stats = nullptr,
                             std::optional<std::uint64_t>* digest = nullptr, PhaseTimings* timings = nullptr);

/// assemble -> BC -> solve -> recover on an already loaded mesh. A solver
/// failure is recorded, not thrown; configuration and geometry errors throw.
RunResult run_solve(const RunConfig& config, MeshTopology mesh);
RunResult run_solve(const RunConfig& config);

/// Writes the enabled outputs into config.output.directory:
/// solution.vtu, deflection.csv, summary.json, stiffness.mtx.
void export_results(const RunConfig& config, RunResult& result);

/// JSON summary, schema "sfem.summary/1":
///   schema, method, assembly, threads,
///   mesh{nodes, elements, interior_faces, exterior_faces, euler_consistent},
///   matrix{dimension, triplets, nnz, csc_bytes, dense_bytes, compression_ratio},
///   boundary{constrained_dofs, penalty, total_load[3]},
///   solver{method, converged, iterations, relative_residual, rel_tolerance, error},
///   timings{parse, assembly, csc, bc, solve, recovery, output} (seconds),
///   deflection{axis, component, line_point[3], stations[{station, node, deflection, distance, outside}]},
///   tip_deflection, max_von_mises, warnings[].
std::string summary_json(const RunConfig& config, const RunResult& result);

struct BenchOptions {
  std::vector<unsigned> threads{1};
  int repeats = 3;
  /// Time assembly + CSC + BC + solve instead of assembly alone.
  bool total = false;
};

struct BenchRow {
  unsigned threads = 1;
  std::vector<double> samples;
  double median = 0.0;
  /// median(threads = first entry) / median.
  double speedup = 1.0;
  /// Digest of the triplet buffer (assembly mode) or displacements (total mode).
  std::uint64_t digest = 0;
};

/// Runs the benchmark; a digest that differs between runs or thread counts
/// throws Error.
std::vector<BenchRow> run_bench(const MeshTopology& mesh, const RunConfig& config, const BenchOptions& options);
void write_bench_csv(const std::vector<BenchRow>& rows, const std::filesystem::path& path);
std::string format_bench(const std::vector<BenchRow>& rows, bool total);

struct InspectReport {
  std::size_t nodes = 0;
  std::size_t elements = 0;
  std::size_t interior_faces = 0;
  std::size_t exterior_faces = 0;
  bool euler_consistent = false;
  std::size_t reoriented = 0;
  int index_base = 0;
  std::size_t predicted_triplets = 0;
  std::size_t predicted_nnz = 0;
  std::size_t predicted_csc_bytes = 0;
  double dense_bytes = 0.0;
};

InspectReport inspect_mesh(const MeshTopology& mesh);
std::string format_inspect(const InspectReport& report);

/// FNV-1a over the bytes of a vector.
std::uint64_t vector_digest(const Eigen::VectorXd& v);

}  // namespace sfem

#include "sfem/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "sfem/bc_loads.hpp"
#include "sfem/fem_reference.hpp"
#include "sfem/parallel.hpp"
#include "sfem/post_io.hpp"

namespace sfem {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> default_stations(const MeshTopology& mesh, int axis) {
  const BoundingBox box = bounding_box(mesh.nodes);
  std::vector<double> out;
  for (int k = 1; k <= 5; ++k) out.push_back(box.lo[axis] + (box.hi[axis] - box.lo[axis]) * k / 5.0);
  return out;
}

std::string hex_digest(std::uint64_t d) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << d;
  return out.str();
}

}  // namespace

std::uint64_t vector_digest(const Eigen::VectorXd& v) {
  std::uint64_t h = 1469598103934665603ULL;
  const auto* p = reinterpret_cast<const unsigned char*>(v.data());
  for (std::size_t i = 0; i < static_cast<std::size_t>(v.size()) * sizeof(double); ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

MatrixStats matrix_stats(const CscMatrix& k, std::size_t triplets) {
  MatrixStats s;
  s.dimension = static_cast<std::size_t>(k.dimension);
  s.triplets = triplets;
  s.nnz = k.nnz();
  s.csc_bytes = k.storage_bytes();
  s.dense_bytes = k.dense_bytes();
  s.compression_ratio = s.dense_bytes > 0 ? static_cast<double>(s.csc_bytes) / s.dense_bytes : 0.0;
  return s;
}

MeshTopology load_mesh(const RunConfig& config, Diagnostics* diag, double* seconds) {
  if (config.mesh_prefix.empty()) throw ConfigError("no mesh given (--mesh or [mesh] prefix)");
  const auto start = Clock::now();
  MeshTopology mesh = load_tetgen_mesh(config.mesh_prefix, config.face_markers, diag);
  if (seconds) *seconds = seconds_since(start);
  return mesh;
}

CscMatrix assemble_stiffness(const MeshTopology& mesh, const RunConfig& config, MatrixStats* stats,
                             std::optional<std::uint64_t>* digest, PhaseTimings* timings) {
  const ElasticityMatrix c = elasticity_matrix(config.material);
  const auto dim = static_cast<DofIndex>(mesh.dof_count());
  CscMatrix k;
  std::size_t triplets = 0;
  if (config.method == Method::SmoothedFem && config.assembly == AssemblyRoute::Direct) {
    const auto start = Clock::now();
    k = assemble_csc(mesh, c, config.threads);
    if (timings) timings->assembly = seconds_since(start);
  } else {
    auto start = Clock::now();
    TripletBuffer buf = config.method == Method::SmoothedFem ? assemble_global(mesh, c, config.threads)
                                                              : fem_assemble(mesh, c, config.threads);
    if (timings) timings->assembly = seconds_since(start);
    triplets = buf.size();
    if (digest) *digest = buffer_digest(buf);
    start = Clock::now();
    k = triplets_to_csc(buf, dim);
    if (timings) timings->csc = seconds_since(start);
  }
  if (stats) *stats = matrix_stats(k, triplets);
  return k;
}

RunResult run_solve(const RunConfig& config, MeshTopology mesh) {
  validate(config.material);
  RunResult r;
  r.mesh = std::move(mesh);
  PhaseTimings& t = r.report.timings;
  const MeshTopology& m = r.mesh;

  CscMatrix k = assemble_stiffness(m, config, &r.matrix, &r.triplet_digest, &t);
  if (config.output.matrix_market) r.stiffness = k;
  if (config.assemble_only) return r;

  auto start = Clock::now();
  const DirichletSet bc = build_dirichlet(m, config.dirichlet);
  Eigen::VectorXd f = pressure_to_nodal_forces(config.loads, m);
  for (int a = 0; a < 3; ++a) r.total_load[a] = f(Eigen::seqN(a, m.node_count(), 3)).sum();
  r.constrained_dofs = bc.size();
  r.penalty = apply_penalty_bc(k, f, bc, config.penalty_factor, &r.diagnostics);
  t.bc = seconds_since(start);

  SolveOptions opts = config.solver;
  opts.threads = config.threads;
  start = Clock::now();
  try {
    const PhaseTimings keep = t;
    r.report = solve(k, f, opts);
    r.report.timings = keep;
  } catch (const SolverError& e) {
    const PhaseTimings keep = t;
    r.report = e.best();
    r.report.timings = keep;
    r.solver_error = e.what();
  }
  t.solve = seconds_since(start);
  if (!r.solved()) return r;

  start = Clock::now();
  const ElasticityMatrix c = elasticity_matrix(config.material);
  r.states = config.method == Method::SmoothedFem ? recover_domains(m, r.report.displacements, c, config.threads)
                                                  : fem_recover_elements(m, r.report.displacements, c, config.threads);
  r.field = nodal_average(r.states, m);
  r.probe = default_probe(m);
  r.probe.axis = config.output.probe_axis;
  r.probe.component = config.output.deflection_component;
  if (config.output.probe_point) r.probe.line_point = *config.output.probe_point;
  r.stations = config.output.stations.empty() ? default_stations(m, r.probe.axis) : config.output.stations;
  r.deflections = sample_deflections(m, r.report.displacements, r.stations, r.probe);
  t.recovery = seconds_since(start);
  return r;
}

RunResult run_solve(const RunConfig& config) {
  Diagnostics diag;
  double parse = 0.0;
  MeshTopology mesh = load_mesh(config, &diag, &parse);
  RunResult r = run_solve(config, std::move(mesh));
  r.report.timings.parse = parse;
  r.diagnostics.warnings.insert(r.diagnostics.warnings.begin(), diag.warnings.begin(), diag.warnings.end());
  return r;
}

void export_results(const RunConfig& config, RunResult& r) {
  const auto start = Clock::now();
  const fs::path dir = config.output.directory;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir.string(), "cannot create output directory: " + ec.message());
  if (r.stiffness) write_matrix_market(*r.stiffness, dir / "stiffness.mtx");
  if (r.solved()) {
    if (config.output.vtu) write_vtu(r.mesh, r.report.displacements, r.field, dir / "solution.vtu");
    if (config.output.csv)
      write_deflection_csv(r.mesh, r.report.displacements, r.stations, r.probe, dir / "deflection.csv");
  }
  r.report.timings.output = seconds_since(start);
  if (config.output.json) {
    const fs::path path = dir / "summary.json";
    std::ofstream out(path);
    if (!out) throw IoError(path.string(), "cannot open for writing");
    out << summary_json(config, r) << '\n';
  }
}

std::string summary_json(const RunConfig& config, const RunResult& r) {
  using nlohmann::json;
  const PhaseTimings& t = r.report.timings;
  json j;
  j["schema"] = "sfem.summary/1";
  j["method"] = to_string(config.method);
  j["assembly"] = to_string(config.assembly);
  j["threads"] = config.threads;
  j["mesh"] = {{"nodes", r.mesh.node_count()},
               {"elements", r.mesh.element_count()},
               {"interior_faces", r.mesh.interior_face_count()},
               {"exterior_faces", r.mesh.exterior_face_count()},
               {"euler_consistent", r.mesh.euler_consistent()}};
  j["matrix"] = {{"dimension", r.matrix.dimension},
                 {"triplets", r.matrix.triplets},
                 {"nnz", r.matrix.nnz},
                 {"csc_bytes", r.matrix.csc_bytes},
                 {"dense_bytes", r.matrix.dense_bytes},
                 {"compression_ratio", r.matrix.compression_ratio}};
  if (r.triplet_digest) j["matrix"]["triplet_digest"] = hex_digest(*r.triplet_digest);
  j["boundary"] = {{"constrained_dofs", r.constrained_dofs},
                   {"penalty", r.penalty},
                   {"total_load", {r.total_load.x(), r.total_load.y(), r.total_load.z()}}};
  j["solver"] = {{"method", to_string(config.solver.method)},
                 {"converged", r.report.converged},
                 {"iterations", r.report.iterations},
                 {"relative_residual", r.report.relative_residual},
                 {"rel_tolerance", config.solver.rel_tolerance},
                 {"error", r.solver_error ? json(*r.solver_error) : json(nullptr)}};
  j["timings"] = {{"parse", t.parse}, {"assembly", t.assembly}, {"csc", t.csc},   {"bc", t.bc},
                  {"solve", t.solve}, {"recovery", t.recovery}, {"output", t.output}};
  json stations = json::array();
  for (const DeflectionSample& s : r.deflections)
    stations.push_back({{"station", s.station},
                        {"node", s.node},
                        {"deflection", s.deflection},
                        {"distance", s.distance},
                        {"outside", s.outside}});
  j["deflection"] = {{"axis", r.probe.axis},
                     {"component", r.probe.component},
                     {"line_point", {r.probe.line_point.x(), r.probe.line_point.y(), r.probe.line_point.z()}},
                     {"stations", stations}};
  if (!r.deflections.empty()) {
    const auto tip = std::max_element(r.deflections.begin(), r.deflections.end(),
                                      [](const auto& a, const auto& b) { return a.station < b.station; });
    j["tip_deflection"] = tip->deflection;
  } else {
    j["tip_deflection"] = nullptr;
  }
  j["max_von_mises"] =
      r.field.von_mises.empty() ? json(nullptr) : json(*std::max_element(r.field.von_mises.begin(), r.field.von_mises.end()));
  j["warnings"] = r.diagnostics.warnings;
  return j.dump(2);
}

std::vector<BenchRow> run_bench(const MeshTopology& mesh, const RunConfig& config, const BenchOptions& options) {
  if (options.threads.empty()) throw ConfigError("bench needs at least one thread count");
  if (options.repeats < 1) throw ConfigError("bench needs at least one repeat");
  for (unsigned n : options.threads)
    if (n == 0) throw ConfigError("thread counts must be at least 1");
  validate(config.material);
  const ElasticityMatrix c = elasticity_matrix(config.material);
  const bool direct = config.method == Method::SmoothedFem && config.assembly == AssemblyRoute::Direct;

  std::optional<DirichletSet> bc;
  std::optional<Eigen::VectorXd> load;
  if (options.total) {
    bc = build_dirichlet(mesh, config.dirichlet);
    load = pressure_to_nodal_forces(config.loads, mesh);
  }

  TripletBuffer buf;
  std::vector<BenchRow> rows;
  std::optional<std::uint64_t> reference;
  for (unsigned threads : options.threads) {
    BenchRow row;
    row.threads = threads;
    for (int rep = 0; rep < options.repeats; ++rep) {
      std::uint64_t digest = 0;
      const auto start = Clock::now();
      if (!options.total) {
        if (direct) {
          const CscMatrix k = assemble_csc(mesh, c, threads);
          row.samples.push_back(seconds_since(start));
          Eigen::Map<const Eigen::VectorXd> v(k.values.data(), static_cast<Eigen::Index>(k.values.size()));
          digest = vector_digest(v);
        } else {
          if (config.method == Method::SmoothedFem)
            assemble_global_into(mesh, c, threads, buf);
          else
            buf = fem_assemble(mesh, c, threads);
          row.samples.push_back(seconds_since(start));
          digest = buffer_digest(buf);
        }
      } else {
        RunConfig run = config;
        run.threads = threads;
        CscMatrix k = assemble_stiffness(mesh, run);
        Eigen::VectorXd f = *load;
        apply_penalty_bc(k, f, *bc, config.penalty_factor);
        SolveOptions opts = config.solver;
        opts.threads = threads;
        const SolveReport rep_out = solve(k, f, opts);
        row.samples.push_back(seconds_since(start));
        digest = vector_digest(rep_out.displacements);
      }
      if (!reference) reference = digest;
      if (digest != *reference)
        throw Error("nondeterministic result at " + std::to_string(threads) + " threads: digest " +
                    hex_digest(digest) + " differs from " + hex_digest(*reference));
      row.digest = digest;
    }
    row.median = median(row.samples);
    rows.push_back(std::move(row));
  }
  for (BenchRow& row : rows) row.speedup = row.median > 0 ? rows.front().median / row.median : 0.0;
  return rows;
}

void write_bench_csv(const std::vector<BenchRow>& rows, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << "threads,median_seconds,speedup,runs,digest\n";
  out << std::setprecision(9);
  for (const BenchRow& r : rows)
    out << r.threads << ',' << r.median << ',' << r.speedup << ',' << r.samples.size() << ',' << hex_digest(r.digest)
        << '\n';
}

std::string format_bench(const std::vector<BenchRow>& rows, bool total) {
  std::ostringstream out;
  out << (total ? "assembly + solve" : "assembly only") << " (median of " << (rows.empty() ? 0 : rows[0].samples.size())
      << " runs)\n";
  out << std::left << std::setw(8) << "threads" << std::setw(14) << "median [s]" << std::setw(10) << "speedup"
      << "digest\n";
  out << std::fixed;
  for (const BenchRow& r : rows)
    out << std::setw(8) << r.threads << std::setw(14) << std::setprecision(4) << r.median << std::setw(10)
        << std::setprecision(2) << r.speedup << hex_digest(r.digest) << '\n';
  return out.str();
}

InspectReport inspect_mesh(const MeshTopology& mesh) {
  InspectReport r;
  r.nodes = mesh.node_count();
  r.elements = mesh.element_count();
  r.interior_faces = mesh.interior_face_count();
  r.exterior_faces = mesh.exterior_face_count();
  r.euler_consistent = mesh.euler_consistent();
  r.reoriented = mesh.elements.reoriented;
  r.index_base = mesh.nodes.source_index_base;
  r.predicted_triplets = triplet_count(r.exterior_faces, r.interior_faces);
  r.predicted_nnz = structural_nnz(mesh);
  const std::size_t dim = mesh.dof_count();
  r.predicted_csc_bytes = r.predicted_nnz * (sizeof(double) + sizeof(DofIndex)) + (dim + 1) * sizeof(std::int64_t);
  r.dense_bytes = static_cast<double>(dim) * static_cast<double>(dim) * sizeof(double);
  return r;
}

std::string format_inspect(const InspectReport& r) {
  std::ostringstream out;
  out << r.nodes << " nodes, " << r.elements << " elements\n";
  out << "interior faces (N_i): " << r.interior_faces << '\n';
  out << "exterior faces (N_e): " << r.exterior_faces << '\n';
  out << "euler check 4 N_t = 2 N_i + N_e: " << 4 * r.elements << " vs " << 2 * r.interior_faces + r.exterior_faces
      << (r.euler_consistent ? " ok" : " FAILED") << '\n';
  out << "index base: " << r.index_base << ", reoriented elements: " << r.reoriented << '\n';
  out << "predicted triplets: " << r.predicted_triplets << " (" << r.exterior_faces << " x 144 + " << r.interior_faces
      << " x 225)\n";
  out << "predicted triplet memory: " << r.predicted_triplets * (2 * sizeof(DofIndex) + sizeof(double)) << " bytes\n";
  out << "predicted nnz: " << r.predicted_nnz << '\n';
  out << std::setprecision(4);
  out << "predicted CSC memory: " << r.predicted_csc_bytes << " bytes (" << 100.0 * r.predicted_csc_bytes / r.dense_bytes
      << "% of dense " << r.dense_bytes << " bytes)\n";
  return out.str();
}

}  // namespace sfem

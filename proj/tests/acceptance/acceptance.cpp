// Acceptance criteria, one PASS/FAIL line each. Select with --criterion N
// (repeatable); all run by default. Exit status is nonzero if any selected
// criterion fails. Every criterion also has a wall-clock budget.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <unistd.h>

#include <Eigen/Eigenvalues>

#include "CLI11.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "sfem/bc_loads.hpp"
#include "sfem/box_mesh.hpp"
#include "sfem/parallel.hpp"
#include "sfem/pipeline.hpp"
#include "sfem/smoothing.hpp"

using namespace sfem;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

fs::path scratch_dir() {
  const fs::path p = fs::temp_directory_path() / ("sfem_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(p);
  return p;
}

RunConfig cantilever_config(const fs::path& prefix, Method method) {
  RunConfig c;
  c.mesh_prefix = prefix;
  c.material = {2e8, 0.3};
  c.method = method;
  c.dirichlet.push_back({PlaneSelector{0, 0.0}, {true, true, true}, Vec3::Zero()});
  c.loads.pressures.push_back({PlaneSelector{2, 0.2}, 12500.0, Vec3(0, 0, -1)});
  c.output.stations = {0.2, 0.4, 0.6, 0.8, 1.0};
  return c;
}

/// 1 x 0.2 x 0.2 m beam, 20 x 4 x 4 cells, five tets per cell, written in
/// TetGen format and read back through the parser.
fs::path write_beam(const fs::path& dir) {
  BoxMeshSpec spec;
  spec.extent = Vec3(1.0, 0.2, 0.2);
  spec.cells = {20, 4, 4};
  const BoxMesh m = generate_box_mesh(spec);
  const fs::path prefix = dir / "beam";
  write_tetgen_mesh(prefix, m.nodes, m.elements);
  return prefix;
}

struct BeamRuns {
  RunResult sfem;
  RunResult fem;
};

const BeamRuns& beam_runs() {
  static const BeamRuns runs = [] {
    const fs::path prefix = write_beam(scratch_dir());
    return BeamRuns{run_solve(cantilever_config(prefix, Method::SmoothedFem)),
                    run_solve(cantilever_config(prefix, Method::ConventionalFem))};
  }();
  return runs;
}

Outcome cantilever() {
  const BeamRuns& r = beam_runs();
  if (!r.sfem.success() || !r.fem.success()) return {false, "solver did not converge"};
  const double us = r.sfem.deflections.back().deflection;
  const double uf = r.fem.deflections.back().deflection;
  const double es = std::abs(us / -1.12e-2 - 1.0);
  const double ef = std::abs(uf / -1.03e-2 - 1.0);
  return {es <= 0.10 && ef <= 0.10,
          fmt("%zu nodes / %zu tets; tip S-FEM %.4e (%.1f%% from -1.12e-2), FEM-T4 %.4e (%.1f%% from -1.03e-2), limit 10%%",
              r.sfem.mesh.node_count(), r.sfem.mesh.element_count(), us, 100 * es, uf, 100 * ef)};
}

Outcome softness() {
  const BeamRuns& r = beam_runs();
  if (!r.sfem.success() || !r.fem.success()) return {false, "solver did not converge"};
  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i < r.sfem.deflections.size(); ++i) {
    const double s = std::abs(r.sfem.deflections[i].deflection);
    const double f = std::abs(r.fem.deflections[i].deflection);
    ok = ok && s >= f;
    detail += fmt("%sx=%.1f %.3e>=%.3e", i ? ", " : "", r.sfem.deflections[i].station, s, f);
  }
  return {ok, "|u_sfem| >= |u_fem| at " + detail};
}

Outcome patch_test() {
  const MeshTopology m = oracle::box_topology({2, 2, 3}, Vec3(1, 1, 1), HexSplit::Five, 0.2, 31);
  const ElasticityMatrix c = elasticity_matrix({2e8, 0.3});
  std::vector<char> boundary(m.node_count(), 0);
  for (const auto& f : m.faces.exterior)
    for (NodeIndex n : f.nodes) boundary[n] = 1;
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(-1e-3, 1e-3);
  double worst_u = 0, worst_e = 0;
  std::size_t interior = 0;
  for (int trial = 0; trial < 3; ++trial) {
    Eigen::Matrix3d mm;
    for (int i = 0; i < 9; ++i) mm(i) = u(rng);
    const Vec3 t(u(rng), u(rng), u(rng));
    const Eigen::VectorXd exact = oracle::linear_field(m, mm, t);
    std::vector<DirichletDof> dofs;
    for (std::size_t n = 0; n < m.node_count(); ++n)
      if (boundary[n])
        for (int a = 0; a < 3; ++a) dofs.push_back({static_cast<DofIndex>(3 * n + a), exact[3 * n + a]});
    CscMatrix k = assemble_csc(m, c);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(k.dimension);
    apply_elimination_bc(k, f, make_dirichlet(dofs, m.dof_count()));
    SolveOptions o;
    o.rel_tolerance = 1e-14;
    const Eigen::VectorXd d = solve(k, f, o).displacements;
    interior = 0;
    for (std::size_t n = 0; n < m.node_count(); ++n)
      if (!boundary[n]) {
        ++interior;
        worst_u = std::max(worst_u, (d.segment<3>(3 * n) - exact.segment<3>(3 * n)).norm() / exact.segment<3>(3 * n).norm());
      }
    const auto eps = oracle::sym_voigt(mm);
    for (const DomainState& s : recover_domains(m, d, c)) worst_e = std::max(worst_e, (s.strain - eps).norm() / eps.norm());
  }
  return {worst_u <= 1e-8 && worst_e <= 1e-9,
          fmt("%zu tets, %zu interior nodes, 3 random fields: max nodal error %.2e (<=1e-8), max strain error %.2e (<=1e-9)",
              m.element_count(), interior, worst_u, worst_e)};
}

Outcome structure() {
  const MeshTopology m = oracle::box_topology({3, 2, 2}, Vec3(1.5, 1, 1), HexSplit::Five, 0.15, 4);
  const Eigen::MatrixXd k = assemble_csc(m, elasticity_matrix({2e8, 0.3})).to_dense();
  const double sym = (k - k.transpose()).norm() / k.norm();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
  const double lmax = eig.eigenvalues().cwiseAbs().maxCoeff();
  const auto zeros = (eig.eigenvalues().array().abs() <= 1e-8 * lmax).count();
  const Eigen::MatrixXd r = oracle::rigid_modes(m);
  const double knorm = k.cwiseAbs().rowwise().sum().maxCoeff();
  double worst = 0;
  for (int j = 0; j < 6; ++j)
    worst = std::max(worst, (k * r.col(j)).cwiseAbs().maxCoeff() / (knorm * r.col(j).cwiseAbs().maxCoeff()));
  return {sym <= 1e-9 && zeros == 6 && worst <= 1e-8,
          fmt("%ld dofs: asymmetry %.1e (<=1e-9), %ld near-zero eigenvalues (need 6), max |K r| ratio %.1e (<=1e-8)",
              static_cast<long>(k.rows()), sym, static_cast<long>(zeros), worst)};
}

Outcome triplet_formula() {
  const ElasticityMatrix c = elasticity_matrix({2e8, 0.3});
  const std::size_t one = assemble_global(oracle::one_tet_topology(), c).size();
  const std::size_t two = assemble_global(oracle::two_tet_topology(), c).size();
  const MeshTopology beam = oracle::beam_topology();
  const std::size_t b = assemble_global(beam, c).size();
  const std::size_t expect_b = beam.exterior_face_count() * 144 + beam.interior_face_count() * 225;
  return {one == 576 && two == 1089 && b == expect_b,
          fmt("1-tet %zu (576), 2-tet %zu (1089), beam %zu (%zu x 144 + %zu x 225 = %zu)", one, two, b,
              beam.exterior_face_count(), beam.interior_face_count(), expect_b)};
}

Outcome determinism() {
  const fs::path prefix = write_beam(scratch_dir());
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  std::vector<unsigned> counts{1, 2, 4, hw, 8};
  std::sort(counts.begin(), counts.end());
  counts.erase(std::unique(counts.begin(), counts.end()), counts.end());
  const MeshTopology mesh = load_tetgen_mesh(prefix);
  const ElasticityMatrix c = elasticity_matrix({2e8, 0.3});
  const TripletBuffer ref = assemble_global(mesh, c, 1);
  RunConfig cfg = cantilever_config(prefix, Method::SmoothedFem);
  cfg.threads = 1;
  const Eigen::VectorXd d_ref = run_solve(cfg, mesh).report.displacements;
  bool ok = d_ref.size() > 0;
  std::string list;
  for (unsigned t : counts) {
    const bool same_buf = assemble_global(mesh, c, t) == ref;
    cfg.threads = t;
    const Eigen::VectorXd d = run_solve(cfg, mesh).report.displacements;
    const bool same_d = d.size() == d_ref.size() &&
                        std::memcmp(d.data(), d_ref.data(), sizeof(double) * static_cast<std::size_t>(d.size())) == 0;
    ok = ok && same_buf && same_d;
    list += fmt("%s%u:%s", list.empty() ? "" : " ", t, same_buf && same_d ? "identical" : "DIFFERENT");
  }
  return {ok, "triplets and displacements vs 1 thread, threads " + list};
}

Outcome small_oracle() {
  const MeshTopology m = oracle::two_tet_topology();
  const ElasticityMatrix c = elasticity_matrix({2e8, 0.3});
  const Eigen::MatrixXd k = triplets_to_csc(assemble_global(m, c), static_cast<DofIndex>(m.dof_count())).to_dense();
  const double err = oracle::relative_frobenius(k, oracle::quadrature_global_stiffness(m, oracle::lame_matrix(2e8, 0.3)));
  return {err <= 1e-12, fmt("2-tet K one-point vs 3-point quadrature: relative Frobenius %.2e (<=1e-12)", err)};
}

Outcome table_rows() {
  using SV = ShapeValues;
  auto sv = [](double a, double b, double c, double d, double e) {
    SV s;
    s << a, b, c, d, e;
    return s;
  };
  const SV a = SV::Unit(0), b = SV::Unit(1), c = SV::Unit(2);
  const SV f = sv(0.25, 0.25, 0.25, 0.25, 0), g = sv(0.25, 0.25, 0.25, 0, 0.25);
  const std::array<std::pair<std::array<SV, 3>, SV>, 6> rows = {{
      {{a, c, f}, sv(5, 1, 5, 1, 0) / 12},
      {{a, c, g}, sv(5, 1, 5, 0, 1) / 12},
      {{b, c, g}, sv(1, 5, 5, 0, 1) / 12},
      {{b, c, f}, sv(1, 5, 5, 1, 0) / 12},
      {{a, b, f}, sv(5, 5, 1, 1, 0) / 12},
      {{a, b, g}, sv(5, 5, 1, 0, 1) / 12},
  }};
  double worst = 0;
  for (const auto& [v, row] : rows) worst = std::max(worst, (shape_values_at_face_centroid(v) - row).cwiseAbs().maxCoeff());
  return {worst <= 1e-15, fmt("rows g1..g6: max deviation %.1e (<=1e-15)", worst)};
}

Outcome compression() {
  const fs::path dir = scratch_dir();
  BoxMeshSpec spec;
  spec.extent = Vec3(5.0, 1.0, 1.0);
  spec.cells = {130, 26, 26};
  {
    const BoxMesh m = generate_box_mesh(spec);
    write_tetgen_mesh(dir / "large", m.nodes, m.elements);
  }
  RunConfig cfg;
  cfg.mesh_prefix = dir / "large";
  cfg.material = {2e8, 0.3};
  cfg.assembly = AssemblyRoute::Direct;
  cfg.assemble_only = true;
  cfg.threads = resolve_threads(0);
  cfg.output.directory = dir / "large_out";
  cfg.output.vtu = cfg.output.csv = false;
  RunResult r = run_solve(cfg);
  export_results(cfg, r);
  std::ifstream in(cfg.output.directory / "summary.json");
  const auto j = nlohmann::json::parse(in);
  const std::size_t nnz = j["matrix"]["nnz"].get<std::size_t>();
  const double ratio = j["matrix"]["compression_ratio"].get<double>();
  const bool ok = r.mesh.node_count() >= 90000 && ratio <= 0.01 && nnz == r.matrix.nnz && nnz > 0;
  return {ok, fmt("%zu nodes, %zu tets: nnz %zu, CSC %zu bytes = %.3f%% of dense %.3e bytes (<=1%%)", r.mesh.node_count(),
                  r.mesh.element_count(), nnz, r.matrix.csc_bytes, 100 * ratio, r.matrix.dense_bytes)};
}

Outcome scaling() {
  BoxMeshSpec spec;
  spec.extent = Vec3(4.0, 1.0, 1.0);
  spec.cells = {128, 28, 28};
  BoxMesh box = generate_box_mesh(spec);
  const MeshTopology mesh = build_topology(std::move(box.nodes), std::move(box.elements));
  RunConfig cfg;
  cfg.material = {2e8, 0.3};
  BenchOptions opts;
  opts.threads = {1, 2, 4, 8};
  opts.repeats = 3;
  const auto rows = run_bench(mesh, cfg, opts);
  bool monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i) monotone = monotone && rows[i].speedup >= 0.9 * rows[i - 1].speedup;
  const double s8 = rows.back().speedup;
  std::string table;
  for (const auto& r : rows) table += fmt("%s%u:%.2fx", table.empty() ? "" : " ", r.threads, r.speedup);
  return {s8 >= 4.0 && monotone,
          fmt("%zu tets, %u hardware threads, assembly-only medians of 3, identical digests; speedup %s (need 8:>=4x, monotone within 10%%)",
              mesh.element_count(), std::max(1u, std::thread::hardware_concurrency()), table.c_str())};
}

Outcome penalty_vs_elimination() {
  const MeshTopology m = oracle::box_topology({10, 2, 2}, Vec3(1.0, 0.2, 0.2));
  const CscMatrix k0 = assemble_csc(m, elasticity_matrix({2e8, 0.3}));
  LoadCase loads;
  loads.pressures.push_back({PlaneSelector{2, 0.2}, 12500.0, Vec3(0, 0, -1)});
  const Eigen::VectorXd f0 = pressure_to_nodal_forces(loads, m);
  const DirichletSet bc = build_dirichlet(m, {DirichletSpec{PlaneSelector{0, 0.0}, {true, true, true}, Vec3::Zero()}});
  SolveOptions o;
  o.rel_tolerance = 1e-12;
  CscMatrix kp = k0, ke = k0;
  Eigen::VectorXd fp = f0, fe = f0;
  apply_penalty_bc(kp, fp, bc);
  apply_elimination_bc(ke, fe, bc);
  const Eigen::VectorXd dp = solve(kp, fp, o).displacements;
  const Eigen::VectorXd de = solve(ke, fe, o).displacements;
  Eigen::VectorXd kd, ke_d;
  const Eigen::VectorXd diff = dp - de;
  k0.multiply(diff, kd);
  k0.multiply(de, ke_d);
  const double rel = std::sqrt(diff.dot(kd) / de.dot(ke_d));
  return {rel <= 1e-6, fmt("%zu dofs: relative energy-norm difference %.2e (<=1e-6)", m.dof_count(), rel)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> selected;
  app.add_option("--criterion", selected, "Criterion number (repeatable); all when omitted")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all = {
      {1, "cantilever tip deflection", 10, cantilever},
      {2, "softness ordering", 10, softness},
      {3, "patch test", 5, patch_test},
      {4, "stiffness structure", 5, structure},
      {5, "triplet count formula", 1, triplet_formula},
      {6, "parallel determinism", 30, determinism},
      {7, "small-instance quadrature oracle", 1, small_oracle},
      {8, "shape values at boundary centroids", 1, table_rows},
      {9, "CSC compression", 300, compression},
      {10, "assembly scaling", 900, scaling},
      {11, "penalty vs elimination", 5, penalty_vs_elimination},
  };

  int failures = 0;
  for (const Criterion& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_seconds;
    const bool pass = out.pass && in_time;
    failures += pass ? 0 : 1;
    std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << std::setw(2) << c.id << "  " << c.name << ": " << out.detail
              << fmt(" [%.2f s, budget %.0f s%s]", secs, c.budget_seconds, in_time ? "" : ", EXCEEDED") << std::endl;
  }
  fs::remove_all(fs::temp_directory_path() / ("sfem_acceptance_" + std::to_string(::getpid())));
  return failures == 0 ? 0 : 1;
}

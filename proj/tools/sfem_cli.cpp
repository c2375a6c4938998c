// sfem: solve, bench, inspect and mesh-box subcommands.
//
// Exit codes: 0 success, 1 solver or runtime failure, 2 bad input
// (missing or malformed files, invalid configuration or flags).

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sfem/box_mesh.hpp"
#include "sfem/config.hpp"
#include "sfem/parallel.hpp"
#include "sfem/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInput = 2;

struct CommonFlags {
  std::string mesh;
  std::string config;
  std::string method;
  std::optional<unsigned> threads;
  std::string out;
  std::string face_markers;
  std::string solver;
  std::string assembly;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--mesh", f.mesh, "Mesh prefix (<prefix>.node/.ele/.face)");
  cmd->add_option("--config", f.config, "Run configuration file");
  cmd->add_option("--method", f.method, "sfem or fem")->check(CLI::IsMember({"sfem", "fem"}));
  cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--face-marker-convention", f.face_markers, "auto, paper or tetgen")
      ->check(CLI::IsMember({"auto", "paper", "tetgen"}));
  cmd->add_option("--solver", f.solver, "pcg or direct")->check(CLI::IsMember({"pcg", "direct"}));
  cmd->add_option("--assembly", f.assembly, "triplets or direct")->check(CLI::IsMember({"triplets", "direct"}));
}

sfem::RunConfig resolve_config(const CommonFlags& f) {
  sfem::RunConfig cfg = f.config.empty() ? sfem::RunConfig{} : sfem::load_run_config(f.config);
  if (!f.mesh.empty()) cfg.mesh_prefix = f.mesh;
  if (!f.method.empty()) cfg.method = sfem::parse_method(f.method);
  if (f.threads) cfg.threads = *f.threads;
  if (!f.out.empty()) cfg.output.directory = f.out;
  if (!f.face_markers.empty()) cfg.face_markers = sfem::parse_face_marker_convention(f.face_markers);
  if (!f.solver.empty()) cfg.solver.method = sfem::parse_solver_method(f.solver);
  if (!f.assembly.empty()) cfg.assembly = sfem::parse_assembly_route(f.assembly);
  cfg.threads = sfem::resolve_threads(cfg.threads);
  return cfg;
}

void print_warnings(const sfem::Diagnostics& diag) {
  for (const auto& w : diag.warnings) std::cerr << "warning: " << w << '\n';
}

int cmd_solve(const CommonFlags& flags, bool dump_matrix, bool assemble_only) {
  sfem::RunConfig cfg = resolve_config(flags);
  cfg.output.matrix_market = cfg.output.matrix_market || dump_matrix;
  cfg.assemble_only = assemble_only;
  sfem::RunResult r = sfem::run_solve(cfg);
  sfem::export_results(cfg, r);
  print_warnings(r.diagnostics);

  std::cout << sfem::to_string(cfg.method) << ": " << r.mesh.node_count() << " nodes, " << r.mesh.element_count()
            << " elements, " << r.matrix.nnz << " nonzeros (" << 100.0 * r.matrix.compression_ratio << "% of dense)\n";
  if (assemble_only) return kExitOk;
  if (r.solver_error) {
    std::cerr << "error: " << *r.solver_error << '\n';
    return kExitFailure;
  }
  std::cout << "solver: " << r.report.iterations << " iterations, relative residual " << r.report.relative_residual
            << '\n';
  for (const auto& s : r.deflections)
    std::cout << "  station " << s.station << ": " << s.deflection << (s.outside ? " (outside mesh)" : "") << '\n';
  std::cout << "results in " << cfg.output.directory.string() << '\n';
  return r.success() ? kExitOk : kExitFailure;
}

int cmd_bench(const CommonFlags& flags, const std::vector<unsigned>& threads, int repeats, bool total,
              const std::string& csv) {
  sfem::RunConfig cfg = resolve_config(flags);
  sfem::Diagnostics diag;
  const sfem::MeshTopology mesh = sfem::load_mesh(cfg, &diag);
  print_warnings(diag);
  sfem::BenchOptions opts;
  opts.threads = threads;
  opts.repeats = repeats;
  opts.total = total;
  const auto rows = sfem::run_bench(mesh, cfg, opts);
  std::cout << mesh.node_count() << " nodes, " << mesh.element_count() << " elements, method "
            << sfem::to_string(cfg.method) << '\n'
            << sfem::format_bench(rows, total);
  if (!csv.empty()) sfem::write_bench_csv(rows, csv);
  return kExitOk;
}

int cmd_inspect(const CommonFlags& flags) {
  sfem::RunConfig cfg = resolve_config(flags);
  sfem::Diagnostics diag;
  const sfem::MeshTopology mesh = sfem::load_mesh(cfg, &diag);
  print_warnings(diag);
  std::cout << sfem::format_inspect(sfem::inspect_mesh(mesh));
  return mesh.euler_consistent() ? kExitOk : kExitFailure;
}

int cmd_mesh_box(const sfem::BoxMeshSpec& spec, const std::string& prefix, const sfem::TetGenWriteOptions& opts) {
  const sfem::BoxMesh mesh = sfem::generate_box_mesh(spec);
  sfem::write_tetgen_mesh(prefix, mesh.nodes, mesh.elements, opts);
  std::cout << "wrote " << prefix << ".{node,ele" << (opts.write_faces ? ",face" : "") << "}: " << mesh.nodes.size()
            << " nodes, " << mesh.elements.size() << " elements\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Face-based smoothed finite element solver for 3D linear elasticity"};
  app.require_subcommand(1);

  CommonFlags solve_flags;
  bool dump_matrix = false;
  bool assemble_only = false;
  auto* solve = app.add_subcommand("solve", "Assemble, solve and export one load case");
  add_common(solve, solve_flags);
  solve->add_flag("--dump-matrix", dump_matrix, "Write the assembled stiffness as MatrixMarket");
  solve->add_flag("--assemble-only", assemble_only, "Stop after assembly");

  CommonFlags bench_flags;
  std::vector<unsigned> bench_threads{1};
  int repeats = 3;
  bool total = false;
  std::string bench_csv;
  auto* bench = app.add_subcommand("bench", "Time stiffness assembly across thread counts");
  add_common(bench, bench_flags);
  bench->add_option("--thread-list", bench_threads, "Thread counts to time, e.g. 1,2,4,8")->delimiter(',');
  bench->add_option("--repeats", repeats, "Runs per thread count (median reported)")->check(CLI::PositiveNumber);
  bench->add_flag("--total", total, "Time assembly + boundary conditions + solve");
  bench->add_option("--csv", bench_csv, "Write the timing table as CSV");

  CommonFlags inspect_flags;
  auto* inspect = app.add_subcommand("inspect", "Report mesh topology counts and predicted storage");
  add_common(inspect, inspect_flags);
  inspect->add_option("prefix", inspect_flags.mesh, "Mesh prefix");

  sfem::BoxMeshSpec box;
  std::vector<double> origin{0, 0, 0};
  std::vector<double> extent{1, 1, 1};
  std::vector<int> cells{1, 1, 1};
  std::string split = "five";
  std::string box_prefix;
  std::string box_markers = "tetgen";
  sfem::TetGenWriteOptions write_opts;
  bool no_faces = false;
  auto* mesh_box = app.add_subcommand("mesh-box", "Write a structured tetrahedral box mesh in TetGen format");
  mesh_box->add_option("--origin", origin)->expected(3);
  mesh_box->add_option("--extent", extent)->expected(3);
  mesh_box->add_option("--cells", cells)->expected(3);
  mesh_box->add_option("--split", split, "five or six tets per cell")->check(CLI::IsMember({"five", "six"}));
  mesh_box->add_option("--jitter", box.jitter, "Interior node perturbation, fraction of a cell");
  mesh_box->add_option("--seed", box.seed);
  mesh_box->add_option("--index-base", write_opts.index_base)->check(CLI::IsMember({0, 1}));
  mesh_box->add_option("--face-markers", box_markers)->check(CLI::IsMember({"paper", "tetgen"}));
  mesh_box->add_flag("--no-faces", no_faces, "Skip the .face file");
  mesh_box->add_option("--out", box_prefix, "Output prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*solve) return cmd_solve(solve_flags, dump_matrix, assemble_only);
    if (*bench) return cmd_bench(bench_flags, bench_threads, repeats, total, bench_csv);
    if (*inspect) return cmd_inspect(inspect_flags);
    box.origin = sfem::Point3(origin[0], origin[1], origin[2]);
    box.extent = sfem::Vec3(extent[0], extent[1], extent[2]);
    box.cells = {cells[0], cells[1], cells[2]};
    box.split = split == "five" ? sfem::HexSplit::Five : sfem::HexSplit::Six;
    write_opts.face_markers = sfem::parse_face_marker_convention(box_markers);
    write_opts.write_faces = !no_faces;
    return cmd_mesh_box(box, box_prefix, write_opts);
  } catch (const sfem::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const sfem::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const sfem::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const sfem::UnsupportedMesh& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const sfem::TopologyError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const sfem::MaterialError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

#include <benchmark/benchmark.h>

#include "sfem/assembly.hpp"
#include "sfem/bc_loads.hpp"
#include "sfem/box_mesh.hpp"
#include "sfem/material.hpp"
#include "sfem/mesh_io.hpp"
#include "sfem/solver.hpp"

using namespace sfem;

namespace {

MeshTopology box(int n) {
  BoxMeshSpec spec;
  spec.extent = Vec3(5.0, 1.0, 1.0);
  spec.cells = {5 * n, n, n};
  BoxMesh m = generate_box_mesh(spec);
  return build_topology(std::move(m.nodes), std::move(m.elements));
}

const ElasticityMatrix& steel() {
  static const ElasticityMatrix c = elasticity_matrix({2e8, 0.3});
  return c;
}

void BM_DomainStiffness(benchmark::State& state) {
  const MeshTopology mesh = box(2);
  std::size_t i = 0;
  const std::size_t n = mesh.interior_face_count() + mesh.exterior_face_count();
  for (auto _ : state) {
    benchmark::DoNotOptimize(domain_stiffness(mesh, i, steel()));
    i = (i + 1) % n;
  }
}
BENCHMARK(BM_DomainStiffness);

void BM_AssembleGlobal(benchmark::State& state) {
  const MeshTopology mesh = box(static_cast<int>(state.range(0)));
  TripletBuffer buffer;
  for (auto _ : state) {
    assemble_global_into(mesh, steel(), 1, buffer);
    benchmark::ClobberMemory();
  }
  state.counters["tets"] = static_cast<double>(mesh.element_count());
}
BENCHMARK(BM_AssembleGlobal)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_TripletsToCsc(benchmark::State& state) {
  const MeshTopology mesh = box(static_cast<int>(state.range(0)));
  const TripletBuffer buffer = assemble_global(mesh, steel());
  for (auto _ : state) benchmark::DoNotOptimize(triplets_to_csc(buffer, static_cast<DofIndex>(mesh.dof_count())));
}
BENCHMARK(BM_TripletsToCsc)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_AssembleCscDirect(benchmark::State& state) {
  const MeshTopology mesh = box(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_csc(mesh, steel()));
}
BENCHMARK(BM_AssembleCscDirect)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_PcgCantilever(benchmark::State& state) {
  const MeshTopology mesh = box(static_cast<int>(state.range(0)));
  CscMatrix k = assemble_csc(mesh, steel());
  LoadCase loads;
  loads.pressures.push_back({PlaneSelector{2, 1.0}, 12500.0, Vec3(0, 0, -1)});
  Eigen::VectorXd f = pressure_to_nodal_forces(loads, mesh);
  apply_penalty_bc(k, f, build_dirichlet(mesh, {DirichletSpec{PlaneSelector{0, 0.0}, {true, true, true}, Vec3::Zero()}}));
  for (auto _ : state) benchmark::DoNotOptimize(solve(k, f));
}
BENCHMARK(BM_PcgCantilever)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

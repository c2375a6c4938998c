#pragma once

// Run configuration: an INI-style file with sections.
//
//   [mesh]        prefix, face_marker_convention (auto|paper|tetgen)
//   [material]    youngs_modulus, poisson_ratio
//   [analysis]    method (sfem|fem), threads, assembly (triplets|direct)
//   [solver]      method (pcg|direct), rel_tolerance, max_iterations, penalty_factor
//   [dirichlet:NAME]   plane = <axis> <value> | box = x0 y0 z0 x1 y1 z1
//                      components = xyz (any subset), value = ux uy uz
//   [pressure:NAME]    plane | box, pressure = <N/m^2>, direction = dx dy dz
//   [point_load:NAME]  node = <0-based index>, force = fx fy fz
//   [output]      directory, vtu, csv, json, matrix_market (true|false),
//                 stations = s1 s2 ..., probe_axis, deflection_component,
//                 probe_point = x y z
//
// Full-line comments start with '#' or ';'. Relative paths are resolved
// against the directory holding the file.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sfem/bc_loads.hpp"
#include "sfem/material.hpp"
#include "sfem/mesh_io.hpp"
#include "sfem/post_io.hpp"
#include "sfem/solver.hpp"

namespace sfem {

enum class Method { SmoothedFem, ConventionalFem };
Method parse_method(const std::string& name);
std::string to_string(Method method);

enum class AssemblyRoute {
  /// COO buffer, then conversion to CSC.
  Triplets,
  /// Pattern-first accumulation straight into CSC (no triplet buffer).
  Direct,
};
AssemblyRoute parse_assembly_route(const std::string& name);
std::string to_string(AssemblyRoute route);

struct OutputOptions {
  std::filesystem::path directory = "out";
  bool vtu = true;
  bool csv = true;
  bool json = true;
  bool matrix_market = false;
  std::vector<double> stations;
  int probe_axis = 0;
  int deflection_component = 2;
  /// Probe line point; the bounding-box centre when unset.
  std::optional<Point3> probe_point;
};

struct RunConfig {
  std::filesystem::path mesh_prefix;
  FaceMarkerConvention face_markers = FaceMarkerConvention::Auto;
  IsotropicElasticity material{2e8, 0.3};
  Method method = Method::SmoothedFem;
  AssemblyRoute assembly = AssemblyRoute::Triplets;
  SolveOptions solver;
  double penalty_factor = kDefaultPenaltyFactor;
  std::vector<DirichletSpec> dirichlet;
  LoadCase loads;
  unsigned threads = 1;
  /// Stop after assembly (no BCs, solve or field output).
  bool assemble_only = false;
  OutputOptions output;
};

RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

Selector parse_selector(const std::string& key, const std::string& value);
int parse_axis(const std::string& name);

}  // namespace sfem

#include "sfem/config.hpp"

#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace sfem {

namespace {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

std::vector<double> parse_numbers(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("'" + key + "': '" + tok + "' is not a number");
    }
  }
  return out;
}

Vec3 parse_vec3(const std::string& key, const std::string& text) {
  const auto v = parse_numbers(key, text);
  if (v.size() != 3) throw ConfigError("'" + key + "' needs three numbers");
  return {v[0], v[1], v[2]};
}

double parse_double(const std::string& key, const std::string& text) {
  const auto v = parse_numbers(key, text);
  if (v.size() != 1) throw ConfigError("'" + key + "' needs one number");
  return v[0];
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "yes" || text == "on" || text == "1") return true;
  if (text == "false" || text == "no" || text == "off" || text == "0") return false;
  throw ConfigError("'" + key + "' must be true or false");
}

std::string strip_comments(std::istream& in) {
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t");
    if (first != std::string::npos && (line[first] == '#' || line[first] == ';')) continue;
    out << line << '\n';
  }
  return out.str();
}

void reject_unknown(const std::string& section, const pt::ptree& tree, std::initializer_list<const char*> known) {
  for (const auto& [key, _] : tree) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
  }
}

Selector section_selector(const std::string& section, const pt::ptree& tree) {
  const bool plane = tree.count("plane") > 0;
  const bool box = tree.count("box") > 0;
  if (plane == box) throw ConfigError("[" + section + "] needs exactly one of 'plane' or 'box'");
  return plane ? parse_selector("plane", tree.get<std::string>("plane"))
               : parse_selector("box", tree.get<std::string>("box"));
}

}  // namespace

Method parse_method(const std::string& name) {
  if (name == "sfem") return Method::SmoothedFem;
  if (name == "fem") return Method::ConventionalFem;
  throw ConfigError("unknown method '" + name + "' (sfem|fem)");
}

std::string to_string(Method method) { return method == Method::SmoothedFem ? "sfem" : "fem"; }

AssemblyRoute parse_assembly_route(const std::string& name) {
  if (name == "triplets") return AssemblyRoute::Triplets;
  if (name == "direct") return AssemblyRoute::Direct;
  throw ConfigError("unknown assembly route '" + name + "' (triplets|direct)");
}

std::string to_string(AssemblyRoute route) { return route == AssemblyRoute::Triplets ? "triplets" : "direct"; }

int parse_axis(const std::string& name) {
  if (name == "x" || name == "0") return 0;
  if (name == "y" || name == "1") return 1;
  if (name == "z" || name == "2") return 2;
  throw ConfigError("unknown axis '" + name + "' (x|y|z)");
}

Selector parse_selector(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  if (key == "plane") {
    std::string axis, coord;
    if (!(in >> axis >> coord)) throw ConfigError("'plane' expects '<axis> <coordinate>'");
    return PlaneSelector{parse_axis(axis), parse_double("plane", coord)};
  }
  if (key == "box") {
    const auto v = parse_numbers("box", value);
    if (v.size() != 6) throw ConfigError("'box' expects six numbers: x0 y0 z0 x1 y1 z1");
    return BoxSelector{Point3(v[0], v[1], v[2]), Point3(v[3], v[4], v[5])};
  }
  throw ConfigError("unknown selector '" + key + "'");
}

RunConfig parse_run_config(std::istream& in, const fs::path& base_dir) {
  std::istringstream cleaned(strip_comments(in));
  pt::ptree root;
  try {
    pt::read_ini(cleaned, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  RunConfig cfg;
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };

  for (const auto& [name, tree] : root) {
    if (tree.data().size() > 0 && tree.empty()) throw ConfigError("key '" + name + "' outside of a section");
    const auto colon = name.find(':');
    const std::string kind = name.substr(0, colon);
    if (kind == "mesh") {
      reject_unknown(name, tree, {"prefix", "face_marker_convention"});
      if (auto v = tree.get_optional<std::string>("prefix")) cfg.mesh_prefix = resolve(*v);
      if (auto v = tree.get_optional<std::string>("face_marker_convention")) cfg.face_markers = parse_face_marker_convention(*v);
    } else if (kind == "material") {
      reject_unknown(name, tree, {"youngs_modulus", "poisson_ratio"});
      if (auto v = tree.get_optional<std::string>("youngs_modulus")) cfg.material.youngs_modulus = parse_double("youngs_modulus", *v);
      if (auto v = tree.get_optional<std::string>("poisson_ratio")) cfg.material.poisson_ratio = parse_double("poisson_ratio", *v);
    } else if (kind == "analysis") {
      reject_unknown(name, tree, {"method", "threads", "assembly"});
      if (auto v = tree.get_optional<std::string>("method")) cfg.method = parse_method(*v);
      if (auto v = tree.get_optional<std::string>("assembly")) cfg.assembly = parse_assembly_route(*v);
      if (auto v = tree.get_optional<std::string>("threads")) {
        const double t = parse_double("threads", *v);
        if (t < 0 || t != static_cast<unsigned>(t)) throw ConfigError("'threads' must be a non-negative integer");
        cfg.threads = static_cast<unsigned>(t);
      }
    } else if (kind == "solver") {
      reject_unknown(name, tree, {"method", "rel_tolerance", "max_iterations", "penalty_factor"});
      if (auto v = tree.get_optional<std::string>("method")) cfg.solver.method = parse_solver_method(*v);
      if (auto v = tree.get_optional<std::string>("rel_tolerance")) cfg.solver.rel_tolerance = parse_double("rel_tolerance", *v);
      if (auto v = tree.get_optional<std::string>("max_iterations")) {
        const double m = parse_double("max_iterations", *v);
        if (m < 0) throw ConfigError("'max_iterations' must be non-negative");
        cfg.solver.max_iterations = static_cast<std::size_t>(m);
      }
      if (auto v = tree.get_optional<std::string>("penalty_factor")) cfg.penalty_factor = parse_double("penalty_factor", *v);
    } else if (kind == "dirichlet") {
      reject_unknown(name, tree, {"plane", "box", "components", "value"});
      DirichletSpec spec{section_selector(name, tree), {false, false, false}, Vec3::Zero()};
      const std::string comps = tree.get<std::string>("components", "xyz");
      for (char ch : comps) spec.components[parse_axis(std::string(1, ch))] = true;
      if (auto v = tree.get_optional<std::string>("value")) spec.value = parse_vec3("value", *v);
      cfg.dirichlet.push_back(spec);
    } else if (kind == "pressure") {
      reject_unknown(name, tree, {"plane", "box", "pressure", "direction"});
      SurfacePressure p{section_selector(name, tree), 0.0, Vec3(0, 0, -1)};
      auto value = tree.get_optional<std::string>("pressure");
      if (!value) throw ConfigError("[" + name + "] needs 'pressure'");
      p.pressure = parse_double("pressure", *value);
      if (auto v = tree.get_optional<std::string>("direction")) p.direction = parse_vec3("direction", *v);
      cfg.loads.pressures.push_back(p);
    } else if (kind == "point_load") {
      reject_unknown(name, tree, {"node", "force"});
      auto node = tree.get_optional<std::string>("node");
      auto force = tree.get_optional<std::string>("force");
      if (!node || !force) throw ConfigError("[" + name + "] needs 'node' and 'force'");
      cfg.loads.point_loads.push_back({static_cast<NodeIndex>(parse_double("node", *node)), parse_vec3("force", *force)});
    } else if (kind == "output") {
      reject_unknown(name, tree, {"directory", "vtu", "csv", "json", "matrix_market", "stations", "probe_axis",
                                  "deflection_component", "probe_point"});
      OutputOptions& o = cfg.output;
      if (auto v = tree.get_optional<std::string>("directory")) o.directory = resolve(*v);
      if (auto v = tree.get_optional<std::string>("vtu")) o.vtu = parse_bool("vtu", *v);
      if (auto v = tree.get_optional<std::string>("csv")) o.csv = parse_bool("csv", *v);
      if (auto v = tree.get_optional<std::string>("json")) o.json = parse_bool("json", *v);
      if (auto v = tree.get_optional<std::string>("matrix_market")) o.matrix_market = parse_bool("matrix_market", *v);
      if (auto v = tree.get_optional<std::string>("stations")) o.stations = parse_numbers("stations", *v);
      if (auto v = tree.get_optional<std::string>("probe_axis")) o.probe_axis = parse_axis(*v);
      if (auto v = tree.get_optional<std::string>("deflection_component")) o.deflection_component = parse_axis(*v);
      if (auto v = tree.get_optional<std::string>("probe_point")) o.probe_point = parse_vec3("probe_point", *v);
    } else {
      throw ConfigError("unknown section [" + name + "]");
    }
  }
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "config file not found");
  return parse_run_config(in, path.parent_path());
}

}  // namespace sfem

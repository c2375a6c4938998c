#include "sfem/bc_loads.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sfem {

double selector_tolerance(const MeshTopology& mesh) { return 1e-9 * mesh.bounding_box_diagonal(); }

bool selects(const Selector& selector, const Point3& p, double tol) {
  if (const auto* plane = std::get_if<PlaneSelector>(&selector)) {
    return std::abs(p(plane->axis) - plane->value) <= tol;
  }
  const auto& box = std::get<BoxSelector>(selector);
  for (int a = 0; a < 3; ++a) {
    if (p(a) < box.lo(a) - tol || p(a) > box.hi(a) + tol) return false;
  }
  return true;
}

std::vector<NodeIndex> select_nodes(const MeshTopology& mesh, const Selector& selector) {
  const double tol = selector_tolerance(mesh);
  std::vector<NodeIndex> out;
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    if (selects(selector, mesh.nodes.coords[i], tol)) out.push_back(static_cast<NodeIndex>(i));
  }
  return out;
}

std::vector<std::size_t> select_exterior_faces(const MeshTopology& mesh, const Selector& selector) {
  const double tol = selector_tolerance(mesh);
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < mesh.exterior_face_count(); ++k) {
    const auto& f = mesh.faces.exterior[k];
    const bool all = std::all_of(f.nodes.begin(), f.nodes.end(), [&](NodeIndex n) {
      return selects(selector, mesh.nodes.coords[n], tol);
    });
    if (all) out.push_back(k);
  }
  return out;
}

DirichletSet make_dirichlet(std::vector<DirichletDof> dofs, std::size_t dof_count) {
  std::stable_sort(dofs.begin(), dofs.end(),
                   [](const DirichletDof& a, const DirichletDof& b) { return a.dof < b.dof; });
  DirichletSet set;
  for (const DirichletDof& d : dofs) {
    if (d.dof < 0 || static_cast<std::size_t>(d.dof) >= dof_count) {
      throw ConfigError("constrained dof " + std::to_string(d.dof) + " is out of range");
    }
    if (!std::isfinite(d.value)) throw ConfigError("prescribed value for dof " + std::to_string(d.dof) + " is not finite");
    if (!set.dofs.empty() && set.dofs.back().dof == d.dof) {
      if (set.dofs.back().value != d.value) {
        throw ConfigError("dof " + std::to_string(d.dof) + " is prescribed two different values");
      }
      continue;
    }
    set.dofs.push_back(d);
  }
  return set;
}

DirichletSet build_dirichlet(const MeshTopology& mesh, const std::vector<DirichletSpec>& specs) {
  std::vector<DirichletDof> dofs;
  for (std::size_t s = 0; s < specs.size(); ++s) {
    const auto nodes = select_nodes(mesh, specs[s].selector);
    if (nodes.empty()) throw ConfigError("Dirichlet selector " + std::to_string(s) + " matches no node");
    for (NodeIndex n : nodes)
      for (int a = 0; a < 3; ++a)
        if (specs[s].components[a]) dofs.push_back({3 * n + a, specs[s].value(a)});
  }
  return make_dirichlet(std::move(dofs), mesh.dof_count());
}

Eigen::VectorXd pressure_to_nodal_forces(const LoadCase& loads, const MeshTopology& mesh) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.dof_count()));
  const auto& x = mesh.nodes.coords;
  for (std::size_t s = 0; s < loads.pressures.size(); ++s) {
    const SurfacePressure& p = loads.pressures[s];
    const auto faces = select_exterior_faces(mesh, p.selector);
    if (faces.empty()) throw ConfigError("pressure selector " + std::to_string(s) + " matches no exterior face");
    const double dn = p.direction.norm();
    if (!(dn > 0.0)) throw ConfigError("pressure direction must be non-zero");
    const Vec3 dir = p.direction / dn;
    for (std::size_t k : faces) {
      const auto& n = mesh.faces.exterior[k].nodes;
      const double area = tri_area(x[n[0]], x[n[1]], x[n[2]]);
      const Vec3 share = (p.pressure * area / 3.0) * dir;
      for (NodeIndex v : n) f.segment<3>(3 * v) += share;
    }
  }
  for (const PointLoad& pl : loads.point_loads) {
    if (pl.node < 0 || static_cast<std::size_t>(pl.node) >= mesh.node_count()) {
      throw ConfigError("point load node " + std::to_string(pl.node) + " is out of range");
    }
    f.segment<3>(3 * pl.node) += pl.force;
  }
  return f;
}

double loaded_area(const MeshTopology& mesh, const Selector& selector) {
  const auto& x = mesh.nodes.coords;
  double total = 0.0;
  for (std::size_t k : select_exterior_faces(mesh, selector)) {
    const auto& n = mesh.faces.exterior[k].nodes;
    total += tri_area(x[n[0]], x[n[1]], x[n[2]]);
  }
  return total;
}

double apply_penalty_bc(CscMatrix& k, Eigen::VectorXd& f, const DirichletSet& bc,
                        double penalty_factor, Diagnostics* diag) {
  if (bc.empty()) {
    if (diag) diag->warn("no Dirichlet constraints: the stiffness matrix is singular for a free body");
    return 0.0;
  }
  if (!(penalty_factor > 0.0)) throw ConfigError("penalty factor must be positive");
  const double alpha = penalty_factor * k.max_abs_diagonal();
  for (const DirichletDof& d : bc.dofs) {
    const std::int64_t p = k.find(d.dof, d.dof);
    if (p < 0) throw TopologyError("dof " + std::to_string(d.dof) + " has no diagonal entry");
    k.values[p] += alpha;
    f(d.dof) += alpha * d.value;
  }
  return alpha;
}

void apply_elimination_bc(CscMatrix& k, Eigen::VectorXd& f, const DirichletSet& bc) {
  std::vector<char> fixed(k.dimension, 0);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(k.dimension);
  for (const DirichletDof& d : bc.dofs) {
    fixed[d.dof] = 1;
    g(d.dof) = d.value;
  }
  // f_free -= K_free,fixed g, read from the constrained columns.
  for (const DirichletDof& d : bc.dofs) {
    for (std::int64_t p = k.col_ptr[d.dof]; p < k.col_ptr[d.dof + 1]; ++p) {
      const DofIndex r = k.row_idx[p];
      if (!fixed[r]) f(r) -= k.values[p] * d.value;
    }
  }
  for (DofIndex c = 0; c < k.dimension; ++c) {
    for (std::int64_t p = k.col_ptr[c]; p < k.col_ptr[c + 1]; ++p) {
      const DofIndex r = k.row_idx[p];
      if (fixed[r] || fixed[c]) k.values[p] = (r == c) ? 1.0 : 0.0;
    }
  }
  for (const DirichletDof& d : bc.dofs) {
    if (k.find(d.dof, d.dof) < 0) throw TopologyError("dof " + std::to_string(d.dof) + " has no diagonal entry");
    f(d.dof) = g(d.dof);
  }
}

}  // namespace sfem

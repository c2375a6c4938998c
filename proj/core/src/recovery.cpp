#include "sfem/recovery.hpp"

#include <cassert>

#include "sfem/parallel.hpp"

namespace sfem {

DomainState domain_strain_stress(const SmoothingDomain& domain, const SmoothedB& b,
                                 const Eigen::VectorXd& d, const ElasticityMatrix& c) {
  DomainState s;
  s.ordinal = domain.ordinal;
  s.volume = domain.volume;
  s.node_count = domain.node_count;
  s.nodes = domain.field_nodes;
  Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 15, 1> local(3 * domain.node_count);
  for (int i = 0; i < domain.node_count; ++i) local.segment<3>(3 * i) = d.segment<3>(3 * domain.field_nodes[i]);
  s.strain = b.matrix() * local;
  s.stress = c * s.strain;
  return s;
}

std::vector<DomainState> recover_domains(const MeshTopology& mesh, const Eigen::VectorXd& d,
                                         const ElasticityMatrix& c, unsigned threads) {
  std::vector<DomainState> states(mesh.face_count());
  parallel_for(states.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const SmoothingDomain dom = build_domain(mesh, k);
      states[k] = domain_strain_stress(dom, smoothed_b_matrix(dom), d, c);
    }
  });
  return states;
}

NodalField nodal_average(std::span<const DomainState> states, const MeshTopology& mesh) {
  const std::size_t nn = mesh.node_count();
  NodalField field;
  field.stress.assign(nn, Voigt::Zero());
  field.weight.assign(nn, 0.0);
  field.von_mises.assign(nn, 0.0);
  for (const DomainState& s : states) {
    for (int i = 0; i < s.node_count; ++i) {
      field.stress[s.nodes[i]] += s.volume * s.stress;
      field.weight[s.nodes[i]] += s.volume;
    }
  }
  for (std::size_t v = 0; v < nn; ++v) {
    assert(field.weight[v] > 0.0 && "node touches no integration cell");
    if (field.weight[v] > 0.0) field.stress[v] /= field.weight[v];
    field.von_mises[v] = von_mises(field.stress[v]);
  }
  return field;
}

}  // namespace sfem

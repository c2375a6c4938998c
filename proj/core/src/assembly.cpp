#include "sfem/assembly.hpp"

#include <algorithm>
#include <cassert>
#include <cstring>
#include <fstream>
#include <numeric>

#include "sfem/errors.hpp"
#include "sfem/parallel.hpp"

namespace sfem {

namespace {

namespace fs = std::filesystem;

template <class T>
void fnv_bytes(std::uint64_t& h, const std::vector<T>& v) {
  const auto* p = reinterpret_cast<const unsigned char*>(v.data());
  const std::size_t n = v.size() * sizeof(T);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
}

template <class Perm>
CscMatrix triplets_to_csc_impl(const TripletBuffer& buf, DofIndex dim, CscOptions options) {
  const std::size_t n = buf.size();
  std::vector<std::int64_t> start(static_cast<std::size_t>(dim) + 1, 0);
  for (std::size_t s = 0; s < n; ++s) {
    const DofIndex r = buf.rows[s];
    const DofIndex c = buf.cols[s];
    if (r < 0 || r >= dim || c < 0 || c >= dim) {
      throw std::logic_error("triplets_to_csc: index outside the matrix dimension");
    }
    ++start[c + 1];
  }
  std::partial_sum(start.begin(), start.end(), start.begin());

  // Stable bucket by column keeps slot order inside each column.
  std::vector<Perm> perm(n);
  {
    std::vector<std::int64_t> next(start.begin(), start.end() - 1);
    for (std::size_t s = 0; s < n; ++s) perm[next[buf.cols[s]]++] = static_cast<Perm>(s);
  }

  CscMatrix out;
  out.dimension = dim;
  out.col_ptr.assign(static_cast<std::size_t>(dim) + 1, 0);
  out.row_idx.reserve(n / 4);
  out.values.reserve(n / 4);
  for (DofIndex c = 0; c < dim; ++c) {
    auto first = perm.begin() + start[c];
    auto last = perm.begin() + start[c + 1];
    std::stable_sort(first, last, [&](Perm a, Perm b) { return buf.rows[a] < buf.rows[b]; });
    for (auto it = first; it != last;) {
      const DofIndex r = buf.rows[*it];
      double sum = buf.values[*it];
      for (++it; it != last && buf.rows[*it] == r; ++it) sum += buf.values[*it];
      if (options.drop_zeros && sum == 0.0) continue;
      out.row_idx.push_back(r);
      out.values.push_back(sum);
    }
    out.col_ptr[c + 1] = static_cast<std::int64_t>(out.values.size());
  }
  out.row_idx.shrink_to_fit();
  out.values.shrink_to_fit();
  return out;
}

}  // namespace

TripletBuffer TripletBuffer::for_faces(std::size_t exterior_faces, std::size_t interior_faces) {
  TripletBuffer b;
  b.exterior_blocks = exterior_faces;
  b.interior_blocks = interior_faces;
  const std::size_t n = triplet_count(exterior_faces, interior_faces);
  b.rows.resize(n);
  b.cols.resize(n);
  b.values.resize(n);
  return b;
}

TripletBuffer TripletBuffer::for_elements(std::size_t elements) { return for_faces(elements, 0); }

std::size_t TripletBuffer::slot_offset(DomainKind kind, std::size_t ordinal_in_kind) const noexcept {
  if (kind == DomainKind::Exterior) return ordinal_in_kind * kExteriorSlots;
  return exterior_blocks * kExteriorSlots + ordinal_in_kind * kInteriorSlots;
}

std::uint64_t buffer_digest(const TripletBuffer& buffer) {
  std::uint64_t h = 1469598103934665603ULL;
  fnv_bytes(h, buffer.rows);
  fnv_bytes(h, buffer.cols);
  fnv_bytes(h, buffer.values);
  return h;
}

DomainStiffness domain_stiffness(const SmoothingDomain& domain, const SmoothedB& b,
                                 const ElasticityMatrix& c) {
  DomainStiffness k;
  k.node_count = domain.node_count;
  k.nodes = domain.field_nodes;
  const StrainDisplacement bm = b.matrix();
  const StrainDisplacement cb = c * bm;
  k.block.noalias() = bm.transpose() * cb;
  k.block *= domain.volume;
  k.block.triangularView<Eigen::StrictlyLower>() = k.block.transpose();
  return k;
}

DomainStiffness domain_stiffness(const MeshTopology& mesh, std::size_t ordinal,
                                 const ElasticityMatrix& c) {
  const SmoothingDomain d = build_domain(mesh, ordinal);
  return domain_stiffness(d, smoothed_b_matrix(d), c);
}

void scatter_block(std::size_t offset, const DomainStiffness& k, TripletBuffer& buf) {
  const Eigen::Index dim = 3 * k.node_count;
  assert(offset + static_cast<std::size_t>(dim * dim) <= buf.size() && "slot overflow");
  std::size_t s = offset;
  for (Eigen::Index i = 0; i < dim; ++i) {
    const DofIndex row = 3 * k.nodes[i / 3] + static_cast<DofIndex>(i % 3);
    for (Eigen::Index j = 0; j < dim; ++j, ++s) {
      buf.rows[s] = row;
      buf.cols[s] = 3 * k.nodes[j / 3] + static_cast<DofIndex>(j % 3);
      buf.values[s] = k.block(i, j);
    }
  }
}

void scatter_slots(std::size_t ordinal_in_kind, DomainKind kind, const DomainStiffness& block,
                   TripletBuffer& buffer) {
  const std::size_t expected = kind == DomainKind::Exterior ? 4 : 5;
  assert(static_cast<std::size_t>(block.node_count) == expected && "block size does not match face kind");
  (void)expected;
  scatter_block(buffer.slot_offset(kind, ordinal_in_kind), block, buffer);
}

void assemble_global_into(const MeshTopology& mesh, const ElasticityMatrix& c, unsigned threads,
                          TripletBuffer& buf) {
  const std::size_t ne = mesh.exterior_face_count();
  const std::size_t ni = mesh.interior_face_count();
  const std::size_t n = triplet_count(ne, ni);
  buf.exterior_blocks = ne;
  buf.interior_blocks = ni;
  buf.rows.resize(n);
  buf.cols.resize(n);
  buf.values.resize(n);
  parallel_for(ne + ni, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const DomainStiffness block = domain_stiffness(mesh, k, c);
      if (k < ne) {
        scatter_slots(k, DomainKind::Exterior, block, buf);
      } else {
        scatter_slots(k - ne, DomainKind::Interior, block, buf);
      }
    }
  });
}

TripletBuffer assemble_global(const MeshTopology& mesh, const ElasticityMatrix& c, unsigned threads) {
  TripletBuffer buf;
  assemble_global_into(mesh, c, threads, buf);
  return buf;
}

CscMatrix triplets_to_csc(const TripletBuffer& buffer, DofIndex dimension, CscOptions options) {
  if (buffer.size() <= 0xffffffffULL) return triplets_to_csc_impl<std::uint32_t>(buffer, dimension, options);
  return triplets_to_csc_impl<std::size_t>(buffer, dimension, options);
}

namespace {

int domain_field_nodes(const MeshTopology& mesh, std::size_t k, std::array<NodeIndex, kMaxFieldNodes>& out) {
  const std::size_t ne = mesh.exterior_face_count();
  if (k < ne) {
    const ExteriorFace& f = mesh.faces.exterior[k];
    out = {f.nodes[0], f.nodes[1], f.nodes[2], f.remaining, 0};
    return 4;
  }
  const InteriorFace& f = mesh.faces.interior[k - ne];
  out = {f.nodes[0], f.nodes[1], f.nodes[2], f.remaining[0], f.remaining[1]};
  return 5;
}

// Sorted node adjacency: nbr[ptr[v], ptr[v + 1]) lists every node sharing a
// smoothing domain with v, v included.
struct NodePattern {
  std::vector<std::int64_t> ptr;
  std::vector<NodeIndex> nbr;
};

NodePattern build_node_pattern(const MeshTopology& mesh, unsigned threads) {
  const std::size_t nn = mesh.node_count();
  const std::size_t domains = mesh.face_count();
  std::vector<std::int64_t> nbr_ptr(nn + 1, 0);
  std::array<NodeIndex, kMaxFieldNodes> fn{};
  for (std::size_t k = 0; k < domains; ++k) {
    const int m = domain_field_nodes(mesh, k, fn);
    for (int a = 0; a < m; ++a) nbr_ptr[fn[a] + 1] += m;
  }
  std::partial_sum(nbr_ptr.begin(), nbr_ptr.end(), nbr_ptr.begin());
  std::vector<NodeIndex> nbr(static_cast<std::size_t>(nbr_ptr[nn]));
  {
    std::vector<std::int64_t> next(nbr_ptr.begin(), nbr_ptr.end() - 1);
    for (std::size_t k = 0; k < domains; ++k) {
      const int m = domain_field_nodes(mesh, k, fn);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) nbr[next[fn[a]]++] = fn[b];
    }
  }
  std::vector<std::int64_t> uniq_ptr(nn + 1, 0);
  parallel_for(nn, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t v = begin; v < end; ++v) {
      auto first = nbr.begin() + nbr_ptr[v];
      auto last = nbr.begin() + nbr_ptr[v + 1];
      std::sort(first, last);
      uniq_ptr[v + 1] = std::unique(first, last) - first;
    }
  });
  for (std::size_t v = 0; v < nn; ++v) {
    std::copy(nbr.begin() + nbr_ptr[v], nbr.begin() + nbr_ptr[v] + uniq_ptr[v + 1],
              nbr.begin() + uniq_ptr[v]);
    uniq_ptr[v + 1] += uniq_ptr[v];
  }
  nbr.resize(static_cast<std::size_t>(uniq_ptr[nn]));
  nbr.shrink_to_fit();
  return {std::move(uniq_ptr), std::move(nbr)};
}

}  // namespace

std::size_t structural_nnz(const MeshTopology& mesh, unsigned threads) {
  return 9 * build_node_pattern(mesh, threads).nbr.size();
}

CscMatrix assemble_csc(const MeshTopology& mesh, const ElasticityMatrix& c, unsigned threads,
                       CscOptions options) {
  const std::size_t nn = mesh.node_count();
  const std::size_t domains = mesh.face_count();
  NodePattern pattern = build_node_pattern(mesh, threads);
  const std::vector<std::int64_t>& uniq_ptr = pattern.ptr;
  const std::vector<NodeIndex>& nbr = pattern.nbr;

  // Dof-level CSC pattern: column 3v + a holds rows 3w + b for w in nbr(v).
  CscMatrix out;
  out.dimension = static_cast<DofIndex>(3 * nn);
  out.col_ptr.assign(3 * nn + 1, 0);
  for (std::size_t v = 0; v < nn; ++v) {
    const std::int64_t len = 3 * (uniq_ptr[v + 1] - uniq_ptr[v]);
    for (int a = 0; a < 3; ++a) out.col_ptr[3 * v + a + 1] = out.col_ptr[3 * v + a] + len;
  }
  const auto total = static_cast<std::size_t>(out.col_ptr.back());
  out.row_idx.resize(total);
  out.values.assign(total, 0.0);
  parallel_for(nn, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t v = begin; v < end; ++v) {
      for (int a = 0; a < 3; ++a) {
        std::int64_t p = out.col_ptr[3 * v + a];
        for (std::int64_t q = uniq_ptr[v]; q < uniq_ptr[v + 1]; ++q)
          for (int b = 0; b < 3; ++b) out.row_idx[p++] = 3 * nbr[q] + b;
      }
    }
  });

  // Numeric pass in batches: blocks computed in parallel, then each worker
  // adds the entries of its own column range in slot order.
  auto position = [&](NodeIndex col_node, NodeIndex row_node) {
    auto first = nbr.begin() + uniq_ptr[col_node];
    auto last = nbr.begin() + uniq_ptr[col_node + 1];
    return std::lower_bound(first, last, row_node) - first;
  };
  constexpr std::size_t kBatch = 1 << 15;
  std::vector<DomainStiffness> blocks(std::min(kBatch, domains));
  for (std::size_t base = 0; base < domains; base += kBatch) {
    const std::size_t count = std::min(kBatch, domains - base);
    parallel_for(count, threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) blocks[i] = domain_stiffness(mesh, base + i, c);
    });
    parallel_for(nn, threads, [&](std::size_t node_begin, std::size_t node_end) {
      for (std::size_t i = 0; i < count; ++i) {
        const DomainStiffness& k = blocks[i];
        for (int cj = 0; cj < k.node_count; ++cj) {
          const NodeIndex col_node = k.nodes[cj];
          if (static_cast<std::size_t>(col_node) < node_begin || static_cast<std::size_t>(col_node) >= node_end) continue;
          for (int ri = 0; ri < k.node_count; ++ri) {
            const auto slot = 3 * position(col_node, k.nodes[ri]);
            for (int b = 0; b < 3; ++b) {
              const std::int64_t col_start = out.col_ptr[3 * col_node + b];
              for (int a = 0; a < 3; ++a) out.values[col_start + slot + a] += k.block(3 * ri + a, 3 * cj + b);
            }
          }
        }
      }
    });
  }

  if (options.drop_zeros) {
    std::int64_t w = 0;
    std::int64_t col_begin = 0;
    for (DofIndex col = 0; col < out.dimension; ++col) {
      const std::int64_t col_end = out.col_ptr[col + 1];
      for (std::int64_t p = col_begin; p < col_end; ++p) {
        if (out.values[p] == 0.0) continue;
        out.row_idx[w] = out.row_idx[p];
        out.values[w] = out.values[p];
        ++w;
      }
      col_begin = col_end;
      out.col_ptr[col + 1] = w;
    }
    out.row_idx.resize(w);
    out.values.resize(w);
    out.row_idx.shrink_to_fit();
    out.values.shrink_to_fit();
  }
  return out;
}

std::size_t CscMatrix::storage_bytes() const noexcept {
  return values.size() * sizeof(double) + row_idx.size() * sizeof(DofIndex) +
         col_ptr.size() * sizeof(std::int64_t);
}

double CscMatrix::dense_bytes() const noexcept {
  const double d = static_cast<double>(dimension);
  return d * d * sizeof(double);
}

std::int64_t CscMatrix::find(DofIndex row, DofIndex col) const {
  auto first = row_idx.begin() + col_ptr[col];
  auto last = row_idx.begin() + col_ptr[col + 1];
  auto it = std::lower_bound(first, last, row);
  if (it == last || *it != row) return -1;
  return it - row_idx.begin();
}

double CscMatrix::coeff(DofIndex row, DofIndex col) const {
  const std::int64_t p = find(row, col);
  return p < 0 ? 0.0 : values[p];
}

Eigen::VectorXd CscMatrix::diagonal() const {
  Eigen::VectorXd d(dimension);
  for (DofIndex i = 0; i < dimension; ++i) d(i) = coeff(i, i);
  return d;
}

double CscMatrix::max_abs_diagonal() const {
  double m = 0.0;
  for (DofIndex i = 0; i < dimension; ++i) m = std::max(m, std::abs(coeff(i, i)));
  return m;
}

Eigen::MatrixXd CscMatrix::to_dense() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dimension, dimension);
  for (DofIndex c = 0; c < dimension; ++c)
    for (std::int64_t p = col_ptr[c]; p < col_ptr[c + 1]; ++p) a(row_idx[p], c) += values[p];
  return a;
}

void CscMatrix::multiply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
  y.setZero(dimension);
  for (DofIndex c = 0; c < dimension; ++c) {
    const double xc = x(c);
    for (std::int64_t p = col_ptr[c]; p < col_ptr[c + 1]; ++p) y(row_idx[p]) += values[p] * xc;
  }
}

void CscMatrix::multiply_symmetric(const Eigen::VectorXd& x, Eigen::VectorXd& y, unsigned threads) const {
  y.resize(dimension);
  parallel_for(static_cast<std::size_t>(dimension), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      double sum = 0.0;
      for (std::int64_t p = col_ptr[c]; p < col_ptr[c + 1]; ++p) sum += values[p] * x(row_idx[p]);
      y(static_cast<Eigen::Index>(c)) = sum;
    }
  });
}

void write_matrix_market(const CscMatrix& m, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out.precision(17);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.dimension << ' ' << m.dimension << ' ' << m.nnz() << '\n';
  for (DofIndex c = 0; c < m.dimension; ++c)
    for (std::int64_t p = m.col_ptr[c]; p < m.col_ptr[c + 1]; ++p)
      out << m.row_idx[p] + 1 << ' ' << c + 1 << ' ' << m.values[p] << '\n';
  if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace sfem

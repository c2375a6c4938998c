#pragma once

// Smoothing-domain stiffness blocks, the pre-sized COO triplet buffer they are
// scattered into, and its conversion to compressed sparse columns.
//
// Slot layout: exterior face k owns slots [144 k, 144 (k + 1)); interior face
// m owns [144 N_e + 225 m, 144 N_e + 225 (m + 1)). Each block is written
// row-major with global dof 3 * node + component. Every face writes only its
// own slots, so the buffer is identical for any thread count.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "sfem/material.hpp"
#include "sfem/mesh_io.hpp"
#include "sfem/smoothing.hpp"

namespace sfem {

using DofIndex = std::int32_t;

inline constexpr std::size_t kExteriorSlots = 144;  // 12 x 12
inline constexpr std::size_t kInteriorSlots = 225;  // 15 x 15

/// N_e * 144 + N_i * 225.
constexpr std::size_t triplet_count(std::size_t exterior_faces, std::size_t interior_faces) {
  return exterior_faces * kExteriorSlots + interior_faces * kInteriorSlots;
}

struct TripletBuffer {
  std::vector<DofIndex> rows;
  std::vector<DofIndex> cols;
  std::vector<double> values;
  /// Number of 144-slot blocks at the front of the buffer.
  std::size_t exterior_blocks = 0;
  std::size_t interior_blocks = 0;

  static TripletBuffer for_faces(std::size_t exterior_faces, std::size_t interior_faces);
  /// One 144-slot block per tetrahedron (conventional FEM).
  static TripletBuffer for_elements(std::size_t elements);

  std::size_t size() const noexcept { return values.size(); }
  std::size_t slot_offset(DomainKind kind, std::size_t ordinal_in_kind) const noexcept;
  bool operator==(const TripletBuffer&) const = default;
};

/// FNV-1a over the raw bytes of the three arrays.
std::uint64_t buffer_digest(const TripletBuffer& buffer);

using BlockMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 15, 15>;

struct DomainStiffness {
  int node_count = 0;
  std::array<NodeIndex, kMaxFieldNodes> nodes{};
  /// 3n x 3n, exactly symmetric.
  BlockMatrix block;
};

/// B^T c B V for one smoothing domain.
DomainStiffness domain_stiffness(const SmoothingDomain& domain, const SmoothedB& b,
                                 const ElasticityMatrix& c);

/// Builds domain `ordinal` and returns its stiffness block.
DomainStiffness domain_stiffness(const MeshTopology& mesh, std::size_t ordinal,
                                 const ElasticityMatrix& c);

/// Writes `block` row-major at `offset`.
void scatter_block(std::size_t offset, const DomainStiffness& block, TripletBuffer& buffer);

/// Writes the block of face `ordinal_in_kind` into its reserved slots.
void scatter_slots(std::size_t ordinal_in_kind, DomainKind kind, const DomainStiffness& block,
                   TripletBuffer& buffer);

TripletBuffer assemble_global(const MeshTopology& mesh, const ElasticityMatrix& c,
                              unsigned threads = 1);
/// Same as assemble_global, reusing `buffer`'s storage.
void assemble_global_into(const MeshTopology& mesh, const ElasticityMatrix& c, unsigned threads,
                          TripletBuffer& buffer);

struct CscMatrix {
  DofIndex dimension = 0;
  std::vector<std::int64_t> col_ptr;
  std::vector<DofIndex> row_idx;
  std::vector<double> values;

  std::size_t nnz() const noexcept { return values.size(); }
  /// Bytes held by values, row indices and column pointers.
  std::size_t storage_bytes() const noexcept;
  /// Bytes a dense dimension x dimension double matrix would take.
  double dense_bytes() const noexcept;

  /// Index into row_idx/values of entry (row, col), or -1 if not stored.
  std::int64_t find(DofIndex row, DofIndex col) const;
  double coeff(DofIndex row, DofIndex col) const;
  Eigen::VectorXd diagonal() const;
  double max_abs_diagonal() const;
  Eigen::MatrixXd to_dense() const;

  /// y = A x for a general matrix (serial).
  void multiply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;
  /// y = A x assuming A is symmetric: each y_i is the dot product of column i
  /// with x, accumulated in stored order, so the result does not depend on
  /// the thread count.
  void multiply_symmetric(const Eigen::VectorXd& x, Eigen::VectorXd& y, unsigned threads = 1) const;
};

struct CscOptions {
  /// Drop entries that sum to exactly zero.
  bool drop_zeros = true;
};

/// Sums duplicates in a fixed order (column, then row, then slot index) and
/// sorts rows within each column.
CscMatrix triplets_to_csc(const TripletBuffer& buffer, DofIndex dimension, CscOptions options = {});

/// Builds the same matrix as triplets_to_csc(assemble_global(...)) without
/// materializing the triplet buffer: the sparsity pattern comes from the
/// domain node sets and blocks are accumulated in slot order.
CscMatrix assemble_csc(const MeshTopology& mesh, const ElasticityMatrix& c, unsigned threads = 1,
                       CscOptions options = {});

/// Stored entries of the assembled matrix before zero dropping: 9 per pair
/// of nodes sharing a smoothing domain.
std::size_t structural_nnz(const MeshTopology& mesh, unsigned threads = 1);

/// MatrixMarket "coordinate real general" dump, 1-based.
void write_matrix_market(const CscMatrix& matrix, const std::filesystem::path& path);

}  // namespace sfem

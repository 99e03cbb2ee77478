#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <vector>

#include "dualgen/chem.hpp"

namespace dualgen::graph {

using Positions = Eigen::Matrix<double, Eigen::Dynamic, 3>;

/// Role pair of a directed edge src -> dst.
enum class EdgeKind { ProtProt = 0, LigLig = 1, ProtLig = 2, LigProt = 3 };
inline constexpr int kEdgeKindCount = 4;

EdgeKind edge_kind(bool src_is_ligand, bool dst_is_ligand);

/// k capped at nodes - 1, for samplers that must run on small complexes.
inline std::size_t clamp_k(std::size_t k, std::size_t nodes) { return std::min(k, nodes > 0 ? nodes - 1 : 0); }

/// Ligand node state: coordinates (N_M x 3) and type simplex rows (N_M x K).
struct LigandNodes {
  Positions x;
  Eigen::MatrixXd v;

  std::size_t size() const { return static_cast<std::size_t>(x.rows()); }
};

struct Edge {
  std::size_t src = 0;
  std::size_t dst = 0;
  EdgeKind kind = EdgeKind::ProtProt;
  double distance = 0.0;
};

/// knn graph over pocket ∪ ligand. Pocket nodes occupy [0, n_protein), ligand
/// nodes follow. Each node receives messages from its k nearest neighbors;
/// edges are grouped by dst in ascending order.
struct ComplexGraph {
  std::size_t n_protein = 0;
  std::size_t n_ligand = 0;
  std::size_t k = 0;
  Positions positions;
  Eigen::MatrixXd protein_types;
  Eigen::MatrixXd ligand_types;
  std::vector<bool> ligand_mask;
  std::vector<Edge> edges;

  std::size_t node_count() const { return n_protein + n_ligand; }
  std::size_t ligand_offset() const { return n_protein; }
  Positions ligand_positions() const { return positions.bottomRows(static_cast<Eigen::Index>(n_ligand)); }
};

/// Pocket coordinates and types as dense arrays.
struct PocketArrays {
  Positions x;
  Eigen::MatrixXd types;

  static PocketArrays from(const chem::Pocket& pocket);
  std::size_t size() const { return static_cast<std::size_t>(x.rows()); }
};

ComplexGraph build_complex_graph(const PocketArrays& pocket, const LigandNodes& ligand, std::size_t k);
ComplexGraph build_complex_graph(const chem::Pocket& pocket, const LigandNodes& ligand, std::size_t k);

/// Rebuilds the knn structure after the ligand moved.
ComplexGraph refresh_distances(const ComplexGraph& g, const Positions& ligand_positions);

/// Two complex graphs sharing the ligand block: first over P1 ∪ L, second over T·P2 ∪ L.
struct DualGraphPair {
  ComplexGraph first;
  ComplexGraph second;

  std::size_t ligand_count() const { return first.n_ligand; }
  bool ligand_blocks_equal() const;
};

DualGraphPair build_dual_graphs(const PocketArrays& p1, const PocketArrays& p2_transformed,
                                const LigandNodes& ligand, std::size_t k);
DualGraphPair build_dual_graphs(const chem::Pocket& p1, const chem::Pocket& p2_transformed,
                                const LigandNodes& ligand, std::size_t k);

DualGraphPair refresh_distances(const DualGraphPair& pair, const Positions& ligand_positions);

}  // namespace dualgen::graph

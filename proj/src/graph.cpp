#include "dualgen/graph.hpp"

#include "dualgen/error.hpp"
#include "dualgen/geom.hpp"

namespace dualgen::graph {

namespace {

void connect(ComplexGraph& g) {
  const std::size_t n = g.node_count();
  geom::PointCloud pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = g.positions.row(static_cast<Eigen::Index>(i)).transpose();
  const auto neighbors = geom::knn_neighbors(pts, g.k);

  g.edges.clear();
  g.edges.reserve(n * g.k);
  for (std::size_t dst = 0; dst < n; ++dst) {
    for (std::size_t src : neighbors[dst]) {
      g.edges.push_back({src, dst, edge_kind(g.ligand_mask[src], g.ligand_mask[dst]), (pts[dst] - pts[src]).norm()});
    }
  }
}

}  // namespace

EdgeKind edge_kind(bool src_is_ligand, bool dst_is_ligand) {
  if (src_is_ligand) return dst_is_ligand ? EdgeKind::LigLig : EdgeKind::LigProt;
  return dst_is_ligand ? EdgeKind::ProtLig : EdgeKind::ProtProt;
}

PocketArrays PocketArrays::from(const chem::Pocket& pocket) {
  PocketArrays out;
  const auto n = static_cast<Eigen::Index>(pocket.atoms.size());
  out.x.resize(n, 3);
  const auto kp = pocket.atoms.empty() ? 0 : pocket.atoms.front().type.size();
  out.types.resize(n, kp);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& atom = pocket.atoms[static_cast<std::size_t>(i)];
    if (atom.type.size() != kp) throw ShapeMismatch("pocket atoms have inconsistent type widths");
    out.x.row(i) = atom.position.transpose();
    out.types.row(i) = atom.type.transpose();
  }
  return out;
}

ComplexGraph build_complex_graph(const PocketArrays& pocket, const LigandNodes& ligand, std::size_t k) {
  if (pocket.size() == 0) throw DegenerateInput("complex graph needs a nonempty pocket");
  if (ligand.v.rows() != ligand.x.rows()) throw ShapeMismatch("ligand coordinate and type row counts differ");
  ComplexGraph g;
  g.n_protein = pocket.size();
  g.n_ligand = ligand.size();
  g.k = k;
  g.positions.resize(static_cast<Eigen::Index>(g.node_count()), 3);
  g.positions.topRows(pocket.x.rows()) = pocket.x;
  g.positions.bottomRows(ligand.x.rows()) = ligand.x;
  g.protein_types = pocket.types;
  g.ligand_types = ligand.v;
  g.ligand_mask.assign(g.node_count(), false);
  for (std::size_t i = g.n_protein; i < g.node_count(); ++i) g.ligand_mask[i] = true;
  connect(g);
  return g;
}

ComplexGraph build_complex_graph(const chem::Pocket& pocket, const LigandNodes& ligand, std::size_t k) {
  return build_complex_graph(PocketArrays::from(pocket), ligand, k);
}

ComplexGraph refresh_distances(const ComplexGraph& g, const Positions& ligand_positions) {
  if (static_cast<std::size_t>(ligand_positions.rows()) != g.n_ligand) {
    throw ShapeMismatch("refresh_distances: ligand position count changed");
  }
  ComplexGraph out = g;
  out.positions.bottomRows(ligand_positions.rows()) = ligand_positions;
  connect(out);
  return out;
}

bool DualGraphPair::ligand_blocks_equal() const {
  if (first.n_ligand != second.n_ligand) return false;
  const auto n = static_cast<Eigen::Index>(first.n_ligand);
  return first.positions.bottomRows(n) == second.positions.bottomRows(n) && first.ligand_types == second.ligand_types;
}

DualGraphPair build_dual_graphs(const PocketArrays& p1, const PocketArrays& p2_transformed,
                                const LigandNodes& ligand, std::size_t k) {
  return {build_complex_graph(p1, ligand, k), build_complex_graph(p2_transformed, ligand, k)};
}

DualGraphPair build_dual_graphs(const chem::Pocket& p1, const chem::Pocket& p2_transformed,
                                const LigandNodes& ligand, std::size_t k) {
  return build_dual_graphs(PocketArrays::from(p1), PocketArrays::from(p2_transformed), ligand, k);
}

DualGraphPair refresh_distances(const DualGraphPair& pair, const Positions& ligand_positions) {
  return {refresh_distances(pair.first, ligand_positions), refresh_distances(pair.second, ligand_positions)};
}

}  // namespace dualgen::graph

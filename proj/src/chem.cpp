#include "dualgen/chem.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <queue>
#include <set>

#include "dualgen/error.hpp"

namespace dualgen::chem {

namespace {

// Single-bond covalent radii (Å), Cordero et al. 2008. Carbon is the sp3 value.
const std::map<std::string, double, std::less<>>& radius_table() {
  static const std::map<std::string, double, std::less<>> table = {
      {"H", 0.31},  {"B", 0.84},  {"C", 0.76},  {"N", 0.71},  {"O", 0.66},  {"F", 0.57},
      {"Na", 1.66}, {"Mg", 1.41}, {"Al", 1.21}, {"Si", 1.11}, {"P", 1.07},  {"S", 1.05},
      {"Cl", 1.02}, {"K", 2.03},  {"Ca", 1.76}, {"Mn", 1.39}, {"Fe", 1.32}, {"Co", 1.26},
      {"Ni", 1.24}, {"Cu", 1.32}, {"Zn", 1.22}, {"Se", 1.20}, {"Br", 1.20}, {"I", 1.39},
  };
  return table;
}

constexpr double kBondTolerance = 0.4;

std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adjacency(const Molecule& mol) {
  // adj[a] = (neighbor, bond index)
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(mol.atoms.size());
  const auto& bonds = *mol.bonds;
  for (std::size_t b = 0; b < bonds.size(); ++b) {
    adj[bonds[b].i].emplace_back(bonds[b].j, b);
    adj[bonds[b].j].emplace_back(bonds[b].i, b);
  }
  return adj;
}

const std::vector<Bond>& require_bonds(const Molecule& mol) {
  if (!mol.bonds) throw MissingBonds("molecule '" + mol.name + "' has no bond list");
  return *mol.bonds;
}

}  // namespace

AtomTypeVocab::AtomTypeVocab(std::vector<std::string> elements) : elements_(std::move(elements)) {
  if (elements_.size() < 2) throw Error("atom type vocabulary needs at least two entries");
  std::set<std::string> seen(elements_.begin(), elements_.end());
  if (seen.size() != elements_.size()) throw Error("atom type vocabulary has duplicate entries");
}

AtomTypeVocab AtomTypeVocab::ligand_default() { return AtomTypeVocab({"C", "N", "O", "F", "P", "S", "Cl"}); }

AtomTypeVocab AtomTypeVocab::protein_default() {
  return AtomTypeVocab({"C", "N", "O", "F", "P", "S", "Cl", std::string(kOtherSymbol)});
}

std::optional<std::size_t> AtomTypeVocab::index_of(std::string_view symbol) const {
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    if (elements_[i] == symbol) return i;
  }
  return std::nullopt;
}

Eigen::VectorXd AtomTypeVocab::one_hot(std::size_t index) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size()));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return v;
}

std::size_t Atom::type_index() const {
  Eigen::Index best = 0;
  type.maxCoeff(&best);
  return static_cast<std::size_t>(best);
}

bool Atom::operator==(const Atom& other) const {
  return position == other.position && type.size() == other.type.size() && type == other.type;
}

geom::PointCloud Molecule::positions() const {
  geom::PointCloud out;
  out.reserve(atoms.size());
  for (const auto& a : atoms) out.push_back(a.position);
  return out;
}

geom::PointCloud Pocket::positions() const {
  geom::PointCloud out;
  out.reserve(atoms.size());
  for (const auto& a : atoms) out.push_back(a.position);
  return out;
}

geom::PointCloud Fragment::positions() const {
  geom::PointCloud out;
  out.reserve(atoms.size());
  for (const auto& a : atoms) out.push_back(a.position);
  return out;
}

double covalent_radius(std::string_view element) {
  const auto& table = radius_table();
  auto it = table.find(element);
  if (it == table.end()) throw Error("no covalent radius for element '" + std::string(element) + "'");
  return it->second;
}

bool is_element_symbol(std::string_view symbol) {
  static const std::set<std::string, std::less<>> symbols = {
      "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al", "Si", "P",
      "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn",
      "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh",
      "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd",
      "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W",  "Re",
      "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn",
  };
  return symbols.contains(symbol);
}

Molecule infer_bonds(const Molecule& mol, const AtomTypeVocab& vocab) {
  Molecule out = mol;
  std::vector<double> radii;
  radii.reserve(mol.atoms.size());
  for (const auto& atom : mol.atoms) radii.push_back(covalent_radius(vocab.element(atom.type_index())));

  std::vector<Bond> bonds;
  for (std::size_t i = 0; i < mol.atoms.size(); ++i) {
    for (std::size_t j = i + 1; j < mol.atoms.size(); ++j) {
      const double d = (mol.atoms[i].position - mol.atoms[j].position).norm();
      if (d <= radii[i] + radii[j] + kBondTolerance) bonds.push_back({i, j, 1});
    }
  }
  out.bonds = std::move(bonds);
  return out;
}

std::vector<std::size_t> rotatable_bonds(const Molecule& mol) {
  const auto& bonds = require_bonds(mol);
  const auto adj = adjacency(mol);
  const std::size_t n = mol.atoms.size();

  // A bond lies on a cycle iff its endpoints stay connected once it is removed.
  auto on_cycle = [&](std::size_t removed) {
    std::vector<bool> seen(n, false);
    std::queue<std::size_t> frontier;
    frontier.push(bonds[removed].i);
    seen[bonds[removed].i] = true;
    while (!frontier.empty()) {
      const std::size_t a = frontier.front();
      frontier.pop();
      for (auto [nb, b] : adj[a]) {
        if (b == removed || seen[nb]) continue;
        if (nb == bonds[removed].j) return true;
        seen[nb] = true;
        frontier.push(nb);
      }
    }
    return false;
  };

  std::vector<std::size_t> out;
  for (std::size_t b = 0; b < bonds.size(); ++b) {
    const Bond& bond = bonds[b];
    if (bond.order != 1) continue;
    if (adj[bond.i].size() < 2 || adj[bond.j].size() < 2) continue;
    if (on_cycle(b)) continue;
    out.push_back(b);
  }
  return out;
}

std::vector<Fragment> fragment_molecule(const Molecule& mol) {
  const auto& bonds = require_bonds(mol);
  const auto rotatable = rotatable_bonds(mol);
  std::vector<bool> cut(bonds.size(), false);
  for (auto b : rotatable) cut[b] = true;

  const auto adj = adjacency(mol);
  const std::size_t n = mol.atoms.size();
  std::vector<bool> anchor(n, false);
  for (auto b : rotatable) {
    anchor[bonds[b].i] = true;
    anchor[bonds[b].j] = true;
  }

  std::vector<Fragment> out;
  std::vector<bool> seen(n, false);
  for (std::size_t start = 0; start < n; ++start) {
    if (seen[start]) continue;
    std::vector<std::size_t> members;
    std::queue<std::size_t> frontier;
    frontier.push(start);
    seen[start] = true;
    while (!frontier.empty()) {
      const std::size_t a = frontier.front();
      frontier.pop();
      members.push_back(a);
      for (auto [nb, b] : adj[a]) {
        if (cut[b] || seen[nb]) continue;
        seen[nb] = true;
        frontier.push(nb);
      }
    }
    std::sort(members.begin(), members.end());
    Fragment frag;
    frag.parent_indices = members;
    for (auto a : members) {
      frag.atoms.push_back(mol.atoms[a]);
      if (anchor[a]) frag.anchors.push_back(a);
    }
    out.push_back(std::move(frag));
  }
  return out;
}

double min_interfragment_distance(std::span<const geom::Point3> a, std::span<const geom::Point3> b) {
  if (a.empty() || b.empty()) throw DegenerateInput("min_interfragment_distance: empty fragment");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : a) {
    for (const auto& q : b) best = std::min(best, (p - q).norm());
  }
  return best;
}

double min_interfragment_distance(const Fragment& a, const Fragment& b) {
  const auto pa = a.positions();
  const auto pb = b.positions();
  return min_interfragment_distance(pa, pb);
}

}  // namespace dualgen::chem

#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dualgen/geom.hpp"

namespace dualgen::chem {

/// Ordered element list; atom types are one-hot vectors over it.
class AtomTypeVocab {
 public:
  explicit AtomTypeVocab(std::vector<std::string> elements);

  /// C, N, O, F, P, S, Cl (K = 7).
  static AtomTypeVocab ligand_default();
  /// The ligand elements plus a catch-all "X" class for anything else (K_P = 8).
  static AtomTypeVocab protein_default();

  std::size_t size() const { return elements_.size(); }
  const std::string& element(std::size_t index) const { return elements_.at(index); }
  std::optional<std::size_t> index_of(std::string_view symbol) const;
  /// Index of the "X" catch-all class, if the vocabulary has one.
  std::optional<std::size_t> other_index() const { return index_of(kOtherSymbol); }

  Eigen::VectorXd one_hot(std::size_t index) const;

  const std::vector<std::string>& elements() const { return elements_; }

  static constexpr std::string_view kOtherSymbol = "X";

 private:
  std::vector<std::string> elements_;
};

struct Atom {
  geom::Point3 position = geom::Point3::Zero();
  /// Simplex vector over the vocabulary; hard one-hot for data.
  Eigen::VectorXd type;

  std::size_t type_index() const;
  bool operator==(const Atom& other) const;
};

struct Bond {
  std::size_t i = 0;
  std::size_t j = 0;
  int order = 1;

  bool operator==(const Bond&) const = default;
};

struct Molecule {
  std::string name;
  std::vector<Atom> atoms;
  std::optional<std::vector<Bond>> bonds;

  geom::PointCloud positions() const;
  bool operator==(const Molecule&) const = default;
};

struct Pocket {
  std::string identifier;
  std::vector<Atom> atoms;

  geom::PointCloud positions() const;
  bool operator==(const Pocket&) const = default;
};

struct Fragment {
  /// Atom indices in the parent molecule, ascending.
  std::vector<std::size_t> parent_indices;
  std::vector<Atom> atoms;
  /// Parent indices of atoms that lost a bond when the molecule was cut.
  std::vector<std::size_t> anchors;

  geom::PointCloud positions() const;
};

/// Covalent radius in Å; throws Error for elements without a tabulated radius.
double covalent_radius(std::string_view element);

/// True if `symbol` is a recognized chemical element symbol.
bool is_element_symbol(std::string_view symbol);

/// Distance-based bond perception: bond iff d <= r_i + r_j + 0.4 Å. All bonds single.
Molecule infer_bonds(const Molecule& mol, const AtomTypeVocab& vocab);

/// Indices into mol.bonds of acyclic single bonds whose endpoints both have degree >= 2.
std::vector<std::size_t> rotatable_bonds(const Molecule& mol);

/// Connected components after deleting every rotatable bond, ordered by smallest atom index.
std::vector<Fragment> fragment_molecule(const Molecule& mol);

double min_interfragment_distance(std::span<const geom::Point3> a, std::span<const geom::Point3> b);
double min_interfragment_distance(const Fragment& a, const Fragment& b);

// --- structure files -------------------------------------------------------

using Structure = std::variant<Molecule, Pocket>;

inline constexpr std::string_view kPocketPrefix = "POCKET:";

/// Parses one structure file. Names starting with "POCKET:" produce a Pocket
/// typed over `protein_vocab` (the prefix is stripped); anything else is a
/// Molecule typed over `ligand_vocab`. Throws ParseError.
Structure parse_structure(std::string_view text, const AtomTypeVocab& ligand_vocab,
                          const AtomTypeVocab& protein_vocab);

std::string serialize_structure(const Molecule& mol, const AtomTypeVocab& vocab);
std::string serialize_structure(const Pocket& pocket, const AtomTypeVocab& vocab);

Molecule parse_molecule(std::string_view text, const AtomTypeVocab& ligand_vocab);
Pocket parse_pocket(std::string_view text, const AtomTypeVocab& protein_vocab);

/// Line cursor used to read several structure blocks from one file.
class LineReader {
 public:
  explicit LineReader(std::string_view text);

  bool done() const { return next_ >= lines_.size(); }
  std::string_view peek() const { return lines_.at(next_); }
  std::string_view take() { return lines_.at(next_++); }
  /// 1-based number of the line `peek()` would return.
  std::size_t line_number() const { return next_ + 1; }
  void skip_blank();

 private:
  std::vector<std::string_view> lines_;
  std::size_t next_ = 0;
};

/// Reads one structure block starting at the reader's current line.
Structure read_structure_block(LineReader& reader, const AtomTypeVocab& ligand_vocab,
                               const AtomTypeVocab& protein_vocab);

Molecule read_file_molecule(const std::string& path, const AtomTypeVocab& vocab);
Pocket read_file_pocket(const std::string& path, const AtomTypeVocab& vocab);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

}  // namespace dualgen::chem

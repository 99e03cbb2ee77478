#include <gtest/gtest.h>

#include <numeric>

#include "dualgen/chem.hpp"
#include "dualgen/error.hpp"
#include "fixtures.hpp"

namespace dualgen::chem {
namespace {

const AtomTypeVocab kLig = AtomTypeVocab::ligand_default();
const AtomTypeVocab kProt = AtomTypeVocab::protein_default();

Molecule chain(std::size_t n, double spacing = 1.5) {
  Molecule m;
  m.name = "chain";
  for (std::size_t i = 0; i < n; ++i) m.atoms.push_back({geom::Point3(spacing * i, 0, 0), kLig.one_hot(0)});
  m.bonds.emplace();
  for (std::size_t i = 0; i + 1 < n; ++i) m.bonds->push_back({i, i + 1, 1});
  return m;
}

// Union-find component labels over the bonds for which keep(b) holds.
std::vector<std::size_t> components(std::size_t n, const std::vector<Bond>& bonds,
                                    const std::function<bool(std::size_t)>& keep) {
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t a) {
    return parent[a] == a ? a : parent[a] = find(parent[a]);
  };
  for (std::size_t b = 0; b < bonds.size(); ++b) {
    if (keep(b)) parent[find(bonds[b].i)] = find(bonds[b].j);
  }
  std::vector<std::size_t> label(n);
  for (std::size_t a = 0; a < n; ++a) label[a] = find(a);
  return label;
}

std::size_t count_distinct(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
}

Molecule random_graph(Rng& rng, std::size_t n) {
  Molecule m = testing::random_molecule(rng, n);
  m.bonds.emplace();
  const double p = 0.1 + 0.3 * rng.uniform();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.uniform() < p) m.bonds->push_back({i, j, rng.uniform() < 0.8 ? 1 : 2});
    }
  }
  return m;
}

TEST(Vocab, DefaultsAndValidation) {
  EXPECT_EQ(kLig.size(), 7u);
  EXPECT_EQ(kProt.size(), 8u);
  EXPECT_EQ(kLig.index_of("Cl"), 6u);
  EXPECT_FALSE(kLig.other_index());
  EXPECT_EQ(kProt.other_index(), 7u);
  EXPECT_THROW(AtomTypeVocab({"C"}), Error);
  EXPECT_THROW(AtomTypeVocab({"C", "N", "C"}), Error);
  EXPECT_DOUBLE_EQ(kLig.one_hot(3).sum(), 1.0);
}

TEST(InferBonds, DistanceThreshold) {
  Molecule near = chain(2, 1.5);
  near.bonds.reset();
  EXPECT_EQ(infer_bonds(near, kLig).bonds->size(), 1u);
  Molecule far = chain(2, 3.0);
  far.bonds.reset();
  EXPECT_TRUE(infer_bonds(far, kLig).bonds->empty());
  Molecule single = chain(1);
  EXPECT_TRUE(infer_bonds(single, kLig).bonds->empty());
  // 0.76 + 0.76 + 0.4 = 1.92 is inclusive.
  Molecule edge = chain(2, 1.92);
  EXPECT_EQ(infer_bonds(edge, kLig).bonds->size(), 1u);
  Molecule over = chain(2, 1.9201);
  EXPECT_TRUE(infer_bonds(over, kLig).bonds->empty());
}

TEST(InferBonds, PermutationSymmetric) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Molecule m = testing::random_molecule(rng, 10, 1.5);
    std::vector<std::size_t> perm(m.atoms.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    Molecule p = m;
    for (std::size_t i = 0; i < perm.size(); ++i) p.atoms[i] = m.atoms[perm[i]];
    std::set<std::pair<std::size_t, std::size_t>> a, b;
    const Molecule bm = infer_bonds(m, kLig);
    const Molecule bp = infer_bonds(p, kLig);
    for (const auto& bond : *bm.bonds) a.insert({bond.i, bond.j});
    for (const auto& bond : *bp.bonds) {
      b.insert(std::minmax(perm[bond.i], perm[bond.j]));
    }
    EXPECT_EQ(a, b);
  }
}

TEST(RotatableBonds, HandCases) {
  EXPECT_EQ(rotatable_bonds(chain(4)), std::vector<std::size_t>{1});
  EXPECT_TRUE(rotatable_bonds(chain(2)).empty());
  Molecule ring = chain(6);
  ring.bonds->push_back({5, 0, 1});
  EXPECT_TRUE(rotatable_bonds(ring).empty());
  Molecule double_bond = chain(4);
  (*double_bond.bonds)[1].order = 2;
  EXPECT_TRUE(rotatable_bonds(double_bond).empty());
  Molecule no_bonds = chain(3);
  no_bonds.bonds.reset();
  EXPECT_THROW(rotatable_bonds(no_bonds), MissingBonds);
  EXPECT_THROW(fragment_molecule(no_bonds), MissingBonds);
}

TEST(FragmentMolecule, HandCases) {
  const auto frags = fragment_molecule(chain(4));
  ASSERT_EQ(frags.size(), 2u);
  EXPECT_EQ(frags[0].parent_indices, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(frags[1].parent_indices, (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(frags[0].anchors, std::vector<std::size_t>{1});
  EXPECT_EQ(frags[1].anchors, std::vector<std::size_t>{2});

  Molecule ring = chain(6);
  ring.bonds->push_back({5, 0, 1});
  const auto whole = fragment_molecule(ring);
  ASSERT_EQ(whole.size(), 1u);
  EXPECT_EQ(whole[0].atoms.size(), 6u);
  EXPECT_TRUE(whole[0].anchors.empty());

  // 6-chain: middle bonds 1-2, 2-3, 3-4 are rotatable -> {0,1},{2},{3},{4,5}.
  EXPECT_EQ(fragment_molecule(chain(6)).size(), 4u);
}

TEST(RotatableBonds, MatchesBridgeOracle) {
  Rng rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const Molecule m = random_graph(rng, 2 + rng.index(11));
    const auto& bonds = *m.bonds;
    const std::size_t n = m.atoms.size();
    std::vector<std::size_t> degree(n, 0);
    for (const auto& b : bonds) ++degree[b.i], ++degree[b.j];
    const std::size_t base = count_distinct(components(n, bonds, [](std::size_t) { return true; }));
    std::vector<std::size_t> expected;
    for (std::size_t b = 0; b < bonds.size(); ++b) {
      const bool bridge = count_distinct(components(n, bonds, [&](std::size_t x) { return x != b; })) > base;
      if (bonds[b].order == 1 && bridge && degree[bonds[b].i] >= 2 && degree[bonds[b].j] >= 2) expected.push_back(b);
    }
    EXPECT_EQ(rotatable_bonds(m), expected);
  }
}

TEST(FragmentMolecule, PartitionMatchesUnionFind) {
  Rng rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    const Molecule m = random_graph(rng, 1 + rng.index(12));
    const auto rot = rotatable_bonds(m);
    const std::set<std::size_t> cut(rot.begin(), rot.end());
    const auto label = components(m.atoms.size(), *m.bonds, [&](std::size_t b) { return !cut.count(b); });
    const auto frags = fragment_molecule(m);
    EXPECT_EQ(frags.size(), count_distinct(label));

    std::vector<int> owner(m.atoms.size(), -1);
    for (std::size_t f = 0; f < frags.size(); ++f) {
      for (auto a : frags[f].parent_indices) {
        EXPECT_EQ(owner[a], -1);
        owner[a] = static_cast<int>(f);
      }
      for (std::size_t i = 1; i < frags[f].parent_indices.size(); ++i) {
        EXPECT_EQ(label[frags[f].parent_indices[i]], label[frags[f].parent_indices[0]]);
      }
      for (auto a : frags[f].anchors) {
        EXPECT_TRUE(std::count(frags[f].parent_indices.begin(), frags[f].parent_indices.end(), a));
      }
    }
    for (int o : owner) EXPECT_GE(o, 0);
  }
}

TEST(MinInterfragmentDistance, Cases) {
  const geom::PointCloud a = {geom::Point3(0, 0, 0)};
  const geom::PointCloud b = {geom::Point3(2, 0, 0)};
  EXPECT_EQ(min_interfragment_distance(a, b), 2.0);
  EXPECT_EQ(min_interfragment_distance(a, a), 0.0);
  const geom::PointCloud g1 = {geom::Point3(0, 0, 0), geom::Point3(0, 1, 0)};
  const geom::PointCloud g2 = {geom::Point3(3, 0, 0), geom::Point3(2, 1, 0)};
  EXPECT_EQ(min_interfragment_distance(g1, g2), 2.0);
  EXPECT_THROW(min_interfragment_distance(a, geom::PointCloud{}), DegenerateInput);
}

TEST(StructureIo, MoleculeRoundTripIsExact) {
  Rng rng(14);
  Molecule m = testing::random_molecule(rng, 3);
  m.atoms[1].position.x() = 0.1 + 0.2;  // not representable in short decimal
  EXPECT_EQ(parse_molecule(serialize_structure(m, kLig), kLig), m);
  Molecule bonded = infer_bonds(chain(4), kLig);
  EXPECT_EQ(parse_molecule(serialize_structure(bonded, kLig), kLig), bonded);
}

TEST(StructureIo, PocketRoundTripAndOtherClass) {
  const std::string text = "3\nPOCKET:abc\nC 0 0 0\nZn 1 0 0\nN 0 1.5 0\n";
  const Pocket p = parse_pocket(text, kProt);
  EXPECT_EQ(p.identifier, "abc");
  EXPECT_EQ(p.atoms[1].type_index(), 7u);
  EXPECT_EQ(parse_pocket(serialize_structure(p, kProt), kProt), p);
  EXPECT_TRUE(std::holds_alternative<Pocket>(parse_structure(text, kLig, kProt)));
}

TEST(StructureIo, Errors) {
  try {
    parse_molecule("2\nm\nC 0 0 0\nQq 1 0 0\n", kLig);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
    EXPECT_NE(std::string(e.what()).find("unknown element"), std::string::npos);
  }
  try {
    parse_molecule("2\nm\nC 0 0 0\nC 1 0.x 0\n", kLig);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos);
  }
  EXPECT_THROW(parse_molecule("2\nm\nC 0 0 0\n", kLig), ParseError);
  EXPECT_THROW(parse_molecule("x\nm\n", kLig), ParseError);
  EXPECT_THROW(parse_molecule("2\nm\nC 0 0 0\nC 1 0 0\nBONDS\n0 5 1\n", kLig), ParseError);
  EXPECT_THROW(parse_molecule("2\nm\nC 0 0 0\nC 1 0 0\nBONDS\n0 1 1\n1 0 1\n", kLig), ParseError);
  EXPECT_THROW(parse_molecule("2\nm\nC 0 0 0\nC 1 0 0\nBONDS\n0 0 1\n", kLig), ParseError);
  EXPECT_THROW(parse_pocket("0\nPOCKET:x\n", kProt), ParseError);
  EXPECT_THROW(parse_pocket("1\nPOCKET:x\nC 0 0 0\nBONDS\n", kProt), ParseError);
  EXPECT_THROW(parse_molecule("1\nm\nC 0 0 0\nextra\n", kLig), ParseError);
  EXPECT_THROW(parse_molecule("1\nPOCKET:m\nC 0 0 0\n", kLig), ParseError);
}

}  // namespace
}  // namespace dualgen::chem

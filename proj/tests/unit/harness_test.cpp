#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "dualgen/cli.hpp"
#include "dualgen/config.hpp"
#include "dualgen/error.hpp"
#include "dualgen/harness.hpp"
#include "dualgen/synergy.hpp"
#include "fixtures.hpp"

namespace dualgen::harness {
namespace {

namespace fs = std::filesystem;

const chem::AtomTypeVocab kLig = chem::AtomTypeVocab::ligand_default();
const chem::AtomTypeVocab kProt = chem::AtomTypeVocab::protein_default();

chem::Atom atom_at(double x, double y = 0, double z = 0) { return {geom::Point3(x, y, z), kLig.one_hot(0)}; }

chem::Pocket pocket_of(std::initializer_list<geom::Point3> pts) {
  chem::Pocket p;
  for (const auto& q : pts) p.atoms.push_back({q, kProt.one_hot(0)});
  return p;
}

ScoredFragment frag(double x, double score) {
  ScoredFragment f;
  f.fragment.atoms = {atom_at(x)};
  f.fragment.parent_indices = {0};
  f.score = score;
  return f;
}

TEST(MockScorer, HandCounts) {
  const MockScorer s;
  const auto pocket = pocket_of({geom::Point3(0, 0, 0), geom::Point3(10, 0, 0)});
  const std::vector<chem::Atom> at3 = {atom_at(3)};
  EXPECT_DOUBLE_EQ(s.score(at3, pocket), -0.25);
  const std::vector<chem::Atom> at4 = {atom_at(4)};
  EXPECT_DOUBLE_EQ(s.score(at4, pocket), -0.25);  // contact radius inclusive
  const std::vector<chem::Atom> clash = {atom_at(1)};
  EXPECT_DOUBLE_EQ(s.score(clash, pocket), -0.25 + 0.1);
  const std::vector<chem::Atom> at_clash_edge = {atom_at(1.4)};
  EXPECT_DOUBLE_EQ(s.score(at_clash_edge, pocket), -0.25);
  const std::vector<chem::Atom> both = {atom_at(3), atom_at(7), atom_at(5)};
  EXPECT_DOUBLE_EQ(s.score(both, pocket), -0.5);
  EXPECT_THROW(MockScorer(0.25, 0.0), BadRange);
}

TEST(MockScorer, RigidInvariant) {
  Rng rng(100);
  const MockScorer s;
  for (int trial = 0; trial < 20; ++trial) {
    const auto pocket = testing::random_pocket(rng, 20, 5.0);
    const auto mol = testing::random_molecule(rng, 8, 3.0);
    const auto t = testing::random_transform(rng);
    EXPECT_DOUBLE_EQ(s.score(mol, pocket), s.score(testing::transformed(mol, t), testing::transformed(pocket, t)));
  }
}

TEST(FragmentPair, JointSkipsClashingPairs) {
  const std::vector<ScoredFragment> a = {frag(0, -5), frag(10, -3)};
  const std::vector<ScoredFragment> b = {frag(1, -6), frag(20, -1)};
  // (0,0) is best but 1 Å apart; (1,0) is 9 Å apart and sums to -9.
  const auto joint = select_fragment_pair(a, b, PairMode::Joint);
  EXPECT_EQ(joint.first, 1u);
  EXPECT_EQ(joint.second, 0u);
  EXPECT_DOUBLE_EQ(joint.score_sum, -9);
  const auto self = select_fragment_pair(a, b, PairMode::Self);
  EXPECT_EQ(self.first, 0u);
  EXPECT_EQ(self.second, 0u);
  EXPECT_DOUBLE_EQ(self.score_sum, -11);
}

TEST(FragmentPair, BoundaryTiesAndFailures) {
  const std::vector<ScoredFragment> a = {frag(0, -1)};
  const std::vector<ScoredFragment> edge = {frag(1.4, -1)};
  EXPECT_THROW(select_fragment_pair(a, edge, PairMode::Joint), NoFeasiblePair);
  const std::vector<ScoredFragment> ties = {frag(5, -2), frag(-5, -2)};
  EXPECT_EQ(select_fragment_pair(a, ties, PairMode::Joint).second, 0u);
  EXPECT_EQ(select_fragment_pair(a, ties, PairMode::Self).second, 0u);
  EXPECT_THROW(select_fragment_pair({}, ties, PairMode::Self), DegenerateInput);
  EXPECT_THROW(parse_pair_mode("both"), BadRange);
  EXPECT_EQ(parse_pair_mode("self"), PairMode::Self);
}

TEST(FragmentPair, JointMatchesBruteForce) {
  Rng rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ScoredFragment> a, b;
    for (std::size_t i = 0; i < 1 + rng.index(5); ++i) a.push_back(frag(4 * rng.normal(), std::round(4 * rng.normal())));
    for (std::size_t i = 0; i < 1 + rng.index(5); ++i) b.push_back(frag(4 * rng.normal(), std::round(4 * rng.normal())));
    std::optional<FragmentPair> want;
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) {
        const double d = (a[i].fragment.atoms[0].position - b[j].fragment.atoms[0].position).norm();
        if (d <= 1.4) continue;
        const double s = a[i].score + b[j].score;
        if (!want || s < want->score_sum) want = FragmentPair{i, j, s};
      }
    }
    if (!want) {
      EXPECT_THROW(select_fragment_pair(a, b, PairMode::Joint), NoFeasiblePair);
      continue;
    }
    const auto got = select_fragment_pair(a, b, PairMode::Joint);
    EXPECT_EQ(got.first, want->first);
    EXPECT_EQ(got.second, want->second);
    EXPECT_EQ(got.score_sum, want->score_sum);
  }
}

TEST(ScoreFragments, OneScorePerFragment) {
  chem::Molecule chain;
  for (int i = 0; i < 5; ++i) chain.atoms.push_back(atom_at(1.5 * i));
  chain.bonds = std::vector<chem::Bond>{{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 4, 1}};
  const auto pocket = pocket_of({geom::Point3(0, 3, 0), geom::Point3(6, 3, 0)});
  const MockScorer s;
  const auto frags = score_fragments(chain, pocket, s);
  ASSERT_EQ(frags.size(), chem::rotatable_bonds(chain).size() + 1);
  for (const auto& f : frags) EXPECT_EQ(f.score, s.score(f.fragment, pocket));
}

TEST(Statistics, MedianAndMean) {
  EXPECT_EQ(median({3, 1, 2}), 2);
  EXPECT_EQ(median({4, 1, 3, 2}), 2.5);
  EXPECT_EQ(mean(std::vector<double>{1, 2, 6}), 3);
  EXPECT_THROW(median({}), DegenerateInput);
  EXPECT_THROW(mean(std::vector<double>{}), DegenerateInput);
}

// Looks up a fixed score by (first atom x, pocket identifier).
class TableScorer : public ScorerInterface {
 public:
  std::map<std::pair<double, std::string>, double> table;
  using ScorerInterface::score;
  double score(std::span<const chem::Atom> ligand, const chem::Pocket& pocket) const override {
    return table.at({ligand[0].position.x(), pocket.identifier});
  }
};

TEST(Evaluate, HandTable) {
  TableScorer s;
  chem::Pocket p1, p2;
  p1.identifier = "p1";
  p2.identifier = "p2";
  auto mol = [](double x) {
    chem::Molecule m;
    m.atoms = {atom_at(x)};
    return m;
  };
  s.table = {{{0, "p1"}, -6}, {{0, "p2"}, -7},     // references
             {{1, "p1"}, -8}, {{1, "p2"}, -9},     // beats both
             {{2, "p1"}, -6}, {{2, "p2"}, -9},     // ties reference 1: not strictly better
             {{3, "p1"}, -10}, {{3, "p2"}, -5}};  // beats only reference 1
  const std::vector<chem::Molecule> mols = {mol(1), mol(2), mol(3)};
  const auto r = evaluate(mols, p1, p2, mol(0), mol(0), s);
  EXPECT_EQ(r.reference1, -6);
  EXPECT_EQ(r.reference2, -7);
  EXPECT_TRUE(r.molecules[0].dual_high_affinity);
  EXPECT_FALSE(r.molecules[1].dual_high_affinity);
  EXPECT_FALSE(r.molecules[2].dual_high_affinity);
  EXPECT_DOUBLE_EQ(r.dual_high_affinity, 1.0 / 3.0);
  EXPECT_EQ(r.molecules[2].max_score, -5);
  EXPECT_EQ(r.score1.median, -8);
  EXPECT_DOUBLE_EQ(r.score1.mean, -8);
  EXPECT_EQ(r.score2.median, -9);
  EXPECT_EQ(r.max_score.median, -6);
  EXPECT_DOUBLE_EQ(r.max_score.mean, (-8 - 6 - 5) / 3.0);

  const std::vector<std::string> names = {"a", "b", "c"};
  const std::string text = format_report(r, names);
  EXPECT_NE(text.find("a\t-8.0000\t-9.0000\t-8.0000\t1\n"), std::string::npos);
  EXPECT_NE(text.find("dual_high_affinity\t0.3333\n"), std::string::npos);
  EXPECT_NE(text.find("[summary]"), std::string::npos);
  EXPECT_THROW(evaluate({}, p1, p2, mol(0), mol(0), s), DegenerateInput);
}

TEST(Evaluate, HistogramDiversityBounds) {
  chem::Molecule c, n;
  c.atoms = {atom_at(0), atom_at(1)};
  n.atoms = {{geom::Point3::Zero(), kLig.one_hot(1)}};
  const std::vector<chem::Molecule> same = {c, c};
  const std::vector<chem::Molecule> disjoint = {c, n};
  EXPECT_NEAR(histogram_diversity(same), 0.0, 1e-15);
  EXPECT_NEAR(histogram_diversity(disjoint), 1.0, 1e-15);
  EXPECT_EQ(histogram_diversity(std::span<const chem::Molecule>(same).first(1)), 0.0);
}

}  // namespace
}  // namespace dualgen::harness

namespace dualgen {
namespace {

namespace fs = std::filesystem;

TEST(Config, ParsesKeysAndComments) {
  const Config c = parse_config(
      "# run settings\n"
      "schedule = cosine\n"
      "T = 50   # steps\n"
      "beta_min = 1e-3\n"
      "beta_max=0.05\n"
      "k = 8\n"
      "eta = 0.3\n"
      "tempered_types = true\n"
      "seed = 42\n"
      "\n");
  EXPECT_EQ(c.schedule, diffusion::ScheduleKind::Cosine);
  EXPECT_EQ(c.steps, 50);
  EXPECT_EQ(c.beta_min, 1e-3);
  EXPECT_EQ(c.beta_max, 0.05);
  EXPECT_EQ(c.k, 8u);
  EXPECT_EQ(c.eta, 0.3);
  EXPECT_TRUE(c.tempered_types);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.make_schedule().steps(), 50);
  EXPECT_EQ(c.hidden, Config{}.hidden);
}

TEST(Config, RejectsBadInput) {
  auto line_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  EXPECT_EQ(line_of("T = 10\nwidth = 3\n"), 2u);
  EXPECT_EQ(line_of("T = ten\n"), 1u);
  EXPECT_EQ(line_of("T\n"), 1u);
  EXPECT_EQ(line_of("schedule = square\n"), 1u);
  EXPECT_EQ(line_of("argmax_final = maybe\n"), 1u);
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dualgen_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    Rng rng(200);
    const auto vocab = chem::AtomTypeVocab::protein_default();
    auto p1 = testing::random_pocket(rng, 12, 3.0);
    p1.identifier = "one";
    auto p2 = testing::transformed(testing::random_pocket(rng, 10, 3.0), testing::random_transform(rng));
    p2.identifier = "two";
    write("p1.txt", chem::serialize_structure(p1, vocab));
    write("p2.txt", chem::serialize_structure(p2, vocab));
    write("config.txt", "T = 5\nk = 6\nhidden = 8\nlayers = 1\nn_atoms_min = 3\nn_atoms_max = 5\n");
  }
  void TearDown() override { fs::remove_all(dir_); }

  void write(const std::string& name, const std::string& text) { std::ofstream(dir_ / name) << text; }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "dualgen");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return run_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(run({}), kExitUsage);
  EXPECT_EQ(run({"bogus"}), kExitUsage);
  EXPECT_EQ(run({"align", "--p1", path("p1.txt")}), kExitUsage);
  EXPECT_EQ(run({"align", "--p1", path("p1.txt"), "--p2", path("missing.txt")}), kExitUsage);
  EXPECT_EQ(run({"align", "--p1", path("p1.txt"), "--p2", path("p2.txt"), "--criterion", "rmsd"}), kExitUsage);
  EXPECT_EQ(run({"sample-dual", "--p1", path("p1.txt"), "--p2", path("p2.txt"), "--mode", "both"}), kExitUsage);
  EXPECT_FALSE(err_.str().empty());
}

TEST_F(CliTest, RuntimeErrorsExitTwo) {
  write("bad_config.txt", "T = -3\n");
  EXPECT_EQ(run({"align", "--p1", path("p1.txt"), "--p2", path("p2.txt"), "--config", path("bad_config.txt")}),
            kExitRuntime);
  write("broken.txt", "3\nPOCKET:x\nC 0 0\n");
  EXPECT_EQ(run({"align", "--p1", path("broken.txt"), "--p2", path("p2.txt")}), kExitRuntime);
}

TEST_F(CliTest, AlignCenterPrintsTransform) {
  ASSERT_EQ(run({"align", "--p1", path("p1.txt"), "--p2", path("p2.txt")}), kExitOk);
  EXPECT_EQ(out_.str().rfind("prober -\nrotation 1 0 0\n", 0), 0u);
}

TEST_F(CliTest, SampleDualIsSeedDeterministic) {
  const std::vector<std::string> base = {"sample-dual", "--p1",     path("p1.txt"), "--p2", path("p2.txt"),
                                         "--config",    path("config.txt"), "--n", "2", "--seed", "9"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out", path("a")});
  b.insert(b.end(), {"--out", path("b")});
  ASSERT_EQ(run(a), kExitOk) << err_.str();
  ASSERT_EQ(run(b), kExitOk);
  for (const char* f : {"mol_000.txt", "mol_001.txt", "transform.txt"}) {
    EXPECT_EQ(chem::read_text_file((dir_ / "a" / f).string()), chem::read_text_file((dir_ / "b" / f).string())) << f;
  }
  EXPECT_NE(err_.str().find("warning"), std::string::npos);
}

TEST_F(CliTest, SynergyWritesManifest) {
  std::string table = "drug_a,drug_b,cell_line,dose_a,dose_b,effect\n";
  const synergy::HillCurve a{0.5, 1.0, 1.2, 0.0}, b{0.4, 0.8, 2.0, 0.0};
  for (double x : {0.0, 0.1, 0.3, 1.0, 3.0, 10.0}) {
    for (double y : {0.0, 0.1, 0.3, 1.0, 3.0, 10.0}) {
      double e = 1.0 - (1.0 - a.evaluate(x)) * (1.0 - b.evaluate(y));
      if (x > 0 && y > 0) e += 0.15;
      table += "A,B,cell," + std::to_string(x) + "," + std::to_string(y) + "," + std::to_string(e) + "\n";
    }
  }
  write("table.csv", table);
  ASSERT_EQ(run({"synergy", "--table", path("table.csv")}), kExitOk) << err_.str();
  EXPECT_EQ(out_.str().rfind("A\tB\tcell zip=", 0), 0u);
}

}  // namespace
}  // namespace dualgen

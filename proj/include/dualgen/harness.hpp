#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dualgen/chem.hpp"

namespace dualgen::harness {

/// Docking-score contract: kcal/mol, lower is stronger, deterministic.
class ScorerInterface {
 public:
  virtual ~ScorerInterface() = default;
  virtual double score(std::span<const chem::Atom> ligand, const chem::Pocket& pocket) const = 0;

  double score(const chem::Molecule& mol, const chem::Pocket& pocket) const { return score(mol.atoms, pocket); }
  double score(const chem::Fragment& frag, const chem::Pocket& pocket) const { return score(frag.atoms, pocket); }
};

/// −a · (ligand–pocket pairs within r_c) + 0.1 · (pairs closer than 1.4 Å).
class MockScorer : public ScorerInterface {
 public:
  explicit MockScorer(double contact_reward = 0.25, double contact_radius = 4.0);

  using ScorerInterface::score;
  double score(std::span<const chem::Atom> ligand, const chem::Pocket& pocket) const override;

  static constexpr double kClashDistance = 1.4;
  static constexpr double kClashPenalty = 0.1;

 private:
  double a_;
  double r_c_;
};

// --- fragment pairs ----------------------------------------------------------

struct ScoredFragment {
  chem::Fragment fragment;
  double score = 0.0;
};

enum class PairMode { Joint, Self };

PairMode parse_pair_mode(std::string_view name);

/// Fragments closer than this clash.
inline constexpr double kFragmentClash = 1.4;

struct FragmentPair {
  std::size_t first = 0;
  std::size_t second = 0;
  double score_sum = 0.0;
};

/// Joint: the non-clashing cross pair (min distance > 1.4 Å) with the lowest
/// score sum, first in index order on ties. Self: each side's best fragment.
/// Throws DegenerateInput on an empty list, NoFeasiblePair when every joint pair clashes.
FragmentPair select_fragment_pair(std::span<const ScoredFragment> first, std::span<const ScoredFragment> second,
                                  PairMode mode);

/// Cuts every rotatable bond and scores each fragment in `pocket`.
std::vector<ScoredFragment> score_fragments(const chem::Molecule& mol, const chem::Pocket& pocket,
                                            const ScorerInterface& scorer);

// --- evaluation --------------------------------------------------------------

struct MoleculeScores {
  double score1 = 0.0;
  double score2 = 0.0;
  double max_score = 0.0;
  bool dual_high_affinity = false;
};

struct MetricSummary {
  double mean = 0.0;
  double median = 0.0;
};

struct EvalReport {
  std::vector<MoleculeScores> molecules;
  double reference1 = 0.0;
  double reference2 = 0.0;
  MetricSummary score1;
  MetricSummary score2;
  MetricSummary max_score;
  /// Fraction scoring strictly below both references.
  double dual_high_affinity = 0.0;
  /// Placeholder, not the fingerprint diversity: 1 − mean pairwise cosine
  /// similarity of element-count histograms.
  double diversity = 0.0;
};

/// Midpoint median. Throws DegenerateInput on an empty list.
double median(std::vector<double> values);
double mean(std::span<const double> values);

double histogram_diversity(std::span<const chem::Molecule> mols);

EvalReport evaluate(std::span<const chem::Molecule> mols, const chem::Pocket& p1, const chem::Pocket& p2,
                    const chem::Molecule& reference1, const chem::Molecule& reference2,
                    const ScorerInterface& scorer);

/// Tab-separated per-molecule table followed by a summary block.
std::string format_report(const EvalReport& report, std::span<const std::string> names);

}  // namespace dualgen::harness

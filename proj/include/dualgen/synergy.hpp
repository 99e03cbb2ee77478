#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dualgen::synergy {

struct DoseResponsePoint {
  double dose = 0.0;
  double effect = 0.0;
};

/// E(d) = baseline + e_max · dⁿ / (EC50ⁿ + dⁿ). Monotherapy curves have baseline 0.
struct HillCurve {
  double e_max = 1.0;
  double ec50 = 1.0;
  double slope = 1.0;
  double baseline = 0.0;

  double evaluate(double dose) const;
  /// Dose producing `effect`; throws RangeError outside [baseline, baseline + e_max).
  double inverse(double effect) const;
};

struct HillFitOptions {
  /// Fix the response at zero dose instead of pinning it to 0.
  std::optional<double> baseline;
  /// Root mean squared residual above which the fit is rejected.
  double max_residual = 0.2;
};

struct HillFit {
  HillCurve curve;
  /// Root mean squared residual.
  double residual = 0.0;
};

/// Least squares over (EC50, n) on a log grid, refined by pattern search;
/// E_max is solved in closed form at every trial. Throws RangeError for
/// invalid points, FitError for fewer than 3 distinct doses, a residual above
/// the threshold, or (without a baseline) E_max collapsing to 0.
HillFit hill_fit(std::span<const DoseResponsePoint> points, const HillFitOptions& options = {});

/// E_AB − (1 − (1−E_A)(1−E_B)). Throws RangeError outside [0, 1].
double bliss(double e_ab, double e_a, double e_b);
/// E_AB − max(E_A, E_B).
double hsa(double e_ab, double e_a, double e_b);
/// Ē_AB − (Ē_A + Ē_B − Ē_A Ē_B) on fitted effects.
double zip(double e_ab_fit, double e_a_fit, double e_b_fit);

struct LoeweResult {
  double score = 0.0;
  double e_loewe = 0.0;
  /// No root inside (0, min E_max); e_loewe was clamped to the boundary.
  bool no_root = false;
};

/// Solves x_A/X_A(E) + x_B/X_B(E) = 1 by bisection on E and returns
/// E_AB − E_Loewe. Curves must have baseline 0.
LoeweResult loewe(double dose_a, double dose_b, double e_ab, const HillCurve& a, const HillCurve& b);

struct SynergyScores {
  double zip = 0.0;
  double bliss = 0.0;
  double loewe = 0.0;
  double hsa = 0.0;
};

/// True iff some cell line has all four scores strictly positive.
bool is_synergistic(std::span<const SynergyScores> per_cell_line);

struct StructureRecord {
  std::string id;
  double plddt = 0.0;
  bool experimental = false;
};

inline constexpr double kPlddtThreshold = 70.0;

/// Keeps experimental structures and predicted ones with pLDDT >= 70.
std::vector<StructureRecord> filter_structures(std::span<const StructureRecord> records);

// --- combination records -----------------------------------------------------

struct CombinationCell {
  double dose_a = 0.0;
  double dose_b = 0.0;
  double effect = 0.0;
};

struct CombinationRecord {
  std::string drug_a;
  std::string drug_b;
  std::string cell_line;
  std::vector<DoseResponsePoint> mono_a;
  std::vector<DoseResponsePoint> mono_b;
  std::vector<CombinationCell> combination;
};

/// Scores averaged over the combination cells. Bliss and HSA use measured
/// monotherapy effects where the dose was tested, fitted ones otherwise; Loewe
/// uses the fitted curves; ZIP compares per-slice fits of the combination
/// surface with the fitted monotherapies.
SynergyScores score_combination(const CombinationRecord& record);

/// Delimited table (comma or tab) with a header naming drug_a, drug_b,
/// cell_line, dose_a, dose_b, effect. Rows with one zero dose are
/// monotherapy. Records are grouped by (drug_a, drug_b, cell_line) in order
/// of first appearance. Throws ParseError.
std::vector<CombinationRecord> parse_combination_table(std::string_view text);

struct CellLineResult {
  std::string cell_line;
  std::optional<SynergyScores> scores;
  std::string error;
};

struct PairResult {
  std::string drug_a;
  std::string drug_b;
  std::vector<CellLineResult> cell_lines;
  bool synergistic = false;
};

/// Scores every record and groups cell lines by drug pair.
std::vector<PairResult> score_table(std::span<const CombinationRecord> records);

/// One line per synergistic pair: drug_a, drug_b, then one
/// `cell_line zip=.. bliss=.. loewe=.. hsa=..` field per scored cell line.
std::string synergy_manifest(std::span<const PairResult> pairs);

}  // namespace dualgen::synergy

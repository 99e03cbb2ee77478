#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "dualgen/error.hpp"
#include "dualgen/harness.hpp"

namespace dualgen::harness {

namespace {

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

MetricSummary summarize(const std::vector<double>& values) { return {mean(values), median(values)}; }

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw DegenerateInput("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double mean(std::span<const double> values) {
  if (values.empty()) throw DegenerateInput("mean of an empty list");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double histogram_diversity(std::span<const chem::Molecule> mols) {
  if (mols.size() < 2) return 0.0;
  std::vector<Eigen::VectorXd> hist;
  for (const auto& m : mols) {
    Eigen::VectorXd h;
    for (const auto& a : m.atoms) {
      if (h.size() == 0) h = Eigen::VectorXd::Zero(a.type.size());
      h(static_cast<Eigen::Index>(a.type_index())) += 1.0;
    }
    hist.push_back(std::move(h));
  }
  double sum = 0.0;
  long pairs = 0;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    for (std::size_t j = i + 1; j < hist.size(); ++j) {
      double cos = 0.0;
      if (hist[i].size() > 0 && hist[i].size() == hist[j].size()) {
        cos = hist[i].dot(hist[j]) / (hist[i].norm() * hist[j].norm());
      }
      sum += cos;
      ++pairs;
    }
  }
  return 1.0 - sum / static_cast<double>(pairs);
}

EvalReport evaluate(std::span<const chem::Molecule> mols, const chem::Pocket& p1, const chem::Pocket& p2,
                    const chem::Molecule& reference1, const chem::Molecule& reference2,
                    const ScorerInterface& scorer) {
  if (mols.empty()) throw DegenerateInput("nothing to evaluate");
  EvalReport report;
  report.reference1 = scorer.score(reference1, p1);
  report.reference2 = scorer.score(reference2, p2);

  std::vector<double> s1, s2, smax;
  std::size_t high = 0;
  for (const auto& m : mols) {
    MoleculeScores ms;
    ms.score1 = scorer.score(m, p1);
    ms.score2 = scorer.score(m, p2);
    ms.max_score = std::max(ms.score1, ms.score2);
    ms.dual_high_affinity = ms.score1 < report.reference1 && ms.score2 < report.reference2;
    if (ms.dual_high_affinity) ++high;
    s1.push_back(ms.score1);
    s2.push_back(ms.score2);
    smax.push_back(ms.max_score);
    report.molecules.push_back(ms);
  }
  report.score1 = summarize(s1);
  report.score2 = summarize(s2);
  report.max_score = summarize(smax);
  report.dual_high_affinity = static_cast<double>(high) / static_cast<double>(mols.size());
  report.diversity = histogram_diversity(mols);
  return report;
}

std::string format_report(const EvalReport& report, std::span<const std::string> names) {
  std::string out = "molecule\tscore1\tscore2\tmax_score\tdual_high_affinity\n";
  for (std::size_t i = 0; i < report.molecules.size(); ++i) {
    const auto& m = report.molecules[i];
    out += (i < names.size() ? names[i] : std::to_string(i)) + '\t' + fixed(m.score1) + '\t' + fixed(m.score2) +
           '\t' + fixed(m.max_score) + '\t' + (m.dual_high_affinity ? "1" : "0") + '\n';
  }
  out += "\n[summary]\n";
  out += "count\t" + std::to_string(report.molecules.size()) + '\n';
  out += "reference1\t" + fixed(report.reference1) + '\n';
  out += "reference2\t" + fixed(report.reference2) + '\n';
  out += "score1_mean\t" + fixed(report.score1.mean) + '\n';
  out += "score1_median\t" + fixed(report.score1.median) + '\n';
  out += "score2_mean\t" + fixed(report.score2.mean) + '\n';
  out += "score2_median\t" + fixed(report.score2.median) + '\n';
  out += "max_score_mean\t" + fixed(report.max_score.mean) + '\n';
  out += "max_score_median\t" + fixed(report.max_score.median) + '\n';
  out += "dual_high_affinity\t" + fixed(report.dual_high_affinity) + '\n';
  out += "diversity_placeholder\t" + fixed(report.diversity) + '\n';
  return out;
}

}  // namespace dualgen::harness

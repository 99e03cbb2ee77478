#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <tuple>

#include "dualgen/error.hpp"
#include "dualgen/synergy.hpp"

namespace dualgen::synergy {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = line.find(delim, start);
    out.push_back(trim(line.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start)));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

double measured_or_fitted(const std::vector<DoseResponsePoint>& mono, double dose, const HillCurve& fit) {
  double sum = 0.0;
  int n = 0;
  for (const auto& p : mono) {
    if (p.dose == dose) {
      sum += p.effect;
      ++n;
    }
  }
  return n > 0 ? sum / n : fit.evaluate(dose);
}

// Fits the combination surface along one slice (the other drug's dose held
// fixed) anchored at the fitted single-agent response, and returns the fitted
// effect at each requested dose.
std::map<double, double> slice_fit(const std::vector<DoseResponsePoint>& slice, double anchor) {
  std::map<double, double> out;
  std::vector<DoseResponsePoint> points = slice;
  points.push_back({0.0, anchor});
  std::set<double> doses;
  for (const auto& p : points) doses.insert(p.dose);
  if (doses.size() < 3) {
    for (const auto& p : slice) out[p.dose] = p.effect;
    return out;
  }
  HillFitOptions options;
  options.baseline = anchor;
  const HillCurve curve = hill_fit(points, options).curve;
  for (const auto& p : slice) out[p.dose] = std::clamp(curve.evaluate(p.dose), 0.0, 1.0);
  return out;
}

std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

SynergyScores score_combination(const CombinationRecord& record) {
  if (record.combination.empty()) throw FitError("record has no combination cells");
  const HillCurve fit_a = hill_fit(record.mono_a).curve;
  const HillCurve fit_b = hill_fit(record.mono_b).curve;

  std::map<double, std::vector<DoseResponsePoint>> rows;  // keyed by dose_b, varying dose_a
  std::map<double, std::vector<DoseResponsePoint>> cols;  // keyed by dose_a, varying dose_b
  for (const auto& c : record.combination) {
    rows[c.dose_b].push_back({c.dose_a, c.effect});
    cols[c.dose_a].push_back({c.dose_b, c.effect});
  }
  std::map<double, std::map<double, double>> row_fit, col_fit;
  for (const auto& [dose_b, slice] : rows) row_fit[dose_b] = slice_fit(slice, fit_b.evaluate(dose_b));
  for (const auto& [dose_a, slice] : cols) col_fit[dose_a] = slice_fit(slice, fit_a.evaluate(dose_a));

  SynergyScores sum;
  for (const auto& c : record.combination) {
    const double e_a = measured_or_fitted(record.mono_a, c.dose_a, fit_a);
    const double e_b = measured_or_fitted(record.mono_b, c.dose_b, fit_b);
    sum.bliss += bliss(c.effect, e_a, e_b);
    sum.hsa += hsa(c.effect, e_a, e_b);
    sum.loewe += loewe(c.dose_a, c.dose_b, c.effect, fit_a, fit_b).score;
    const double e_ab_fit = 0.5 * (row_fit[c.dose_b][c.dose_a] + col_fit[c.dose_a][c.dose_b]);
    sum.zip += zip(e_ab_fit, fit_a.evaluate(c.dose_a), fit_b.evaluate(c.dose_b));
  }
  const double n = static_cast<double>(record.combination.size());
  return {sum.zip / n, sum.bliss / n, sum.loewe / n, sum.hsa / n};
}

std::vector<CombinationRecord> parse_combination_table(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }

  std::size_t header_index = 0;
  while (header_index < lines.size() && trim(lines[header_index]).empty()) ++header_index;
  if (header_index == lines.size()) throw ParseError(1, "empty combination table");
  const std::string_view header = lines[header_index];
  const char delim = header.find('\t') != std::string_view::npos ? '\t' : ',';

  const std::vector<std::string> required = {"drug_a", "drug_b", "cell_line", "dose_a", "dose_b", "effect"};
  std::map<std::string, std::size_t> column;
  const auto names = split(header, delim);
  for (std::size_t i = 0; i < names.size(); ++i) column[std::string(names[i])] = i;
  for (const auto& r : required) {
    if (!column.count(r)) throw ParseError(header_index + 1, "header is missing column '" + r + "'");
  }

  std::vector<CombinationRecord> records;
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> index;
  for (std::size_t li = header_index + 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const std::size_t line_no = li + 1;
    const auto fields = split(lines[li], delim);
    if (fields.size() != names.size()) {
      throw ParseError(line_no, "expected " + std::to_string(names.size()) + " fields, found " +
                                    std::to_string(fields.size()));
    }
    auto number = [&](const char* name) {
      const std::string_view tok = fields[column.at(name)];
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
        throw ParseError(line_no, std::string("malformed ") + name + " '" + std::string(tok) + "'");
      }
      return v;
    };
    const double dose_a = number("dose_a");
    const double dose_b = number("dose_b");
    const double effect = number("effect");
    if (dose_a < 0.0 || dose_b < 0.0) throw ParseError(line_no, "doses must be non-negative");
    if (effect < 0.0 || effect > 1.0) throw ParseError(line_no, "effect must lie in [0, 1]");

    auto key = std::make_tuple(std::string(fields[column.at("drug_a")]), std::string(fields[column.at("drug_b")]),
                               std::string(fields[column.at("cell_line")]));
    auto [it, inserted] = index.try_emplace(key, records.size());
    if (inserted) {
      CombinationRecord r;
      std::tie(r.drug_a, r.drug_b, r.cell_line) = key;
      records.push_back(std::move(r));
    }
    CombinationRecord& rec = records[it->second];
    if (dose_a == 0.0 && dose_b == 0.0) continue;
    if (dose_b == 0.0) {
      rec.mono_a.push_back({dose_a, effect});
    } else if (dose_a == 0.0) {
      rec.mono_b.push_back({dose_b, effect});
    } else {
      rec.combination.push_back({dose_a, dose_b, effect});
    }
  }
  return records;
}

std::vector<PairResult> score_table(std::span<const CombinationRecord> records) {
  std::vector<PairResult> out;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (const auto& r : records) {
    auto [it, inserted] = index.try_emplace({r.drug_a, r.drug_b}, out.size());
    if (inserted) out.push_back({r.drug_a, r.drug_b, {}, false});
    CellLineResult cell{r.cell_line, std::nullopt, ""};
    try {
      cell.scores = score_combination(r);
    } catch (const Error& e) {
      cell.error = e.what();
    }
    out[it->second].cell_lines.push_back(std::move(cell));
  }
  for (auto& pair : out) {
    std::vector<SynergyScores> scored;
    for (const auto& c : pair.cell_lines) {
      if (c.scores) scored.push_back(*c.scores);
    }
    pair.synergistic = is_synergistic(scored);
  }
  return out;
}

std::string synergy_manifest(std::span<const PairResult> pairs) {
  std::string out;
  for (const auto& pair : pairs) {
    if (!pair.synergistic) continue;
    out += pair.drug_a + '\t' + pair.drug_b;
    for (const auto& c : pair.cell_lines) {
      if (!c.scores) continue;
      out += '\t' + c.cell_line + " zip=" + format_score(c.scores->zip) + " bliss=" + format_score(c.scores->bliss) +
             " loewe=" + format_score(c.scores->loewe) + " hsa=" + format_score(c.scores->hsa);
    }
    out += '\n';
  }
  return out;
}

}  // namespace dualgen::synergy

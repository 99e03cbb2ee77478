#include "dualgen/synergy.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "dualgen/error.hpp"

namespace dualgen::synergy {

namespace {

void check_unit(double e, const char* what) {
  if (!(e >= 0.0 && e <= 1.0)) throw RangeError(std::string(what) + " must lie in [0, 1]");
}

// Fraction of the maximal response at `dose` for log EC50 `a` and log slope `b`.
double hill_fraction(double dose, double a, double b) {
  if (dose <= 0.0) return 0.0;
  return 1.0 / (1.0 + std::exp(std::exp(b) * (a - std::log(dose))));
}

struct Trial {
  double sse = 0.0;
  double e_max = 0.0;
};

Trial evaluate_trial(std::span<const DoseResponsePoint> points, double a, double b, double baseline) {
  double ff = 0.0, fy = 0.0;
  for (const auto& p : points) {
    const double f = hill_fraction(p.dose, a, b);
    ff += f * f;
    fy += f * (p.effect - baseline);
  }
  Trial trial;
  trial.e_max = ff > 0.0 ? std::clamp(fy / ff, 0.0, 1.0 - baseline) : 0.0;
  for (const auto& p : points) {
    const double r = p.effect - baseline - trial.e_max * hill_fraction(p.dose, a, b);
    trial.sse += r * r;
  }
  return trial;
}

}  // namespace

double HillCurve::evaluate(double dose) const {
  if (dose < 0.0) throw RangeError("dose must be non-negative");
  if (dose == 0.0) return baseline;
  return baseline + e_max / (1.0 + std::pow(ec50 / dose, slope));
}

double HillCurve::inverse(double effect) const {
  const double f = (effect - baseline) / e_max;
  if (!(f >= 0.0 && f < 1.0)) throw RangeError("effect outside the reach of the curve");
  if (f == 0.0) return 0.0;
  return ec50 * std::pow(f / (1.0 - f), 1.0 / slope);
}

HillFit hill_fit(std::span<const DoseResponsePoint> points, const HillFitOptions& options) {
  std::set<double> doses;
  double min_pos = 0.0, max_dose = 0.0;
  for (const auto& p : points) {
    if (!(p.dose >= 0.0) || !std::isfinite(p.dose)) throw RangeError("dose must be finite and non-negative");
    check_unit(p.effect, "effect");
    doses.insert(p.dose);
    if (p.dose > 0.0 && (min_pos == 0.0 || p.dose < min_pos)) min_pos = p.dose;
    max_dose = std::max(max_dose, p.dose);
  }
  if (doses.size() < 3 || min_pos == 0.0) throw FitError("hill_fit needs at least 3 distinct doses");
  const double baseline = options.baseline.value_or(0.0);
  check_unit(baseline, "baseline");

  constexpr int kEc50Grid = 61;
  constexpr int kSlopeGrid = 41;
  const double a_lo = std::log(min_pos) - 3.0;
  const double a_hi = std::log(max_dose) + 3.0;
  const double b_lo = std::log(0.2);
  const double b_hi = std::log(8.0);
  const double da = (a_hi - a_lo) / (kEc50Grid - 1);
  const double db = (b_hi - b_lo) / (kSlopeGrid - 1);

  double best_a = a_lo, best_b = b_lo;
  Trial best = evaluate_trial(points, best_a, best_b, baseline);
  for (int i = 0; i < kEc50Grid; ++i) {
    for (int j = 0; j < kSlopeGrid; ++j) {
      const double a = a_lo + da * i;
      const double b = b_lo + db * j;
      const Trial trial = evaluate_trial(points, a, b, baseline);
      if (trial.sse < best.sse) {
        best = trial;
        best_a = a;
        best_b = b;
      }
    }
  }

  // Compass search with step halving.
  double step_a = da, step_b = db;
  for (int iter = 0; iter < 20000 && (step_a > 1e-12 || step_b > 1e-12); ++iter) {
    bool moved = false;
    for (const auto& [ma, mb] : {std::pair{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}}) {
      const double a = best_a + ma * step_a;
      const double b = best_b + mb * step_b;
      const Trial trial = evaluate_trial(points, a, b, baseline);
      if (trial.sse < best.sse) {
        best = trial;
        best_a = a;
        best_b = b;
        moved = true;
        break;
      }
    }
    if (!moved) {
      step_a *= 0.5;
      step_b *= 0.5;
    }
  }

  HillFit fit;
  fit.curve = {best.e_max, std::exp(best_a), std::exp(best_b), baseline};
  fit.residual = std::sqrt(best.sse / static_cast<double>(points.size()));
  if (!options.baseline && best.e_max <= 1e-9) throw FitError("fitted E_max collapsed to 0");
  if (fit.residual > options.max_residual) {
    throw FitError("fit residual " + std::to_string(fit.residual) + " exceeds " + std::to_string(options.max_residual));
  }
  return fit;
}

double bliss(double e_ab, double e_a, double e_b) {
  check_unit(e_ab, "E_AB");
  check_unit(e_a, "E_A");
  check_unit(e_b, "E_B");
  return e_ab - (1.0 - (1.0 - e_a) * (1.0 - e_b));
}

double hsa(double e_ab, double e_a, double e_b) {
  check_unit(e_ab, "E_AB");
  check_unit(e_a, "E_A");
  check_unit(e_b, "E_B");
  return e_ab - std::max(e_a, e_b);
}

double zip(double e_ab_fit, double e_a_fit, double e_b_fit) {
  check_unit(e_ab_fit, "fitted E_AB");
  check_unit(e_a_fit, "fitted E_A");
  check_unit(e_b_fit, "fitted E_B");
  return e_ab_fit - (e_a_fit + e_b_fit - e_a_fit * e_b_fit);
}

LoeweResult loewe(double dose_a, double dose_b, double e_ab, const HillCurve& a, const HillCurve& b) {
  check_unit(e_ab, "E_AB");
  if (dose_a < 0.0 || dose_b < 0.0) throw RangeError("doses must be non-negative");
  if (a.baseline != 0.0 || b.baseline != 0.0) throw RangeError("Loewe needs baseline-free curves");

  LoeweResult out;
  if (dose_b == 0.0) {
    out.e_loewe = a.evaluate(dose_a);
  } else if (dose_a == 0.0) {
    out.e_loewe = b.evaluate(dose_b);
  } else {
    // g(E) = x_A/X_A(E) + x_B/X_B(E) - 1 falls from +∞ as E rises.
    auto g = [&](double e) { return dose_a / a.inverse(e) + dose_b / b.inverse(e) - 1.0; };
    const double top = std::min(a.e_max, b.e_max);
    double lo = 0.0;
    double hi = top;
    const double near_top = std::nextafter(top, 0.0);
    if (g(near_top) > 0.0) {
      out.e_loewe = top;
      out.no_root = true;
    } else {
      for (int iter = 0; iter < 200 && hi - lo > 1e-9; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= 0.0 || g(mid) > 0.0) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      out.e_loewe = 0.5 * (lo + hi);
    }
  }
  out.score = e_ab - out.e_loewe;
  return out;
}

bool is_synergistic(std::span<const SynergyScores> per_cell_line) {
  return std::any_of(per_cell_line.begin(), per_cell_line.end(), [](const SynergyScores& s) {
    return s.zip > 0.0 && s.bliss > 0.0 && s.loewe > 0.0 && s.hsa > 0.0;
  });
}

std::vector<StructureRecord> filter_structures(std::span<const StructureRecord> records) {
  std::vector<StructureRecord> out;
  for (const auto& r : records) {
    if (r.experimental || r.plddt >= kPlddtThreshold) out.push_back(r);
  }
  return out;
}

}  // namespace dualgen::synergy

#include "dualgen/error.hpp"
#include "dualgen/harness.hpp"

namespace dualgen::harness {

MockScorer::MockScorer(double contact_reward, double contact_radius) : a_(contact_reward), r_c_(contact_radius) {
  if (!(contact_radius > 0.0)) throw BadRange("contact radius must be positive");
}

double MockScorer::score(std::span<const chem::Atom> ligand, const chem::Pocket& pocket) const {
  const double rc2 = r_c_ * r_c_;
  const double clash2 = kClashDistance * kClashDistance;
  long contacts = 0;
  long clashes = 0;
  for (const auto& l : ligand) {
    for (const auto& p : pocket.atoms) {
      const double d2 = (l.position - p.position).squaredNorm();
      if (d2 <= rc2) ++contacts;
      if (d2 < clash2) ++clashes;
    }
  }
  return -a_ * static_cast<double>(contacts) + kClashPenalty * static_cast<double>(clashes);
}

}  // namespace dualgen::harness

#include "dualgen/error.hpp"
#include "dualgen/harness.hpp"

namespace dualgen::harness {

PairMode parse_pair_mode(std::string_view name) {
  if (name == "joint") return PairMode::Joint;
  if (name == "self") return PairMode::Self;
  throw BadRange("unknown fragment mode '" + std::string(name) + "' (joint, self)");
}

namespace {

std::size_t best_index(std::span<const ScoredFragment> frags) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < frags.size(); ++i) {
    if (frags[i].score < frags[best].score) best = i;
  }
  return best;
}

}  // namespace

FragmentPair select_fragment_pair(std::span<const ScoredFragment> first, std::span<const ScoredFragment> second,
                                  PairMode mode) {
  if (first.empty() || second.empty()) throw DegenerateInput("fragment lists must be nonempty");
  if (mode == PairMode::Self) {
    const std::size_t i = best_index(first);
    const std::size_t j = best_index(second);
    return {i, j, first[i].score + second[j].score};
  }

  bool found = false;
  FragmentPair best;
  for (std::size_t i = 0; i < first.size(); ++i) {
    for (std::size_t j = 0; j < second.size(); ++j) {
      const double sum = first[i].score + second[j].score;
      if (found && !(sum < best.score_sum)) continue;
      if (chem::min_interfragment_distance(first[i].fragment, second[j].fragment) <= kFragmentClash) continue;
      best = {i, j, sum};
      found = true;
    }
  }
  if (!found) throw NoFeasiblePair("every fragment pair clashes (distance <= 1.4 Å)");
  return best;
}

std::vector<ScoredFragment> score_fragments(const chem::Molecule& mol, const chem::Pocket& pocket,
                                            const ScorerInterface& scorer) {
  std::vector<ScoredFragment> out;
  for (auto& frag : chem::fragment_molecule(mol)) {
    const double s = scorer.score(frag, pocket);
    out.push_back({std::move(frag), s});
  }
  return out;
}

}  // namespace dualgen::harness

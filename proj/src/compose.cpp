#include "dualgen/compose.hpp"

#include <cmath>
#include <limits>

#include "dualgen/error.hpp"

namespace dualgen::compose {

AlignmentCriterion parse_criterion(std::string_view name) {
  if (name == "center") return AlignmentCriterion::Center;
  if (name == "rmsd") return AlignmentCriterion::MinRmsd;
  if (name == "score") return AlignmentCriterion::MinScoreSum;
  throw BadRange("unknown alignment criterion '" + std::string(name) + "' (center, rmsd, score)");
}

std::string_view to_string(AlignmentCriterion criterion) {
  switch (criterion) {
    case AlignmentCriterion::Center: return "center";
    case AlignmentCriterion::MinRmsd: return "rmsd";
    case AlignmentCriterion::MinScoreSum: return "score";
  }
  return "center";
}

CompositionKind parse_composition_kind(std::string_view name) {
  if (name == "compdiff") return CompositionKind::CompDiff;
  if (name == "dualdiff") return CompositionKind::DualDiff;
  throw BadRange("unknown composition mode '" + std::string(name) + "' (compdiff, dualdiff)");
}

std::string_view to_string(CompositionKind kind) {
  return kind == CompositionKind::CompDiff ? "compdiff" : "dualdiff";
}

geom::RigidTransform align_center(const chem::Pocket& p1, const chem::Pocket& p2) {
  geom::RigidTransform t;
  t.translation = geom::centroid(p1.positions()) - geom::centroid(p2.positions());
  return t;
}

double prober_rmsd(const ProberPosePair& prober) {
  const auto a = prober.pose1.positions();
  const auto b = prober.pose2.positions();
  const auto t = geom::kabsch(b, a);
  return geom::rmsd(geom::apply_transform(t, b), a);
}

AlignmentResult align_prober(std::span<const ProberPosePair> probers, AlignmentCriterion criterion) {
  if (probers.empty()) throw EmptyProbers("no prober poses supplied");
  if (criterion == AlignmentCriterion::Center) throw BadRange("align_prober needs the rmsd or score criterion");

  AlignmentResult best;
  double best_value = std::numeric_limits<double>::infinity();
  bool found = false;
  for (const auto& prober : probers) {
    const auto target = prober.pose1.positions();
    const auto source = prober.pose2.positions();
    geom::RigidTransform t;
    try {
      t = geom::kabsch(source, target);
    } catch (const DegenerateInput&) {
      continue;
    }
    const double value = criterion == AlignmentCriterion::MinRmsd
                             ? geom::rmsd(geom::apply_transform(t, source), target)
                             : prober.score1 + prober.score2;
    if (!found || value < best_value) {
      best = {t, prober.id};
      best_value = value;
      found = true;
    }
  }
  if (!found) throw DegenerateInput("every prober has degenerate (collinear) poses");
  return best;
}

AlignmentResult align_pockets(const chem::Pocket& p1, const chem::Pocket& p2, std::span<const ProberPosePair> probers,
                              AlignmentCriterion criterion) {
  if (criterion == AlignmentCriterion::Center) return {align_center(p1, p2), ""};
  return align_prober(probers, criterion);
}

chem::Pocket transform_pocket(const chem::Pocket& pocket, const geom::RigidTransform& transform) {
  chem::Pocket out = pocket;
  for (auto& atom : out.atoms) atom.position = transform.apply(atom.position);
  return out;
}

Eigen::MatrixXd compose_type_posteriors(const Eigen::MatrixXd& c1, const Eigen::MatrixXd& c2,
                                        const CompositionMode& mode) {
  if (c1.rows() != c2.rows() || c1.cols() != c2.cols()) throw ShapeMismatch("type posteriors differ in shape");
  Eigen::ArrayXXd product = c1.array() * c2.array();
  if (mode.tempered_types) {
    if (mode.eta == 0.5) {
      product = product.sqrt();
    } else {
      product = product.pow(mode.eta);
    }
  }
  return diffusion::normalize_rows(product.matrix());
}

graph::Positions compose_position_mean(const graph::Positions& x_t, const graph::Positions& x0_first,
                                       const graph::Positions& x0_second, int t,
                                       const diffusion::NoiseSchedule& schedule, const CompositionMode& mode) {
  if (!(mode.eta > 0.0 && mode.eta <= 1.0)) throw BadRange("η must lie in (0, 1]");
  if (mode.epsilon_form) {
    const graph::Positions d1 = x_t - diffusion::posterior_pos(x_t, x0_first, t, schedule).mean;
    const graph::Positions d2 = x_t - diffusion::posterior_pos(x_t, x0_second, t, schedule).mean;
    return x_t - mode.eta * (d1 + d2);
  }
  const graph::Positions x0 = mode.eta * x0_first + (1.0 - mode.eta) * x0_second;
  return diffusion::posterior_pos(x_t, x0, t, schedule).mean;
}

diffusion::DiffusionState comp_reverse_step(const egnn::NetworkParams& params, const graph::PocketArrays& p1,
                                            const graph::PocketArrays& p2, const diffusion::DiffusionState& state,
                                            const diffusion::NoiseSchedule& schedule, const CompositionMode& mode,
                                            Rng& rng, const diffusion::SamplingOptions& options) {
  const int t = state.t;
  if (t < 1 || t > schedule.steps()) throw BadRange("time step outside [1, T]");

  const std::size_t n = state.nodes.size();
  const std::size_t k1 = graph::clamp_k(options.k, p1.size() + n);
  const std::size_t k2 = graph::clamp_k(options.k, p2.size() + n);

  if (mode.kind == CompositionKind::DualDiff) {
    const graph::DualGraphPair pair{graph::build_complex_graph(p1, state.nodes, k1),
                                    graph::build_complex_graph(p2, state.nodes, k2)};
    const auto prediction = egnn::predict(params, pair, t, schedule.steps());
    return diffusion::step_from_prediction(state, prediction, schedule, rng, options);
  }

  const auto pred1 = egnn::predict(params, graph::build_complex_graph(p1, state.nodes, k1), t, schedule.steps());
  const auto pred2 = egnn::predict(params, graph::build_complex_graph(p2, state.nodes, k2), t, schedule.steps());
  const graph::Positions mean = compose_position_mean(state.nodes.x, pred1.x0, pred2.x0, t, schedule, mode);
  const Eigen::MatrixXd probs =
      compose_type_posteriors(diffusion::posterior_type(state.nodes.v, pred1.v0, t, schedule),
                              diffusion::posterior_type(state.nodes.v, pred2.v0, t, schedule), mode);

  diffusion::DiffusionState next;
  next.t = t - 1;
  next.nodes.x = diffusion::sample_positions(mean, t, schedule, rng, options.noise_frame);
  next.nodes.v = diffusion::sample_categorical(probs, rng, options.argmax_final && t == 1);
  return next;
}

chem::Molecule sample_dual_aligned(const egnn::NetworkParams& params, const chem::Pocket& p1,
                                   const chem::Pocket& p2_aligned, std::size_t n_atoms,
                                   const diffusion::NoiseSchedule& schedule, const CompositionMode& mode, Rng& rng,
                                   const diffusion::SamplingOptions& options, const chem::AtomTypeVocab& vocab) {
  graph::PocketArrays a1 = graph::PocketArrays::from(p1);
  graph::PocketArrays a2 = graph::PocketArrays::from(p2_aligned);
  const Eigen::Vector3d c1 = a1.x.colwise().mean().transpose();
  const Eigen::Vector3d c2 = a2.x.colwise().mean().transpose();
  const Eigen::Vector3d center = 0.5 * (c1 + c2);
  a1.x.rowwise() -= center.transpose();
  a2.x.rowwise() -= center.transpose();

  auto state = diffusion::sample_prior(n_atoms, params.config().ligand_types, schedule.steps(), rng,
                                       options.noise_frame);
  if (options.trace) options.trace->push_back(state);
  while (state.t >= 1) {
    state = comp_reverse_step(params, a1, a2, state, schedule, mode, rng, options);
    if (options.trace) options.trace->push_back(state);
  }
  return diffusion::decode_molecule(state, center, vocab, "sample");
}

DualSample sample_dual(const egnn::NetworkParams& params, const chem::Pocket& p1, const chem::Pocket& p2,
                       std::span<const ProberPosePair> probers, AlignmentCriterion criterion, std::size_t n_atoms,
                       const diffusion::NoiseSchedule& schedule, const CompositionMode& mode, Rng& rng,
                       const diffusion::SamplingOptions& options, const chem::AtomTypeVocab& vocab) {
  DualSample out;
  out.alignment = align_pockets(p1, p2, probers, criterion);
  out.molecule = sample_dual_aligned(params, p1, transform_pocket(p2, out.alignment.transform), n_atoms, schedule,
                                     mode, rng, options, vocab);
  return out;
}

}  // namespace dualgen::compose

#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dualgen/chem.hpp"
#include "dualgen/diffusion.hpp"
#include "dualgen/egnn.hpp"
#include "dualgen/geom.hpp"
#include "dualgen/graph.hpp"
#include "dualgen/rng.hpp"

namespace dualgen::compose {

enum class AlignmentCriterion { Center, MinRmsd, MinScoreSum };

/// Accepts "center", "rmsd" and "score".
AlignmentCriterion parse_criterion(std::string_view name);
std::string_view to_string(AlignmentCriterion criterion);

/// One ligand docked separately into both pockets. Scores are in kcal/mol,
/// lower is better.
struct ProberPosePair {
  std::string id;
  chem::Molecule pose1;
  chem::Molecule pose2;
  double score1 = 0.0;
  double score2 = 0.0;
};

enum class CompositionKind { CompDiff, DualDiff };

CompositionKind parse_composition_kind(std::string_view name);
std::string_view to_string(CompositionKind kind);

struct CompositionMode {
  CompositionKind kind = CompositionKind::DualDiff;
  /// Weight of the first pocket in the position branch, in (0, 1].
  double eta = 0.5;
  /// CompDiff only: sample types from [c̃1 ⊙ c̃2]^η instead of c̃1 ⊙ c̃2.
  bool tempered_types = false;
  /// CompDiff only: x_{t-1} = x_t - η (d1 + d2), d_v = x_t - μ̃(x̂0_v).
  bool epsilon_form = false;
};

struct AlignmentResult {
  /// Maps P2 coordinates into the P1 frame.
  geom::RigidTransform transform;
  /// Empty for the Center criterion.
  std::string prober_id;
};

/// Translation taking the centroid of p2 onto the centroid of p1.
geom::RigidTransform align_center(const chem::Pocket& p1, const chem::Pocket& p2);

/// Kabsch pose2 -> pose1 for every prober, winner by criterion (first on
/// ties). Probers whose poses are collinear are skipped.
/// Throws EmptyProbers, BadRange for Center, DegenerateInput if no prober is usable.
AlignmentResult align_prober(std::span<const ProberPosePair> probers, AlignmentCriterion criterion);

/// Dispatches on the criterion; probers are ignored for Center.
AlignmentResult align_pockets(const chem::Pocket& p1, const chem::Pocket& p2, std::span<const ProberPosePair> probers,
                              AlignmentCriterion criterion);

/// Post-alignment RMSD of one prober under its own Kabsch transform.
double prober_rmsd(const ProberPosePair& prober);

chem::Pocket transform_pocket(const chem::Pocket& pocket, const geom::RigidTransform& transform);

/// Normalized c̃1 ⊙ c̃2, or [c̃1 ⊙ c̃2]^η when tempered.
Eigen::MatrixXd compose_type_posteriors(const Eigen::MatrixXd& c1, const Eigen::MatrixXd& c2,
                                        const CompositionMode& mode);

/// Composed posterior mean for the position branch.
graph::Positions compose_position_mean(const graph::Positions& x_t, const graph::Positions& x0_first,
                                       const graph::Positions& x0_second, int t,
                                       const diffusion::NoiseSchedule& schedule, const CompositionMode& mode);

/// One compositional reverse step. Both pockets must already be in the
/// sampling frame (P2 aligned, common center subtracted).
diffusion::DiffusionState comp_reverse_step(const egnn::NetworkParams& params, const graph::PocketArrays& p1,
                                            const graph::PocketArrays& p2, const diffusion::DiffusionState& state,
                                            const diffusion::NoiseSchedule& schedule, const CompositionMode& mode,
                                            Rng& rng, const diffusion::SamplingOptions& options);

/// Sampling with an already aligned P2. The prior is centered at the midpoint
/// of the two pocket centroids; the molecule is returned in the P1 frame.
chem::Molecule sample_dual_aligned(const egnn::NetworkParams& params, const chem::Pocket& p1,
                                   const chem::Pocket& p2_aligned, std::size_t n_atoms,
                                   const diffusion::NoiseSchedule& schedule, const CompositionMode& mode, Rng& rng,
                                   const diffusion::SamplingOptions& options,
                                   const chem::AtomTypeVocab& vocab = chem::AtomTypeVocab::ligand_default());

struct DualSample {
  chem::Molecule molecule;
  AlignmentResult alignment;
};

/// Aligns P2 onto P1, then samples.
DualSample sample_dual(const egnn::NetworkParams& params, const chem::Pocket& p1, const chem::Pocket& p2,
                       std::span<const ProberPosePair> probers, AlignmentCriterion criterion, std::size_t n_atoms,
                       const diffusion::NoiseSchedule& schedule, const CompositionMode& mode, Rng& rng,
                       const diffusion::SamplingOptions& options,
                       const chem::AtomTypeVocab& vocab = chem::AtomTypeVocab::ligand_default());

// --- prober files ------------------------------------------------------------

/// Records of `PROBER <id> <score1> <score2>` followed by the two pose blocks.
std::vector<ProberPosePair> parse_probers(std::string_view text, const chem::AtomTypeVocab& vocab);
std::string serialize_probers(std::span<const ProberPosePair> probers, const chem::AtomTypeVocab& vocab);
std::vector<ProberPosePair> read_probers_file(const std::string& path, const chem::AtomTypeVocab& vocab);

std::string serialize_transform(const geom::RigidTransform& transform);

}  // namespace dualgen::compose

#pragma once

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "dualgen/chem.hpp"
#include "dualgen/egnn.hpp"
#include "dualgen/graph.hpp"
#include "dualgen/rng.hpp"

namespace dualgen::diffusion {

using graph::Positions;

enum class ScheduleKind { Linear, Cosine, Sigmoid };

ScheduleKind parse_schedule_kind(std::string_view name);
std::string_view to_string(ScheduleKind kind);

/// Fixed variance schedule over steps 1..T. Index 0 of the cumulative table
/// is ᾱ_0 = 1.
class NoiseSchedule {
 public:
  /// Throws BadRange unless every β lies strictly inside (0, 1).
  explicit NoiseSchedule(std::vector<double> betas);

  int steps() const { return static_cast<int>(betas_.size()); }
  double beta(int t) const { return betas_.at(static_cast<std::size_t>(t - 1)); }
  double alpha(int t) const { return alphas_.at(static_cast<std::size_t>(t - 1)); }
  double alpha_bar(int t) const { return alpha_bars_.at(static_cast<std::size_t>(t)); }
  /// (1 - ᾱ_{t-1}) / (1 - ᾱ_t) · β_t; zero at t = 1.
  double beta_tilde(int t) const { return beta_tildes_.at(static_cast<std::size_t>(t - 1)); }
  /// Reverse-kernel variance σ_t² (= β̃_t).
  double sigma2(int t) const { return beta_tilde(t); }

  std::span<const double> betas() const { return betas_; }

 private:
  std::vector<double> betas_;
  std::vector<double> alphas_;
  std::vector<double> alpha_bars_;
  std::vector<double> beta_tildes_;
};

/// β_t rising from β_min to β_max along a linear, half-cosine or sigmoid ramp.
NoiseSchedule make_schedule(ScheduleKind kind, int num_steps, double beta_min, double beta_max);

// --- kernels -----------------------------------------------------------------

/// x_t = √ᾱ_t x_0 + √(1 - ᾱ_t) ε
Positions q_sample_pos(const Positions& x0, int t, const NoiseSchedule& schedule, const Positions& noise);

/// Rows ᾱ_t v_0 + (1 - ᾱ_t)/K.
Eigen::MatrixXd type_marginal(const Eigen::MatrixXd& v0, int t, const NoiseSchedule& schedule);

/// One-hot draws from type_marginal.
Eigen::MatrixXd q_sample_type(const Eigen::MatrixXd& v0, int t, const NoiseSchedule& schedule, Rng& rng);

struct PositionPosterior {
  Positions mean;
  double variance = 0.0;
};

/// Gaussian posterior q(x_{t-1} | x_t, x_0 = x̂0). At t = 1 the mean is x̂0 exactly.
PositionPosterior posterior_pos(const Positions& x_t, const Positions& x0_hat, int t, const NoiseSchedule& schedule);

/// c̃ = c* / Σ c*, c* = [α_t v_t + (1-α_t)/K] ⊙ [ᾱ_{t-1} v̂0 + (1-ᾱ_{t-1})/K], per row.
Eigen::MatrixXd posterior_type(const Eigen::MatrixXd& v_t, const Eigen::MatrixXd& v0_hat, int t,
                               const NoiseSchedule& schedule);

/// Normalizes each row; throws DegenerateInput if a row sums to zero.
Eigen::MatrixXd normalize_rows(Eigen::MatrixXd rows);

/// One-hot draw per row by inverse CDF (one uniform per row), or the row argmax.
Eigen::MatrixXd sample_categorical(const Eigen::MatrixXd& probs, Rng& rng, bool argmax = false);

// --- reverse process ---------------------------------------------------------

struct DiffusionState {
  graph::LigandNodes nodes;
  int t = 0;
};

struct SamplingOptions {
  std::size_t k = 32;
  /// At t = 1 take the argmax of c̃ instead of drawing from it.
  bool argmax_final = false;
  /// Every Gaussian draw is rotated by this frame; jointly rotating pockets
  /// and frame rotates the samples.
  Eigen::Matrix3d noise_frame = Eigen::Matrix3d::Identity();
  /// When set, receives M_T, ..., M_0 (coordinates in the sampling frame).
  std::vector<DiffusionState>* trace = nullptr;
};

/// Draws x_{t-1} ~ N(mean, σ_t² I); no noise at t = 1.
Positions sample_positions(const Positions& mean, int t, const NoiseSchedule& schedule, Rng& rng,
                           const Eigen::Matrix3d& frame);

/// M_{t-1} from a prediction [x̂0, v̂0] through the two posteriors.
DiffusionState step_from_prediction(const DiffusionState& state, const egnn::Prediction& prediction,
                                    const NoiseSchedule& schedule, Rng& rng, const SamplingOptions& options);

/// One reverse step p_θ(M_{t-1} | M_t, P). The pocket must already be in the
/// sampling frame (centered on its centroid).
DiffusionState reverse_step(const egnn::NetworkParams& params, const graph::PocketArrays& pocket,
                            const DiffusionState& state, const NoiseSchedule& schedule, Rng& rng,
                            const SamplingOptions& options);

/// Prior draw M_T: x ~ N(0, I) in the sampling frame, v uniform one-hot.
DiffusionState sample_prior(std::size_t n_atoms, int ligand_types, int num_steps, Rng& rng,
                            const Eigen::Matrix3d& frame);

/// Decodes a final state into a molecule: translate by `center`, hard
/// one-hot types, distance-based bonds.
chem::Molecule decode_molecule(const DiffusionState& state, const Eigen::Vector3d& center,
                               const chem::AtomTypeVocab& vocab, std::string name);

/// Full single-target sampling: prior around the pocket centroid, T reverse
/// steps with a fresh graph each step.
chem::Molecule sample_single(const egnn::NetworkParams& params, const chem::Pocket& pocket, std::size_t n_atoms,
                             const NoiseSchedule& schedule, Rng& rng, const SamplingOptions& options,
                             const chem::AtomTypeVocab& vocab = chem::AtomTypeVocab::ligand_default());

// --- training ----------------------------------------------------------------

inline constexpr double kDefaultTypeWeight = 100.0;

struct TrainingExample {
  graph::PocketArrays pocket;
  graph::LigandNodes ligand;  // x_0 and one-hot v_0, world coordinates

  static TrainingExample from(const chem::Pocket& pocket, const chem::Molecule& ligand);
};

struct TrainingLoss {
  egnn::LossBreakdown loss;
  egnn::NetworkParams gradient;
  int t = 0;
};

/// Loss at a uniformly drawn step with its analytic gradient.
TrainingLoss training_loss(const egnn::NetworkParams& params, const TrainingExample& example,
                           const NoiseSchedule& schedule, std::size_t k, Rng& rng,
                           double lambda_v = kDefaultTypeWeight);

/// Loss at a fixed step and fixed corruption; `grad` may be null.
/// `position_noise` is ε for q_sample_pos and `type_t` the corrupted one-hot types.
egnn::LossBreakdown loss_at(const egnn::NetworkParams& params, const TrainingExample& example, int t,
                            const NoiseSchedule& schedule, std::size_t k, const Positions& position_noise,
                            const Eigen::MatrixXd& type_t, double lambda_v, egnn::NetworkParams* grad);

struct TrainOptions {
  int epochs = 10;
  int steps_per_epoch = 100;
  /// Independent (t, noise) draws averaged per optimizer step.
  int batch = 4;
  double learning_rate = 1e-3;
  double final_learning_rate = 1e-5;
  double lambda_v = kDefaultTypeWeight;
  double grad_clip = 10.0;
  std::size_t k = 32;
};

struct TrainReport {
  /// Mean training loss of each epoch.
  std::vector<double> epoch_loss;
};

/// Adam with cosine learning-rate decay. `on_epoch(epoch, mean_loss)` is
/// called after each epoch when set.
TrainReport train(egnn::NetworkParams& params, std::span<const TrainingExample> data, const NoiseSchedule& schedule,
                  const TrainOptions& options, Rng& rng,
                  const std::function<void(int, double)>& on_epoch = {});

}  // namespace dualgen::diffusion

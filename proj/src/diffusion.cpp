#include "dualgen/diffusion.hpp"

#include <cmath>
#include <numbers>

#include "dualgen/error.hpp"

namespace dualgen::diffusion {

namespace {

void check_t(int t, const NoiseSchedule& schedule) {
  if (t < 1 || t > schedule.steps()) {
    throw BadRange("time step " + std::to_string(t) + " outside [1, " + std::to_string(schedule.steps()) + "]");
  }
}

Eigen::Vector3d centroid_of(const Positions& x) { return x.colwise().mean().transpose(); }

}  // namespace

ScheduleKind parse_schedule_kind(std::string_view name) {
  if (name == "linear") return ScheduleKind::Linear;
  if (name == "cosine") return ScheduleKind::Cosine;
  if (name == "sigmoid") return ScheduleKind::Sigmoid;
  throw BadRange("unknown schedule kind '" + std::string(name) + "'");
}

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::Linear: return "linear";
    case ScheduleKind::Cosine: return "cosine";
    case ScheduleKind::Sigmoid: return "sigmoid";
  }
  return "linear";
}

NoiseSchedule::NoiseSchedule(std::vector<double> betas) : betas_(std::move(betas)) {
  if (betas_.empty()) throw BadRange("schedule needs at least one step");
  alpha_bars_.push_back(1.0);
  for (double b : betas_) {
    if (!(b > 0.0 && b < 1.0)) throw BadRange("β must lie in (0, 1)");
    alphas_.push_back(1.0 - b);
    alpha_bars_.push_back(alpha_bars_.back() * alphas_.back());
  }
  for (int t = 1; t <= steps(); ++t) {
    beta_tildes_.push_back((1.0 - alpha_bar(t - 1)) / (1.0 - alpha_bar(t)) * beta(t));
  }
}

NoiseSchedule make_schedule(ScheduleKind kind, int num_steps, double beta_min, double beta_max) {
  if (num_steps < 1) throw BadRange("schedule needs T >= 1");
  if (!(beta_min > 0.0 && beta_min <= beta_max && beta_max < 1.0)) {
    throw BadRange("schedule needs 0 < beta_min <= beta_max < 1");
  }
  auto sigmoid = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  std::vector<double> betas;
  betas.reserve(static_cast<std::size_t>(num_steps));
  for (int t = 1; t <= num_steps; ++t) {
    const double s = num_steps == 1 ? 0.0 : static_cast<double>(t - 1) / static_cast<double>(num_steps - 1);
    double ramp = s;
    switch (kind) {
      case ScheduleKind::Linear: break;
      case ScheduleKind::Cosine: ramp = 0.5 * (1.0 - std::cos(std::numbers::pi * s)); break;
      case ScheduleKind::Sigmoid:
        ramp = (sigmoid(-6.0 + 12.0 * s) - sigmoid(-6.0)) / (sigmoid(6.0) - sigmoid(-6.0));
        break;
    }
    betas.push_back(beta_min + (beta_max - beta_min) * ramp);
  }
  return NoiseSchedule(std::move(betas));
}

Positions q_sample_pos(const Positions& x0, int t, const NoiseSchedule& schedule, const Positions& noise) {
  check_t(t, schedule);
  if (noise.rows() != x0.rows()) throw ShapeMismatch("q_sample_pos: noise shape differs from x0");
  const double ab = schedule.alpha_bar(t);
  return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * noise;
}

Eigen::MatrixXd type_marginal(const Eigen::MatrixXd& v0, int t, const NoiseSchedule& schedule) {
  if (t != 0) check_t(t, schedule);
  const double ab = schedule.alpha_bar(t);
  const double k = static_cast<double>(v0.cols());
  return (ab * v0).array() + (1.0 - ab) / k;
}

Eigen::MatrixXd q_sample_type(const Eigen::MatrixXd& v0, int t, const NoiseSchedule& schedule, Rng& rng) {
  return sample_categorical(type_marginal(v0, t, schedule), rng);
}

PositionPosterior posterior_pos(const Positions& x_t, const Positions& x0_hat, int t, const NoiseSchedule& schedule) {
  check_t(t, schedule);
  if (x_t.rows() != x0_hat.rows()) throw ShapeMismatch("posterior_pos: x_t and x̂0 differ in size");
  if (t == 1) return {x0_hat, 0.0};
  const double ab = schedule.alpha_bar(t);
  const double ab_prev = schedule.alpha_bar(t - 1);
  const double coef_x0 = std::sqrt(ab_prev) * schedule.beta(t) / (1.0 - ab);
  const double coef_xt = std::sqrt(schedule.alpha(t)) * (1.0 - ab_prev) / (1.0 - ab);
  return {coef_x0 * x0_hat + coef_xt * x_t, schedule.beta_tilde(t)};
}

Eigen::MatrixXd normalize_rows(Eigen::MatrixXd rows) {
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const double s = rows.row(i).sum();
    if (!(s > 0.0)) throw DegenerateInput("categorical row sums to zero");
    rows.row(i) /= s;
  }
  return rows;
}

Eigen::MatrixXd posterior_type(const Eigen::MatrixXd& v_t, const Eigen::MatrixXd& v0_hat, int t,
                               const NoiseSchedule& schedule) {
  check_t(t, schedule);
  if (v_t.rows() != v0_hat.rows() || v_t.cols() != v0_hat.cols()) {
    throw ShapeMismatch("posterior_type: v_t and v̂0 differ in shape");
  }
  const double k = static_cast<double>(v_t.cols());
  const double a = schedule.alpha(t);
  const double ab_prev = schedule.alpha_bar(t - 1);
  const Eigen::ArrayXXd from_t = a * v_t.array() + (1.0 - a) / k;
  const Eigen::ArrayXXd from_0 = ab_prev * v0_hat.array() + (1.0 - ab_prev) / k;
  return normalize_rows((from_t * from_0).matrix());
}

Eigen::MatrixXd sample_categorical(const Eigen::MatrixXd& probs, Rng& rng, bool argmax) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(probs.rows(), probs.cols());
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    Eigen::Index pick = 0;
    if (argmax) {
      probs.row(i).maxCoeff(&pick);
    } else {
      const double u = rng.uniform() * probs.row(i).sum();
      double cum = 0.0;
      pick = -1;
      for (Eigen::Index k = 0; k < probs.cols(); ++k) {
        if (probs(i, k) <= 0.0) continue;
        cum += probs(i, k);
        pick = k;
        if (u < cum) break;
      }
      if (pick < 0) throw DegenerateInput("categorical row has no positive mass");
    }
    out(i, pick) = 1.0;
  }
  return out;
}

Positions sample_positions(const Positions& mean, int t, const NoiseSchedule& schedule, Rng& rng,
                           const Eigen::Matrix3d& frame) {
  if (t == 1) return mean;
  const double sigma = std::sqrt(schedule.sigma2(t));
  Positions out = mean;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    Eigen::Vector3d n;
    n << rng.normal(), rng.normal(), rng.normal();
    out.row(i) += sigma * (frame * n).transpose();
  }
  return out;
}

DiffusionState step_from_prediction(const DiffusionState& state, const egnn::Prediction& prediction,
                                    const NoiseSchedule& schedule, Rng& rng, const SamplingOptions& options) {
  const int t = state.t;
  const auto pos = posterior_pos(state.nodes.x, prediction.x0, t, schedule);
  DiffusionState next;
  next.t = t - 1;
  next.nodes.x = sample_positions(pos.mean, t, schedule, rng, options.noise_frame);
  next.nodes.v = sample_categorical(posterior_type(state.nodes.v, prediction.v0, t, schedule), rng,
                                    options.argmax_final && t == 1);
  return next;
}

DiffusionState reverse_step(const egnn::NetworkParams& params, const graph::PocketArrays& pocket,
                            const DiffusionState& state, const NoiseSchedule& schedule, Rng& rng,
                            const SamplingOptions& options) {
  check_t(state.t, schedule);
  const std::size_t k = graph::clamp_k(options.k, pocket.size() + state.nodes.size());
  const auto g = graph::build_complex_graph(pocket, state.nodes, k);
  const auto prediction = egnn::predict(params, g, state.t, schedule.steps());
  return step_from_prediction(state, prediction, schedule, rng, options);
}

DiffusionState sample_prior(std::size_t n_atoms, int ligand_types, int num_steps, Rng& rng,
                            const Eigen::Matrix3d& frame) {
  if (n_atoms == 0) throw BadRange("n_atoms must be at least 1");
  DiffusionState s;
  s.t = num_steps;
  s.nodes.x.resize(static_cast<Eigen::Index>(n_atoms), 3);
  for (Eigen::Index i = 0; i < s.nodes.x.rows(); ++i) {
    Eigen::Vector3d n;
    n << rng.normal(), rng.normal(), rng.normal();
    s.nodes.x.row(i) = (frame * n).transpose();
  }
  const Eigen::MatrixXd uniform =
      Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n_atoms), ligand_types, 1.0 / ligand_types);
  s.nodes.v = sample_categorical(uniform, rng);
  return s;
}

chem::Molecule decode_molecule(const DiffusionState& state, const Eigen::Vector3d& center,
                               const chem::AtomTypeVocab& vocab, std::string name) {
  if (state.nodes.v.cols() != static_cast<Eigen::Index>(vocab.size())) {
    throw ShapeMismatch("decode: type width does not match the vocabulary");
  }
  chem::Molecule mol;
  mol.name = std::move(name);
  for (Eigen::Index i = 0; i < state.nodes.x.rows(); ++i) {
    chem::Atom atom;
    atom.position = state.nodes.x.row(i).transpose() + center;
    Eigen::Index k = 0;
    state.nodes.v.row(i).maxCoeff(&k);
    atom.type = vocab.one_hot(static_cast<std::size_t>(k));
    mol.atoms.push_back(std::move(atom));
  }
  return chem::infer_bonds(mol, vocab);
}

chem::Molecule sample_single(const egnn::NetworkParams& params, const chem::Pocket& pocket, std::size_t n_atoms,
                             const NoiseSchedule& schedule, Rng& rng, const SamplingOptions& options,
                             const chem::AtomTypeVocab& vocab) {
  graph::PocketArrays arrays = graph::PocketArrays::from(pocket);
  const Eigen::Vector3d center = centroid_of(arrays.x);
  arrays.x.rowwise() -= center.transpose();

  DiffusionState state = sample_prior(n_atoms, params.config().ligand_types, schedule.steps(), rng, options.noise_frame);
  if (options.trace) options.trace->push_back(state);
  while (state.t >= 1) {
    state = reverse_step(params, arrays, state, schedule, rng, options);
    if (options.trace) options.trace->push_back(state);
  }
  return decode_molecule(state, center, vocab, "sample");
}

// --- training ----------------------------------------------------------------

TrainingExample TrainingExample::from(const chem::Pocket& pocket, const chem::Molecule& ligand) {
  TrainingExample ex;
  ex.pocket = graph::PocketArrays::from(pocket);
  const auto n = static_cast<Eigen::Index>(ligand.atoms.size());
  if (n == 0) throw DegenerateInput("training ligand has no atoms");
  ex.ligand.x.resize(n, 3);
  ex.ligand.v.resize(n, ligand.atoms.front().type.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    ex.ligand.x.row(i) = ligand.atoms[static_cast<std::size_t>(i)].position.transpose();
    ex.ligand.v.row(i) = ligand.atoms[static_cast<std::size_t>(i)].type.transpose();
  }
  return ex;
}

egnn::LossBreakdown loss_at(const egnn::NetworkParams& params, const TrainingExample& example, int t,
                            const NoiseSchedule& schedule, std::size_t k, const Positions& position_noise,
                            const Eigen::MatrixXd& type_t, double lambda_v, egnn::NetworkParams* grad) {
  check_t(t, schedule);
  const Eigen::Vector3d center = centroid_of(example.pocket.x);
  graph::PocketArrays pocket = example.pocket;
  pocket.x.rowwise() -= center.transpose();
  Positions x0 = example.ligand.x;
  x0.rowwise() -= center.transpose();

  graph::LigandNodes noisy{q_sample_pos(x0, t, schedule, position_noise), type_t};
  const auto g = graph::build_complex_graph(pocket, noisy, graph::clamp_k(k, pocket.size() + noisy.size()));
  return egnn::loss_and_gradient(params, g, t, schedule.steps(), x0, example.ligand.v, lambda_v, grad);
}

TrainingLoss training_loss(const egnn::NetworkParams& params, const TrainingExample& example,
                           const NoiseSchedule& schedule, std::size_t k, Rng& rng, double lambda_v) {
  TrainingLoss out{{}, params.zeros_like(), 0};
  out.t = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(schedule.steps())));
  Positions noise(example.ligand.x.rows(), 3);
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise.data()[i] = rng.normal();
  const Eigen::MatrixXd type_t = q_sample_type(example.ligand.v, out.t, schedule, rng);
  out.loss = loss_at(params, example, out.t, schedule, k, noise, type_t, lambda_v, &out.gradient);
  return out;
}

}  // namespace dualgen::diffusion

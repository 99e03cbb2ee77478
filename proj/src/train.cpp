#include <cmath>
#include <numbers>

#include "dualgen/diffusion.hpp"
#include "dualgen/error.hpp"

namespace dualgen::diffusion {

TrainReport train(egnn::NetworkParams& params, std::span<const TrainingExample> data, const NoiseSchedule& schedule,
                  const TrainOptions& options, Rng& rng, const std::function<void(int, double)>& on_epoch) {
  if (data.empty()) throw DegenerateInput("training set is empty");
  if (options.epochs < 1 || options.steps_per_epoch < 1 || options.batch < 1) {
    throw BadRange("epochs, steps per epoch and batch must be positive");
  }

  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;

  const std::size_t n = params.values().size();
  std::vector<double> m(n, 0.0);
  std::vector<double> v(n, 0.0);
  egnn::NetworkParams grad = params.zeros_like();
  const long total_steps = static_cast<long>(options.epochs) * options.steps_per_epoch;
  long step = 0;

  TrainReport report;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    double epoch_sum = 0.0;
    for (int s = 0; s < options.steps_per_epoch; ++s) {
      std::fill(grad.values().begin(), grad.values().end(), 0.0);
      double batch_loss = 0.0;
      for (int b = 0; b < options.batch; ++b) {
        const TrainingExample& ex = data[rng.index(data.size())];
        const int t = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(schedule.steps())));
        Positions noise(ex.ligand.x.rows(), 3);
        for (Eigen::Index i = 0; i < noise.size(); ++i) noise.data()[i] = rng.normal();
        const Eigen::MatrixXd type_t = q_sample_type(ex.ligand.v, t, schedule, rng);
        batch_loss += loss_at(params, ex, t, schedule, options.k, noise, type_t, options.lambda_v, &grad).total;
      }
      batch_loss /= options.batch;
      epoch_sum += batch_loss;

      auto g = grad.values();
      double norm2 = 0.0;
      for (double& x : g) {
        x /= options.batch;
        norm2 += x * x;
      }
      const double norm = std::sqrt(norm2);
      const double clip = (options.grad_clip > 0.0 && norm > options.grad_clip) ? options.grad_clip / norm : 1.0;

      ++step;
      const double progress = static_cast<double>(step - 1) / static_cast<double>(std::max<long>(1, total_steps - 1));
      const double lr = options.final_learning_rate + 0.5 * (options.learning_rate - options.final_learning_rate) *
                                                          (1.0 + std::cos(std::numbers::pi * progress));
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      auto p = params.values();
      for (std::size_t i = 0; i < n; ++i) {
        const double gi = g[i] * clip;
        m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * gi;
        v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * gi * gi;
        p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + kEps);
      }
    }
    const double mean = epoch_sum / options.steps_per_epoch;
    report.epoch_loss.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  return report;
}

}  // namespace dualgen::diffusion

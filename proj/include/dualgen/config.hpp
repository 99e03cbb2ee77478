#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "dualgen/diffusion.hpp"
#include "dualgen/egnn.hpp"

namespace dualgen {

/// Run settings read from a flat `key = value` file. `#` starts a comment.
struct Config {
  diffusion::ScheduleKind schedule = diffusion::ScheduleKind::Linear;
  int steps = 1000;
  double beta_min = 1e-4;
  double beta_max = 0.02;
  std::size_t k = 32;
  int hidden = 64;
  int layers = 4;
  double eta = 0.5;
  bool tempered_types = false;
  bool epsilon_form = false;
  bool argmax_final = false;
  std::size_t n_atoms_min = 10;
  std::size_t n_atoms_max = 25;
  std::uint64_t seed = 0;

  int epochs = 10;
  int steps_per_epoch = 100;
  int batch = 4;
  double learning_rate = 1e-3;
  double final_learning_rate = 1e-5;
  double lambda_v = diffusion::kDefaultTypeWeight;

  diffusion::NoiseSchedule make_schedule() const;
  egnn::NetworkConfig network() const;
  diffusion::TrainOptions train_options() const;
};

/// Throws ParseError on unknown keys, malformed values or inconsistent ranges.
Config parse_config(std::string_view text);
Config load_config(const std::string& path);

}  // namespace dualgen

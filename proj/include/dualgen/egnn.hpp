#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

#include "dualgen/graph.hpp"
#include "dualgen/rng.hpp"

namespace dualgen::egnn {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

struct NetworkConfig {
  int ligand_types = 7;
  int protein_types = 8;
  int hidden = 64;
  int layers = 4;
  int rbf_count = 16;
  double rbf_max = 10.0;
  int time_features = 16;
  double gate_clip = 15.0;

  /// Width of the invariant edge feature block: raw distance, radial basis, edge kind.
  int edge_features() const { return 1 + rbf_count + graph::kEdgeKindCount; }
  bool operator==(const NetworkConfig&) const = default;
};

/// All weights live in one contiguous buffer; each named tensor is a
/// row-major view into it. Layer -1 holds the embeddings and output head.
class NetworkParams {
 public:
  struct Tensor {
    int layer = -1;
    std::string name;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    std::size_t offset = 0;

    std::size_t size() const { return static_cast<std::size_t>(rows * cols); }
  };

  /// Zero-initialized parameters (every layer is the identity map).
  explicit NetworkParams(NetworkConfig config = {});

  static NetworkParams random(const NetworkConfig& config, Rng& rng);

  const NetworkConfig& config() const { return config_; }
  const std::vector<Tensor>& tensors() const { return tensors_; }
  const Tensor& tensor(int layer, const std::string& name) const;

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  MatrixMap matrix(int layer, const std::string& name);
  ConstMatrixMap matrix(int layer, const std::string& name) const;

  /// Same layout, all zeros.
  NetworkParams zeros_like() const { return NetworkParams(config_); }

  bool operator==(const NetworkParams& other) const {
    return config_ == other.config_ && values_ == other.values_;
  }

 private:
  void add_tensor(int layer, std::string name, Eigen::Index rows, Eigen::Index cols);

  NetworkConfig config_;
  std::vector<Tensor> tensors_;
  std::vector<double> values_;
};

/// Hidden states (N x H) and coordinates (N x 3) of every node in one graph.
struct NodeState {
  Eigen::MatrixXd h;
  graph::Positions x;
};

/// Node states of both graphs of a dual pair; ligand rows are kept identical.
struct PairState {
  NodeState first;
  NodeState second;
};

struct Prediction {
  graph::Positions x0;
  /// Row-stochastic N_M x K.
  Eigen::MatrixXd v0;
};

/// Sinusoidal features of t/T.
Eigen::VectorXd time_features(const NetworkConfig& config, int t, int num_steps);

/// Node embedding before the first layer.
NodeState embed(const NetworkParams& params, const graph::ComplexGraph& g, int t, int num_steps);

/// One message-passing layer: h' = h + Σ f_h(h_i, h_j, d_ij, e_ij), then
/// x' = x + Σ (x_i - x_j) f_x(h'_i, h'_j, d_ij, e_ij) on ligand rows.
NodeState layer_forward(const NetworkParams& params, int layer, const graph::ComplexGraph& g,
                        const NodeState& state);

/// The same layer over two graphs with shared ligand nodes: ligand h and x
/// take the mean of the two graphs' updates, pocket h updates within its own graph.
PairState composed_layer_forward(const NetworkParams& params, int layer, const graph::DualGraphPair& pair,
                                 const PairState& state);

/// [x̂0, v̂0] for the ligand nodes of a single complex graph at step t.
Prediction predict(const NetworkParams& params, const graph::ComplexGraph& g, int t, int num_steps);

/// DualDiff prediction: composed layers over the pair.
Prediction predict(const NetworkParams& params, const graph::DualGraphPair& pair, int t, int num_steps);

struct LossBreakdown {
  double total = 0.0;
  double position = 0.0;  // mean squared atom displacement, Å²
  double type = 0.0;      // mean cross-entropy, nats
};

/// Denoising loss mean‖x̂0 - x0‖² + λ_v · mean CE(v̂0, v0) for the ligand of g,
/// with analytic gradient accumulated into `grad` (same layout as params)
/// when grad is non-null.
LossBreakdown loss_and_gradient(const NetworkParams& params, const graph::ComplexGraph& g, int t, int num_steps,
                                const graph::Positions& x0, const Eigen::MatrixXd& v0, double lambda_v,
                                NetworkParams* grad);

// --- checkpoints -------------------------------------------------------------

std::string serialize_checkpoint(const NetworkParams& params);
NetworkParams parse_checkpoint(std::string_view text);
void save_checkpoint(const std::string& path, const NetworkParams& params);
NetworkParams load_checkpoint(const std::string& path);

}  // namespace dualgen::egnn

#include "dualgen/egnn.hpp"

#include <cmath>
#include <numbers>

#include "dualgen/error.hpp"

namespace dualgen::egnn {

namespace {

using graph::ComplexGraph;
using graph::Positions;

double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }
double silu(double a) { return a * sigmoid(a); }
double silu_grad(double a) {
  const double s = sigmoid(a);
  return s * (1.0 + a * (1.0 - s));
}

// Const views of one layer's weights. W1 columns are laid out as
// [h_dst | h_src | edge features].
struct LayerWeights {
  ConstMatrixMap h_w1, h_b1, h_w2, h_b2;
  ConstMatrixMap x_w1, x_b1, x_w2, x_b2;
};

LayerWeights layer_weights(const NetworkParams& p, int layer) {
  return {p.matrix(layer, "h_w1"), p.matrix(layer, "h_b1"), p.matrix(layer, "h_w2"), p.matrix(layer, "h_b2"),
          p.matrix(layer, "x_w1"), p.matrix(layer, "x_b1"), p.matrix(layer, "x_w2"), p.matrix(layer, "x_b2")};
}

struct EdgeGeometry {
  std::vector<std::size_t> src;
  std::vector<std::size_t> dst;
  Eigen::MatrixXd r;    // x_dst - x_src, E x 3
  Eigen::VectorXd d;    // |r|
  Eigen::MatrixXd phi;  // E x F
};

double rbf_width(const NetworkConfig& c) { return c.rbf_max / static_cast<double>(std::max(c.rbf_count - 1, 1)); }
double rbf_center(const NetworkConfig& c, int k) { return rbf_width(c) * static_cast<double>(k); }

EdgeGeometry edge_geometry(const NetworkConfig& c, const ComplexGraph& g, const Positions& x) {
  const auto e_count = static_cast<Eigen::Index>(g.edges.size());
  EdgeGeometry eg;
  eg.src.resize(g.edges.size());
  eg.dst.resize(g.edges.size());
  eg.r.resize(e_count, 3);
  eg.d.resize(e_count);
  eg.phi = Eigen::MatrixXd::Zero(e_count, c.edge_features());
  const double inv_two_w2 = 1.0 / (2.0 * rbf_width(c) * rbf_width(c));
  for (Eigen::Index e = 0; e < e_count; ++e) {
    const auto& edge = g.edges[static_cast<std::size_t>(e)];
    eg.src[static_cast<std::size_t>(e)] = edge.src;
    eg.dst[static_cast<std::size_t>(e)] = edge.dst;
    eg.r.row(e) = x.row(static_cast<Eigen::Index>(edge.dst)) - x.row(static_cast<Eigen::Index>(edge.src));
    const double d = eg.r.row(e).norm();
    eg.d(e) = d;
    eg.phi(e, 0) = d;
    for (int k = 0; k < c.rbf_count; ++k) {
      const double u = d - rbf_center(c, k);
      eg.phi(e, 1 + k) = std::exp(-u * u * inv_two_w2);
    }
    eg.phi(e, 1 + c.rbf_count + static_cast<int>(edge.kind)) = 1.0;
  }
  return eg;
}

// Pre-activations for a two-layer perceptron on [h_dst, h_src, phi].
Eigen::MatrixXd first_layer(const ConstMatrixMap& w1, const ConstMatrixMap& b1, int hidden, const EdgeGeometry& eg,
                            const Eigen::MatrixXd& h) {
  const Eigen::MatrixXd p = h * w1.leftCols(hidden).transpose();
  const Eigen::MatrixXd q = h * w1.middleCols(hidden, hidden).transpose();
  Eigen::MatrixXd a = eg.phi * w1.rightCols(w1.cols() - 2 * hidden).transpose();
  for (Eigen::Index e = 0; e < a.rows(); ++e) {
    a.row(e) += p.row(static_cast<Eigen::Index>(eg.dst[static_cast<std::size_t>(e)])) +
                q.row(static_cast<Eigen::Index>(eg.src[static_cast<std::size_t>(e)])) + b1.col(0).transpose();
  }
  return a;
}

struct HMessages {
  Eigen::MatrixXd a;      // E x H pre-activation
  Eigen::MatrixXd s;      // silu(a)
  Eigen::MatrixXd delta;  // N x H aggregated update
};

HMessages h_messages(const LayerWeights& w, int hidden, const EdgeGeometry& eg, const Eigen::MatrixXd& h) {
  HMessages m;
  m.a = first_layer(w.h_w1, w.h_b1, hidden, eg, h);
  m.s = m.a.unaryExpr(&silu);
  Eigen::MatrixXd msg = m.s * w.h_w2.transpose();
  m.delta = Eigen::MatrixXd::Zero(h.rows(), h.cols());
  for (Eigen::Index e = 0; e < msg.rows(); ++e) {
    m.delta.row(static_cast<Eigen::Index>(eg.dst[static_cast<std::size_t>(e)])) +=
        msg.row(e) + w.h_b2.col(0).transpose();
  }
  return m;
}

struct XMessages {
  Eigen::MatrixXd c;     // E x H pre-activation
  Eigen::MatrixXd q;     // silu(c)
  Eigen::VectorXd raw;   // unclipped gate
  Eigen::VectorXd gate;  // clipped gate
  Positions delta;       // N x 3
};

XMessages x_messages(const LayerWeights& w, const NetworkConfig& c, const EdgeGeometry& eg,
                     const Eigen::MatrixXd& h_new, const std::vector<bool>& ligand_mask) {
  XMessages m;
  m.c = first_layer(w.x_w1, w.x_b1, c.hidden, eg, h_new);
  m.q = m.c.unaryExpr(&silu);
  m.raw = m.q * w.x_w2.row(0).transpose();
  m.raw.array() += w.x_b2(0, 0);
  m.gate = m.raw.cwiseMax(-c.gate_clip).cwiseMin(c.gate_clip);
  m.delta = Positions::Zero(h_new.rows(), 3);
  for (Eigen::Index e = 0; e < m.gate.size(); ++e) {
    const std::size_t dst = eg.dst[static_cast<std::size_t>(e)];
    if (!ligand_mask[dst]) continue;
    m.delta.row(static_cast<Eigen::Index>(dst)) += eg.r.row(e) * m.gate(e);
  }
  return m;
}

struct LayerTape {
  EdgeGeometry eg;
  Eigen::MatrixXd h_in;
  Eigen::MatrixXd h_mid;  // after the h update, input to the gate
  HMessages hm;
  XMessages xm;
};

NodeState single_layer(const NetworkParams& params, int layer, const ComplexGraph& g, const NodeState& state,
                       LayerTape* tape) {
  const auto& c = params.config();
  if (state.h.rows() != static_cast<Eigen::Index>(g.node_count()) || state.h.cols() != c.hidden ||
      state.x.rows() != state.h.rows()) {
    throw ShapeMismatch("layer_forward: node state does not match graph");
  }
  const LayerWeights w = layer_weights(params, layer);
  EdgeGeometry eg = edge_geometry(c, g, state.x);
  HMessages hm = h_messages(w, c.hidden, eg, state.h);
  NodeState out;
  out.h = state.h + hm.delta;
  XMessages xm = x_messages(w, c, eg, out.h, g.ligand_mask);
  out.x = state.x + xm.delta;
  if (tape) {
    tape->eg = std::move(eg);
    tape->h_in = state.h;
    tape->h_mid = out.h;
    tape->hm = std::move(hm);
    tape->xm = std::move(xm);
  }
  return out;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    Eigen::RowVectorXd e = (logits.row(i).array() - m).exp();
    out.row(i) = e / e.sum();
  }
  return out;
}

Eigen::MatrixXd output_logits(const NetworkParams& params, const Eigen::MatrixXd& h_ligand) {
  const auto w = params.matrix(-1, "out_w");
  const auto b = params.matrix(-1, "out_b");
  Eigen::MatrixXd logits = h_ligand * w.transpose();
  logits.rowwise() += b.col(0).transpose();
  return logits;
}

void check_step(int t, int num_steps) {
  if (num_steps < 1 || t < 1 || t > num_steps) {
    throw BadRange("time step " + std::to_string(t) + " outside [1, " + std::to_string(num_steps) + "]");
  }
}

// Scatter-sums edge rows onto their dst (or src) node.
Eigen::MatrixXd gather_nodes(const Eigen::MatrixXd& per_edge, const std::vector<std::size_t>& index,
                             Eigen::Index nodes) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(nodes, per_edge.cols());
  for (Eigen::Index e = 0; e < per_edge.rows(); ++e) out.row(static_cast<Eigen::Index>(index[static_cast<std::size_t>(e)])) += per_edge.row(e);
  return out;
}

// Backward through the two-layer perceptron's first layer. Adds weight
// gradients and returns d/d(phi); node-state gradients go into g_h.
Eigen::MatrixXd first_layer_backward(const Eigen::MatrixXd& d_pre, const EdgeGeometry& eg, const Eigen::MatrixXd& h,
                                     const ConstMatrixMap& w1, int hidden, MatrixMap g_w1, MatrixMap g_b1,
                                     Eigen::MatrixXd& g_h) {
  const Eigen::Index n = h.rows();
  const Eigen::MatrixXd by_dst = gather_nodes(d_pre, eg.dst, n);
  const Eigen::MatrixXd by_src = gather_nodes(d_pre, eg.src, n);
  g_w1.leftCols(hidden) += by_dst.transpose() * h;
  g_w1.middleCols(hidden, hidden) += by_src.transpose() * h;
  g_w1.rightCols(w1.cols() - 2 * hidden) += d_pre.transpose() * eg.phi;
  g_b1.col(0) += d_pre.colwise().sum().transpose();
  g_h += by_dst * w1.leftCols(hidden) + by_src * w1.middleCols(hidden, hidden);
  return d_pre * w1.rightCols(w1.cols() - 2 * hidden);
}

// Backpropagates one layer. On entry g_h/g_x hold dL/d(outputs); on exit
// dL/d(inputs).
void layer_backward(const NetworkParams& params, NetworkParams& grad, int layer, const ComplexGraph& g,
                    const LayerTape& tape, Eigen::MatrixXd& g_h, Positions& g_x) {
  const auto& c = params.config();
  const int hidden = c.hidden;
  const LayerWeights w = layer_weights(params, layer);
  const auto& eg = tape.eg;
  const auto e_count = static_cast<Eigen::Index>(eg.dst.size());

  Eigen::MatrixXd g_r = Eigen::MatrixXd::Zero(e_count, 3);
  Eigen::VectorXd g_raw = Eigen::VectorXd::Zero(e_count);
  for (Eigen::Index e = 0; e < e_count; ++e) {
    const std::size_t dst = eg.dst[static_cast<std::size_t>(e)];
    if (!g.ligand_mask[dst]) continue;
    const auto gx_dst = g_x.row(static_cast<Eigen::Index>(dst));
    g_r.row(e) += gx_dst * tape.xm.gate(e);
    if (std::abs(tape.xm.raw(e)) < c.gate_clip) g_raw(e) = gx_dst.dot(eg.r.row(e));
  }

  // Coordinate gate.
  grad.matrix(layer, "x_w2").row(0) += (tape.xm.q.transpose() * g_raw).transpose();
  grad.matrix(layer, "x_b2")(0, 0) += g_raw.sum();
  Eigen::MatrixXd d_c = g_raw * w.x_w2.row(0);
  d_c.array() *= tape.xm.c.unaryExpr(&silu_grad).array();
  Eigen::MatrixXd g_h_mid = g_h;
  Eigen::MatrixXd g_phi = first_layer_backward(d_c, eg, tape.h_mid, w.x_w1, hidden, grad.matrix(layer, "x_w1"),
                                               grad.matrix(layer, "x_b1"), g_h_mid);

  // Hidden-state messages.
  Eigen::MatrixXd d_msg(e_count, hidden);
  for (Eigen::Index e = 0; e < e_count; ++e) {
    d_msg.row(e) = g_h_mid.row(static_cast<Eigen::Index>(eg.dst[static_cast<std::size_t>(e)]));
  }
  grad.matrix(layer, "h_w2") += d_msg.transpose() * tape.hm.s;
  grad.matrix(layer, "h_b2").col(0) += d_msg.colwise().sum().transpose();
  Eigen::MatrixXd d_a = d_msg * w.h_w2;
  d_a.array() *= tape.hm.a.unaryExpr(&silu_grad).array();
  Eigen::MatrixXd g_h_in = g_h_mid;
  g_phi += first_layer_backward(d_a, eg, tape.h_in, w.h_w1, hidden, grad.matrix(layer, "h_w1"),
                                grad.matrix(layer, "h_b1"), g_h_in);

  // Distances feed the edge features.
  const double w_rbf = rbf_width(c);
  for (Eigen::Index e = 0; e < e_count; ++e) {
    const double d = eg.d(e);
    double g_d = g_phi(e, 0);
    for (int k = 0; k < c.rbf_count; ++k) {
      const double u = d - rbf_center(c, k);
      g_d += g_phi(e, 1 + k) * eg.phi(e, 1 + k) * (-u / (w_rbf * w_rbf));
    }
    if (d > 0.0) g_r.row(e) += (g_d / d) * eg.r.row(e);
  }
  for (Eigen::Index e = 0; e < e_count; ++e) {
    g_x.row(static_cast<Eigen::Index>(eg.dst[static_cast<std::size_t>(e)])) += g_r.row(e);
    g_x.row(static_cast<Eigen::Index>(eg.src[static_cast<std::size_t>(e)])) -= g_r.row(e);
  }
  g_h = std::move(g_h_in);
}

}  // namespace

// --- parameters --------------------------------------------------------------

NetworkParams::NetworkParams(NetworkConfig config) : config_(config) {
  if (config_.layers < 1 || config_.hidden < 1 || config_.ligand_types < 2 || config_.protein_types < 1 ||
      config_.rbf_count < 1 || config_.time_features < 2 || config_.time_features % 2 != 0) {
    throw BadRange("network configuration out of range");
  }
  const int h = config_.hidden;
  const int in = 2 * h + config_.edge_features();
  add_tensor(-1, "lig_embed", h, config_.ligand_types);
  add_tensor(-1, "lig_embed_b", h, 1);
  add_tensor(-1, "prot_embed", h, config_.protein_types);
  add_tensor(-1, "prot_embed_b", h, 1);
  add_tensor(-1, "time_embed", h, config_.time_features);
  add_tensor(-1, "out_w", config_.ligand_types, h);
  add_tensor(-1, "out_b", config_.ligand_types, 1);
  for (int l = 0; l < config_.layers; ++l) {
    add_tensor(l, "h_w1", h, in);
    add_tensor(l, "h_b1", h, 1);
    add_tensor(l, "h_w2", h, h);
    add_tensor(l, "h_b2", h, 1);
    add_tensor(l, "x_w1", h, in);
    add_tensor(l, "x_b1", h, 1);
    add_tensor(l, "x_w2", 1, h);
    add_tensor(l, "x_b2", 1, 1);
  }
}

void NetworkParams::add_tensor(int layer, std::string name, Eigen::Index rows, Eigen::Index cols) {
  Tensor t{layer, std::move(name), rows, cols, values_.size()};
  values_.resize(values_.size() + t.size(), 0.0);
  tensors_.push_back(std::move(t));
}

const NetworkParams::Tensor& NetworkParams::tensor(int layer, const std::string& name) const {
  for (const auto& t : tensors_) {
    if (t.layer == layer && t.name == name) return t;
  }
  throw Error("no tensor '" + name + "' in layer " + std::to_string(layer));
}

MatrixMap NetworkParams::matrix(int layer, const std::string& name) {
  const auto& t = tensor(layer, name);
  return MatrixMap(values_.data() + t.offset, t.rows, t.cols);
}

ConstMatrixMap NetworkParams::matrix(int layer, const std::string& name) const {
  const auto& t = tensor(layer, name);
  return ConstMatrixMap(values_.data() + t.offset, t.rows, t.cols);
}

NetworkParams NetworkParams::random(const NetworkConfig& config, Rng& rng) {
  NetworkParams p(config);
  for (const auto& t : p.tensors_) {
    if (t.cols == 1 && t.name != "x_b2") continue;  // biases start at zero
    double scale = 1.0 / std::sqrt(static_cast<double>(t.cols));
    // Small output weights keep the residual updates near identity at init.
    if (t.name == "h_w2") scale *= 0.1;
    if (t.name == "x_w2") scale *= 0.01;
    if (t.name == "x_b2") scale = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) p.values_[t.offset + i] = scale * rng.normal();
  }
  return p;
}

// --- forward -----------------------------------------------------------------

Eigen::VectorXd time_features(const NetworkConfig& config, int t, int num_steps) {
  const double tau = static_cast<double>(t) / static_cast<double>(num_steps);
  const int half = config.time_features / 2;
  Eigen::VectorXd out(config.time_features);
  for (int k = 0; k < half; ++k) {
    const double w = std::numbers::pi * std::ldexp(1.0, k);
    out(k) = std::sin(w * tau);
    out(half + k) = std::cos(w * tau);
  }
  return out;
}

NodeState embed(const NetworkParams& params, const ComplexGraph& g, int t, int num_steps) {
  check_step(t, num_steps);
  const auto& c = params.config();
  if (g.protein_types.cols() != c.protein_types || g.ligand_types.cols() != c.ligand_types) {
    throw ShapeMismatch("graph type widths do not match the network configuration");
  }
  const Eigen::VectorXd time = params.matrix(-1, "time_embed") * time_features(c, t, num_steps);
  NodeState s;
  s.x = g.positions;
  s.h.resize(static_cast<Eigen::Index>(g.node_count()), c.hidden);
  const auto np = static_cast<Eigen::Index>(g.n_protein);
  const auto nl = static_cast<Eigen::Index>(g.n_ligand);
  s.h.topRows(np) = g.protein_types * params.matrix(-1, "prot_embed").transpose();
  s.h.topRows(np).rowwise() += (params.matrix(-1, "prot_embed_b").col(0) + time).transpose();
  s.h.bottomRows(nl) = g.ligand_types * params.matrix(-1, "lig_embed").transpose();
  s.h.bottomRows(nl).rowwise() += (params.matrix(-1, "lig_embed_b").col(0) + time).transpose();
  return s;
}

NodeState layer_forward(const NetworkParams& params, int layer, const ComplexGraph& g, const NodeState& state) {
  return single_layer(params, layer, g, state, nullptr);
}

PairState composed_layer_forward(const NetworkParams& params, int layer, const graph::DualGraphPair& pair,
                                 const PairState& state) {
  const auto& c = params.config();
  const auto& g1 = pair.first;
  const auto& g2 = pair.second;
  if (g1.n_ligand != g2.n_ligand || state.first.h.rows() != static_cast<Eigen::Index>(g1.node_count()) ||
      state.second.h.rows() != static_cast<Eigen::Index>(g2.node_count()) || state.first.x.rows() != state.first.h.rows() ||
      state.second.x.rows() != state.second.h.rows()) {
    throw ShapeMismatch("composed_layer_forward: node states do not match the graph pair");
  }
  const auto nl = static_cast<Eigen::Index>(g1.n_ligand);
  const LayerWeights w = layer_weights(params, layer);

  const EdgeGeometry eg1 = edge_geometry(c, g1, state.first.x);
  const EdgeGeometry eg2 = edge_geometry(c, g2, state.second.x);
  const HMessages hm1 = h_messages(w, c.hidden, eg1, state.first.h);
  const HMessages hm2 = h_messages(w, c.hidden, eg2, state.second.h);

  PairState out;
  out.first.h = state.first.h + hm1.delta;
  out.second.h = state.second.h + hm2.delta;
  const Eigen::MatrixXd h_lig =
      state.first.h.bottomRows(nl) + (hm1.delta.bottomRows(nl) + hm2.delta.bottomRows(nl)) * 0.5;
  out.first.h.bottomRows(nl) = h_lig;
  out.second.h.bottomRows(nl) = h_lig;

  const XMessages xm1 = x_messages(w, c, eg1, out.first.h, g1.ligand_mask);
  const XMessages xm2 = x_messages(w, c, eg2, out.second.h, g2.ligand_mask);
  out.first.x = state.first.x;
  out.second.x = state.second.x;
  const Positions x_lig =
      state.first.x.bottomRows(nl) + (xm1.delta.bottomRows(nl) + xm2.delta.bottomRows(nl)) * 0.5;
  out.first.x.bottomRows(nl) = x_lig;
  out.second.x.bottomRows(nl) = x_lig;
  return out;
}

Prediction predict(const NetworkParams& params, const ComplexGraph& g, int t, int num_steps) {
  NodeState s = embed(params, g, t, num_steps);
  for (int l = 0; l < params.config().layers; ++l) s = single_layer(params, l, g, s, nullptr);
  const auto nl = static_cast<Eigen::Index>(g.n_ligand);
  return {s.x.bottomRows(nl), softmax_rows(output_logits(params, s.h.bottomRows(nl)))};
}

Prediction predict(const NetworkParams& params, const graph::DualGraphPair& pair, int t, int num_steps) {
  PairState s{embed(params, pair.first, t, num_steps), embed(params, pair.second, t, num_steps)};
  for (int l = 0; l < params.config().layers; ++l) s = composed_layer_forward(params, l, pair, s);
  const auto nl = static_cast<Eigen::Index>(pair.first.n_ligand);
  return {s.first.x.bottomRows(nl), softmax_rows(output_logits(params, s.first.h.bottomRows(nl)))};
}

// --- loss and gradient -------------------------------------------------------

LossBreakdown loss_and_gradient(const NetworkParams& params, const ComplexGraph& g, int t, int num_steps,
                                const Positions& x0, const Eigen::MatrixXd& v0, double lambda_v,
                                NetworkParams* grad) {
  const auto& c = params.config();
  const auto nl = static_cast<Eigen::Index>(g.n_ligand);
  if (nl == 0 || x0.rows() != nl || v0.rows() != nl || v0.cols() != c.ligand_types) {
    throw ShapeMismatch("loss: targets do not match the ligand block");
  }
  if (grad && !(grad->config() == c)) throw ShapeMismatch("loss: gradient buffer has a different layout");

  std::vector<LayerTape> tape(grad ? static_cast<std::size_t>(c.layers) : 0);
  NodeState s = embed(params, g, t, num_steps);
  for (int l = 0; l < c.layers; ++l) s = single_layer(params, l, g, s, grad ? &tape[static_cast<std::size_t>(l)] : nullptr);

  const Eigen::MatrixXd h_lig = s.h.bottomRows(nl);
  const Eigen::MatrixXd probs = softmax_rows(output_logits(params, h_lig));
  const Positions diff = s.x.bottomRows(nl) - x0;
  const double inv_n = 1.0 / static_cast<double>(nl);

  LossBreakdown out;
  out.position = diff.squaredNorm() * inv_n;
  double ce = 0.0;
  for (Eigen::Index i = 0; i < nl; ++i) {
    for (Eigen::Index k = 0; k < v0.cols(); ++k) {
      if (v0(i, k) > 0.0) ce -= v0(i, k) * std::log(probs(i, k));
    }
  }
  out.type = ce * inv_n;
  out.total = out.position + lambda_v * out.type;
  if (!grad) return out;

  // Output head.
  const Eigen::MatrixXd g_logits = (probs - v0) * (lambda_v * inv_n);
  grad->matrix(-1, "out_w") += g_logits.transpose() * h_lig;
  grad->matrix(-1, "out_b").col(0) += g_logits.colwise().sum().transpose();

  Eigen::MatrixXd g_h = Eigen::MatrixXd::Zero(s.h.rows(), s.h.cols());
  g_h.bottomRows(nl) = g_logits * params.matrix(-1, "out_w");
  Positions g_x = Positions::Zero(s.x.rows(), 3);
  g_x.bottomRows(nl) = diff * (2.0 * inv_n);

  for (int l = c.layers - 1; l >= 0; --l) {
    layer_backward(params, *grad, l, g, tape[static_cast<std::size_t>(l)], g_h, g_x);
  }

  // Embeddings.
  const auto np = static_cast<Eigen::Index>(g.n_protein);
  grad->matrix(-1, "lig_embed") += g_h.bottomRows(nl).transpose() * g.ligand_types;
  grad->matrix(-1, "lig_embed_b").col(0) += g_h.bottomRows(nl).colwise().sum().transpose();
  grad->matrix(-1, "prot_embed") += g_h.topRows(np).transpose() * g.protein_types;
  grad->matrix(-1, "prot_embed_b").col(0) += g_h.topRows(np).colwise().sum().transpose();
  grad->matrix(-1, "time_embed") +=
      g_h.colwise().sum().transpose() * time_features(c, t, num_steps).transpose();
  return out;
}

}  // namespace dualgen::egnn

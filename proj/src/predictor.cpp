#include "arflow/predictor.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "arflow/error.hpp"

namespace arflow {

const char* prediction_mode_name(PredictionMode mode) { return mode == PredictionMode::kX1 ? "x1" : "v"; }

PredictionMode parse_prediction_mode(const std::string& name) {
  if (name == "x1") return PredictionMode::kX1;
  if (name == "v") return PredictionMode::kV;
  throw Error(ErrorCode::kInvalidConfig, "prediction mode must be x1 or v, got '" + name + "'");
}

void PredictorConfig::validate() const {
  if (layers < 1 || width < 2 || heads < 1 || ffn_width < 1) {
    throw Error(ErrorCode::kInvalidConfig, "layers, width, heads, ffn_width must be positive");
  }
  if (width % heads != 0) throw Error(ErrorCode::kInvalidConfig, "width must be divisible by heads");
  if (width % 2 != 0) throw Error(ErrorCode::kInvalidConfig, "width must be even");
  if (cond_vocab < 0) throw Error(ErrorCode::kInvalidConfig, "cond_vocab must be >= 0");
  if (frame_dim < 1) throw Error(ErrorCode::kInvalidConfig, "frame_dim must be >= 1");
  if (max_frames < 1) throw Error(ErrorCode::kInvalidConfig, "max_frames must be >= 1");
}

void ParameterSet::add(std::string name, Eigen::MatrixXd value) {
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
}

int ParameterSet::index(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<int>(i);
  }
  throw std::out_of_range("no parameter named " + name);
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += static_cast<std::size_t>(v.size());
  return n;
}

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet out;
  for (std::size_t i = 0; i < size(); ++i) {
    out.add(names_[i], Eigen::MatrixXd::Zero(values_[i].rows(), values_[i].cols()));
  }
  return out;
}

bool ParameterSet::all_finite() const {
  for (const auto& v : values_) {
    if (!v.allFinite()) return false;
  }
  return true;
}

namespace {

Eigen::MatrixXd gaussian(int rows, int cols, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = dist(rng);
  }
  return m;
}

Eigen::MatrixXd sinusoid_table(int rows, int width) {
  Eigen::MatrixXd m(rows, width);
  const int half = width / 2;
  for (int p = 0; p < rows; ++p) {
    for (int i = 0; i < half; ++i) {
      const double freq = std::exp(-std::log(10000.0) * i / half);
      m(p, i) = std::sin(p * freq);
      m(p, half + i) = std::cos(p * freq);
    }
  }
  return m;
}

std::string layer_name(int l, const char* suffix) { return "l" + std::to_string(l) + "." + suffix; }

}  // namespace

PredictorParams init_predictor(const PredictorConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  const int d = config.width;
  const int f = config.ffn_width;
  const int in = config.frame_dim;
  const double sd = 1.0 / std::sqrt(static_cast<double>(d));
  PredictorParams p;
  p.config = config;
  ParameterSet& t = p.tensors;
  t.add("in.w", gaussian(in, d, 1.0 / std::sqrt(static_cast<double>(in)), rng));
  t.add("in.b", Eigen::MatrixXd::Zero(1, d));
  t.add("pos", 0.1 * sinusoid_table(config.max_frames, d));
  t.add("time.w1", gaussian(d, d, sd, rng));
  t.add("time.b1", Eigen::MatrixXd::Zero(1, d));
  t.add("time.w2", gaussian(d, d, sd, rng));
  t.add("time.b2", Eigen::MatrixXd::Zero(1, d));
  t.add("cond", Eigen::MatrixXd::Zero(config.cond_vocab + 1, d));
  for (int l = 0; l < config.layers; ++l) {
    t.add(layer_name(l, "ln1.g"), Eigen::MatrixXd::Ones(1, d));
    t.add(layer_name(l, "ln1.b"), Eigen::MatrixXd::Zero(1, d));
    t.add(layer_name(l, "wqkv"), gaussian(d, 3 * d, sd, rng));
    t.add(layer_name(l, "bqkv"), Eigen::MatrixXd::Zero(1, 3 * d));
    t.add(layer_name(l, "wo"), gaussian(d, d, sd / std::sqrt(2.0 * config.layers), rng));
    t.add(layer_name(l, "bo"), Eigen::MatrixXd::Zero(1, d));
    t.add(layer_name(l, "ln2.g"), Eigen::MatrixXd::Ones(1, d));
    t.add(layer_name(l, "ln2.b"), Eigen::MatrixXd::Zero(1, d));
    t.add(layer_name(l, "w1"), gaussian(d, f, sd, rng));
    t.add(layer_name(l, "b1"), Eigen::MatrixXd::Zero(1, f));
    t.add(layer_name(l, "w2"), gaussian(f, d, 1.0 / std::sqrt(f * 2.0 * config.layers), rng));
    t.add(layer_name(l, "b2"), Eigen::MatrixXd::Zero(1, d));
  }
  t.add("out.ln.g", Eigen::MatrixXd::Ones(1, d));
  t.add("out.ln.b", Eigen::MatrixXd::Zero(1, d));
  t.add("out.w", gaussian(d, in, 0.1 * sd, rng));
  t.add("out.b", Eigen::MatrixXd::Zero(1, in));
  return p;
}

namespace model_detail {

int condition_row(const PredictorConfig& config, std::optional<int> cond) {
  if (!cond) return config.cond_vocab;
  if (*cond < 0 || *cond >= config.cond_vocab) {
    throw Error(ErrorCode::kUnknownCondition, "condition " + std::to_string(*cond) + " outside vocabulary of " +
                                                  std::to_string(config.cond_vocab));
  }
  return *cond;
}

void check_input(const PredictorConfig& config, const MotionTensor& x_t) {
  if (x_t.cols() != config.frame_dim || x_t.rows() < 1 || x_t.rows() > config.max_frames) {
    throw Error(ErrorCode::kDimensionMismatch,
                "predictor input is " + std::to_string(x_t.rows()) + "x" + std::to_string(x_t.cols()) +
                    ", expected at most " + std::to_string(config.max_frames) + "x" +
                    std::to_string(config.frame_dim));
  }
}

Eigen::RowVectorXd time_features(double t, int width, double time_scale) {
  Eigen::RowVectorXd e(width);
  const int half = width / 2;
  for (int i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * i / half);
    e(i) = std::sin(time_scale * t * freq);
    e(half + i) = std::cos(time_scale * t * freq);
  }
  return e;
}

ForwardNodes build_forward(ad::Graph& g, const PredictorParams& params, const std::vector<ad::Var>& leaves,
                           const MotionTensor& x_t, double t, int cond_row) {
  const PredictorConfig& cfg = params.config;
  const ParameterSet& ps = params.tensors;
  auto P = [&](const std::string& name) { return leaves[ps.index(name)]; };
  const int h = static_cast<int>(x_t.rows());
  const int d = cfg.width;
  const int dh = d / cfg.heads;

  // Frame tokens: linear projection plus positional embedding.
  ad::Var frames = g.add_row(g.matmul(g.constant(x_t), P("in.w")), P("in.b"));
  frames = g.add(frames, g.rows(P("pos"), 0, h));

  // Leading token z: time features through a two-layer map, plus condition embedding.
  ad::Var tf = g.constant(time_features(t, d, cfg.time_scale));
  ad::Var z = g.add_row(g.matmul(g.gelu(g.add_row(g.matmul(tf, P("time.w1")), P("time.b1"))), P("time.w2")),
                        P("time.b2"));
  z = g.add(z, g.rows(P("cond"), cond_row, 1));

  ad::Var tokens = g.vconcat(z, frames);
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
  for (int l = 0; l < cfg.layers; ++l) {
    const auto name = [l](const char* s) { return layer_name(l, s); };
    ad::Var a = g.layer_norm(tokens, P(name("ln1.g")), P(name("ln1.b")));
    ad::Var qkv = g.add_row(g.matmul(a, P(name("wqkv"))), P(name("bqkv")));
    std::vector<ad::Var> heads;
    heads.reserve(cfg.heads);
    for (int hd = 0; hd < cfg.heads; ++hd) {
      ad::Var q = g.cols(qkv, hd * dh, dh);
      ad::Var k = g.cols(qkv, d + hd * dh, dh);
      ad::Var v = g.cols(qkv, 2 * d + hd * dh, dh);
      ad::Var att = g.softmax_rows(g.scale(g.matmul_nt(q, k), inv_sqrt_dh), cfg.causal);
      heads.push_back(g.matmul(att, v));
    }
    ad::Var mixed = heads.size() == 1 ? heads.front() : g.hconcat(heads);
    tokens = g.add(tokens, g.add_row(g.matmul(mixed, P(name("wo"))), P(name("bo"))));
    ad::Var b = g.layer_norm(tokens, P(name("ln2.g")), P(name("ln2.b")));
    ad::Var ff = g.gelu(g.add_row(g.matmul(b, P(name("w1"))), P(name("b1"))));
    tokens = g.add(tokens, g.add_row(g.matmul(ff, P(name("w2"))), P(name("b2"))));
  }
  ad::Var hidden = g.layer_norm(g.rows(tokens, 1, h), P("out.ln.g"), P("out.ln.b"));
  ad::Var out = g.add_row(g.matmul(hidden, P("out.w")), P("out.b"));
  return {out, hidden};
}

}  // namespace model_detail

namespace {

std::vector<ad::Var> constant_leaves(ad::Graph& g, const ParameterSet& ps) {
  std::vector<ad::Var> leaves;
  leaves.reserve(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) leaves.push_back(g.constant(ps.value(i)));
  return leaves;
}

}  // namespace

MotionTensor predict(const PredictorParams& params, const MotionTensor& x_t, double t, std::optional<int> cond) {
  model_detail::check_input(params.config, x_t);
  const int row = model_detail::condition_row(params.config, cond);
  ad::Graph g;
  const auto leaves = constant_leaves(g, params.tensors);
  const auto nodes = model_detail::build_forward(g, params, leaves, x_t, t, row);
  return g.value(nodes.output);
}

Eigen::RowVectorXd predictor_latent(const PredictorParams& params, const MotionTensor& motion, double t,
                                    std::optional<int> cond) {
  model_detail::check_input(params.config, motion);
  const int row = model_detail::condition_row(params.config, cond);
  ad::Graph g;
  const auto leaves = constant_leaves(g, params.tensors);
  const auto nodes = model_detail::build_forward(g, params, leaves, motion, t, row);
  return g.value(nodes.hidden).colwise().mean();
}

}  // namespace arflow

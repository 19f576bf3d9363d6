#include "arflow/training.hpp"

#include <cmath>
#include <random>
#include <string>

#include "arflow/error.hpp"
#include "arflow/flowpath.hpp"
#include "arflow/parallel.hpp"

namespace arflow {

void TrainConfig::validate() const {
  if (steps < 1) throw Error(ErrorCode::kInvalidConfig, "steps must be >= 1");
  if (batch_size < 1) throw Error(ErrorCode::kInvalidConfig, "batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::kInvalidConfig, "learning_rate must be > 0");
  if (!(lambda_inter >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "lambda_inter must be >= 0");
  if (!(sigma_min >= 0.0 && sigma_min < 1.0)) throw Error(ErrorCode::kInvalidConfig, "sigma_min must be in [0, 1)");
  if (t_grid < 1) throw Error(ErrorCode::kInvalidConfig, "t_grid must be >= 1");
  if (!(cond_dropout_prob >= 0.0 && cond_dropout_prob <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "cond_dropout_prob must be in [0, 1]");
  }
}

MotionTensor prediction_to_x1(const MotionTensor& raw, const MotionTensor& x_t, double t, PredictionMode mode,
                              double sigma_min) {
  if (mode == PredictionMode::kX1) return raw;
  return x1_from_v(raw, x_t, FlowTime(t), sigma_min);
}

namespace {

struct ExampleResult {
  LossBreakdown loss;
  std::vector<Eigen::MatrixXd> grad;
};

ExampleResult example_loss(const PredictorParams& params, const TrainingExample& ex, const TrainConfig& cfg,
                           const Skeleton& skel, bool with_grad) {
  const PredictorConfig& pc = params.config;
  model_detail::check_input(pc, ex.x0);
  if (ex.x1.rows() != ex.x0.rows() || ex.x1.cols() != ex.x0.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "actor and reactor shapes differ");
  }
  const int row = model_detail::condition_row(pc, ex.cond);
  const MotionTensor x_t = interpolate(ex.x0, ex.x1, FlowTime(ex.t), cfg.sigma_min);

  ad::Graph g;
  std::vector<ad::Var> leaves;
  leaves.reserve(params.tensors.size());
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    leaves.push_back(with_grad ? g.leaf(params.tensors.value(i)) : g.constant(params.tensors.value(i)));
  }
  const auto nodes = model_detail::build_forward(g, params, leaves, x_t, ex.t, row);
  const MotionTensor& raw = g.value(nodes.output);
  if (!raw.allFinite()) throw Error(ErrorCode::kNonFiniteLoss, "non-finite network output");

  const MotionTensor target =
      pc.prediction_mode == PredictionMode::kX1 ? ex.x1 : target_velocity(ex.x0, ex.x1, cfg.sigma_min);
  const ad::Var fm = g.mse(nodes.output, target);
  std::vector<ad::Var> terms{fm};

  ExampleResult out;
  out.loss.fm = g.scalar(fm);
  if (cfg.lambda_inter != 0.0) {
    const MotionTensor x1_hat = prediction_to_x1(raw, x_t, ex.t, pc.prediction_mode, cfg.sigma_min);
    InteractionGradient ig = interaction_loss_grad(x1_hat, ex.x1, ex.x0, skel);
    if (pc.prediction_mode == PredictionMode::kV) ig.grad *= path_x0_weight(ex.t, cfg.sigma_min);
    out.loss.inter = ig.loss;
    terms.push_back(g.scale(g.external_loss(nodes.output, ig.loss, std::move(ig.grad)), cfg.lambda_inter));
  }
  const ad::Var total = g.sum(terms);
  out.loss.total = g.scalar(total);
  if (!std::isfinite(out.loss.total)) {
    throw Error(ErrorCode::kNonFiniteLoss, "non-finite loss in forward pass");
  }
  if (with_grad) {
    g.backward(total);
    out.grad.reserve(leaves.size());
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      const auto& gr = g.grad(leaves[i]);
      const auto& v = params.tensors.value(i);
      out.grad.push_back(gr.size() == 0 ? Eigen::MatrixXd::Zero(v.rows(), v.cols()) : gr);
    }
  }
  return out;
}

std::vector<ExampleResult> run_batch(const PredictorParams& params, const std::vector<TrainingExample>& batch,
                                     const TrainConfig& cfg, const Skeleton& skel, bool with_grad) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyInput, "empty training batch");
  std::vector<ExampleResult> results(batch.size());
  parallel_for(static_cast<int>(batch.size()),
               [&](int i) { results[i] = example_loss(params, batch[i], cfg, skel, with_grad); });
  return results;
}

LossBreakdown mean_loss(const std::vector<ExampleResult>& results) {
  LossBreakdown m;
  for (const auto& r : results) {
    m.total += r.loss.total;
    m.fm += r.loss.fm;
    m.inter += r.loss.inter;
  }
  const double n = static_cast<double>(results.size());
  m.total /= n;
  m.fm /= n;
  m.inter /= n;
  return m;
}

}  // namespace

LossAndGradient grad_loss(const PredictorParams& params, const std::vector<TrainingExample>& batch,
                          const TrainConfig& cfg, const Skeleton& skel) {
  const auto results = run_batch(params, batch, cfg, skel, true);
  LossAndGradient out;
  out.loss = mean_loss(results);
  out.grad = params.tensors.zeros_like();
  const double inv_n = 1.0 / static_cast<double>(results.size());
  for (const auto& r : results) {
    for (std::size_t i = 0; i < r.grad.size(); ++i) out.grad.value(i) += r.grad[i];
  }
  for (std::size_t i = 0; i < out.grad.size(); ++i) out.grad.value(i) *= inv_n;
  return out;
}

LossBreakdown batch_loss(const PredictorParams& params, const std::vector<TrainingExample>& batch,
                         const TrainConfig& cfg, const Skeleton& skel) {
  return mean_loss(run_batch(params, batch, cfg, skel, false));
}

namespace {

void check_dataset(const std::vector<PairedMotion>& dataset, const PredictorConfig& pc, const Skeleton& skel) {
  if (dataset.empty()) throw Error(ErrorCode::kEmptyInput, "training dataset is empty");
  if (pc.frame_dim != skel.frame_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "predictor frame_dim does not match the skeleton");
  }
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& s = dataset[i];
    if (s.actor.rows() != s.reactor.rows() || s.actor.cols() != s.reactor.cols() ||
        s.actor.cols() != skel.frame_dim() || s.actor.rows() < 1 || s.actor.rows() > pc.max_frames) {
      throw Error(ErrorCode::kDimensionMismatch, "training pair " + std::to_string(i) + " has inconsistent shape");
    }
  }
}

}  // namespace

TrainResult train(const std::vector<PairedMotion>& dataset, const PredictorConfig& predictor_cfg,
                  const TrainConfig& cfg, const Skeleton& skel, const StepCallback& on_step) {
  predictor_cfg.validate();
  cfg.validate();
  skel.validate();
  check_dataset(dataset, predictor_cfg, skel);

  std::mt19937_64 rng(cfg.seed);
  TrainResult result;
  result.params = init_predictor(predictor_cfg, rng());
  ParameterSet& theta = result.params.tensors;
  ParameterSet m = theta.zeros_like();
  ParameterSet v = theta.zeros_like();
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;

  std::uniform_int_distribution<std::size_t> pick(0, dataset.size() - 1);
  std::uniform_int_distribution<int> grid(0, cfg.t_grid - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution drop(cfg.cond_dropout_prob);

  result.history.reserve(cfg.steps);
  std::vector<TrainingExample> batch(cfg.batch_size);
  for (int step = 0; step < cfg.steps; ++step) {
    for (auto& ex : batch) {
      const PairedMotion& s = dataset[pick(rng)];
      ex.x0 = s.actor;
      ex.x1 = s.reactor;
      ex.t = cfg.continuous_time ? unit(rng) : static_cast<double>(grid(rng)) / cfg.t_grid;
      const bool dropped = drop(rng);
      ex.cond = (dropped || predictor_cfg.cond_vocab == 0) ? std::nullopt : s.cond;
    }
    LossAndGradient lg;
    try {
      lg = grad_loss(result.params, batch, cfg, skel);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kNonFiniteLoss) {
        throw Error(ErrorCode::kNonFiniteLoss, "training diverged at step " + std::to_string(step));
      }
      throw;
    }
    if (!lg.grad.all_finite()) {
      throw Error(ErrorCode::kNonFiniteLoss, "non-finite gradient at step " + std::to_string(step));
    }

    const double bc1 = 1.0 - std::pow(kBeta1, step + 1);
    const double bc2 = 1.0 - std::pow(kBeta2, step + 1);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const Eigen::MatrixXd& gr = lg.grad.value(i);
      m.value(i) = kBeta1 * m.value(i) + (1.0 - kBeta1) * gr;
      v.value(i) = kBeta2 * v.value(i) + (1.0 - kBeta2) * gr.cwiseProduct(gr);
      theta.value(i).array() -=
          cfg.learning_rate * (m.value(i).array() / bc1) / ((v.value(i).array() / bc2).sqrt() + kEps);
    }
    result.history.push_back({step, lg.loss});
    if (on_step) on_step(result.history.back());
  }
  return result;
}

}  // namespace arflow

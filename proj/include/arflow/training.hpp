#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "arflow/motion.hpp"
#include "arflow/predictor.hpp"
#include "arflow/skeleton.hpp"

namespace arflow {

struct TrainConfig {
  int steps = 10000;
  int batch_size = 16;
  double learning_rate = 1e-3;
  double lambda_inter = 1.0;
  double sigma_min = 1e-4;
  int t_grid = 1000;
  /// Draw t from U[0, 1) instead of the t_grid-point grid.
  bool continuous_time = false;
  double cond_dropout_prob = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

/// One (action, reaction, label) training pair.
struct PairedMotion {
  MotionTensor actor;
  MotionTensor reactor;
  std::optional<int> cond;
};

/// A pair with its flow time and post-dropout condition already drawn.
struct TrainingExample {
  MotionTensor x0;
  MotionTensor x1;
  std::optional<int> cond;
  double t = 0.0;
};

struct LossBreakdown {
  double total = 0.0;
  double fm = 0.0;
  double inter = 0.0;
};

struct LossAndGradient {
  LossBreakdown loss;  // batch means
  ParameterSet grad;
};

/// Batch-mean of L_fm + lambda_inter * L_inter and its gradient. Per-example
/// work may run on several threads; the reduction is in example order.
/// Throws NonFiniteLoss when any forward value is non-finite.
LossAndGradient grad_loss(const PredictorParams& params, const std::vector<TrainingExample>& batch,
                          const TrainConfig& cfg, const Skeleton& skel);

/// Loss only, for finite-difference checks.
LossBreakdown batch_loss(const PredictorParams& params, const std::vector<TrainingExample>& batch,
                         const TrainConfig& cfg, const Skeleton& skel);

struct StepRecord {
  int step = 0;
  LossBreakdown loss;
};

struct TrainResult {
  PredictorParams params;
  std::vector<StepRecord> history;
};

using StepCallback = std::function<void(const StepRecord&)>;

/// Adam on the combined objective. Seed-deterministic. Throws NonFiniteLoss
/// whose message names the step index.
TrainResult train(const std::vector<PairedMotion>& dataset, const PredictorConfig& predictor_cfg,
                  const TrainConfig& train_cfg, const Skeleton& skel, const StepCallback& on_step = {});

/// Converts raw network output to an endpoint estimate: identity in x1 mode,
/// x1_from_v in v mode.
MotionTensor prediction_to_x1(const MotionTensor& raw, const MotionTensor& x_t, double t, PredictionMode mode,
                              double sigma_min);

}  // namespace arflow

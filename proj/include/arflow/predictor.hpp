#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "arflow/autodiff.hpp"
#include "arflow/motion.hpp"

namespace arflow {

enum class PredictionMode { kX1, kV };

const char* prediction_mode_name(PredictionMode mode);
PredictionMode parse_prediction_mode(const std::string& name);

struct PredictorConfig {
  int layers = 2;
  int width = 64;
  int heads = 2;
  int ffn_width = 128;
  bool causal = true;
  int cond_vocab = 0;  // 0 means unconditioned; row cond_vocab of the table is the null token
  PredictionMode prediction_mode = PredictionMode::kX1;
  int frame_dim = 0;
  int max_frames = 16;
  /// Scale applied to t before the sinusoidal embedding.
  double time_scale = 1000.0;

  /// Throws InvalidConfig.
  void validate() const;
  bool operator==(const PredictorConfig&) const = default;
};

/// Ordered named arrays. Order is fixed by the config, which keeps the
/// optimizer state and the serialized file aligned.
class ParameterSet {
 public:
  void add(std::string name, Eigen::MatrixXd value);
  int index(const std::string& name) const;
  const Eigen::MatrixXd& at(const std::string& name) const { return values_[index(name)]; }
  Eigen::MatrixXd& at(const std::string& name) { return values_[index(name)]; }

  std::size_t size() const { return values_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  const Eigen::MatrixXd& value(std::size_t i) const { return values_[i]; }
  Eigen::MatrixXd& value(std::size_t i) { return values_[i]; }
  std::size_t scalar_count() const;

  /// Same names and shapes, all zero.
  ParameterSet zeros_like() const;
  bool all_finite() const;
  bool operator==(const ParameterSet&) const = default;

 private:
  std::vector<std::string> names_;
  std::vector<Eigen::MatrixXd> values_;
};

struct PredictorParams {
  PredictorConfig config;
  ParameterSet tensors;
};

/// Seeded initialization. Positional table starts as sinusoids.
PredictorParams init_predictor(const PredictorConfig& config, std::uint64_t seed);

/// Raw network output for x_t at flow time t: an endpoint estimate in x1
/// mode, a velocity in v mode. Throws DimensionMismatch / UnknownCondition.
MotionTensor predict(const PredictorParams& params, const MotionTensor& x_t, double t, std::optional<int> cond);

/// Mean over frames of the final normalized hidden state (1 x width).
Eigen::RowVectorXd predictor_latent(const PredictorParams& params, const MotionTensor& motion, double t,
                                    std::optional<int> cond);

namespace model_detail {

/// Differentiable forward pass. `leaves[i]` is the graph node of tensors.value(i).
struct ForwardNodes {
  ad::Var output;  // H x frame_dim
  ad::Var hidden;  // H x width, final normalized frame tokens
};
ForwardNodes build_forward(ad::Graph& graph, const PredictorParams& params, const std::vector<ad::Var>& leaves,
                           const MotionTensor& x_t, double t, int cond_row);

/// Maps an optional condition onto a table row, validating it.
int condition_row(const PredictorConfig& config, std::optional<int> cond);

void check_input(const PredictorConfig& config, const MotionTensor& x_t);

Eigen::RowVectorXd time_features(double t, int width, double time_scale);

}  // namespace model_detail

}  // namespace arflow

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "arflow/capsule.hpp"
#include "arflow/motion.hpp"
#include "arflow/predictor.hpp"
#include "arflow/skeleton.hpp"

namespace arflow {

/// Actor motion and its per-frame capsule bodies, the field the reactor is
/// kept away from.
struct GuidanceContext {
  Skeleton skel;
  MotionTensor actor;
  std::vector<CapsuleSet> actor_capsules;

  static GuidanceContext make(const Skeleton& skel, const MotionTensor& actor);
};

/// sum over reactor joints i and frames h of -min(SDF_h(joint_i^h), zeta).
double penetration_loss(const MotionTensor& reaction, const GuidanceContext& ctx, double zeta);

/// Gradient of penetration_loss with respect to every pose parameter,
/// chained through 6D decoding and forward kinematics.
MotionTensor penetration_grad(const MotionTensor& reaction, const GuidanceContext& ctx, double zeta);

/// Network (or oracle) producing raw output in its own parameterization.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual MotionTensor raw(const MotionTensor& x_t, double t, std::optional<int> cond) const = 0;
  virtual PredictionMode mode() const = 0;
};

class NetworkPredictor final : public Predictor {
 public:
  explicit NetworkPredictor(const PredictorParams& params) : params_(params) {}
  MotionTensor raw(const MotionTensor& x_t, double t, std::optional<int> cond) const override {
    return predict(params_, x_t, t, cond);
  }
  PredictionMode mode() const override { return params_.config.prediction_mode; }

 private:
  const PredictorParams& params_;
};

class FunctionPredictor final : public Predictor {
 public:
  using Fn = std::function<MotionTensor(const MotionTensor&, double, std::optional<int>)>;
  FunctionPredictor(Fn fn, PredictionMode mode) : fn_(std::move(fn)), mode_(mode) {}
  MotionTensor raw(const MotionTensor& x_t, double t, std::optional<int> cond) const override {
    return fn_(x_t, t, cond);
  }
  PredictionMode mode() const override { return mode_; }

 private:
  Fn fn_;
  PredictionMode mode_;
};

enum class Guidance { kNone, kVanilla, kImproved };

const char* guidance_name(Guidance g);
Guidance parse_guidance(const std::string& name);

struct SamplerConfig {
  int steps = 5;  // grid points; steps - 1 updates
  double sigma_min = 1e-4;
  PredictionMode mode = PredictionMode::kX1;  // update route: endpoint form or velocity form
  Guidance guidance = Guidance::kNone;
  double lambda_pene = 2.0;
  double zeta = 0.5;
  double w = 0.7;
  double beta = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  /// t_n = (n - 1) / (steps - 1), n = 1..steps.
  std::vector<double> grid() const;
};

/// Endpoint estimate from the predictor at (x_t, t), whatever its parameterization.
MotionTensor predicted_x1(const Predictor& predictor, const MotionTensor& x_t, double t, std::optional<int> cond,
                          double sigma_min);

/// Unguided Euler integration. Requires guidance == none.
MotionTensor sample_euler(const Predictor& predictor, const MotionTensor& x0, const SamplerConfig& cfg,
                          std::optional<int> cond);

/// Euler step, then the state is moved by -lambda * grad L_pene evaluated at
/// the current endpoint estimate. Requires guidance == vanilla.
MotionTensor sample_vanilla_guided(const Predictor& predictor, const MotionTensor& x0, const SamplerConfig& cfg,
                                   std::optional<int> cond, const GuidanceContext& ctx);

/// Endpoint guidance with reprojection: recover x0_hat, step the endpoint
/// estimate down the penetration gradient, blend x0_hat toward the true x0
/// with weight w, and re-interpolate. Requires guidance == improved.
MotionTensor sample_improved_guided(const Predictor& predictor, const MotionTensor& x0, const SamplerConfig& cfg,
                                    std::optional<int> cond, const GuidanceContext& ctx);

/// Reprojection with the direction mixed toward a random direction by beta.
/// Guidance none or improved; ctx may be null only for none.
MotionTensor sample_stochastic(const Predictor& predictor, const MotionTensor& x0, const SamplerConfig& cfg,
                               std::optional<int> cond, const GuidanceContext* ctx);

/// Dispatch on cfg: beta > 0 goes to sample_stochastic, otherwise by guidance.
MotionTensor sample(const Predictor& predictor, const MotionTensor& x0, const SamplerConfig& cfg,
                    std::optional<int> cond, const GuidanceContext* ctx);

/// Seed for sample `index` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace arflow

#include "arflow/sampler.hpp"

#include <random>

#include "arflow/error.hpp"
#include "arflow/flowpath.hpp"
#include "arflow/training.hpp"

namespace arflow {

const char* guidance_name(Guidance g) {
  switch (g) {
    case Guidance::kNone: return "none";
    case Guidance::kVanilla: return "vanilla";
    case Guidance::kImproved: return "improved";
  }
  return "none";
}

Guidance parse_guidance(const std::string& name) {
  if (name == "none") return Guidance::kNone;
  if (name == "vanilla") return Guidance::kVanilla;
  if (name == "improved") return Guidance::kImproved;
  throw Error(ErrorCode::kInvalidConfig, "guidance must be none, vanilla or improved, got '" + name + "'");
}

void SamplerConfig::validate() const {
  if (steps < 2) throw Error(ErrorCode::kInvalidConfig, "steps must be >= 2");
  if (!(sigma_min >= 0.0 && sigma_min < 1.0)) throw Error(ErrorCode::kInvalidConfig, "sigma_min must be in [0, 1)");
  if (!(lambda_pene >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "lambda_pene must be >= 0");
  if (!(zeta > 0.0)) throw Error(ErrorCode::kInvalidConfig, "zeta must be > 0");
  if (!(w >= 0.0 && w <= 1.0)) throw Error(ErrorCode::kInvalidConfig, "w must be in [0, 1]");
  if (!(beta >= 0.0 && beta <= 1.0)) throw Error(ErrorCode::kInvalidConfig, "beta must be in [0, 1]");
}

std::vector<double> SamplerConfig::grid() const {
  std::vector<double> t(steps);
  for (int n = 0; n < steps; ++n) t[n] = static_cast<double>(n) / static_cast<double>(steps - 1);
  t.back() = 1.0;
  return t;
}

MotionTensor predicted_x1(const Predictor& predictor, const MotionTensor& x_t, double t, std::optional<int> cond,
                          double sigma_min) {
  return prediction_to_x1(predictor.raw(x_t, t, cond), x_t, t, predictor.mode(), sigma_min);
}

namespace {

void require_guidance(const SamplerConfig& cfg, Guidance expected, const char* sampler) {
  cfg.validate();
  if (cfg.guidance != expected) {
    throw Error(ErrorCode::kInvalidConfig,
                std::string(sampler) + " requires guidance=" + guidance_name(expected) + ", got " +
                    guidance_name(cfg.guidance));
  }
}

struct Estimates {
  MotionTensor raw;
  MotionTensor x1_hat;
};

Estimates estimate(const Predictor& predictor, const MotionTensor& x, double t, std::optional<int> cond,
                   double sigma_min) {
  Estimates e;
  e.raw = predictor.raw(x, t, cond);
  e.x1_hat = prediction_to_x1(e.raw, x, t, predictor.mode(), sigma_min);
  return e;
}

// Unguided update along the configured route.
MotionTensor plain_step(const Predictor& predictor, const Estimates& e, const MotionTensor& x, double t,
                        double t_next, const SamplerConfig& cfg) {
  if (cfg.mode == PredictionMode::kX1) return euler_step_x1(x, e.x1_hat, t, t_next, cfg.sigma_min);
  const MotionTensor v =
      predictor.mode() == PredictionMode::kV ? e.raw : v_from_x1(e.x1_hat, x, FlowTime(t), cfg.sigma_min);
  return euler_step_v(x, v, t, t_next);
}

MotionTensor guidance_step(const MotionTensor& x1_hat, const GuidanceContext& ctx, const SamplerConfig& cfg) {
  if (cfg.lambda_pene == 0.0) return MotionTensor::Zero(x1_hat.rows(), x1_hat.cols());
  return cfg.lambda_pene * penetration_grad(x1_hat, ctx, cfg.zeta);
}

}  // namespace

MotionTensor sample_euler(const Predictor& predictor, const MotionTensor& x0, const SamplerConfig& cfg,
                          std::optional<int> cond) {
  require_guidance(cfg, Guidance::kNone, "sample_euler");
  const auto grid = cfg.grid();
  MotionTensor x = x0;
  for (std::size_t n = 0; n + 1 < grid.size(); ++n) {
    const Estimates e = estimate(predictor, x, grid[n], cond, cfg.sigma_min);
    x = plain_step(predictor, e, x, grid[n], grid[n + 1], cfg);
  }
  return x;
}

MotionTensor sample_vanilla_guided(const Predictor& predictor, const MotionTensor& x0, const SamplerConfig& cfg,
                                   std::optional<int> cond, const GuidanceContext& ctx) {
  require_guidance(cfg, Guidance::kVanilla, "sample_vanilla_guided");
  const auto grid = cfg.grid();
  MotionTensor x = x0;
  for (std::size_t n = 0; n + 1 < grid.size(); ++n) {
    const Estimates e = estimate(predictor, x, grid[n], cond, cfg.sigma_min);
    const MotionTensor stepped = plain_step(predictor, e, x, grid[n], grid[n + 1], cfg);
    x = stepped - guidance_step(e.x1_hat, ctx, cfg);
  }
  return x;
}

MotionTensor sample_improved_guided(const Predictor& predictor, const MotionTensor& x0, const SamplerConfig& cfg,
                                    std::optional<int> cond, const GuidanceContext& ctx) {
  require_guidance(cfg, Guidance::kImproved, "sample_improved_guided");
  const auto grid = cfg.grid();
  MotionTensor x = x0;
  for (std::size_t n = 0; n + 1 < grid.size(); ++n) {
    const double t = grid[n];
    const double t_next = grid[n + 1];
    const MotionTensor x1_hat = predicted_x1(predictor, x, t, cond, cfg.sigma_min);
    const MotionTensor x0_rec = x0_hat(x1_hat, x, FlowTime(t), cfg.sigma_min);
    const MotionTensor x1_guided = x1_hat - guidance_step(x1_hat, ctx, cfg);
    const MotionTensor x0_star = cfg.w * x0_rec + (1.0 - cfg.w) * x0;
    x = interpolate(x0_star, x1_guided, FlowTime(t_next), cfg.sigma_min);
  }
  return x;
}

MotionTensor sample_stochastic(const Predictor& predictor, const MotionTensor& x0, const SamplerConfig& cfg,
                               std::optional<int> cond, const GuidanceContext* ctx) {
  cfg.validate();
  if (cfg.guidance == Guidance::kVanilla) {
    throw Error(ErrorCode::kInvalidConfig, "stochastic sampling composes with guidance none or improved");
  }
  const bool guided = cfg.guidance == Guidance::kImproved;
  if (guided && ctx == nullptr) throw Error(ErrorCode::kInvalidConfig, "improved guidance needs a context");

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto grid = cfg.grid();
  MotionTensor x = x0;
  for (std::size_t n = 0; n + 1 < grid.size(); ++n) {
    const double t = grid[n];
    const double t_next = grid[n + 1];
    const MotionTensor x1_hat = predicted_x1(predictor, x, t, cond, cfg.sigma_min);
    const MotionTensor x0_rec = x0_hat(x1_hat, x, FlowTime(t), cfg.sigma_min);
    const MotionTensor x1_guided = guided ? MotionTensor(x1_hat - guidance_step(x1_hat, *ctx, cfg)) : x1_hat;
    const MotionTensor x0_star = guided ? MotionTensor(cfg.w * x0_rec + (1.0 - cfg.w) * x0) : x0_rec;

    if (cfg.beta == 0.0) {
      x = interpolate(x0_star, x1_guided, FlowTime(t_next), cfg.sigma_min);
      continue;
    }
    const MotionTensor direction = x0_star - x1_guided;
    MotionTensor noise(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < noise.size(); ++i) noise.data()[i] = normal(rng);
    const double noise_norm = noise.norm();
    const MotionTensor random_dir =
        noise_norm > 0.0 ? MotionTensor(noise * (direction.norm() / noise_norm)) : MotionTensor(noise);
    const MotionTensor mixed = direction + cfg.beta * (random_dir - direction);
    x = x1_guided + (1.0 - t_next) * mixed + (cfg.sigma_min * t_next) * x0_star;
  }
  return x;
}

MotionTensor sample(const Predictor& predictor, const MotionTensor& x0, const SamplerConfig& cfg,
                    std::optional<int> cond, const GuidanceContext* ctx) {
  if (cfg.beta > 0.0) return sample_stochastic(predictor, x0, cfg, cond, ctx);
  switch (cfg.guidance) {
    case Guidance::kNone: return sample_euler(predictor, x0, cfg, cond);
    case Guidance::kVanilla:
      if (ctx == nullptr) throw Error(ErrorCode::kInvalidConfig, "vanilla guidance needs a context");
      return sample_vanilla_guided(predictor, x0, cfg, cond, *ctx);
    case Guidance::kImproved:
      if (ctx == nullptr) throw Error(ErrorCode::kInvalidConfig, "improved guidance needs a context");
      return sample_improved_guided(predictor, x0, cfg, cond, *ctx);
  }
  return x0;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 over (seed, index)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace arflow

#include "arflow/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "arflow/capsule.hpp"
#include "arflow/data.hpp"
#include "arflow/error.hpp"
#include "arflow/flowpath.hpp"
#include "arflow/metrics.hpp"
#include "arflow/predictor.hpp"
#include "arflow/sampler.hpp"
#include "arflow/training.hpp"

namespace arflow {

Mutation parse_mutation(const std::string& name) {
  if (name == "none") return Mutation::kNone;
  if (name == "x1_from_v") return Mutation::kX1FromV;
  if (name == "x0_hat") return Mutation::kX0Hat;
  if (name == "interpolate") return Mutation::kInterpolate;
  throw Error(ErrorCode::kInvalidConfig, "unknown mutation '" + name + "'");
}

const char* mutation_name(Mutation m) {
  switch (m) {
    case Mutation::kNone: return "none";
    case Mutation::kX1FromV: return "x1_from_v";
    case Mutation::kX0Hat: return "x0_hat";
    case Mutation::kInterpolate: return "interpolate";
  }
  return "none";
}

double relative_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

namespace {

using Tensor = MotionTensor;
using TensorOp = std::function<Tensor(const Tensor&, const Tensor&, FlowTime, double)>;

// The flow algebra under test; mutations swap one entry for a broken one.
struct FlowOps {
  TensorOp interpolate;
  TensorOp x1_from_v;
  TensorOp v_from_x1;
  TensorOp x0_hat;
  TensorOp x0_hat_direct;
};

FlowOps make_ops(Mutation m) {
  FlowOps ops{
      [](const Tensor& a, const Tensor& b, FlowTime t, double s) { return arflow::interpolate(a, b, t, s); },
      [](const Tensor& a, const Tensor& b, FlowTime t, double s) { return arflow::x1_from_v(a, b, t, s); },
      [](const Tensor& a, const Tensor& b, FlowTime t, double s) { return arflow::v_from_x1(a, b, t, s); },
      [](const Tensor& a, const Tensor& b, FlowTime t, double s) { return arflow::x0_hat(a, b, t, s); },
      [](const Tensor& a, const Tensor& b, FlowTime t, double s) { return arflow::x0_hat_direct(a, b, t, s); },
  };
  switch (m) {
    case Mutation::kNone: break;
    case Mutation::kX1FromV:
      ops.x1_from_v = [](const Tensor& v, const Tensor& x, FlowTime t, double s) -> Tensor {
        return (1.0 - s) * x + (1.0 - t.value()) * v;
      };
      break;
    case Mutation::kX0Hat:
      ops.x0_hat = [](const Tensor& x1, const Tensor& x, FlowTime t, double s) -> Tensor {
        return x1 + (x - (1.0 + t.value()) * x1) / path_x0_weight(t.value(), s);
      };
      break;
    case Mutation::kInterpolate:
      ops.interpolate = [](const Tensor& x0, const Tensor& x1, FlowTime t, double) -> Tensor {
        return t.value() * x1 + (1.0 - t.value()) * x0;
      };
      break;
  }
  return ops;
}

Tensor random_tensor(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  Tensor m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

double max_abs(const Tensor& a, const Tensor& b) { return (a - b).cwiseAbs().maxCoeff(); }

struct Suite {
  std::vector<PropertyResult> results;

  void run(const std::string& name, double tolerance, const std::function<double()>& body) {
    const auto start = std::chrono::steady_clock::now();
    PropertyResult r;
    r.name = name;
    r.tolerance = tolerance;
    try {
      r.measured = body();
      r.pass = std::isfinite(r.measured) && r.measured <= tolerance;
    } catch (const std::exception&) {
      r.measured = INFINITY;
      r.pass = false;
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    results.push_back(r);
  }
};

constexpr int kRows = 4;
constexpr int kCols = 39;
constexpr int kTrials = 1000;

// Actor at the origin facing +x, reactor 0.3 m in front of it facing back,
// both with jittered joint rotations so nothing sits on a tie.
struct Scene {
  Skeleton skel = Skeleton::desk_default();
  Tensor actor;
  Tensor reactor;
};

Scene penetrating_scene(std::mt19937_64& rng, int frames) {
  Scene s;
  std::uniform_real_distribution<double> jitter(-0.2, 0.2);
  const int k = s.skel.joint_count();
  s.actor.resize(frames, s.skel.frame_dim());
  s.reactor.resize(frames, s.skel.frame_dim());
  for (int h = 0; h < frames; ++h) {
    BodyPoseFrame a = BodyPoseFrame::identity(k);
    BodyPoseFrame b = BodyPoseFrame::identity(k);
    for (int j = 0; j < k; ++j) {
      const Eigen::Vector3d axis = Eigen::Vector3d(jitter(rng), jitter(rng), 1.0).normalized();
      a.joint_rot[j] = rot6d_encode(axis_angle_matrix(axis, jitter(rng)));
      b.joint_rot[j] = rot6d_encode(axis_angle_matrix(axis, jitter(rng)));
    }
    b.root_rot = rot6d_encode(axis_angle_matrix(Eigen::Vector3d::UnitZ(), 3.14159 + jitter(rng)));
    b.root_trans = Eigen::Vector3d(0.3 + 0.2 * jitter(rng), jitter(rng), 0.0);
    set_motion_frame(s.actor, h, a);
    set_motion_frame(s.reactor, h, b);
  }
  return s;
}

void flow_properties(Suite& suite, const FlowOps& ops, std::uint64_t seed) {
  suite.run("interpolate endpoints", 1e-12, [&] {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> sig(0.0, 0.1);
    double worst = 0.0;
    for (int i = 0; i < kTrials; ++i) {
      const Tensor x0 = random_tensor(rng, kRows, kCols);
      const Tensor x1 = random_tensor(rng, kRows, kCols);
      const double s = sig(rng);
      worst = std::max(worst, max_abs(ops.interpolate(x0, x1, FlowTime(0.0), s), x0));
      worst = std::max(worst, max_abs(ops.interpolate(x0, x1, FlowTime(1.0), s), x1 + s * x0));
    }
    return worst;
  });

  suite.run("velocity on the path", 1e-10, [&] {
    std::mt19937_64 rng(seed + 1);
    std::uniform_real_distribution<double> time(0.0, 0.99);
    std::uniform_real_distribution<double> sig(0.0, 0.1);
    double worst = 0.0;
    for (int i = 0; i < kTrials; ++i) {
      const Tensor x0 = random_tensor(rng, kRows, kCols);
      const Tensor x1 = random_tensor(rng, kRows, kCols);
      const FlowTime t(time(rng));
      const double s = sig(rng);
      const Tensor xt = ops.interpolate(x0, x1, t, s);
      worst = std::max(worst, max_abs(ops.v_from_x1(x1, xt, t, s), target_velocity(x0, x1, s)));
    }
    return worst;
  });

  suite.run("v/x1 duality", 1e-10, [&] {
    std::mt19937_64 rng(seed + 2);
    std::uniform_real_distribution<double> time(0.0, 0.99);
    std::uniform_real_distribution<double> sig(0.0, 0.1);
    double worst = 0.0;
    for (int i = 0; i < kTrials; ++i) {
      const Tensor y = random_tensor(rng, kRows, kCols);
      const Tensor xt = random_tensor(rng, kRows, kCols);
      const FlowTime t(time(rng));
      const double s = sig(rng);
      worst = std::max(worst, max_abs(ops.x1_from_v(ops.v_from_x1(y, xt, t, s), xt, t, s), y));
      worst = std::max(worst, max_abs(ops.v_from_x1(ops.x1_from_v(y, xt, t, s), xt, t, s), y));
    }
    return worst;
  });

  suite.run("x0_hat closed forms agree", 1e-10, [&] {
    std::mt19937_64 rng(seed + 3);
    std::uniform_real_distribution<double> time(0.0, 0.99);
    std::uniform_real_distribution<double> sig(0.0, 0.1);
    double worst = 0.0;
    for (int i = 0; i < kTrials; ++i) {
      const Tensor x1 = random_tensor(rng, kRows, kCols);
      const Tensor xt = random_tensor(rng, kRows, kCols);
      const FlowTime t(time(rng));
      const double s = sig(rng);
      worst = std::max(worst, max_abs(ops.x0_hat(x1, xt, t, s), ops.x0_hat_direct(x1, xt, t, s)));
    }
    return worst;
  });

  suite.run("x0_hat path inversion", 1e-10, [&] {
    std::mt19937_64 rng(seed + 4);
    std::uniform_real_distribution<double> time(0.0, 0.99);
    std::uniform_real_distribution<double> sig(0.0, 0.1);
    double worst = 0.0;
    for (int i = 0; i < kTrials; ++i) {
      const Tensor x0 = random_tensor(rng, kRows, kCols);
      const Tensor x1 = random_tensor(rng, kRows, kCols);
      const FlowTime t(time(rng));
      const double s = sig(rng);
      worst = std::max(worst, max_abs(ops.x0_hat(x1, ops.interpolate(x0, x1, t, s), t, s), x0));
    }
    return worst;
  });

  suite.run("endpoint step equals reprojection", 1e-10, [&] {
    std::mt19937_64 rng(seed + 5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> sig(0.0, 0.1);
    double worst = 0.0;
    for (int i = 0; i < kTrials; ++i) {
      const Tensor xt = random_tensor(rng, kRows, kCols);
      const Tensor x1 = random_tensor(rng, kRows, kCols);
      const double t = 0.99 * unit(rng);
      const double t_next = t + (1.0 - t) * unit(rng);
      const double s = sig(rng);
      const Tensor step = euler_step_x1(xt, x1, t, t_next, s);
      const Tensor reproj = ops.interpolate(ops.x0_hat(x1, xt, FlowTime(t), s), x1, FlowTime(t_next), s);
      worst = std::max(worst, max_abs(step, reproj));
    }
    return worst;
  });

  suite.run("velocity step equals endpoint step", 1e-10, [&] {
    std::mt19937_64 rng(seed + 6);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> sig(0.0, 0.1);
    double worst = 0.0;
    for (int i = 0; i < kTrials; ++i) {
      const Tensor xt = random_tensor(rng, kRows, kCols);
      const Tensor x1 = random_tensor(rng, kRows, kCols);
      const double t = 0.99 * unit(rng);
      const double t_next = t + (1.0 - t) * unit(rng);
      const double s = sig(rng);
      const Tensor via_v = euler_step_v(xt, ops.v_from_x1(x1, xt, FlowTime(t), s), t, t_next);
      worst = std::max(worst, max_abs(via_v, euler_step_x1(xt, x1, t, t_next, s)));
    }
    return worst;
  });

  suite.run("v-mode prediction recovers the endpoint", 1e-10, [&] {
    std::mt19937_64 rng(seed + 7);
    std::uniform_real_distribution<double> time(0.0, 0.99);
    std::uniform_real_distribution<double> sig(0.0, 0.1);
    double worst = 0.0;
    for (int i = 0; i < kTrials; ++i) {
      const Tensor y = random_tensor(rng, kRows, kCols);
      const Tensor xt = random_tensor(rng, kRows, kCols);
      const FlowTime t(time(rng));
      const double s = sig(rng);
      const Tensor raw = ops.v_from_x1(y, xt, t, s);
      worst = std::max(worst, max_abs(ops.x1_from_v(raw, xt, t, s), y));
    }
    return worst;
  });
}

void sampler_properties(Suite& suite, std::uint64_t seed) {
  suite.run("oracle predictor exactness", 1e-12, [&] {
    std::mt19937_64 rng(seed + 10);
    double worst = 0.0;
    for (double s : {0.0, 1e-4, 0.05}) {
      for (int n : {2, 5, 100}) {
        const Tensor x0 = random_tensor(rng, kRows, kCols);
        const Tensor x1 = random_tensor(rng, kRows, kCols);
        const FunctionPredictor oracle([&x1](const Tensor&, double, std::optional<int>) { return x1; },
                                       PredictionMode::kX1);
        SamplerConfig cfg;
        cfg.steps = n;
        cfg.sigma_min = s;
        for (PredictionMode route : {PredictionMode::kX1, PredictionMode::kV}) {
          cfg.mode = route;
          worst = std::max(worst, max_abs(sample_euler(oracle, x0, cfg, std::nullopt), x1 + s * x0));
        }
      }
    }
    return worst;
  });

  std::mt19937_64 rng(seed + 11);
  const Scene scene = penetrating_scene(rng, kRows);
  const GuidanceContext ctx = GuidanceContext::make(scene.skel, scene.actor);
  PredictorConfig pcfg;
  pcfg.layers = 1;
  pcfg.width = 16;
  pcfg.heads = 2;
  pcfg.ffn_width = 32;
  pcfg.frame_dim = scene.skel.frame_dim();
  pcfg.max_frames = kRows;
  pcfg.cond_vocab = 3;
  PredictorParams net = init_predictor(pcfg, seed + 12);
  // Pull the random network toward plausible poses so decoding stays away from degenerate 6D inputs.
  net.tensors.at("out.b") = scene.reactor.row(0);
  const NetworkPredictor predictor(net);

  suite.run("guidance-off reductions", 1e-12, [&] {
    SamplerConfig base;
    base.sigma_min = 1e-4;
    const Tensor plain = sample_euler(predictor, scene.actor, base, 1);
    SamplerConfig improved = base;
    improved.guidance = Guidance::kImproved;
    improved.lambda_pene = 0.0;
    improved.w = 1.0;
    SamplerConfig vanilla = base;
    vanilla.guidance = Guidance::kVanilla;
    vanilla.lambda_pene = 0.0;
    return std::max(max_abs(sample_improved_guided(predictor, scene.actor, improved, 1, ctx), plain),
                    max_abs(sample_vanilla_guided(predictor, scene.actor, vanilla, 1, ctx), plain));
  });

  suite.run("stochastic beta=0 is improved guidance", 0.0, [&] {
    SamplerConfig cfg;
    cfg.guidance = Guidance::kImproved;
    const Tensor a = sample_improved_guided(predictor, scene.actor, cfg, 2, ctx);
    const Tensor b = sample_stochastic(predictor, scene.actor, cfg, 2, &ctx);
    return a == b ? 0.0 : max_abs(a, b) + 1e-300;
  });

  suite.run("x1 and v sampling routes agree", 1e-10, [&] {
    SamplerConfig cfg;
    const Tensor a = sample_euler(predictor, scene.actor, cfg, 0);
    cfg.mode = PredictionMode::kV;
    const Tensor b = sample_euler(predictor, scene.actor, cfg, 0);
    PredictorParams vnet = net;
    vnet.config.prediction_mode = PredictionMode::kV;
    const NetworkPredictor vpred(vnet);
    SamplerConfig vcfg;
    vcfg.sigma_min = 0.01;
    vcfg.steps = 6;
    const Tensor c = sample_euler(vpred, scene.actor, vcfg, 0);
    vcfg.mode = PredictionMode::kV;
    const Tensor d = sample_euler(vpred, scene.actor, vcfg, 0);
    return std::max(max_abs(a, b), max_abs(c, d));
  });

  suite.run("causal mask", 1e-10, [&] {
    std::mt19937_64 prng(seed + 13);
    const Tensor x = random_tensor(prng, kRows, pcfg.frame_dim);
    const Tensor base = predict(net, x, 0.3, 1);
    double worst = 0.0;
    for (int h = 0; h + 1 < kRows; ++h) {
      Tensor y = x;
      y.bottomRows(kRows - h - 1) += random_tensor(prng, kRows - h - 1, pcfg.frame_dim);
      worst = std::max(worst, max_abs(predict(net, y, 0.3, 1).topRows(h + 1), base.topRows(h + 1)));
    }
    return worst;
  });
}

void gradient_properties(Suite& suite, std::uint64_t seed) {
  suite.run("sdf gradient vs finite differences", 1e-5, [&] {
    std::mt19937_64 rng(seed + 20);
    const Scene scene = penetrating_scene(rng, 1);
    const CapsuleSet body = body_capsules(scene.skel, scene.actor, 0);
    std::uniform_real_distribution<double> box(-0.8, 0.8);
    const double step = 1e-6;
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Eigen::Vector3d p(box(rng), box(rng), box(rng) + 0.5);
      const Eigen::Vector3d g = body_sdf_gradient(p, body);
      for (int d = 0; d < 3; ++d) {
        Eigen::Vector3d e = Eigen::Vector3d::Zero();
        e[d] = step;
        const double fd = (body_sdf(p + e, body) - body_sdf(p - e, body)) / (2.0 * step);
        worst = std::max(worst, relative_error(g[d], fd));
      }
    }
    return worst;
  });

  suite.run("penetration gradient vs finite differences", 1e-4, [&] {
    std::mt19937_64 rng(seed + 21);
    const Scene scene = penetrating_scene(rng, kRows);
    const GuidanceContext ctx = GuidanceContext::make(scene.skel, scene.actor);
    const double zeta = 0.5;
    const Tensor grad = penetration_grad(scene.reactor, ctx, zeta);
    std::vector<Eigen::Index> active;
    for (Eigen::Index i = 0; i < grad.size(); ++i) {
      if (grad.data()[i] != 0.0) active.push_back(i);
    }
    if (active.size() < 50) throw Error(ErrorCode::kInvalidConfig, "scene too sparse");
    std::shuffle(active.begin(), active.end(), rng);
    const double step = 1e-6;
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      Tensor plus = scene.reactor;
      Tensor minus = scene.reactor;
      plus.data()[active[i]] += step;
      minus.data()[active[i]] -= step;
      const double fd = (penetration_loss(plus, ctx, zeta) - penetration_loss(minus, ctx, zeta)) / (2.0 * step);
      worst = std::max(worst, relative_error(grad.data()[active[i]], fd));
    }
    return worst;
  });

  suite.run("training gradient vs finite differences", 1e-4, [&] {
    ScenarioConfig dcfg;
    dcfg.frames = 4;
    dcfg.contact_fraction = 1.0;
    dcfg.seed = seed + 22;
    const auto data = generate_dataset(dcfg, 2);
    PredictorConfig pcfg;
    pcfg.layers = 1;
    pcfg.width = 8;
    pcfg.heads = 2;
    pcfg.ffn_width = 16;
    pcfg.frame_dim = dcfg.skeleton.frame_dim();
    pcfg.max_frames = 4;
    pcfg.cond_vocab = 3;
    PredictorParams params = init_predictor(pcfg, seed + 23);
    TrainConfig tcfg;
    std::vector<TrainingExample> batch;
    batch.push_back({data[0].actor, data[0].reactor, data[0].label, 0.25});
    batch.push_back({data[1].actor, data[1].reactor, std::nullopt, 0.75});
    const LossAndGradient lg = grad_loss(params, batch, tcfg, dcfg.skeleton);

    std::mt19937_64 rng(seed + 24);
    std::vector<std::pair<std::size_t, Eigen::Index>> coords;
    for (std::size_t p = 0; p < params.tensors.size(); ++p) {
      for (Eigen::Index i = 0; i < params.tensors.value(p).size(); ++i) coords.emplace_back(p, i);
    }
    std::shuffle(coords.begin(), coords.end(), rng);
    const double step = 1e-5;
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      const auto [p, idx] = coords[i];
      PredictorParams plus = params;
      PredictorParams minus = params;
      plus.tensors.value(p).data()[idx] += step;
      minus.tensors.value(p).data()[idx] -= step;
      const double fd = (batch_loss(plus, batch, tcfg, dcfg.skeleton).total -
                         batch_loss(minus, batch, tcfg, dcfg.skeleton).total) /
                        (2.0 * step);
      worst = std::max(worst, relative_error(lg.grad.value(p).data()[idx], fd));
    }
    return worst;
  });

  suite.run("fid self-distance", 1e-6, [&] {
    std::mt19937_64 rng(seed + 25);
    const FeatureSet x = random_tensor(rng, 64, 8);
    return fid(x, x);
  });
}

}  // namespace

std::vector<PropertyResult> run_verify(const VerifyOptions& options) {
  Suite suite;
  flow_properties(suite, make_ops(options.mutation), options.seed);
  sampler_properties(suite, options.seed);
  gradient_properties(suite, options.seed);
  return suite.results;
}

std::string format_verify_table(const std::vector<PropertyResult>& results) {
  std::ostringstream out;
  int failed = 0;
  for (const auto& r : results) {
    char line[256];
    std::snprintf(line, sizeof line, "%-4s  %-44s  worst=%-12.3e tol=%-9.1e %.2fs\n", r.pass ? "PASS" : "FAIL",
                  r.name.c_str(), r.measured, r.tolerance, r.seconds);
    out << line;
    if (!r.pass) ++failed;
  }
  out << (failed == 0 ? "all " + std::to_string(results.size()) + " properties pass\n"
                      : std::to_string(failed) + " of " + std::to_string(results.size()) + " properties FAILED\n");
  return out.str();
}

}  // namespace arflow

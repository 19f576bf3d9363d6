// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "arflow/capsule.hpp"
#include "arflow/cli.hpp"
#include "arflow/data.hpp"
#include "arflow/error.hpp"
#include "arflow/fileio.hpp"
#include "arflow/flowpath.hpp"
#include "arflow/metrics.hpp"
#include "arflow/parallel.hpp"
#include "arflow/predictor.hpp"
#include "arflow/sampler.hpp"
#include "arflow/training.hpp"
#include "arflow/voxel.hpp"

using namespace arflow;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run_criterion(int id, const char* title, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

MotionTensor gaussian_tensor(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> z(0.0, 1.0);
  MotionTensor m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = z(rng);
  return m;
}

double max_abs(const MotionTensor& a, const MotionTensor& b) { return (a - b).cwiseAbs().maxCoeff(); }

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

FunctionPredictor smooth_predictor(const MotionTensor& anchor) {
  return FunctionPredictor(
      [anchor](const MotionTensor& x, double t, std::optional<int>) -> MotionTensor {
        return anchor + 0.2 * (x.array() * (0.5 + t)).sin().matrix();
      },
      PredictionMode::kX1);
}

PredictorConfig default_model(const Skeleton& skel, int frames) {
  PredictorConfig c;
  c.frame_dim = skel.frame_dim();
  c.max_frames = frames;
  c.cond_vocab = kScenarioCount;
  return c;
}

// Random init with the condition table and biases perturbed too, so no
// parameter block starts at an exact zero.
PredictorParams jittered_model(const PredictorConfig& cfg, std::uint64_t seed) {
  PredictorParams p = init_predictor(cfg, seed);
  std::mt19937_64 rng(seed + 1);
  std::normal_distribution<double> z(0.0, 0.05);
  for (std::size_t i = 0; i < p.tensors.size(); ++i)
    for (Eigen::Index e = 0; e < p.tensors.value(i).size(); ++e) p.tensors.value(i).data()[e] += z(rng);
  return p;
}

std::optional<int> cond_of(const PredictorParams& p, int label) {
  return p.config.cond_vocab > 0 ? std::optional<int>(label) : std::nullopt;
}

// ---------------------------------------------------------------------------

Outcome algebraic_equivalence() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> rows(1, 16);
  std::uniform_int_distribution<int> grid_size(2, 20);
  const double s = kDefaultSigmaMin;
  double worst_a = 0.0;
  double worst_b = 0.0;
  double worst_c = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int h = rows(rng);
    const MotionTensor x0 = gaussian_tensor(rng, h, 39);
    const MotionTensor x1 = gaussian_tensor(rng, h, 39);
    const MotionTensor x1_hat = gaussian_tensor(rng, h, 39);
    const int n = grid_size(rng);
    const int k = std::uniform_int_distribution<int>(0, n - 2)(rng);
    const double t = static_cast<double>(k) / (n - 1);
    const double t_next = static_cast<double>(k + 1) / (n - 1);
    const MotionTensor xt = (1 - (1 - s) * t) * x0 + t * x1;

    // (a) hand-written Euler step on the path velocity vs reprojection.
    const MotionTensor src = (xt - t * x1_hat) / (1 - (1 - s) * t);
    const MotionTensor hand_step = xt + (t_next - t) * (x1_hat - (1 - s) * src);
    const MotionTensor reproj = interpolate(x0_hat(x1_hat, xt, FlowTime(t), s), x1_hat, FlowTime(t_next), s);
    worst_a = std::max({worst_a, max_abs(hand_step, reproj),
                        max_abs(euler_step_x1(xt, x1_hat, t, t_next, s), reproj)});

    // (b) both update routes of the sampler.
    const FunctionPredictor pred = smooth_predictor(x1);
    SamplerConfig cfg;
    cfg.steps = n;
    const MotionTensor via_x1 = sample_euler(pred, x0, cfg, std::nullopt);
    cfg.mode = PredictionMode::kV;
    worst_b = std::max(worst_b, max_abs(via_x1, sample_euler(pred, x0, cfg, std::nullopt)));

    // (c) duality.
    const FlowTime ft(t);
    worst_c = std::max(worst_c, max_abs(x1_from_v(v_from_x1(x1_hat, xt, ft, s), xt, ft, s), x1_hat));
  }
  const bool pass = worst_a <= 1e-10 && worst_b <= 1e-10 && worst_c <= 1e-10;
  return {pass, "max abs (a) " + fmt("%.2e", worst_a) + ", (b) " + fmt("%.2e", worst_b) + ", (c) " +
                    fmt("%.2e", worst_c) + " over 1000 instances, bound 1e-10"};
}

Outcome oracle_exactness() {
  std::mt19937_64 rng(102);
  const MotionTensor x0 = gaussian_tensor(rng, 8, 39);
  const MotionTensor x1 = gaussian_tensor(rng, 8, 39);
  const FunctionPredictor oracle(
      [x1](const MotionTensor&, double, std::optional<int>) { return x1; }, PredictionMode::kX1);
  double worst = 0.0;
  const double sigma = 0.01;
  for (int n : {2, 5, 100}) {
    SamplerConfig c;
    c.steps = n;
    c.sigma_min = 0.0;
    worst = std::max(worst, max_abs(sample_euler(oracle, x0, c, std::nullopt), x1));
    c.sigma_min = sigma;
    worst = std::max(worst, max_abs(sample_euler(oracle, x0, c, std::nullopt), x1 + sigma * x0));
  }
  return {worst <= 1e-12, "max abs " + fmt("%.2e", worst) + " for N in {2,5,100}, sigma_min in {0, 0.01}"};
}

Outcome reduction_chain() {
  const Skeleton skel = Skeleton::desk_default();
  ScenarioConfig sc;
  sc.seed = 103;
  sc.contact_fraction = 1.0;
  const auto suite = generate_dataset(sc, 20);
  const PredictorParams params = jittered_model(default_model(skel, sc.frames), 103);
  const NetworkPredictor net(params);
  double worst = 0.0;
  bool bit_equal = true;
  for (const auto& s : suite) {
    const GuidanceContext ctx = GuidanceContext::make(skel, s.actor);
    const auto cond = cond_of(params, s.label);
    SamplerConfig c;
    const MotionTensor plain = sample_euler(net, s.actor, c, cond);
    c.lambda_pene = 0.0;
    c.guidance = Guidance::kVanilla;
    const MotionTensor vanilla = sample_vanilla_guided(net, s.actor, c, cond, ctx);
    c.guidance = Guidance::kImproved;
    c.w = 1.0;
    const MotionTensor improved = sample_improved_guided(net, s.actor, c, cond, ctx);
    worst = std::max({worst, max_abs(vanilla, plain), max_abs(improved, vanilla), max_abs(improved, plain)});

    SamplerConfig d;
    d.guidance = Guidance::kImproved;
    d.beta = 0.0;
    bit_equal = bit_equal && sample_stochastic(net, s.actor, d, cond, &ctx) ==
                                 sample_improved_guided(net, s.actor, d, cond, ctx);
  }
  return {worst <= 1e-12 && bit_equal, "max abs " + fmt("%.2e", worst) + " across the chain on 20 scenes; beta=0 " +
                                           (bit_equal ? "bit-equal" : "NOT bit-equal")};
}

Outcome gradient_correctness() {
  const Skeleton skel = Skeleton::desk_default();
  std::mt19937_64 rng(104);

  // Penetration loss on near-contact scenes.
  ScenarioConfig sc;
  sc.seed = 104;
  sc.contact_fraction = 1.0;
  const auto scenes = generate_dataset(sc, 6);
  struct Coord {
    int scene;
    Eigen::Index index;
  };
  std::vector<Coord> active;
  std::vector<GuidanceContext> ctxs;
  std::vector<MotionTensor> grads;
  const double zeta = 0.5;
  for (int i = 0; i < static_cast<int>(scenes.size()); ++i) {
    ctxs.push_back(GuidanceContext::make(skel, scenes[i].actor));
    grads.push_back(penetration_grad(scenes[i].reactor, ctxs.back(), zeta));
    for (Eigen::Index e = 0; e < grads.back().size(); ++e)
      if (grads.back().data()[e] != 0.0) active.push_back({i, e});
  }
  if (active.size() < 50) return {false, "only " + std::to_string(active.size()) + " active penetration coordinates"};
  std::shuffle(active.begin(), active.end(), rng);
  double worst_pene = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto [i, e] = active[k];
    // The loss sums ~100 terms of order zeta while many entries are ~1e-6,
    // so a smaller step drowns in round-off.
    const double h = 1e-4;
    MotionTensor p = scenes[i].reactor;
    MotionTensor m = scenes[i].reactor;
    p.data()[e] += h;
    m.data()[e] -= h;
    const double fd = (penetration_loss(p, ctxs[i], zeta) - penetration_loss(m, ctxs[i], zeta)) / (2 * h);
    worst_pene = std::max(worst_pene, rel_err(grads[i].data()[e], fd));
  }

  // Training objective with respect to the network parameters.
  const PredictorParams params = jittered_model(default_model(skel, sc.frames), 105);
  std::vector<TrainingExample> batch;
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int i = 0; i < 4; ++i) batch.push_back({scenes[i].actor, scenes[i].reactor, scenes[i].label, u(rng)});
  TrainConfig tc;
  const LossAndGradient lg = grad_loss(params, batch, tc, skel);
  std::vector<std::pair<std::size_t, Eigen::Index>> coords;
  for (std::size_t t = 0; t < params.tensors.size(); ++t)
    for (Eigen::Index e = 0; e < params.tensors.value(t).size(); ++e)
      if (std::abs(lg.grad.value(t).data()[e]) > 1e-8) coords.push_back({t, e});
  std::shuffle(coords.begin(), coords.end(), rng);
  if (coords.size() < 50) return {false, "too few active parameters"};
  double worst_train = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto [t, e] = coords[k];
    const double h = 1e-5;
    PredictorParams p = params;
    p.tensors.value(t).data()[e] += h;
    const double up = batch_loss(p, batch, tc, skel).total;
    p.tensors.value(t).data()[e] -= 2 * h;
    const double down = batch_loss(p, batch, tc, skel).total;
    worst_train = std::max(worst_train, rel_err(lg.grad.value(t).data()[e], (up - down) / (2 * h)));
  }
  return {worst_pene < 1e-4 && worst_train < 1e-4,
          "max relative error penetration_grad " + fmt("%.2e", worst_pene) + ", grad_loss " +
              fmt("%.2e", worst_train) + " on 50 coordinates each, bound 1e-4"};
}

Outcome metric_units() {
  std::vector<std::string> notes;
  bool pass = true;
  std::mt19937_64 rng(107);

  const FeatureSet x = gaussian_tensor(rng, 500, 6);
  const double self = fid(x, x);
  pass = pass && self < 1e-6;
  notes.push_back("fid(X,X) " + fmt("%.1e", self));

  std::normal_distribution<double> za(0.0, 1.0);
  std::normal_distribution<double> zb(3.0, 2.0);
  FeatureSet a(20000, 1);
  FeatureSet b(20000, 1);
  for (int i = 0; i < 20000; ++i) {
    a(i, 0) = za(rng);
    b(i, 0) = zb(rng);
  }
  const double closed = 9.0 + 1.0 + 4.0 - 2.0 * 1.0 * 2.0;
  const double one_d = fid(a, b);
  pass = pass && std::abs(one_d - closed) / closed < 0.05;
  notes.push_back("1-D fid " + fmt("%.3f", one_d) + " vs " + fmt("%.1f", closed));

  const Skeleton skel = Skeleton::desk_default();
  const double vs = 0.02;
  MotionTensor body(1, skel.frame_dim());
  set_motion_frame(body, 0, BodyPoseFrame::identity(skel.joint_count()));
  const CapsuleSet caps = body_capsules(skel, body, 0);
  const double shared = voxelize(caps, vs, shared_grid_bounds(caps, caps, vs)).volume() * 1e6;
  const double superposed = frame_intersection_volumes({body, body}, skel, vs)[0];
  pass = pass && std::abs(superposed - shared) <= 1e-12 * shared;
  notes.push_back("superposed IV " + fmt("%.4f", superposed) + " = body " + fmt("%.4f", shared) + " cm3");

  const double r = 0.1;
  const double len = 0.5;
  const Capsule c{{0.013, -0.2, 0.031}, {0.013, 0.3, 0.031}, r};
  const double analytic = std::numbers::pi * r * r * len + 4.0 / 3.0 * std::numbers::pi * r * r * r;
  const double vox = voxelize(CapsuleSet{{c}}, r / 10).volume();
  const double vox_err = std::abs(vox - analytic) / analytic;
  pass = pass && vox_err < 0.05;
  notes.push_back("capsule voxel error " + fmt("%.2f%%", 100 * vox_err));

  MotionTensor here(4, skel.frame_dim());
  MotionTensor away(4, skel.frame_dim());
  BodyPoseFrame f = BodyPoseFrame::identity(skel.joint_count());
  for (int h = 0; h < 4; ++h) set_motion_frame(here, h, f);
  f.root_trans = Eigen::Vector3d(5, 0, 0);
  for (int h = 0; h < 4; ++h) set_motion_frame(away, h, f);
  MotionTensor r0 = away;
  r0.row(1) = here.row(1);
  r0.row(2) = here.row(2);
  MotionTensor r1 = away;
  r1.row(0) = here.row(0);
  const double freq = intersection_frequency({{here, r0}, {here, r1}, {here, away}}, skel, vs);
  pass = pass && freq == 0.25;
  notes.push_back("IF " + fmt("%.4f", freq) + " on 3-of-12");

  std::string detail;
  for (const auto& n : notes) detail += (detail.empty() ? "" : "; ") + n;
  return {pass, detail};
}

Outcome causality() {
  const Skeleton skel = Skeleton::desk_default();
  const int frames = 16;
  const PredictorParams params = jittered_model(default_model(skel, frames), 108);
  std::mt19937_64 rng(108);
  const MotionTensor x = gaussian_tensor(rng, frames, skel.frame_dim());
  const MotionTensor base = predict(params, x, 0.4, 1);
  double worst_net = 0.0;
  for (int h = 0; h + 1 < frames; ++h) {
    MotionTensor y = x;
    y.bottomRows(frames - h - 1) += gaussian_tensor(rng, frames - h - 1, skel.frame_dim());
    worst_net = std::max(worst_net, max_abs(predict(params, y, 0.4, 1).topRows(h + 1), base.topRows(h + 1)));
  }

  // Whole guided sampler: future actor frames leave earlier reactor frames alone.
  ScenarioConfig sc;
  sc.seed = 108;
  sc.contact_fraction = 1.0;
  const InteractionSample s = generate_sample(sc, 0);
  const NetworkPredictor net(params);
  SamplerConfig c;
  c.guidance = Guidance::kImproved;
  const MotionTensor ref = sample_improved_guided(net, s.actor, c, s.label, GuidanceContext::make(skel, s.actor));
  const InteractionSample other = generate_sample(sc, 1);
  double worst_sampler = 0.0;
  for (int h = 0; h + 1 < frames; h += 3) {
    MotionTensor actor = s.actor;
    actor.bottomRows(frames - h - 1) = other.actor.bottomRows(frames - h - 1);
    const MotionTensor out = sample_improved_guided(net, actor, c, s.label, GuidanceContext::make(skel, actor));
    worst_sampler = std::max(worst_sampler, max_abs(out.topRows(h + 1), ref.topRows(h + 1)));
  }
  return {worst_net < 1e-10 && worst_sampler < 1e-10,
          "max abs change of frames <= h: network " + fmt("%.2e", worst_net) + ", guided sampler " +
              fmt("%.2e", worst_sampler)};
}

// ---------------------------------------------------------------------------
// Shared trained model for the directional checks.

struct Trained {
  Skeleton skel;
  DatasetSplit split;
  TrainResult result;
  int steps_per_epoch = 1;
};

Trained train_default() {
  Trained t;
  ScenarioConfig sc;  // default dataset: seed 0, contact fraction 0.5
  t.skel = sc.skeleton;
  t.split = split_dataset(generate_dataset(sc, 2000));
  std::vector<PairedMotion> pairs;
  for (const auto& s : t.split.train) pairs.push_back({s.actor, s.reactor, s.label});
  PredictorConfig pc = default_model(t.skel, sc.frames);
  TrainConfig tc;  // 10k steps, batch 16
  t.steps_per_epoch = static_cast<int>((pairs.size() + tc.batch_size - 1) / tc.batch_size);
  t.result = train(pairs, pc, tc, t.skel, [](const StepRecord& r) {
    if (r.step % 1000 == 0) std::fprintf(stderr, "train step %d fm %.5f total %.5f\n", r.step, r.loss.fm, r.loss.total);
  });
  return t;
}

std::vector<MotionTensor> sample_all(const PredictorParams& params, const std::vector<InteractionSample>& suite,
                                     const Skeleton& skel, SamplerConfig cfg) {
  const NetworkPredictor net(params);
  std::vector<MotionTensor> out(suite.size());
  const std::uint64_t base_seed = cfg.seed;
  parallel_for(static_cast<int>(suite.size()), [&](int i) {
    SamplerConfig c = cfg;
    c.seed = derive_seed(base_seed, i);
    const GuidanceContext ctx = GuidanceContext::make(skel, suite[i].actor);
    out[i] = sample(net, suite[i].actor, c, cond_of(params, suite[i].label), &ctx);
  });
  return out;
}

Outcome guidance_efficacy(const Trained& t) {
  ScenarioConfig sc;
  sc.seed = 2024;
  sc.contact_fraction = 1.0;
  const auto suite = generate_dataset(sc, 200);
  auto stats = [&](Guidance g) {
    SamplerConfig c;
    c.guidance = g;
    const auto reactions = sample_all(t.result.params, suite, t.skel, c);
    std::vector<InteractionPair> pairs;
    for (std::size_t i = 0; i < suite.size(); ++i) pairs.push_back({suite[i].actor, reactions[i]});
    return penetration_stats(pairs, t.skel);
  };
  const PenetrationStats none = stats(Guidance::kNone);
  const PenetrationStats van = stats(Guidance::kVanilla);
  const PenetrationStats imp = stats(Guidance::kImproved);
  const bool ordered = imp.iv <= van.iv && van.iv <= none.iv && imp.if_ <= van.if_ && van.if_ <= none.if_;
  const bool reduced = none.iv > 0.0 && imp.iv <= 0.6 * none.iv;
  const double reduction = none.iv > 0.0 ? 100.0 * (1.0 - imp.iv / none.iv) : 0.0;
  std::ostringstream d;
  d << "IV cm3/frame unguided " << none.iv << ", vanilla " << van.iv << ", improved " << imp.iv << "; IF "
    << none.if_ << ", " << van.if_ << ", " << imp.if_ << "; improved IV reduction "
    << (none.iv > 0.0 ? fmt("%.1f%%", reduction) : std::string("undefined (unguided IV is 0)"));
  return {ordered && reduced, d.str()};
}

Outcome trainability(const Trained& t) {
  const auto& hist = t.result.history;
  const double initial = hist.front().loss.fm;
  const int tail = std::min<int>(t.steps_per_epoch, static_cast<int>(hist.size()));
  double final_epoch = 0.0;
  for (int i = static_cast<int>(hist.size()) - tail; i < static_cast<int>(hist.size()); ++i) final_epoch += hist[i].loss.fm;
  final_epoch /= tail;

  const auto& test = t.split.test;
  const auto reactions = sample_all(t.result.params, test, t.skel, SamplerConfig{});
  double err = 0.0;
  double baseline = 0.0;
  long rows = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    for (int h = 0; h < test[i].reactor.rows(); ++h) {
      err += (reactions[i].row(h) - test[i].reactor.row(h)).norm();
      baseline += (test[i].actor.row(h) - test[i].reactor.row(h)).norm();
      ++rows;
    }
  }
  err /= rows;
  baseline /= rows;
  const bool pass = final_epoch < 0.1 * initial && err < 0.5 * baseline;
  return {pass, "fm initial " + fmt("%.4f", initial) + ", final epoch mean " + fmt("%.5f", final_epoch) + " (" +
                    fmt("%.1f%%", 100 * final_epoch / initial) + "); endpoint error " + fmt("%.4f", err) +
                    " vs x0 baseline " + fmt("%.4f", baseline) + " (" + fmt("%.1f%%", 100 * err / baseline) +
                    ") on " + std::to_string(test.size()) + " test pairs"};
}

Outcome stochastic_diversity(const Trained& t) {
  const auto& test = t.split.test;
  const NetworkPredictor net(t.result.params);
  const int seeds = 20;
  std::vector<double> variance;
  for (double beta : {0.01, 0.02, 0.05}) {
    std::vector<double> per_sample(test.size());
    parallel_for(static_cast<int>(test.size()), [&](int i) {
      const GuidanceContext ctx = GuidanceContext::make(t.skel, test[i].actor);
      std::vector<MotionTensor> outs;
      for (int s = 0; s < seeds; ++s) {
        SamplerConfig c;
        c.guidance = Guidance::kImproved;
        c.beta = beta;
        c.seed = derive_seed(derive_seed(77, i), s);
        outs.push_back(sample_stochastic(net, test[i].actor, c, cond_of(t.result.params, test[i].label), &ctx));
      }
      MotionTensor mean = MotionTensor::Zero(outs[0].rows(), outs[0].cols());
      for (const auto& o : outs) mean += o;
      mean /= seeds;
      double v = 0.0;
      for (const auto& o : outs) v += (o - mean).squaredNorm();
      per_sample[i] = v / ((seeds - 1) * static_cast<double>(mean.size()));
    });
    double avg = 0.0;
    for (double v : per_sample) avg += v;
    variance.push_back(avg / per_sample.size());
  }
  const bool pass = variance[0] < variance[1] && variance[1] < variance[2];
  return {pass, "mean per-entry variance over 20 seeds: beta 0.01 " + fmt("%.3e", variance[0]) + ", 0.02 " +
                    fmt("%.3e", variance[1]) + ", 0.05 " + fmt("%.3e", variance[2])};
}

Outcome cli_determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "arflow_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto path = [&](const std::string& f) { return (dir / f).string(); };
  std::vector<std::string> sums[2];
  for (int rep = 0; rep < 2; ++rep) {
    const std::string tag = std::to_string(rep);
    const std::vector<std::vector<std::string>> cmds{
        {"gen-data", "--pairs", "300", "--seed", "9", "--out", path("d" + tag + ".jsonl")},
        {"train", "--data", path("d" + tag + ".jsonl"), "--out", path("m" + tag + ".txt"), "--steps", "300",
         "--seed", "4"},
        {"sample", "--model", path("m" + tag + ".txt"), "--data", path("d" + tag + ".jsonl"), "--out",
         path("s" + tag + ".jsonl"), "--guidance", "improved", "--beta", "0.02", "--seed", "6"},
    };
    for (const auto& cmd : cmds) {
      std::ostringstream out;
      std::ostringstream err;
      const int code = run_cli(cmd, out, err);
      if (code != 0) return {false, cmd[0] + " exited " + std::to_string(code) + ": " + err.str()};
    }
    for (const char* f : {"d", "m", "s"}) {
      const std::string ext = std::string(f) == "m" ? ".txt" : ".jsonl";
      sums[rep].push_back(file_sha256(path(f + tag + ext)));
    }
    sums[rep].push_back(file_sha256(path("m" + tag + ".txt.loss.csv")));
  }
  fs::remove_all(dir);
  const bool pass = sums[0] == sums[1];
  return {pass, std::string("dataset, model, loss curve and samples checksums ") + (pass ? "identical" : "differ") +
                    " across reruns (dataset " + sums[0][0].substr(0, 12) + ", samples " + sums[0][2].substr(0, 12) +
                    ")"};
}

}  // namespace

int main() {
  run_criterion(1, "algebraic equivalence", algebraic_equivalence);
  run_criterion(2, "oracle-predictor exactness", oracle_exactness);
  run_criterion(3, "reduction chain", reduction_chain);
  run_criterion(4, "gradient correctness", gradient_correctness);
  run_criterion(7, "metric unit checks", metric_units);
  run_criterion(8, "causality", causality);

  const auto start = std::chrono::steady_clock::now();
  std::optional<Trained> trained;
  std::string train_error;
  try {
    trained = train_default();
  } catch (const std::exception& e) {
    train_error = e.what();
  }
  const double train_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::fprintf(stderr, "shared training run: %.1f s\n", train_secs);
  auto with_model = [&](const std::function<Outcome(const Trained&)>& f) {
    return [&, f]() -> Outcome {
      if (!trained) return {false, "training failed: " + train_error};
      return f(*trained);
    };
  };
  run_criterion(5, "guidance efficacy", with_model(guidance_efficacy));
  run_criterion(6, "trainability", with_model([&](const Trained& t) {
                  Outcome o = trainability(t);
                  o.detail += "; training " + fmt("%.0f s", train_secs);
                  return o;
                }));
  run_criterion(10, "stochastic diversity", with_model(stochastic_diversity));
  run_criterion(9, "determinism", cli_determinism);

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "arflow/data.hpp"
#include "arflow/error.hpp"
#include "arflow/rotation.hpp"
#include "arflow/sampler.hpp"

namespace arflow {

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::kPushRetreat: return "push_retreat";
    case Scenario::kWaveMirror: return "wave_mirror";
    case Scenario::kKickDodge: return "kick_dodge";
  }
  return "push_retreat";
}

Scenario parse_scenario(const std::string& name) {
  if (name == "push_retreat") return Scenario::kPushRetreat;
  if (name == "wave_mirror") return Scenario::kWaveMirror;
  if (name == "kick_dodge") return Scenario::kKickDodge;
  throw Error(ErrorCode::kInvalidConfig, "unknown scenario '" + name + "'");
}

Skeleton desk_skeleton(int joints) {
  if (joints < 5) throw Error(ErrorCode::kInvalidConfig, "desk skeleton needs at least 5 joints");
  Skeleton s = Skeleton::desk_default();
  for (int j = 5; j < joints; ++j) {
    s.parent.push_back(j - 1);
    s.bone_offset.emplace_back(0.0, -0.08, 0.0);
    s.capsule_radius.push_back(0.03);
  }
  return s;
}

void ScenarioConfig::validate() const {
  if (scenarios.empty()) throw Error(ErrorCode::kInvalidConfig, "no scenarios selected");
  if (frames < 2) throw Error(ErrorCode::kInvalidConfig, "frames must be >= 2");
  if (!(contact_fraction >= 0.0 && contact_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "contact fraction must lie in [0, 1]");
  }
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) {
    throw Error(ErrorCode::kInvalidConfig, "noise scale must be finite and >= 0");
  }
  if (!(fps > 0.0)) throw Error(ErrorCode::kInvalidConfig, "fps must be positive");
  skeleton.validate();
  if (skeleton.joint_count() < 5) {
    throw Error(ErrorCode::kInvalidConfig, "scripted scenarios drive joints 0-4; skeleton has " +
                                               std::to_string(skeleton.joint_count()));
  }
}

namespace {

constexpr int kPelvis = 0;
constexpr int kChest = 1;
constexpr int kShoulder = 3;

double smoothstep(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

Eigen::Matrix3d rot_x(double a) { return axis_angle_matrix(Eigen::Vector3d::UnitX(), a); }
Eigen::Matrix3d rot_y(double a) { return axis_angle_matrix(Eigen::Vector3d::UnitY(), a); }
Eigen::Matrix3d rot_z(double a) { return axis_angle_matrix(Eigen::Vector3d::UnitZ(), a); }

struct Pose {
  std::vector<Eigen::Matrix3d> local;
  Eigen::Matrix3d root = Eigen::Matrix3d::Identity();
  Eigen::Vector3d trans = Eigen::Vector3d::Zero();

  explicit Pose(int joints) : local(joints, Eigen::Matrix3d::Identity()) {}
};

BodyPoseFrame encode(const Pose& p) {
  BodyPoseFrame f;
  f.joint_rot.reserve(p.local.size());
  for (const auto& m : p.local) f.joint_rot.push_back(rot6d_encode(m));
  f.root_rot = rot6d_encode(p.root);
  f.root_trans = p.trans;
  return f;
}

Eigen::Matrix3d small_rotation(std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  const Eigen::Vector3d v(n(rng), n(rng), n(rng));
  const double angle = v.norm();
  if (angle == 0.0) return Eigen::Matrix3d::Identity();
  return axis_angle_matrix(v / angle, angle);
}

// Draws shared by every scenario, in a fixed order so that sample_in_contact
// can replay the first one.
struct Layout {
  bool contact;
  Scenario scenario;
  double heading;
  Eigen::Vector3d forward;
  Eigen::Vector3d left;
  Eigen::Vector3d actor_start;
  Eigen::Vector3d reactor_start;
  double onset;
};

Layout draw_layout(const ScenarioConfig& cfg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Layout l{};
  l.contact = unit(rng) < cfg.contact_fraction;
  std::uniform_int_distribution<std::size_t> pick(0, cfg.scenarios.size() - 1);
  l.scenario = cfg.scenarios[pick(rng)];
  l.heading = -0.5 + unit(rng);
  l.forward = Eigen::Vector3d(std::cos(l.heading), std::sin(l.heading), 0.0);
  l.left = Eigen::Vector3d(-std::sin(l.heading), std::cos(l.heading), 0.0);
  // The separation is a function of the actor's start offset u, so the
  // reactor placement is recoverable from the actor alone. Contact range
  // puts the torsos 0.4-0.6 m apart; the far range keeps every bone clear
  // of the other body whatever the scripts do. u + t * d increases with u
  // for every t in [0, 1], so the two ranges stay apart on every
  // interpolated state as well.
  double u;
  double d;
  if (l.contact) {
    u = 0.5 * unit(rng);
    d = 0.4 + 0.4 * u;
  } else {
    u = 0.6 + 0.5 * unit(rng);
    d = 2.3 + 0.5 * (u - 0.6);
  }
  l.actor_start = u * l.forward;
  l.reactor_start = l.actor_start + d * l.forward;
  l.onset = 0.25 * unit(rng);
  return l;
}

}  // namespace

bool sample_in_contact(const ScenarioConfig& cfg, std::uint64_t index) {
  std::mt19937_64 rng(derive_seed(cfg.seed, index));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return unit(rng) < cfg.contact_fraction;
}

InteractionSample generate_sample(const ScenarioConfig& cfg, std::uint64_t index) {
  cfg.validate();
  InteractionSample out;
  out.seed_used = derive_seed(cfg.seed, index);
  std::mt19937_64 rng(out.seed_used);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Layout lay = draw_layout(cfg, rng);
  out.label = static_cast<int>(lay.scenario);

  const int joints = cfg.skeleton.joint_count();
  const int frames = cfg.frames;
  const double pi = std::numbers::pi;
  const Eigen::Matrix3d actor_root = rot_z(lay.heading);
  const Eigen::Matrix3d reactor_root = rot_z(lay.heading + pi);
  auto progress = [&lay](double x) { return smoothstep((x - lay.onset) / 0.6); };

  // Scenario parameters, drawn before any frame is built.
  double approach = 0.0;
  double swing = 0.0;
  double raise = 0.0;
  double wave_amp = 0.0;
  double wave_freq = 0.0;
  double wave_phase = 0.0;
  switch (lay.scenario) {
    case Scenario::kPushRetreat:
      approach = 0.15 + 0.2 * unit(rng);
      swing = 1.2 + 0.4 * unit(rng);
      break;
    case Scenario::kWaveMirror:
      raise = 0.6 + 0.4 * unit(rng);
      wave_amp = 0.3 + 0.3 * unit(rng);
      wave_freq = 1.5 + unit(rng);
      wave_phase = 2.0 * pi * unit(rng);
      break;
    case Scenario::kKickDodge:
      approach = 0.1 + 0.2 * unit(rng);
      swing = 1.2 + 0.4 * unit(rng);
      break;
  }

  out.actor.resize(frames, cfg.skeleton.frame_dim());
  out.reactor.resize(frames, cfg.skeleton.frame_dim());
  for (int h = 0; h < frames; ++h) {
    const double s = static_cast<double>(h) / (frames - 1);
    Pose actor(joints);
    Pose reactor(joints);
    actor.root = actor_root;
    reactor.root = reactor_root;
    actor.trans = lay.actor_start;
    reactor.trans = lay.reactor_start;
    switch (lay.scenario) {
      case Scenario::kPushRetreat: {
        const double g = progress(s);
        const double lag = progress(s - 0.15);
        actor.trans += approach * g * lay.forward;
        actor.local[kChest] = rot_z(0.35 * g);
        actor.local[kShoulder] = rot_z(swing * g);
        reactor.trans += 1.2 * approach * lag * lay.forward;
        reactor.local[kPelvis] = rot_y(-0.3 * lag);
        break;
      }
      case Scenario::kWaveMirror: {
        const double a = raise + wave_amp * std::sin(2.0 * pi * wave_freq * s + wave_phase);
        const double b = raise + wave_amp * std::sin(2.0 * pi * wave_freq * (s - 0.1) + wave_phase);
        actor.local[kShoulder] = rot_x(-a);
        reactor.local[kShoulder] = rot_x(-b);
        break;
      }
      case Scenario::kKickDodge: {
        const double g = progress(s);
        const double lag = progress(s - 0.25);
        actor.trans += approach * g * lay.forward;
        actor.local[kPelvis] = rot_y(0.25 * g);
        actor.local[kChest] = rot_z(0.35 * g);
        actor.local[kShoulder] = rot_z(swing * g) * rot_x(0.6 * g);
        reactor.trans += (0.4 + approach) * lag * lay.left;
        reactor.local[kPelvis] = rot_x(-0.2 * lag);
        break;
      }
    }
    if (cfg.noise_scale > 0.0) {
      std::normal_distribution<double> n(0.0, cfg.noise_scale);
      for (auto& m : reactor.local) m = m * small_rotation(rng, cfg.noise_scale);
      reactor.root = reactor.root * small_rotation(rng, cfg.noise_scale);
      for (int i = 0; i < 3; ++i) reactor.trans[i] += n(rng);
    }
    set_motion_frame(out.actor, h, encode(actor));
    set_motion_frame(out.reactor, h, encode(reactor));
  }
  return out;
}

std::vector<InteractionSample> generate_dataset(const ScenarioConfig& cfg, int count) {
  cfg.validate();
  if (count < 1) throw Error(ErrorCode::kInvalidConfig, "sample count must be >= 1");
  std::vector<InteractionSample> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(generate_sample(cfg, static_cast<std::uint64_t>(i)));
  return out;
}

Eigen::Vector3d root_position(const MotionTensor& motion, const Skeleton& skel, int h) {
  const MotionLayout layout{skel.joint_count()};
  return motion.row(h).segment<3>(layout.root_trans()).transpose();
}

DatasetSplit split_dataset(const std::vector<InteractionSample>& samples) {
  DatasetSplit split;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    (i % 10 == 9 ? split.test : split.train).push_back(samples[i]);
  }
  return split;
}

}  // namespace arflow

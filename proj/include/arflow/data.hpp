#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "arflow/motion.hpp"
#include "arflow/skeleton.hpp"

namespace arflow {

enum class Scenario { kPushRetreat = 0, kWaveMirror = 1, kKickDodge = 2 };

inline constexpr int kScenarioCount = 3;

const char* scenario_name(Scenario s);
Scenario parse_scenario(const std::string& name);

/// Desk skeleton with `joints` >= 5 joints: the default five-joint upper body,
/// with any extra joints continuing the arm past the hand.
Skeleton desk_skeleton(int joints);

struct ScenarioConfig {
  /// Scenarios drawn uniformly per sample; the label is the scenario id.
  std::vector<Scenario> scenarios{Scenario::kPushRetreat, Scenario::kWaveMirror, Scenario::kKickDodge};
  int frames = 16;
  Skeleton skeleton = Skeleton::desk_default();
  double noise_scale = 0.005;
  /// Share of samples placed at near-contact range (expected value).
  double contact_fraction = 0.5;
  double fps = 20.0;
  std::uint64_t seed = 0;

  /// Throws InvalidConfig.
  void validate() const;
};

struct InteractionSample {
  MotionTensor actor;
  MotionTensor reactor;
  int label = 0;
  std::uint64_t seed_used = 0;

  bool operator==(const InteractionSample& o) const {
    return label == o.label && seed_used == o.seed_used && actor.rows() == o.actor.rows() &&
           actor.cols() == o.actor.cols() && reactor.rows() == o.reactor.rows() &&
           reactor.cols() == o.reactor.cols() && actor == o.actor && reactor == o.reactor;
  }
};

/// Scripted actor motions with deterministic reactor responses plus seeded
/// pose noise. Sample i uses seed derive_seed(cfg.seed, i). Throws InvalidConfig.
std::vector<InteractionSample> generate_dataset(const ScenarioConfig& cfg, int count);

/// One sample of the dataset above, regenerated on its own.
InteractionSample generate_sample(const ScenarioConfig& cfg, std::uint64_t index);

/// Was sample `index` placed at contact range.
bool sample_in_contact(const ScenarioConfig& cfg, std::uint64_t index);

/// Root position at frame h.
Eigen::Vector3d root_position(const MotionTensor& motion, const Skeleton& skel, int h);

struct DatasetSplit {
  std::vector<InteractionSample> train;
  std::vector<InteractionSample> test;
};

/// Every tenth sample (index % 10 == 9) goes to test.
DatasetSplit split_dataset(const std::vector<InteractionSample>& samples);

/// A dataset file: one shared skeleton and frame rate, one record per line.
struct MotionFile {
  Skeleton skeleton;
  double fps = 20.0;
  std::vector<InteractionSample> samples;
};

inline constexpr int kMotionFormatVersion = 1;

/// Throws IoError.
void save_motions(const std::string& path, const MotionFile& file);
std::string serialize_motions(const MotionFile& file);

/// Throws IoError, SchemaError (naming the line / record).
MotionFile load_motions(const std::string& path);
MotionFile parse_motions(const std::string& text);

}  // namespace arflow

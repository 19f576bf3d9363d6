#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "arflow/motion.hpp"
#include "arflow/predictor.hpp"
#include "arflow/skeleton.hpp"
#include "arflow/voxel.hpp"

namespace arflow {

/// Version tag of the metric formulas written into every report.
inline constexpr const char* kMetricFormulaVersion = "arflow-metrics/1";

/// Cubic meters to cubic centimeters; IV is reported in cm^3 per frame.
inline constexpr double kCubicCentimetersPerCubicMeter = 1e6;

struct InteractionPair {
  MotionTensor actor;
  MotionTensor reactor;
};

struct PenetrationStats {
  double iv = 0.0;  // mean per-frame intersection volume, cm^3
  double if_ = 0.0; // share of frames with nonzero intersection
  std::int64_t n_total = 0;  // samples
  std::int64_t f_total = 0;  // frames across all samples
  std::int64_t f_pene = 0;   // frames with nonzero intersection
  double volume_sum = 0.0;   // sum of per-frame volumes, cm^3
};

/// Per-frame intersection volumes (cm^3) of one pair.
std::vector<double> frame_intersection_volumes(const InteractionPair& pair, const Skeleton& skel, double voxel_size);

/// IV and IF together from one voxelization pass. All samples must share H.
/// Throws EmptyInput, DimensionMismatch.
PenetrationStats penetration_stats(const std::vector<InteractionPair>& samples, const Skeleton& skel,
                                   double voxel_size = kDefaultVoxelSize);

/// IV = (1 / (H * N_total)) * sum over samples and frames of V_pene, in cm^3.
double intersection_volume(const std::vector<InteractionPair>& samples, const Skeleton& skel,
                           double voxel_size = kDefaultVoxelSize);

/// IF = f_pene / F_total.
double intersection_frequency(const std::vector<InteractionPair>& samples, const Skeleton& skel,
                              double voxel_size = kDefaultVoxelSize);

/// Row-per-sample feature matrix.
using FeatureSet = Eigen::MatrixXd;

inline constexpr double kFidCovarianceRegularization = 1e-6;

/// Frechet distance between Gaussian fits of two feature sets:
/// |mu_a - mu_b|^2 + Tr(S_a + S_b - 2 (S_a S_b)^(1/2)), with 1e-6 I added
/// to both covariances. Throws DimensionMismatch, InsufficientSamples.
double fid(const FeatureSet& a, const FeatureSet& b);

inline constexpr int kDiversitySubset = 200;
inline constexpr int kMultimodalitySubset = 20;

/// Two disjoint random subsets of `subset` rows (or drawn with replacement
/// when allowed), mean Euclidean distance between paired rows.
double diversity(const FeatureSet& features, int subset, std::uint64_t seed, bool with_replacement = false);

/// Per-class diversity with subset size `subset`, averaged over classes.
double multimodality(const std::vector<FeatureSet>& features_by_class, int subset, std::uint64_t seed,
                     bool with_replacement = false);

/// The index pairs diversity() compares, exposed for inspection.
std::vector<std::pair<int, int>> diversity_pairs(int count, int subset, std::uint64_t seed, bool with_replacement);

enum class FeatureKind { kFlatten, kRandomProjection, kPredictorLatent };

struct FeatureExtractor {
  FeatureKind kind = FeatureKind::kFlatten;
  std::uint64_t seed = 0;  // random_projection
  int out_dim = 32;        // random_projection
  const PredictorParams* predictor = nullptr;  // predictor_latent

  static FeatureExtractor flatten() { return {}; }
  static FeatureExtractor random_projection(std::uint64_t seed, int out_dim) {
    return {FeatureKind::kRandomProjection, seed, out_dim, nullptr};
  }
  static FeatureExtractor predictor_latent(const PredictorParams& params) {
    return {FeatureKind::kPredictorLatent, 0, 0, &params};
  }
};

FeatureKind parse_feature_kind(const std::string& name);
const char* feature_kind_name(FeatureKind kind);

/// flatten: per-motion concatenation of FK joint positions (H * K * 3).
/// random_projection: seeded Gaussian map of the flattened vector.
/// predictor_latent: mean-pooled final hidden state of the predictor at t = 1.
FeatureSet extract_features(const std::vector<MotionTensor>& motions, const Skeleton& skel,
                            const FeatureExtractor& extractor);

struct MetricReport {
  std::optional<double> iv;
  std::optional<double> if_;
  std::optional<double> fid;
  std::optional<double> diversity;
  std::optional<double> multimodality;
  std::int64_t n_total = 0;
  std::int64_t f_total = 0;
  std::int64_t f_pene = 0;
  double voxel_size = kDefaultVoxelSize;
  std::string feature_extractor = "flatten";
  std::string formula_version = kMetricFormulaVersion;
};

/// key=value lines, documented in docs/formats.md.
std::string format_report(const MetricReport& report);
MetricReport parse_report(const std::string& text);

}  // namespace arflow

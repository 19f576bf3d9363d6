#include <cmath>
#include <random>

#include "arflow/error.hpp"
#include "arflow/kinematics.hpp"
#include "arflow/metrics.hpp"

namespace arflow {

namespace {

Eigen::RowVectorXd flatten_positions(const MotionTensor& motion, const Skeleton& skel) {
  check_motion(motion, skel);
  const int k = skel.joint_count();
  Eigen::RowVectorXd out(motion.rows() * k * 3);
  Eigen::Index col = 0;
  for (int h = 0; h < motion.rows(); ++h) {
    for (const auto& p : motion_joint_positions(skel, motion, h)) {
      out.segment<3>(col) = p.transpose();
      col += 3;
    }
  }
  return out;
}

Eigen::MatrixXd projection_matrix(std::uint64_t seed, Eigen::Index in_dim, int out_dim) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(in_dim, out_dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(out_dim));
  for (Eigen::Index i = 0; i < in_dim; ++i) {
    for (int j = 0; j < out_dim; ++j) m(i, j) = normal(rng) * scale;
  }
  return m;
}

}  // namespace

FeatureSet extract_features(const std::vector<MotionTensor>& motions, const Skeleton& skel,
                            const FeatureExtractor& extractor) {
  if (motions.empty()) return FeatureSet(0, 0);
  const Eigen::Index frames = motions.front().rows();
  for (const auto& m : motions) {
    if (m.rows() != frames) throw Error(ErrorCode::kDimensionMismatch, "motions differ in frame count");
  }

  if (extractor.kind == FeatureKind::kPredictorLatent) {
    if (extractor.predictor == nullptr) {
      throw Error(ErrorCode::kInvalidConfig, "predictor_latent extractor needs a predictor");
    }
    const int width = extractor.predictor->config.width;
    FeatureSet out(static_cast<Eigen::Index>(motions.size()), width);
    for (std::size_t i = 0; i < motions.size(); ++i) {
      out.row(static_cast<Eigen::Index>(i)) = predictor_latent(*extractor.predictor, motions[i], 1.0, std::nullopt);
    }
    return out;
  }

  const Eigen::Index flat_dim = frames * skel.joint_count() * 3;
  FeatureSet flat(static_cast<Eigen::Index>(motions.size()), flat_dim);
  for (std::size_t i = 0; i < motions.size(); ++i) {
    flat.row(static_cast<Eigen::Index>(i)) = flatten_positions(motions[i], skel);
  }
  if (extractor.kind == FeatureKind::kFlatten) return flat;

  if (extractor.out_dim < 1) throw Error(ErrorCode::kInvalidConfig, "projection dimension must be >= 1");
  return flat * projection_matrix(extractor.seed, flat_dim, extractor.out_dim);
}

}  // namespace arflow

#include "arflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "arflow/capsule.hpp"
#include "arflow/error.hpp"
#include "arflow/fileio.hpp"

namespace arflow {

std::vector<double> frame_intersection_volumes(const InteractionPair& pair, const Skeleton& skel,
                                               double voxel_size) {
  check_motion(pair.actor, skel);
  check_motion(pair.reactor, skel);
  if (pair.actor.rows() != pair.reactor.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "actor and reactor frame counts differ");
  }
  std::vector<double> out(pair.actor.rows());
  for (int h = 0; h < pair.actor.rows(); ++h) {
    const CapsuleSet a = body_capsules(skel, pair.actor, h);
    const CapsuleSet b = body_capsules(skel, pair.reactor, h);
    out[h] = body_intersection_volume(a, b, voxel_size) * kCubicCentimetersPerCubicMeter;
  }
  return out;
}

PenetrationStats penetration_stats(const std::vector<InteractionPair>& samples, const Skeleton& skel,
                                   double voxel_size) {
  if (samples.empty()) throw Error(ErrorCode::kEmptyInput, "no samples to evaluate");
  const Eigen::Index h = samples.front().actor.rows();
  PenetrationStats s;
  for (const auto& pair : samples) {
    if (pair.actor.rows() != h) throw Error(ErrorCode::kDimensionMismatch, "samples differ in frame count");
    for (double v : frame_intersection_volumes(pair, skel, voxel_size)) {
      s.volume_sum += v;
      if (v > 0.0) ++s.f_pene;
      ++s.f_total;
    }
    ++s.n_total;
  }
  s.iv = s.volume_sum / (static_cast<double>(h) * static_cast<double>(s.n_total));
  s.if_ = static_cast<double>(s.f_pene) / static_cast<double>(s.f_total);
  return s;
}

double intersection_volume(const std::vector<InteractionPair>& samples, const Skeleton& skel, double voxel_size) {
  return penetration_stats(samples, skel, voxel_size).iv;
}

double intersection_frequency(const std::vector<InteractionPair>& samples, const Skeleton& skel,
                              double voxel_size) {
  return penetration_stats(samples, skel, voxel_size).if_;
}

namespace {

void covariance(const FeatureSet& x, Eigen::VectorXd& mean, Eigen::MatrixXd& cov) {
  mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - mean.transpose();
  cov = centered.transpose() * centered / static_cast<double>(x.rows() - 1);
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::kDegenerateCovariance, "eigendecomposition failed");
  }
  const Eigen::VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double fid(const FeatureSet& a, const FeatureSet& b) {
  if (a.cols() != b.cols() || a.cols() == 0) throw Error(ErrorCode::kDimensionMismatch, "feature dimensions differ");
  if (a.rows() < 2 || b.rows() < 2) throw Error(ErrorCode::kInsufficientSamples, "fid needs >= 2 vectors per set");
  if (!a.allFinite() || !b.allFinite()) throw Error(ErrorCode::kDegenerateCovariance, "non-finite features");
  Eigen::VectorXd mu_a;
  Eigen::VectorXd mu_b;
  Eigen::MatrixXd cov_a;
  Eigen::MatrixXd cov_b;
  covariance(a, mu_a, cov_a);
  covariance(b, mu_b, cov_b);
  const Eigen::MatrixXd reg = kFidCovarianceRegularization * Eigen::MatrixXd::Identity(a.cols(), a.cols());
  cov_a += reg;
  cov_b += reg;

  // Tr((S_a S_b)^(1/2)) = Tr((S_a^(1/2) S_b S_a^(1/2))^(1/2)); the inner form is symmetric PSD.
  const Eigen::MatrixXd root_a = psd_sqrt(cov_a);
  Eigen::MatrixXd inner = root_a * cov_b * root_a;
  inner = 0.5 * (inner + inner.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inner, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::kDegenerateCovariance, "eigendecomposition failed");
  const double tr_cross = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();

  const double value = (mu_a - mu_b).squaredNorm() + cov_a.trace() + cov_b.trace() - 2.0 * tr_cross;
  return std::max(0.0, value);
}

std::vector<std::pair<int, int>> diversity_pairs(int count, int subset, std::uint64_t seed, bool with_replacement) {
  if (subset < 1) throw Error(ErrorCode::kInvalidConfig, "subset size must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<std::pair<int, int>> pairs(subset);
  if (with_replacement) {
    if (count < 1) throw Error(ErrorCode::kInsufficientSamples, "no features");
    std::uniform_int_distribution<int> pick(0, count - 1);
    for (auto& p : pairs) {
      p.first = pick(rng);
      p.second = pick(rng);
    }
    return pairs;
  }
  if (count < 2 * subset) {
    throw Error(ErrorCode::kInsufficientSamples, std::to_string(count) + " features, need " +
                                                     std::to_string(2 * subset) + " for two disjoint subsets");
  }
  std::vector<int> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (int i = 0; i < subset; ++i) pairs[i] = {order[i], order[subset + i]};
  return pairs;
}

double diversity(const FeatureSet& features, int subset, std::uint64_t seed, bool with_replacement) {
  const auto pairs = diversity_pairs(static_cast<int>(features.rows()), subset, seed, with_replacement);
  double total = 0.0;
  for (const auto& [i, j] : pairs) total += (features.row(i) - features.row(j)).norm();
  return total / static_cast<double>(subset);
}

double multimodality(const std::vector<FeatureSet>& features_by_class, int subset, std::uint64_t seed,
                     bool with_replacement) {
  if (features_by_class.empty()) throw Error(ErrorCode::kEmptyInput, "no classes");
  double total = 0.0;
  for (std::size_t c = 0; c < features_by_class.size(); ++c) {
    total += diversity(features_by_class[c], subset, seed + c, with_replacement);
  }
  return total / static_cast<double>(features_by_class.size());
}

FeatureKind parse_feature_kind(const std::string& name) {
  if (name == "flatten") return FeatureKind::kFlatten;
  if (name == "random_projection") return FeatureKind::kRandomProjection;
  if (name == "predictor_latent") return FeatureKind::kPredictorLatent;
  throw Error(ErrorCode::kInvalidConfig, "unknown feature extractor '" + name + "'");
}

const char* feature_kind_name(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kFlatten: return "flatten";
    case FeatureKind::kRandomProjection: return "random_projection";
    case FeatureKind::kPredictorLatent: return "predictor_latent";
  }
  return "flatten";
}

std::string format_report(const MetricReport& r) {
  std::ostringstream out;
  out << "formula_version=" << r.formula_version << '\n';
  out << "voxel_size_m=" << format_double(r.voxel_size) << '\n';
  out << "feature_extractor=" << r.feature_extractor << '\n';
  out << "n_total=" << r.n_total << '\n';
  out << "f_total=" << r.f_total << '\n';
  out << "f_pene=" << r.f_pene << '\n';
  auto opt = [&out](const char* key, const std::optional<double>& v) {
    if (v) out << key << '=' << format_double(*v) << '\n';
  };
  opt("iv_cm3_per_frame", r.iv);
  opt("if", r.if_);
  opt("fid", r.fid);
  opt("diversity", r.diversity);
  opt("multimodality", r.multimodality);
  return out.str();
}

MetricReport parse_report(const std::string& text) {
  MetricReport r;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kSchemaError, "report line " + std::to_string(line_no) + " has no '='");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    try {
      if (key == "formula_version") r.formula_version = value;
      else if (key == "voxel_size_m") r.voxel_size = std::stod(value);
      else if (key == "feature_extractor") r.feature_extractor = value;
      else if (key == "n_total") r.n_total = std::stoll(value);
      else if (key == "f_total") r.f_total = std::stoll(value);
      else if (key == "f_pene") r.f_pene = std::stoll(value);
      else if (key == "iv_cm3_per_frame") r.iv = std::stod(value);
      else if (key == "if") r.if_ = std::stod(value);
      else if (key == "fid") r.fid = std::stod(value);
      else if (key == "diversity") r.diversity = std::stod(value);
      else if (key == "multimodality") r.multimodality = std::stod(value);
      else throw Error(ErrorCode::kSchemaError, "unknown key '" + key + "'");
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kSchemaError, "report line " + std::to_string(line_no) + ": bad value");
    }
  }
  return r;
}

}  // namespace arflow

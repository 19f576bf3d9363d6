#include <algorithm>
#include <string>
#include <vector>

#include "arflow/error.hpp"
#include "arflow/kinematics.hpp"
#include "arflow/kinematics_core.hpp"
#include "arflow/sampler.hpp"

namespace arflow {

GuidanceContext GuidanceContext::make(const Skeleton& skel, const MotionTensor& actor) {
  skel.validate();
  check_motion(actor, skel);
  GuidanceContext ctx{skel, actor, {}};
  ctx.actor_capsules.reserve(actor.rows());
  for (int h = 0; h < actor.rows(); ++h) ctx.actor_capsules.push_back(body_capsules(skel, actor, h));
  return ctx;
}

namespace {

void check_reaction(const MotionTensor& reaction, const GuidanceContext& ctx, double zeta) {
  check_motion(reaction, ctx.skel);
  if (reaction.rows() != static_cast<Eigen::Index>(ctx.actor_capsules.size())) {
    throw Error(ErrorCode::kDimensionMismatch, "reaction has " + std::to_string(reaction.rows()) +
                                                   " frames, guidance context has " +
                                                   std::to_string(ctx.actor_capsules.size()));
  }
  if (!(zeta > 0.0)) throw Error(ErrorCode::kInvalidConfig, "zeta must be > 0");
}

}  // namespace

double penetration_loss(const MotionTensor& reaction, const GuidanceContext& ctx, double zeta) {
  check_reaction(reaction, ctx, zeta);
  double loss = 0.0;
  for (int h = 0; h < reaction.rows(); ++h) {
    for (const Eigen::Vector3d& p : motion_joint_positions(ctx.skel, reaction, h)) {
      loss -= std::min(body_sdf(p, ctx.actor_capsules[h]), zeta);
    }
  }
  return loss;
}

MotionTensor penetration_grad(const MotionTensor& reaction, const GuidanceContext& ctx, double zeta) {
  check_reaction(reaction, ctx, zeta);
  const int d = static_cast<int>(reaction.cols());
  MotionTensor grad = MotionTensor::Zero(reaction.rows(), reaction.cols());
  for (int h = 0; h < reaction.rows(); ++h) {
    const CapsuleSet& body = ctx.actor_capsules[h];
    ad::ScalarTape tape;
    std::vector<ad::Real> row;
    row.reserve(d);
    for (int c = 0; c < d; ++c) row.push_back(tape.variable(reaction(h, c)));
    const kin::Pose<ad::Real> pose = kin::forward(ctx.skel, row.data());

    // d/dp of -min(sdf(p), zeta) is -grad sdf(p) below zeta, zero at or above.
    ad::Real objective(0.0);
    bool active = false;
    for (const auto& joint : pose.position) {
      const Eigen::Vector3d p(joint[0].v, joint[1].v, joint[2].v);
      if (body_sdf(p, body) >= zeta) continue;
      const Eigen::Vector3d n = body_sdf_gradient(p, body);
      objective -= joint[0] * n.x() + joint[1] * n.y() + joint[2] * n.z();
      active = true;
    }
    if (!active) continue;
    const std::vector<double> adj = tape.gradient(objective);
    for (int c = 0; c < d; ++c) grad(h, c) = adj[row[c].id];
  }
  return grad;
}

}  // namespace arflow

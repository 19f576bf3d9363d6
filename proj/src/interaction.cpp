#include "arflow/flowpath.hpp"

#include <vector>

#include "arflow/error.hpp"
#include "arflow/kinematics_core.hpp"

namespace arflow {

namespace {

template <class T>
struct FrameTerms {
  T position{0.0};
  T orientation{0.0};
  T translation{0.0};
};

// Relative quantities against the actor: joint position differences,
// R_reactor * R_actor^T per joint, and root translation differences.
template <class T>
FrameTerms<T> frame_terms(const Skeleton& skel, const T* pred_row, const double* gt_row, const double* actor_row) {
  const int k = skel.joint_count();
  const kin::Pose<T> pred = kin::forward(skel, pred_row);
  const kin::Pose<double> gt = kin::forward(skel, gt_row);
  const kin::Pose<double> actor = kin::forward(skel, actor_row);

  FrameTerms<T> out;
  for (int j = 0; j < k; ++j) {
    for (int a = 0; a < 3; ++a) {
      const T rel_pred = pred.position[j][a] - T(actor.position[j][a]);
      const double rel_gt = gt.position[j][a] - actor.position[j][a];
      const T d = T(rel_gt) - rel_pred;
      out.position += d * d;
    }
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        // (R * A^T)(r, c) = sum_i R(r, i) * A(c, i)
        T rel_pred{0.0};
        double rel_gt = 0.0;
        for (int i = 0; i < 3; ++i) {
          const double a_ci = actor.world_rot[j][3 * c + i];
          rel_pred += pred.world_rot[j][3 * r + i] * T(a_ci);
          rel_gt += gt.world_rot[j][3 * r + i] * a_ci;
        }
        const T d = T(rel_gt) - rel_pred;
        out.orientation += d * d;
      }
    }
  }
  const int tr = 6 * k + 6;
  for (int a = 0; a < 3; ++a) {
    const T d = T(gt_row[tr + a] - actor_row[tr + a]) - (pred_row[tr + a] - T(actor_row[tr + a]));
    out.translation += d * d;
  }
  return out;
}

void check_inputs(const MotionTensor& pred_x1, const MotionTensor& gt_x1, const MotionTensor& x0,
                  const Skeleton& skel) {
  check_motion(pred_x1, skel);
  if (gt_x1.rows() != pred_x1.rows() || gt_x1.cols() != pred_x1.cols() || x0.rows() != pred_x1.rows() ||
      x0.cols() != pred_x1.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "interaction loss inputs differ in shape");
  }
}

std::vector<double> row_of(const MotionTensor& m, int h) {
  std::vector<double> row(m.cols());
  for (int c = 0; c < m.cols(); ++c) row[c] = m(h, c);
  return row;
}

}  // namespace

InteractionTerms interaction_terms(const MotionTensor& pred_x1, const MotionTensor& gt_x1, const MotionTensor& x0,
                                   const Skeleton& skel) {
  check_inputs(pred_x1, gt_x1, x0, skel);
  const double inv_h = 1.0 / static_cast<double>(pred_x1.rows());
  InteractionTerms out;
  for (int h = 0; h < pred_x1.rows(); ++h) {
    const auto pred = row_of(pred_x1, h);
    const auto gt = row_of(gt_x1, h);
    const auto actor = row_of(x0, h);
    const FrameTerms<double> f = frame_terms<double>(skel, pred.data(), gt.data(), actor.data());
    out.position += f.position * inv_h;
    out.orientation += f.orientation * inv_h;
    out.translation += f.translation * inv_h;
  }
  return out;
}

double interaction_loss(const MotionTensor& pred_x1, const MotionTensor& gt_x1, const MotionTensor& x0,
                        const Skeleton& skel) {
  return interaction_terms(pred_x1, gt_x1, x0, skel).total();
}

InteractionGradient interaction_loss_grad(const MotionTensor& pred_x1, const MotionTensor& gt_x1,
                                          const MotionTensor& x0, const Skeleton& skel) {
  check_inputs(pred_x1, gt_x1, x0, skel);
  const int d = static_cast<int>(pred_x1.cols());
  const double inv_h = 1.0 / static_cast<double>(pred_x1.rows());
  InteractionGradient out;
  out.grad = MotionTensor::Zero(pred_x1.rows(), pred_x1.cols());
  for (int h = 0; h < pred_x1.rows(); ++h) {
    ad::ScalarTape tape;
    std::vector<ad::Real> vars;
    vars.reserve(d);
    for (int c = 0; c < d; ++c) vars.push_back(tape.variable(pred_x1(h, c)));
    const auto gt = row_of(gt_x1, h);
    const auto actor = row_of(x0, h);
    const FrameTerms<ad::Real> f = frame_terms<ad::Real>(skel, vars.data(), gt.data(), actor.data());
    const ad::Real total = f.position + f.orientation + f.translation;
    out.loss += total.v * inv_h;
    const std::vector<double> adj = tape.gradient(total);
    for (int c = 0; c < d; ++c) out.grad(h, c) = adj[vars[c].id] * inv_h;
  }
  return out;
}

}  // namespace arflow

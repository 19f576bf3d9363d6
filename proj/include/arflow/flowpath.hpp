#pragma once

#include "arflow/motion.hpp"
#include "arflow/skeleton.hpp"

namespace arflow {

/// Flow time in [0, 1]. Construction outside the interval throws InvalidConfig.
class FlowTime {
 public:
  explicit FlowTime(double t);
  double value() const { return t_; }

 private:
  double t_;
};

inline constexpr double kDefaultSigmaMin = 1e-4;

/// Divisions by 1 - (1 - sigma_min) t are refused when the denominator is at or below this.
inline constexpr double kSingularGuard = 1e-9;

/// 1 - (1 - sigma_min) t: the weight of x0 on the path at time t.
double path_x0_weight(double t, double sigma_min);

/// x_t = t x1 + (1 - (1 - sigma_min) t) x0.
MotionTensor interpolate(const MotionTensor& x0, const MotionTensor& x1, FlowTime t, double sigma_min);

/// u = x1 - (1 - sigma_min) x0; constant along the path.
MotionTensor target_velocity(const MotionTensor& x0, const MotionTensor& x1, double sigma_min);

/// Velocity implied by an endpoint estimate:
/// v = (x1_hat - (1 - sigma_min) x_t) / (1 - (1 - sigma_min) t). Throws SingularTime.
MotionTensor v_from_x1(const MotionTensor& x1_hat, const MotionTensor& x_t, FlowTime t, double sigma_min);

/// Endpoint implied by a velocity: x1_hat = (1 - sigma_min) x_t + (1 - (1 - sigma_min) t) v.
MotionTensor x1_from_v(const MotionTensor& v, const MotionTensor& x_t, FlowTime t, double sigma_min);

/// Source-point recovery in the form used inside the guided sampler:
/// x0_hat = x1_hat + (x_t - (1 + sigma_min t) x1_hat) / (1 - (1 - sigma_min) t).
MotionTensor x0_hat(const MotionTensor& x1_hat, const MotionTensor& x_t, FlowTime t, double sigma_min);

/// Same quantity written as (x_t - t x1_hat) / (1 - (1 - sigma_min) t).
MotionTensor x0_hat_direct(const MotionTensor& x1_hat, const MotionTensor& x_t, FlowTime t, double sigma_min);

/// One Euler step in endpoint form, from t to t_next.
MotionTensor euler_step_x1(const MotionTensor& x_t, const MotionTensor& x1_hat, double t, double t_next,
                           double sigma_min);

/// One Euler step in velocity form: x_t + (t_next - t) v.
MotionTensor euler_step_v(const MotionTensor& x_t, const MotionTensor& v, double t, double t_next);

/// Mean of squared differences over all entries.
double fm_loss(const MotionTensor& pred, const MotionTensor& target);

struct InteractionTerms {
  double position = 0.0;     // relative joint positions
  double orientation = 0.0;  // relative joint rotation matrices
  double translation = 0.0;  // relative root translation
  double total() const { return position + orientation + translation; }
};

/// Relative-pose interaction loss between reactor and actor, comparing
/// ground truth against prediction, each term averaged over frames.
InteractionTerms interaction_terms(const MotionTensor& pred_x1, const MotionTensor& gt_x1, const MotionTensor& x0,
                                   const Skeleton& skel);

double interaction_loss(const MotionTensor& pred_x1, const MotionTensor& gt_x1, const MotionTensor& x0,
                        const Skeleton& skel);

/// Loss value together with its gradient with respect to pred_x1.
struct InteractionGradient {
  double loss = 0.0;
  MotionTensor grad;
};
InteractionGradient interaction_loss_grad(const MotionTensor& pred_x1, const MotionTensor& gt_x1,
                                          const MotionTensor& x0, const Skeleton& skel);

}  // namespace arflow

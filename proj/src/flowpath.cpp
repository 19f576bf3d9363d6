#include "arflow/flowpath.hpp"

#include <cmath>
#include <string>

#include "arflow/error.hpp"

namespace arflow {

namespace {

void check_same_shape(const MotionTensor& a, const MotionTensor& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kShapeMismatch, std::string(what) + ": " + std::to_string(a.rows()) + "x" +
                                               std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                                               std::to_string(b.cols()));
  }
}

void check_sigma(double sigma_min) {
  if (!(sigma_min >= 0.0 && sigma_min < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "sigma_min must lie in [0, 1)");
  }
}

double guarded_weight(double t, double sigma_min) {
  const double w = path_x0_weight(t, sigma_min);
  if (!(w > kSingularGuard)) {
    throw Error(ErrorCode::kSingularTime, "1 - (1 - sigma_min) t = " + std::to_string(w) + " is singular");
  }
  return w;
}

}  // namespace

FlowTime::FlowTime(double t) : t_(t) {
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::kInvalidConfig, "flow time must lie in [0, 1]");
}

double path_x0_weight(double t, double sigma_min) { return 1.0 - (1.0 - sigma_min) * t; }

MotionTensor interpolate(const MotionTensor& x0, const MotionTensor& x1, FlowTime t, double sigma_min) {
  check_same_shape(x0, x1, "interpolate");
  check_sigma(sigma_min);
  const double tv = t.value();
  return tv * x1 + path_x0_weight(tv, sigma_min) * x0;
}

MotionTensor target_velocity(const MotionTensor& x0, const MotionTensor& x1, double sigma_min) {
  check_same_shape(x0, x1, "target_velocity");
  check_sigma(sigma_min);
  return x1 - (1.0 - sigma_min) * x0;
}

MotionTensor v_from_x1(const MotionTensor& x1_hat, const MotionTensor& x_t, FlowTime t, double sigma_min) {
  check_same_shape(x1_hat, x_t, "v_from_x1");
  check_sigma(sigma_min);
  const double denom = guarded_weight(t.value(), sigma_min);
  return (x1_hat - (1.0 - sigma_min) * x_t) / denom;
}

MotionTensor x1_from_v(const MotionTensor& v, const MotionTensor& x_t, FlowTime t, double sigma_min) {
  check_same_shape(v, x_t, "x1_from_v");
  check_sigma(sigma_min);
  return (1.0 - sigma_min) * x_t + path_x0_weight(t.value(), sigma_min) * v;
}

MotionTensor x0_hat(const MotionTensor& x1_hat, const MotionTensor& x_t, FlowTime t, double sigma_min) {
  check_same_shape(x1_hat, x_t, "x0_hat");
  check_sigma(sigma_min);
  const double tv = t.value();
  const double denom = guarded_weight(tv, sigma_min);
  return x1_hat + (x_t - (1.0 + sigma_min * tv) * x1_hat) / denom;
}

MotionTensor x0_hat_direct(const MotionTensor& x1_hat, const MotionTensor& x_t, FlowTime t, double sigma_min) {
  check_same_shape(x1_hat, x_t, "x0_hat_direct");
  check_sigma(sigma_min);
  const double tv = t.value();
  const double denom = guarded_weight(tv, sigma_min);
  return (x_t - tv * x1_hat) / denom;
}

MotionTensor euler_step_x1(const MotionTensor& x_t, const MotionTensor& x1_hat, double t, double t_next,
                           double sigma_min) {
  check_same_shape(x_t, x1_hat, "euler_step_x1");
  check_sigma(sigma_min);
  const double denom = guarded_weight(t, sigma_min);
  return (path_x0_weight(t_next, sigma_min) / denom) * x_t + ((t_next - t) / denom) * x1_hat;
}

MotionTensor euler_step_v(const MotionTensor& x_t, const MotionTensor& v, double t, double t_next) {
  check_same_shape(x_t, v, "euler_step_v");
  return x_t + (t_next - t) * v;
}

double fm_loss(const MotionTensor& pred, const MotionTensor& target) {
  check_same_shape(pred, target, "fm_loss");
  if (pred.size() == 0) return 0.0;
  return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

}  // namespace arflow

#include <doctest.h>

#include <random>

#include "arflow/error.hpp"
#include "arflow/flowpath.hpp"
#include "support.hpp"

using namespace arflow;
using testing::max_abs_diff;
using testing::random_matrix;

namespace {

MotionTensor scalar(double v) { return MotionTensor::Constant(1, 1, v); }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kIoError;
}

}  // namespace

TEST_CASE("interpolate: endpoints and a hand value") {
  std::mt19937_64 rng(10);
  const MotionTensor x0 = random_matrix(rng, 3, 5);
  const MotionTensor x1 = random_matrix(rng, 3, 5);
  CHECK(interpolate(x0, x1, FlowTime(0.0), 0.3) == x0);
  CHECK(interpolate(x0, x1, FlowTime(1.0), 0.0) == x1);
  CHECK(max_abs_diff(interpolate(x0, x1, FlowTime(1.0), 0.2), x1 + 0.2 * x0) < 1e-15);
  CHECK(interpolate(scalar(2), scalar(4), FlowTime(0.5), 0.1)(0, 0) == doctest::Approx(3.1).epsilon(1e-15));
  CHECK(code_of([&] { interpolate(x0, scalar(1), FlowTime(0.5), 0.1); }) == ErrorCode::kShapeMismatch);
  CHECK_THROWS_AS(FlowTime(1.5), Error);
}

TEST_CASE("target_velocity") {
  std::mt19937_64 rng(11);
  const MotionTensor x = random_matrix(rng, 2, 4);
  CHECK(target_velocity(x, x, 0.0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(target_velocity(scalar(2), scalar(4), 0.0)(0, 0) == 2.0);
  CHECK(target_velocity(scalar(2), scalar(4), 0.1)(0, 0) == doctest::Approx(2.2).epsilon(1e-15));
}

TEST_CASE("v_from_x1") {
  CHECK(v_from_x1(scalar(4), scalar(3.1), FlowTime(0.5), 0.1)(0, 0) == doctest::Approx(2.2).epsilon(1e-14));
  std::mt19937_64 rng(12);
  const MotionTensor a = random_matrix(rng, 2, 3);
  const MotionTensor b = random_matrix(rng, 2, 3);
  CHECK(max_abs_diff(v_from_x1(a, b, FlowTime(0.0), 0.0), a - b) < 1e-15);
  // On the path the implied velocity is the target velocity, for any t < 1.
  std::uniform_real_distribution<double> u(0.0, 0.999);
  for (int i = 0; i < 200; ++i) {
    const MotionTensor x0 = random_matrix(rng, 4, 7);
    const MotionTensor x1 = random_matrix(rng, 4, 7);
    const FlowTime t(u(rng));
    const double s = 1e-4;
    const MotionTensor xt = interpolate(x0, x1, t, s);
    CHECK(max_abs_diff(v_from_x1(x1, xt, t, s), target_velocity(x0, x1, s)) < 1e-10);
  }
  CHECK(code_of([] { v_from_x1(scalar(1), scalar(1), FlowTime(1.0), 0.0); }) == ErrorCode::kSingularTime);
}

TEST_CASE("x1_from_v inverts v_from_x1") {
  CHECK(x1_from_v(scalar(2.2), scalar(3.1), FlowTime(0.5), 0.1)(0, 0) == doctest::Approx(4.0).epsilon(1e-14));
  std::mt19937_64 rng(13);
  const MotionTensor xt = random_matrix(rng, 2, 3);
  CHECK(max_abs_diff(x1_from_v(MotionTensor::Zero(2, 3), xt, FlowTime(0.7), 0.0), xt) == 0.0);
  std::uniform_real_distribution<double> u(0.0, 0.99);
  for (int i = 0; i < 200; ++i) {
    const MotionTensor y = random_matrix(rng, 3, 9);
    const MotionTensor x = random_matrix(rng, 3, 9);
    const FlowTime t(u(rng));
    CHECK(max_abs_diff(x1_from_v(v_from_x1(y, x, t, 0.05), x, t, 0.05), y) < 1e-12);
  }
}

TEST_CASE("x0_hat forms and path inversion") {
  CHECK(x0_hat(scalar(4), scalar(3.1), FlowTime(0.5), 0.1)(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  std::mt19937_64 rng(14);
  const MotionTensor a = random_matrix(rng, 2, 3);
  const MotionTensor b = random_matrix(rng, 2, 3);
  CHECK(max_abs_diff(x0_hat(a, b, FlowTime(0.0), 1e-4), b) < 1e-15);
  std::uniform_real_distribution<double> u(0.0, 0.99);
  for (int i = 0; i < 200; ++i) {
    const MotionTensor x0 = random_matrix(rng, 4, 6);
    const MotionTensor x1 = random_matrix(rng, 4, 6);
    const FlowTime t(i == 0 ? 0.3 : u(rng));
    const MotionTensor xt = interpolate(x0, x1, t, 1e-4);
    CHECK(max_abs_diff(x0_hat(x1, xt, t, 1e-4), x0) < 1e-12);
    CHECK(max_abs_diff(x0_hat(x1, xt, t, 1e-4), x0_hat_direct(x1, xt, t, 1e-4)) < 1e-12);
  }
  CHECK(code_of([] { x0_hat(scalar(1), scalar(1), FlowTime(1.0), 0.0); }) == ErrorCode::kSingularTime);
}

TEST_CASE("endpoint Euler step is reprojection and matches the velocity step") {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const MotionTensor xt = random_matrix(rng, 3, 5);
    const MotionTensor x1 = random_matrix(rng, 3, 5);
    const double t = 0.98 * u(rng);
    const double tn = t + (1.0 - t) * u(rng);
    const double s = 1e-4;
    const MotionTensor step = euler_step_x1(xt, x1, t, tn, s);
    CHECK(max_abs_diff(step, interpolate(x0_hat(x1, xt, FlowTime(t), s), x1, FlowTime(tn), s)) < 1e-12);
    CHECK(max_abs_diff(step, euler_step_v(xt, v_from_x1(x1, xt, FlowTime(t), s), t, tn)) < 1e-12);
  }
}

TEST_CASE("fm_loss") {
  std::mt19937_64 rng(16);
  const MotionTensor a = random_matrix(rng, 3, 4);
  const MotionTensor b = random_matrix(rng, 3, 4);
  CHECK(fm_loss(a, a) == 0.0);
  CHECK(fm_loss(scalar(1), scalar(3)) == 4.0);
  MotionTensor z = MotionTensor::Zero(1, 2);
  MotionTensor t(1, 2);
  t << 3, 4;
  CHECK(fm_loss(z, t) == 12.5);
  CHECK(fm_loss(a, b) == fm_loss(b, a));
  CHECK(fm_loss(a, b) > 0.0);
  CHECK(code_of([&] { fm_loss(a, z); }) == ErrorCode::kShapeMismatch);
}

TEST_CASE("interaction loss: equal inputs and pure translation") {
  std::mt19937_64 rng(17);
  const Skeleton skel = Skeleton::desk_default();
  const int h = 6;
  const MotionTensor gt = testing::random_motion(rng, skel, h);
  const MotionTensor actor = testing::random_motion(rng, skel, h);
  CHECK(interaction_loss(gt, gt, actor, skel) == 0.0);
  CHECK(interaction_loss(gt, gt, testing::random_motion(rng, skel, h), skel) == 0.0);

  // Shift every frame's root by v: each joint moves by v, rotations stay.
  const Eigen::Vector3d v(0.3, -0.2, 0.5);
  MotionTensor pred = gt;
  const int tcol = MotionLayout{skel.joint_count()}.root_trans();
  for (int f = 0; f < h; ++f) pred.row(f).segment<3>(tcol) += v.transpose();
  const InteractionTerms terms = interaction_terms(pred, gt, actor, skel);
  CHECK(terms.translation == doctest::Approx(v.squaredNorm()).epsilon(1e-12));
  CHECK(terms.position == doctest::Approx(skel.joint_count() * v.squaredNorm()).epsilon(1e-12));
  CHECK(std::abs(terms.orientation) < 1e-24);
}

TEST_CASE("interaction loss gradient matches central differences") {
  std::mt19937_64 rng(18);
  const Skeleton skel = Skeleton::desk_default();
  const MotionTensor gt = testing::random_motion(rng, skel, 3);
  const MotionTensor actor = testing::random_motion(rng, skel, 3);
  const MotionTensor pred = gt + 0.1 * random_matrix(rng, 3, skel.frame_dim());
  const InteractionGradient g = interaction_loss_grad(pred, gt, actor, skel);
  CHECK(g.loss == doctest::Approx(interaction_loss(pred, gt, actor, skel)).epsilon(1e-12));
  const double h = 1e-6;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    MotionTensor p = pred;
    MotionTensor m = pred;
    p.data()[i] += h;
    m.data()[i] -= h;
    const double fd = (interaction_loss(p, gt, actor, skel) - interaction_loss(m, gt, actor, skel)) / (2 * h);
    const double a = g.grad.data()[i];
    worst = std::max(worst, std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-6}));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("interaction loss rejects shape mismatch") {
  const Skeleton skel = Skeleton::desk_default();
  std::mt19937_64 rng(19);
  const MotionTensor a = testing::random_motion(rng, skel, 3);
  const MotionTensor b = testing::random_motion(rng, skel, 4);
  CHECK_THROWS_AS(interaction_loss(a, b, a, skel), Error);
}

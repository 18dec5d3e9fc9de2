#include "btrf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "btrf/random.hpp"

namespace btrf {

namespace {

constexpr double kColorMid = 127.5;
constexpr double kColorSwing = 120.0;   // total amplitude per channel, < 127.5
constexpr double kMinWave = 2.0;        // rad / m
constexpr double kMaxWave = 25.0;
constexpr double kPositionMargin = 0.75;
constexpr double kMaxRollRad = 5.0 * std::numbers::pi / 180.0;
constexpr std::uint64_t kTestStream = 0x9E3779B97F4A7C15ull;

Eigen::Vector3d random_unit_vector(Rng& rng) {
  Eigen::Vector3d v;
  do {
    v = {standard_normal(rng), standard_normal(rng), standard_normal(rng)};
  } while (v.norm() < 1e-9);
  return v.normalized();
}

CameraPose random_pose(const SyntheticScene& scene, Rng& rng) {
  const Eigen::Vector3d size = scene.room_max - scene.room_min;
  Eigen::Vector3d lo = scene.room_min + Eigen::Vector3d::Constant(kPositionMargin);
  Eigen::Vector3d hi = scene.room_max - Eigen::Vector3d::Constant(kPositionMargin);
  // Keep the camera roughly at standing height.
  lo.z() = scene.room_min.z() + 0.32 * size.z();
  hi.z() = scene.room_min.z() + 0.72 * size.z();
  for (int i = 0; i < 3; ++i) {
    if (lo[i] > hi[i]) lo[i] = hi[i] = scene.room_min[i] + 0.5 * size[i];
  }

  for (;;) {
    Eigen::Vector3d position;
    for (int i = 0; i < 3; ++i) position[i] = uniform_real(rng, lo[i], hi[i]);

    // Side walls weighted by area.
    const double wx = size.y();
    const double wy = size.x();
    const double pick = uniform_real(rng, 0.0, 2.0 * (wx + wy));
    Eigen::Vector3d target;
    const double height = scene.room_min.z() + uniform_real(rng, 0.1, 0.9) * size.z();
    if (pick < 2.0 * wx) {
      target = {pick < wx ? scene.room_min.x() : scene.room_max.x(),
                scene.room_min.y() + uniform_real(rng, 0.0, 1.0) * size.y(), height};
    } else {
      target = {scene.room_min.x() + uniform_real(rng, 0.0, 1.0) * size.x(),
                pick - 2.0 * wx < wy ? scene.room_min.y() : scene.room_max.y(), height};
    }
    const double roll = uniform_real(rng, -kMaxRollRad, kMaxRollRad);
    const Eigen::Vector3d forward = target - position;
    if (forward.head<2>().norm() < 0.3 * forward.norm()) continue;
    return look_at(position, target, roll);
  }
}

}  // namespace

SyntheticScene SyntheticScene::generate(std::uint64_t seed, const Eigen::Vector3d& room_size,
                                        int components_per_channel) {
  if (!(room_size.minCoeff() > 0.0)) throw InvalidInput("room size must be positive");
  if (components_per_channel < 1) throw InvalidInput("need at least one colour component");
  SyntheticScene scene;
  scene.seed = seed;
  scene.room_min = Eigen::Vector3d::Zero();
  scene.room_max = room_size;
  Rng rng(seed);
  for (auto& channel : scene.color_field) {
    double total = 0.0;
    for (int i = 0; i < components_per_channel; ++i) {
      ColorComponent c;
      c.amplitude = uniform_real(rng, 0.5, 1.0);
      const double magnitude = kMinWave * std::pow(kMaxWave / kMinWave, uniform_unit(rng));
      c.wave = magnitude * random_unit_vector(rng);
      c.phase = uniform_real(rng, 0.0, 2.0 * std::numbers::pi);
      total += c.amplitude;
      channel.push_back(c);
    }
    for (auto& c : channel) c.amplitude *= kColorSwing / total;
  }
  return scene;
}

Eigen::Vector3d SyntheticScene::color(const Eigen::Vector3d& world) const {
  Eigen::Vector3d rgb;
  for (int c = 0; c < 3; ++c) {
    double v = kColorMid;
    for (const auto& comp : color_field[c]) v += comp.amplitude * std::sin(comp.wave.dot(world) + comp.phase);
    rgb[c] = std::clamp(v, 0.0, 255.0);
  }
  return rgb;
}

bool SyntheticScene::contains(const Eigen::Vector3d& point) const {
  return (point.array() > room_min.array()).all() && (point.array() < room_max.array()).all();
}

WallHit intersect_room(const SyntheticScene& scene, const Eigen::Vector3d& origin,
                       const Eigen::Vector3d& direction) {
  WallHit hit;
  hit.t = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    const double d = direction[axis];
    if (d == 0.0) continue;
    const double bound = d > 0.0 ? scene.room_max[axis] : scene.room_min[axis];
    const double t = (bound - origin[axis]) / d;
    if (t > 0.0 && t < hit.t) hit.t = t;
  }
  if (!std::isfinite(hit.t)) throw InvalidInput("ray does not hit the room");
  hit.point = origin + hit.t * direction;
  return hit;
}

RenderedView render_frame(const SyntheticScene& scene, const CameraPose& pose, const Intrinsics& k) {
  k.validate();
  if (!scene.contains(pose.translation)) throw InvalidInput("camera is outside the room");

  RenderedView view;
  view.frame = RgbdFrame(k.width, k.height);
  view.world_coords.resize(static_cast<std::size_t>(k.width) * k.height);
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const Eigen::Vector3d ray_cam((x - k.cx) / k.fx, (y - k.cy) / k.fy, 1.0);
      const WallHit hit = intersect_room(scene, pose.translation, pose.rotation * ray_cam);
      const Eigen::Vector3d rgb = scene.color(hit.point);
      for (int c = 0; c < 3; ++c)
        view.frame.color(x, y, c) = static_cast<std::uint8_t>(std::lround(rgb[c]));
      view.frame.depth_at(x, y) = hit.t;
      view.world_coords[static_cast<std::size_t>(y) * k.width + x] = hit.point;
    }
  }
  return view;
}

CameraPose look_at(const Eigen::Vector3d& position, const Eigen::Vector3d& target, double roll_rad) {
  const Eigen::Vector3d forward = (target - position).normalized();
  Eigen::Vector3d right = forward.cross(Eigen::Vector3d::UnitZ());
  if (right.norm() < 1e-9) throw InvalidInput("look_at: view direction is vertical");
  right.normalize();
  const Eigen::Vector3d down = forward.cross(right);
  CameraPose pose;
  pose.rotation.col(0) = right;
  pose.rotation.col(1) = down;
  pose.rotation.col(2) = forward;
  pose.rotation = pose.rotation * axis_angle(Eigen::Vector3d::UnitZ(), roll_rad);
  pose.translation = position;
  return pose;
}

Trajectory sample_trajectory(const SyntheticScene& scene, int n_train, int n_test,
                             std::uint64_t seed) {
  if (n_train < 1 || n_test < 1) throw InvalidInput("trajectory sizes must be >= 1");
  Trajectory traj;
  Rng train_rng(seed);
  Rng test_rng(seed ^ kTestStream);
  for (int i = 0; i < n_train; ++i) traj.train.push_back(random_pose(scene, train_rng));
  for (int i = 0; i < n_test; ++i) traj.test.push_back(random_pose(scene, test_rng));
  return traj;
}

Intrinsics default_synthetic_intrinsics() {
  return {300.0, 300.0, 160.0, 120.0, 320, 240};
}

}  // namespace btrf

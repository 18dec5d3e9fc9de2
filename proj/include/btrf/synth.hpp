#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "btrf/features.hpp"
#include "btrf/geometry.hpp"

namespace btrf {

/// One sinusoid of the colour field: amplitude * sin(wave . x + phase).
struct ColorComponent {
  double amplitude = 0.0;
  Eigen::Vector3d wave = Eigen::Vector3d::Zero();  // rad / m
  double phase = 0.0;
};

/// Axis-aligned room seen from the inside, textured by a seeded sum of
/// sinusoids per colour channel.
struct SyntheticScene {
  Eigen::Vector3d room_min = Eigen::Vector3d::Zero();
  Eigen::Vector3d room_max = Eigen::Vector3d(4.0, 3.0, 2.5);
  std::array<std::vector<ColorComponent>, 3> color_field;
  std::uint64_t seed = 0;

  static SyntheticScene generate(std::uint64_t seed,
                                 const Eigen::Vector3d& room_size = Eigen::Vector3d(4.0, 3.0, 2.5),
                                 int components_per_channel = 12);

  /// RGB in [0, 255] at a world point.
  Eigen::Vector3d color(const Eigen::Vector3d& world) const;
  bool contains(const Eigen::Vector3d& point) const;
  double diagonal() const { return (room_max - room_min).norm(); }
};

struct RenderedView {
  RgbdFrame frame;
  std::vector<Eigen::Vector3d> world_coords;  // row-major, one per pixel

  const Eigen::Vector3d& world_at(int x, int y) const {
    return world_coords[static_cast<std::size_t>(y) * frame.width + x];
  }
};

/// Nearest wall hit of a ray from inside the room: ray parameter and point.
struct WallHit {
  double t = 0.0;
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
};
WallHit intersect_room(const SyntheticScene& scene, const Eigen::Vector3d& origin,
                       const Eigen::Vector3d& direction);

/// Ray casts every pixel against the room walls. Depth is the camera-frame z
/// of the hit, so backproject(p, depth) mapped through `pose` is the hit.
/// Throws InvalidInput when the camera is not strictly inside the room.
RenderedView render_frame(const SyntheticScene& scene, const CameraPose& pose, const Intrinsics& k);

struct Trajectory {
  std::vector<CameraPose> train;
  std::vector<CameraPose> test;
};

/// Camera-to-world pose at `position` looking at `target`, world +z up, with
/// an extra roll about the optical axis.
CameraPose look_at(const Eigen::Vector3d& position, const Eigen::Vector3d& target,
                   double roll_rad = 0.0);

/// Positions uniform in an interior sub-box, each camera aimed at a random
/// point on one of the four side walls. Train and test use separate streams.
Trajectory sample_trajectory(const SyntheticScene& scene, int n_train, int n_test,
                             std::uint64_t seed);

/// Benchmark camera: 320x240, fx = fy = 300, centred principal point.
Intrinsics default_synthetic_intrinsics();

}  // namespace btrf

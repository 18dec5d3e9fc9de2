#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "btrf/errors.hpp"

namespace btrf {

/// Pinhole intrinsics. Pixel centres sit at integer coordinates.
struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  void validate() const;
  bool contains(const Eigen::Vector2d& pixel) const {
    return pixel.x() >= 0.0 && pixel.y() >= 0.0 && pixel.x() <= width - 1.0 &&
           pixel.y() <= height - 1.0;
  }
};

/// Rigid camera-to-world transform: x_world = rotation * x_cam + translation.
struct CameraPose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static CameraPose identity() { return {}; }

  Eigen::Vector3d to_world(const Eigen::Vector3d& x_cam) const {
    return rotation * x_cam + translation;
  }
  Eigen::Vector3d to_camera(const Eigen::Vector3d& x_world) const {
    return rotation.transpose() * (x_world - translation);
  }
  CameraPose inverse() const {
    return {rotation.transpose(), -(rotation.transpose() * translation)};
  }
  /// (this ∘ other)(x) = this(other(x))
  CameraPose compose(const CameraPose& other) const {
    return {rotation * other.rotation, rotation * other.translation + translation};
  }

  Eigen::Matrix4d matrix() const;
  static CameraPose from_matrix(const Eigen::Matrix4d& m);

  /// Orthonormal with det +1, to 1e-9.
  bool is_valid() const;
};

/// Camera-space point for pixel `pixel` at z = depth.
Eigen::Vector3d backproject(const Eigen::Vector2d& pixel, double depth, const Intrinsics& k);

/// Pixel of a camera-space point; throws InvalidInput when z <= 0.
Eigen::Vector2d project(const Eigen::Vector3d& x_cam, const Intrinsics& k);

/// Least-squares rigid transform taking camera points onto world points,
/// i.e. minimising sum |R * camera[i] + t - world[i]|^2 with det(R) = +1.
CameraPose kabsch(std::span<const Eigen::Vector3d> camera,
                  std::span<const Eigen::Vector3d> world);

struct PixelCorrespondence {
  Eigen::Vector3d world;
  Eigen::Vector2d pixel;
};

/// All real camera-to-world poses consistent with three 2D-3D pairs.
std::vector<CameraPose> p3p_candidates(std::span<const PixelCorrespondence, 3> pairs,
                                       const Intrinsics& k);

/// Minimal absolute pose: three pairs generate up to four candidates, the
/// fourth pair picks the one with the smallest reprojection error.
CameraPose p3p_solve(std::span<const PixelCorrespondence, 4> pairs, const Intrinsics& k);

/// Squared reprojection error summed over `pairs`; +inf if any point lies
/// behind the camera.
double reprojection_cost(const CameraPose& pose, std::span<const PixelCorrespondence> pairs,
                         const Intrinsics& k);

/// World-to-camera transform perturbed on the left by (omega, nu):
///   x_cam' = Exp(omega) * (R_wc * X + t_wc) + nu
/// Returns the camera-to-world pose of the perturbed transform.
CameraPose apply_left_increment(const CameraPose& pose, const Eigen::Matrix<double, 6, 1>& delta);

/// d(pixel)/d(omega, nu) of the reprojection of `world` under `pose` at zero
/// increment.
Eigen::Matrix<double, 2, 6> reprojection_jacobian(const CameraPose& pose,
                                                  const Eigen::Vector3d& world,
                                                  const Intrinsics& k);

struct RefinementResult {
  CameraPose pose;
  bool degenerate = false;
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
};

/// Gauss-Newton on reprojection error. Never returns a pose with a higher
/// cost than `initial`.
RefinementResult refine_pose_2d3d(const CameraPose& initial,
                                  std::span<const PixelCorrespondence> inliers,
                                  const Intrinsics& k, int max_iterations = 20,
                                  double min_update = 1e-10);

struct PoseError {
  double translation_m = 0.0;
  double rotation_deg = 0.0;
};

PoseError pose_error(const CameraPose& estimate, const CameraPose& truth);

/// Rotation by `angle_rad` about the unit axis.
Eigen::Matrix3d axis_angle(const Eigen::Vector3d& axis, double angle_rad);

/// Pose text file: 16 numbers, row-major 4x4 camera-to-world.
CameraPose read_pose_file(const std::string& path);
void write_pose_file(const std::string& path, const CameraPose& pose);

/// Intrinsics text file: `fx fy cx cy width height`.
Intrinsics read_intrinsics_file(const std::string& path);
void write_intrinsics_file(const std::string& path, const Intrinsics& k);

}  // namespace btrf

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "btrf/errors.hpp"
#include "btrf/geometry.hpp"

namespace btrf {

enum class PoseSolver {
  Kabsch3D,  // camera-space 3-D observations
  Pnp2D,     // pixel observations
};

/// Predicted world point paired with what the camera saw at that pixel.
struct Correspondence {
  Eigen::Vector3d world = Eigen::Vector3d::Zero();
  std::variant<Eigen::Vector3d, Eigen::Vector2d> observation;  // camera point or pixel
  int tree = -1;
};

struct RansacConfig {
  int hypothesis_count = 256;
  int block_size = 64;
  double inlier_threshold_3d = 0.05;  // meters
  double inlier_threshold_2d = 3.0;   // pixels
  std::uint64_t rng_seed = 0;
  int min_final_inliers_3d = 10;
  int min_final_inliers_2d = 12;
  int max_sample_retries = 50;

  void validate() const;
  double threshold(PoseSolver solver) const {
    return solver == PoseSolver::Kabsch3D ? inlier_threshold_3d : inlier_threshold_2d;
  }
  int min_final_inliers(PoseSolver solver) const {
    return solver == PoseSolver::Kabsch3D ? min_final_inliers_3d : min_final_inliers_2d;
  }
};

struct Hypothesis {
  CameraPose pose;
  int score = 0;
  bool alive = true;
};

/// 3-D: |R * obs + t - world|. 2-D: reprojection distance in pixels, +inf
/// when the world point is behind the camera.
double hypothesis_residual(const CameraPose& pose, const Correspondence& c, PoseSolver solver,
                           const Intrinsics* intrinsics);

/// Survivors after `round` completed blocks: floor(K * 2^-round).
int preemption_survivors(int hypothesis_count, int round);

std::size_t minimal_sample_size(PoseSolver solver);

struct RansacResult {
  bool success = false;
  CameraPose pose;
  std::vector<std::size_t> inliers;
  int hypotheses_generated = 0;
  int observations_consumed = 0;
  std::vector<int> alive_per_round;  // [0] = initial pool size
};

/// Preemptive RANSAC: a fixed pool of minimal-sample hypotheses is scored on
/// blocks of shuffled observations, halving the pool after each block. The
/// survivor is rescored on all data and refined on its inliers.
/// Throws InsufficientData below the minimal sample size; a final inlier
/// count below the configured minimum yields success = false.
RansacResult preemptive_ransac(std::span<const Correspondence> correspondences, PoseSolver solver,
                               const Intrinsics* intrinsics, const RansacConfig& config);

}  // namespace btrf

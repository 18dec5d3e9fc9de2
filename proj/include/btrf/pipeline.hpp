#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "btrf/features.hpp"
#include "btrf/forest.hpp"
#include "btrf/geometry.hpp"
#include "btrf/random.hpp"
#include "btrf/ransac.hpp"

namespace btrf {

/// Pixels with depth > 0, row-major order.
std::vector<std::array<int, 2>> valid_depth_pixels(const RgbdFrame& frame);

/// Up to `n` distinct valid-depth pixels drawn uniformly; all of them (in
/// row-major order) when fewer exist. Throws InsufficientData when none.
std::vector<std::array<int, 2>> sample_valid_pixels(const RgbdFrame& frame, int n, Rng& rng);

/// Training samples at `n_pixels` random valid-depth pixels, labelled with
/// their ground-truth world coordinates and carrying WHT descriptors.
std::vector<TrainingSample> harvest_indoor_samples(const RgbdFrame& frame, const CameraPose& gt_pose,
                                                   const Intrinsics& k, int n_pixels, Rng& rng);

/// Pairs each keypoint with the nearest projection of a visible SfM point
/// within `max_pixel_distance`. Greedy by ascending distance, ties broken by
/// lower keypoint index; every keypoint and point is used at most once.
std::vector<TrainingSample> associate_sfm_points(std::span<const Keypoint> keypoints,
                                                 std::span<const Eigen::Vector3d> sfm_points,
                                                 const CameraPose& gt_pose, const Intrinsics& k,
                                                 double max_pixel_distance = 1.0);

struct QueryOptions {
  int max_backtrack_leaves = 16;
  int query_pixels = 5000;
  double max_descriptor_distance = 0.5;  // outdoor only
  std::uint64_t seed = 0;                // query pixel sampling
  RansacConfig ransac;
};

struct RelocalizationResult {
  std::optional<CameraPose> pose;  // empty on failure
  int inlier_count = 0;
  int correspondences_used = 0;
  double runtime_ms = 0.0;

  bool failed() const { return !pose.has_value(); }
};

/// Builds per-tree correspondences for an RGB-D query frame.
std::vector<Correspondence> indoor_correspondences(const Forest& forest, const RgbdFrame& frame,
                                                   const Intrinsics& k, const QueryOptions& options);

/// One correspondence per (keypoint, tree) whose leaf descriptor lies within
/// the distance filter.
std::vector<Correspondence> outdoor_correspondences(const Forest& forest,
                                                    std::span<const Keypoint> keypoints,
                                                    const QueryOptions& options);

/// Throws InvalidInput when the forest is not an indoor model.
RelocalizationResult relocalize_rgbd(const Forest& forest, const RgbdFrame& frame,
                                     const Intrinsics& k, const QueryOptions& options);

/// Throws InvalidInput when the forest is not an outdoor model.
RelocalizationResult relocalize_rgb(const Forest& forest, std::span<const Keypoint> keypoints,
                                    const Intrinsics& k, const QueryOptions& options);

struct FrameEvaluation {
  bool localized = false;
  PoseError error;  // infinite when not localized
  bool correct = false;
};

struct SequenceMetrics {
  double percent_correct = 0.0;       // fraction in [0, 1]
  double median_translational = 0.0;  // meters, over localized frames
  double median_rotational = 0.0;     // degrees
  std::vector<FrameEvaluation> frames;
};

inline constexpr double kCorrectTranslationM = 0.05;
inline constexpr double kCorrectRotationDeg = 5.0;

bool is_correct(const PoseError& error);

/// Lower median; +inf for an empty list.
double lower_median(std::vector<double> values);

SequenceMetrics evaluate_sequence(std::span<const RelocalizationResult> results,
                                  std::span<const CameraPose> ground_truth);

/// Share of per-tree world predictions within `threshold` meters of the
/// truth at `n_pixels` random valid pixels. `max_leaves` <= 1 uses greedy
/// descent.
struct PixelAccuracy {
  std::size_t predictions = 0;
  std::size_t within_threshold = 0;
  double fraction() const { return predictions == 0 ? 0.0 : double(within_threshold) / predictions; }
};
PixelAccuracy pixel_prediction_accuracy(const Forest& forest, const RgbdFrame& frame,
                                        const CameraPose& gt_pose, const Intrinsics& k,
                                        int n_pixels, int max_leaves, Rng& rng,
                                        double threshold = 0.1);

// --- training helpers -------------------------------------------------------

struct IndoorTrainingSet {
  std::vector<RgbdFrame> frames;
  std::vector<CameraPose> poses;
  Intrinsics intrinsics;
};

struct TrainingOptions {
  int images_per_tree = 500;
  int pixels_per_image = 5000;
  int threads = 1;
};

/// Tree t draws min(images_per_tree, frame count) frames and harvests
/// pixels_per_image samples from each, all from seed config.rng_seed + t.
Forest train_indoor_forest(const IndoorTrainingSet& data, const ForestConfig& config,
                           const TrainingOptions& options);

struct OutdoorTrainingSet {
  std::vector<std::vector<Keypoint>> keypoints;
  std::vector<CameraPose> poses;
  std::vector<Eigen::Vector3d> points;
  Intrinsics intrinsics;
};

Forest train_outdoor_forest(const OutdoorTrainingSet& data, const ForestConfig& config,
                            const TrainingOptions& options);

}  // namespace btrf

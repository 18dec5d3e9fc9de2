#include "btrf/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

namespace btrf {

namespace {

constexpr std::uint64_t kSamplingStream = 0x5851F42D4C957F2Dull;

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

RelocalizationResult run_ransac(std::span<const Correspondence> data, PoseSolver solver,
                                const Intrinsics* k, const RansacConfig& config) {
  RelocalizationResult out;
  out.correspondences_used = static_cast<int>(data.size());
  if (data.size() < minimal_sample_size(solver)) return out;
  const RansacResult r = preemptive_ransac(data, solver, k, config);
  out.inlier_count = static_cast<int>(r.inliers.size());
  if (r.success) out.pose = r.pose;
  return out;
}

}  // namespace

std::vector<std::array<int, 2>> valid_depth_pixels(const RgbdFrame& frame) {
  std::vector<std::array<int, 2>> out;
  for (int y = 0; y < frame.height; ++y)
    for (int x = 0; x < frame.width; ++x)
      if (frame.depth_at(x, y) > 0.0) out.push_back({x, y});
  return out;
}

std::vector<std::array<int, 2>> sample_valid_pixels(const RgbdFrame& frame, int n, Rng& rng) {
  if (n < 1) throw InvalidInput("pixel budget must be >= 1");
  auto pixels = valid_depth_pixels(frame);
  if (pixels.empty()) throw InsufficientData("frame has no valid depth");
  if (static_cast<std::size_t>(n) >= pixels.size()) return pixels;
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_index(rng, pixels.size() - i));
    std::swap(pixels[i], pixels[j]);
  }
  pixels.resize(static_cast<std::size_t>(n));
  return pixels;
}

std::vector<TrainingSample> harvest_indoor_samples(const RgbdFrame& frame, const CameraPose& gt_pose,
                                                   const Intrinsics& k, int n_pixels, Rng& rng) {
  const auto pixels = sample_valid_pixels(frame, n_pixels, rng);
  std::vector<TrainingSample> samples;
  samples.reserve(pixels.size());
  for (const auto& [x, y] : pixels) {
    const Eigen::Vector3d cam = backproject(Eigen::Vector2d(x, y), frame.depth_at(x, y), k);
    samples.push_back(
        TrainingSample::from_frame(frame, x, y, wht_descriptor(frame, x, y), gt_pose.to_world(cam)));
  }
  return samples;
}

std::vector<TrainingSample> associate_sfm_points(std::span<const Keypoint> keypoints,
                                                 std::span<const Eigen::Vector3d> sfm_points,
                                                 const CameraPose& gt_pose, const Intrinsics& k,
                                                 double max_pixel_distance) {
  std::vector<Eigen::Vector2d> projected;
  std::vector<std::size_t> visible;
  for (std::size_t i = 0; i < sfm_points.size(); ++i) {
    const Eigen::Vector3d cam = gt_pose.to_camera(sfm_points[i]);
    if (!(cam.z() > 0.0)) continue;
    const Eigen::Vector2d p = project(cam, k);
    if (!k.contains(p)) continue;
    projected.push_back(p);
    visible.push_back(i);
  }

  // Each keypoint proposes its nearest projection; proposals are accepted in
  // order of distance so every point is claimed at most once.
  std::vector<std::tuple<double, std::size_t, std::size_t>> proposals;
  for (std::size_t kp = 0; kp < keypoints.size(); ++kp) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < projected.size(); ++j) {
      const double d = (projected[j] - keypoints[kp].pixel).norm();
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    if (best <= max_pixel_distance) proposals.emplace_back(best, kp, best_j);
  }
  std::sort(proposals.begin(), proposals.end());

  std::vector<bool> used(projected.size(), false);
  std::vector<std::size_t> matched_point(keypoints.size(), SIZE_MAX);
  for (const auto& [d, kp, j] : proposals) {
    if (used[j]) continue;
    used[j] = true;
    matched_point[kp] = visible[j];
  }

  std::vector<TrainingSample> samples;
  for (std::size_t kp = 0; kp < keypoints.size(); ++kp) {
    if (matched_point[kp] == SIZE_MAX) continue;
    TrainingSample s;
    s.pixel = keypoints[kp].pixel;
    s.descriptor = keypoints[kp].descriptor;
    s.world_label = sfm_points[matched_point[kp]];
    samples.push_back(std::move(s));
  }
  return samples;
}

std::vector<Correspondence> indoor_correspondences(const Forest& forest, const RgbdFrame& frame,
                                                   const Intrinsics& k, const QueryOptions& options) {
  Rng rng(options.seed);
  const auto pixels = sample_valid_pixels(frame, options.query_pixels, rng);
  std::vector<Correspondence> out;
  out.reserve(pixels.size() * forest.trees.size());
  for (const auto& [x, y] : pixels) {
    const TrainingSample query = TrainingSample::from_frame(frame, x, y, wht_descriptor(frame, x, y));
    const Eigen::Vector3d cam = backproject(Eigen::Vector2d(x, y), frame.depth_at(x, y), k);
    for (std::size_t t = 0; t < forest.trees.size(); ++t) {
      const Prediction p = predict_backtracking(forest.trees[t], query, options.max_backtrack_leaves);
      out.push_back({p.world_point, cam, static_cast<int>(t)});
    }
  }
  return out;
}

std::vector<Correspondence> outdoor_correspondences(const Forest& forest,
                                                    std::span<const Keypoint> keypoints,
                                                    const QueryOptions& options) {
  std::vector<Correspondence> out;
  for (const auto& kp : keypoints) {
    if (kp.descriptor.size() != forest.descriptor_dim)
      throw InvalidInput("keypoint descriptor length does not match the model");
    TrainingSample query;
    query.pixel = kp.pixel;
    query.descriptor = kp.descriptor;
    for (std::size_t t = 0; t < forest.trees.size(); ++t) {
      const Prediction p = predict_backtracking(forest.trees[t], query, options.max_backtrack_leaves);
      if (p.descriptor_distance > options.max_descriptor_distance) continue;
      out.push_back({p.world_point, kp.pixel, static_cast<int>(t)});
    }
  }
  return out;
}

RelocalizationResult relocalize_rgbd(const Forest& forest, const RgbdFrame& frame,
                                     const Intrinsics& k, const QueryOptions& options) {
  if (forest.mode != ForestMode::IndoorRgbd)
    throw InvalidInput("relocalize_rgbd needs an indoor RGB-D model");
  const auto start = std::chrono::steady_clock::now();
  RelocalizationResult out;
  if (valid_depth_pixels(frame).empty()) {
    out.runtime_ms = elapsed_ms(start);
    return out;
  }
  const auto data = indoor_correspondences(forest, frame, k, options);
  out = run_ransac(data, PoseSolver::Kabsch3D, &k, options.ransac);
  out.runtime_ms = elapsed_ms(start);
  return out;
}

RelocalizationResult relocalize_rgb(const Forest& forest, std::span<const Keypoint> keypoints,
                                    const Intrinsics& k, const QueryOptions& options) {
  if (forest.mode != ForestMode::OutdoorRgb)
    throw InvalidInput("relocalize_rgb needs an outdoor RGB model");
  const auto start = std::chrono::steady_clock::now();
  const auto data = outdoor_correspondences(forest, keypoints, options);
  RelocalizationResult out = run_ransac(data, PoseSolver::Pnp2D, &k, options.ransac);
  out.runtime_ms = elapsed_ms(start);
  return out;
}

bool is_correct(const PoseError& error) {
  return error.translation_m < kCorrectTranslationM && error.rotation_deg < kCorrectRotationDeg;
}

double lower_median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::infinity();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

SequenceMetrics evaluate_sequence(std::span<const RelocalizationResult> results,
                                  std::span<const CameraPose> ground_truth) {
  if (results.size() != ground_truth.size())
    throw InvalidInput("evaluate_sequence: " + std::to_string(results.size()) + " results for " +
                       std::to_string(ground_truth.size()) + " ground-truth poses");
  if (results.empty()) throw InvalidInput("evaluate_sequence: empty sequence");

  SequenceMetrics m;
  std::vector<double> trans;
  std::vector<double> rot;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    FrameEvaluation f;
    if (results[i].pose) {
      f.localized = true;
      f.error = pose_error(*results[i].pose, ground_truth[i]);
      f.correct = is_correct(f.error);
      trans.push_back(f.error.translation_m);
      rot.push_back(f.error.rotation_deg);
    } else {
      f.error = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    }
    correct += f.correct ? 1 : 0;
    m.frames.push_back(f);
  }
  m.percent_correct = double(correct) / double(results.size());
  m.median_translational = lower_median(std::move(trans));
  m.median_rotational = lower_median(std::move(rot));
  return m;
}

PixelAccuracy pixel_prediction_accuracy(const Forest& forest, const RgbdFrame& frame,
                                        const CameraPose& gt_pose, const Intrinsics& k,
                                        int n_pixels, int max_leaves, Rng& rng, double threshold) {
  PixelAccuracy acc;
  for (const auto& [x, y] : sample_valid_pixels(frame, n_pixels, rng)) {
    const TrainingSample query = TrainingSample::from_frame(frame, x, y, wht_descriptor(frame, x, y));
    const Eigen::Vector3d truth =
        gt_pose.to_world(backproject(Eigen::Vector2d(x, y), frame.depth_at(x, y), k));
    for (const auto& tree : forest.trees) {
      const Prediction p =
          max_leaves <= 1 ? predict_greedy(tree, query) : predict_backtracking(tree, query, max_leaves);
      ++acc.predictions;
      if ((p.world_point - truth).norm() < threshold) ++acc.within_threshold;
    }
  }
  return acc;
}

Forest train_indoor_forest(const IndoorTrainingSet& data, const ForestConfig& config,
                           const TrainingOptions& options) {
  config.validate();
  if (data.frames.empty()) throw InvalidInput("no training frames");
  if (data.frames.size() != data.poses.size()) throw InvalidInput("frame and pose counts differ");
  if (options.images_per_tree < 1 || options.pixels_per_image < 1)
    throw InvalidInput("training budgets must be >= 1");

  const SampleProvider provider = [&](int t) {
    Rng rng((config.rng_seed + static_cast<std::uint64_t>(t)) ^ kSamplingStream);
    std::vector<std::size_t> order(data.frames.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order.begin(), order.end(), rng);
    order.resize(std::min(order.size(), static_cast<std::size_t>(options.images_per_tree)));
    std::sort(order.begin(), order.end());
    std::vector<TrainingSample> samples;
    for (const auto i : order) {
      if (valid_depth_pixels(data.frames[i]).empty()) continue;
      auto s = harvest_indoor_samples(data.frames[i], data.poses[i], data.intrinsics,
                                      options.pixels_per_image, rng);
      std::move(s.begin(), s.end(), std::back_inserter(samples));
    }
    return samples;
  };
  return train_forest(provider, ForestMode::IndoorRgbd, config, options.threads);
}

Forest train_outdoor_forest(const OutdoorTrainingSet& data, const ForestConfig& config,
                            const TrainingOptions& options) {
  config.validate();
  if (data.keypoints.empty()) throw InvalidInput("no training keypoint sets");
  if (data.keypoints.size() != data.poses.size())
    throw InvalidInput("keypoint and pose counts differ");
  if (options.images_per_tree < 1) throw InvalidInput("training budgets must be >= 1");

  std::vector<std::vector<TrainingSample>> per_image;
  for (std::size_t i = 0; i < data.keypoints.size(); ++i)
    per_image.push_back(associate_sfm_points(data.keypoints[i], data.points, data.poses[i],
                                             data.intrinsics));

  const SampleProvider provider = [&](int t) {
    Rng rng((config.rng_seed + static_cast<std::uint64_t>(t)) ^ kSamplingStream);
    std::vector<std::size_t> order(per_image.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order.begin(), order.end(), rng);
    order.resize(std::min(order.size(), static_cast<std::size_t>(options.images_per_tree)));
    std::sort(order.begin(), order.end());
    std::vector<TrainingSample> samples;
    for (const auto i : order) samples.insert(samples.end(), per_image[i].begin(), per_image[i].end());
    return samples;
  };
  return train_forest(provider, ForestMode::OutdoorRgb, config, options.threads);
}

}  // namespace btrf

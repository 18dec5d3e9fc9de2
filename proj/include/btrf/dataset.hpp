#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "btrf/features.hpp"
#include "btrf/geometry.hpp"

namespace btrf {

enum class Split { Train, Test };

const char* to_string(Split split);

/// What a dataset load touched; lets callers audit access to ground truth.
struct LoadEvent {
  enum class Kind { Color, Depth, Pose, Keypoints, Points, Intrinsics };
  Kind kind;
  Split split;
  int frame;  // -1 for scene-level files
};

/// On-disk scene layout:
///   <root>/intrinsics.txt                      fx fy cx cy width height
///   <root>/{train,test}/frame-%06d.color.png   8-bit RGB
///   <root>/{train,test}/frame-%06d.depth.png   16-bit, millimeters, 0 = invalid
///   <root>/{train,test}/frame-%06d.pose.txt    4x4 camera-to-world
/// Outdoor scenes replace colour/depth with frame-%06d.keys and add
/// <root>/points3d.txt (one `x y z` per line).
class SceneDataset {
 public:
  explicit SceneDataset(std::string root);

  const std::string& root() const { return root_; }
  std::string frame_path(Split split, int index, const std::string& suffix) const;

  /// True when the training split holds keypoint files instead of images.
  bool is_outdoor() const;

  /// Frame indices present in a split, ascending.
  std::vector<int> frames(Split split) const;

  Intrinsics intrinsics() const;
  RgbdFrame load_rgbd(Split split, int index) const;
  CameraPose load_pose(Split split, int index) const;
  std::vector<Keypoint> load_keypoints(Split split, int index) const;
  std::vector<Eigen::Vector3d> load_points3d() const;

  void set_observer(std::function<void(const LoadEvent&)> observer) { observer_ = std::move(observer); }

 private:
  void notify(LoadEvent::Kind kind, Split split, int frame) const {
    if (observer_) observer_({kind, split, frame});
  }

  std::string root_;
  std::function<void(const LoadEvent&)> observer_;
};

/// Writes one RGB-D frame (depth rounded to millimeters) and its pose.
void write_rgbd_frame(const std::string& root, Split split, int index, const RgbdFrame& frame,
                      const CameraPose& pose);

void write_points3d(const std::string& path, const std::vector<Eigen::Vector3d>& points);

}  // namespace btrf

#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Core>

#include "btrf/features.hpp"
#include "btrf/forest.hpp"
#include "btrf/geometry.hpp"
#include "btrf/random.hpp"

namespace btrf::test {

inline Eigen::Matrix3d random_rotation(Rng& rng) {
  Eigen::Vector3d axis;
  do {
    axis = {standard_normal(rng), standard_normal(rng), standard_normal(rng)};
  } while (axis.norm() < 1e-6);
  return axis_angle(axis.normalized(), uniform_real(rng, -3.1, 3.1));
}

inline CameraPose random_pose(Rng& rng, double translation_scale = 2.0) {
  CameraPose p;
  p.rotation = random_rotation(rng);
  for (int i = 0; i < 3; ++i) p.translation[i] = uniform_real(rng, -translation_scale, translation_scale);
  return p;
}

inline Eigen::Vector3d random_point(Rng& rng, double lo, double hi) {
  return {uniform_real(rng, lo, hi), uniform_real(rng, lo, hi), uniform_real(rng, lo, hi)};
}

inline std::vector<double> random_vector(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = uniform_real(rng, lo, hi);
  return v;
}

/// Noise image with depth in [dmin, dmax]; `holes` of the pixels get depth 0.
inline RgbdFrame random_frame(Rng& rng, int w, int h, double dmin = 0.5, double dmax = 4.0,
                              double holes = 0.0) {
  RgbdFrame f(w, h);
  for (auto& c : f.rgb) c = static_cast<std::uint8_t>(uniform_index(rng, 256));
  for (auto& d : f.depth) d = uniform_unit(rng) < holes ? 0.0 : uniform_real(rng, dmin, dmax);
  return f;
}

/// Random descriptor-split tree with exactly `leaves` leaves, built directly
/// from nodes (pre-order, arbitrary thresholds).
inline RegressionTree random_descriptor_tree(Rng& rng, std::size_t dim, std::size_t leaves) {
  std::vector<TreeNode> nodes;
  auto grow = [&](auto& self, std::size_t n, int depth) -> std::int32_t {
    const auto id = static_cast<std::int32_t>(nodes.size());
    if (n == 1) {
      LeafNode leaf;
      leaf.mean_position = random_point(rng, -5.0, 5.0);
      leaf.mean_descriptor = random_vector(rng, dim);
      leaf.sample_count = 1 + static_cast<int>(uniform_index(rng, 20));
      leaf.depth = depth;
      nodes.emplace_back(leaf);
      return id;
    }
    nodes.emplace_back(SplitNode{});
    const std::size_t left_n = 1 + uniform_index(rng, n - 1);
    SplitNode split;
    split.params.feature = DescriptorFeature{static_cast<int>(uniform_index(rng, dim))};
    split.params.threshold = uniform_real(rng, -1.0, 1.0);
    split.depth = depth;
    split.left = self(self, left_n, depth + 1);
    split.right = self(self, n - left_n, depth + 1);
    nodes[static_cast<std::size_t>(id)] = split;
    return id;
  };
  grow(grow, leaves, 0);
  return RegressionTree(ForestMode::OutdoorRgb, dim, std::move(nodes));
}

inline TrainingSample descriptor_sample(std::vector<double> descriptor,
                                        const Eigen::Vector3d& label = Eigen::Vector3d::Zero()) {
  TrainingSample s;
  s.descriptor = std::move(descriptor);
  s.world_label = label;
  return s;
}

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("btrf-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& child = "") const {
    return child.empty() ? path_.string() : (path_ / child).string();
  }

 private:
  std::filesystem::path path_;
};

}  // namespace btrf::test

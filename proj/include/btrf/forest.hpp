#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "btrf/errors.hpp"
#include "btrf/features.hpp"
#include "btrf/random.hpp"

namespace btrf {

enum class ForestMode : std::uint8_t {
  IndoorRgbd = 0,  // random pixel-pair splits, WHT leaf descriptors
  OutdoorRgb = 1,  // descriptor-dimension splits, external descriptors
};

enum class SplitObjective : std::uint8_t {
  Balanced = 0,  // |L - R| / (L + R)
  Variance = 1,  // size-weighted spatial variance of the children
};

enum class Branch { Left, Right };

const char* to_string(ForestMode mode);
const char* to_string(SplitObjective objective);

/// Depth-normalised pixel-pair colour difference.
struct RandomFeature {
  Eigen::Vector2d offset = Eigen::Vector2d::Zero();  // pixel * meters
  int c1 = 0;
  int c2 = 0;
};

/// One component of the sample's descriptor.
struct DescriptorFeature {
  int dimension = 0;
};

using FeatureSelector = std::variant<RandomFeature, DescriptorFeature>;

struct WeakLearnerParams {
  FeatureSelector feature;
  double threshold = 0.0;
};

/// A pixel with its descriptor and (for training) its world coordinate.
/// Indoor samples keep a pointer to their frame for on-demand random
/// feature responses; the frame must outlive the sample.
struct TrainingSample {
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
  std::vector<double> descriptor;
  Eigen::Vector3d world_label = Eigen::Vector3d::Zero();
  const RgbdFrame* frame = nullptr;
  double inverse_depth = 0.0;

  /// Indoor sample at integer pixel (x, y); throws InvalidDepth if D = 0.
  static TrainingSample from_frame(const RgbdFrame& frame, int x, int y,
                                   std::vector<double> descriptor,
                                   const Eigen::Vector3d& world_label = Eigen::Vector3d::Zero());
};

struct ForestConfig {
  int tree_count = 5;
  int max_depth = 25;
  int balanced_depth_limit = 6;  // splits above this depth use the balanced objective
  int min_leaf_samples = 5;
  int candidates_per_node = 64;
  int thresholds_per_candidate = 16;
  int max_backtrack_leaves = 16;
  std::uint64_t rng_seed = 0;
  double offset_range = 130.0;  // random feature offsets drawn from [-r, r]^2

  void validate() const;
};

struct SplitNode {
  WeakLearnerParams params;
  std::int32_t left = -1;
  std::int32_t right = -1;
  int depth = 0;
  SplitObjective objective = SplitObjective::Variance;
};

struct LeafNode {
  Eigen::Vector3d mean_position = Eigen::Vector3d::Zero();
  std::vector<double> mean_descriptor;
  int sample_count = 0;
  int depth = 0;
};

using TreeNode = std::variant<SplitNode, LeafNode>;

/// Flat binary tree rooted at node 0.
class RegressionTree {
 public:
  /// Validates the structure: children in range, each node reachable once,
  /// child depth = parent depth + 1, leaf descriptors of length
  /// `descriptor_dim`, descriptor splits within range.
  RegressionTree(ForestMode mode, std::size_t descriptor_dim, std::vector<TreeNode> nodes);

  ForestMode mode() const { return mode_; }
  std::size_t descriptor_dim() const { return descriptor_dim_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& node(std::int32_t index) const { return nodes_[static_cast<std::size_t>(index)]; }
  std::size_t leaf_count() const { return leaf_count_; }
  int depth() const { return depth_; }

 private:
  ForestMode mode_;
  std::size_t descriptor_dim_;
  std::vector<TreeNode> nodes_;
  std::size_t leaf_count_ = 0;
  int depth_ = 0;
};

struct Forest {
  ForestMode mode = ForestMode::IndoorRgbd;
  std::size_t descriptor_dim = 0;
  ForestConfig config;
  std::vector<RegressionTree> trees;
};

struct Prediction {
  Eigen::Vector3d world_point = Eigen::Vector3d::Zero();
  double descriptor_distance = 0.0;
  int leaves_examined = 0;
  std::int32_t leaf = -1;
};

// --- split objectives -------------------------------------------------------

double balanced_objective(std::size_t left_count, std::size_t right_count);
double spatial_variance(std::span<const Eigen::Vector3d> points);
double variance_objective(std::span<const Eigen::Vector3d> left,
                          std::span<const Eigen::Vector3d> right);

// --- weak learner -----------------------------------------------------------

struct WeakLearnerOutcome {
  Branch branch = Branch::Left;
  double response = 0.0;
};

double feature_response(const TrainingSample& sample, const FeatureSelector& feature);

/// Left iff response <= threshold.
WeakLearnerOutcome evaluate_weak_learner(const TrainingSample& sample,
                                         const WeakLearnerParams& params);

// --- training ---------------------------------------------------------------

struct SplitChoice {
  WeakLearnerParams params;
  SplitObjective objective = SplitObjective::Variance;
  double score = 0.0;
  std::vector<std::size_t> left;  // indices into the input samples
  std::vector<std::size_t> right;
};

SplitObjective objective_for_depth(int depth, const ForestConfig& config);

/// Every (feature, threshold) pair choose_split scores, in generation order,
/// consuming `rng` exactly as choose_split does.
std::vector<WeakLearnerParams> enumerate_split_candidates(std::span<const TrainingSample> samples,
                                                          ForestMode mode,
                                                          const ForestConfig& config, Rng& rng);

/// Best split under the depth's objective, or nullopt when no candidate
/// leaves at least min_leaf_samples on each side.
std::optional<SplitChoice> choose_split(std::span<const TrainingSample> samples, int depth,
                                        ForestMode mode, const ForestConfig& config, Rng& rng);

RegressionTree build_tree(std::span<const TrainingSample> samples, ForestMode mode,
                          const ForestConfig& config, Rng& rng);

using SampleProvider = std::function<std::vector<TrainingSample>(int tree_index)>;

/// Tree t is grown from provider(t) with seed config.rng_seed + t. Trees are
/// independent and may be grown on `threads` workers.
Forest train_forest(const SampleProvider& provider, ForestMode mode, const ForestConfig& config,
                    int threads = 1);

Forest train_forest(const std::vector<std::vector<TrainingSample>>& per_tree_samples,
                    ForestMode mode, const ForestConfig& config, int threads = 1);

// --- prediction -------------------------------------------------------------

Prediction predict_greedy(const RegressionTree& tree, const TrainingSample& sample);

/// Priority-queue backtracking: descend greedily, queue each skipped sibling
/// keyed by |response - threshold|, revisit the closest until `max_leaves`
/// leaves have been examined. Returns the leaf with the smallest descriptor
/// distance seen (first found wins ties).
Prediction predict_backtracking(const RegressionTree& tree, const TrainingSample& sample,
                                int max_leaves);

/// One prediction per tree, in tree order.
std::vector<Prediction> forest_predict(const Forest& forest, const TrainingSample& sample,
                                       int max_leaves);

// --- statistics -------------------------------------------------------------

struct TreeStats {
  std::size_t split_count = 0;
  std::size_t leaf_count = 0;
  int depth = 0;
  std::vector<std::size_t> leaves_per_depth;
  std::vector<std::size_t> balanced_splits_per_depth;
  std::vector<std::size_t> variance_splits_per_depth;
  std::size_t training_samples = 0;
};

TreeStats tree_stats(const RegressionTree& tree);

}  // namespace btrf

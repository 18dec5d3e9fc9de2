#include "btrf/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "btrf/parallel.hpp"

namespace btrf {

namespace {

// Response without the validation done by feature_response().
inline double raw_response(const TrainingSample& s, const FeatureSelector& feature) {
  if (const auto* rf = std::get_if<RandomFeature>(&feature)) {
    return random_feature_response_unchecked(*s.frame, static_cast<int>(s.pixel.x()),
                                             static_cast<int>(s.pixel.y()), s.inverse_depth,
                                             rf->offset.x(), rf->offset.y(), rf->c1, rf->c2);
  }
  return s.descriptor[static_cast<std::size_t>(std::get<DescriptorFeature>(feature).dimension)];
}

void check_query(const TrainingSample& sample, ForestMode mode, std::size_t descriptor_dim) {
  if (sample.descriptor.size() != descriptor_dim)
    throw InvalidInput("sample descriptor length does not match the model");
  if (mode == ForestMode::IndoorRgbd && (sample.frame == nullptr || !(sample.inverse_depth > 0.0)))
    throw InvalidInput("indoor model needs samples attached to an RGB-D frame with valid depth");
}

FeatureSelector draw_feature(ForestMode mode, std::size_t descriptor_dim,
                             const ForestConfig& config, Rng& rng) {
  if (mode == ForestMode::IndoorRgbd) {
    RandomFeature f;
    f.offset.x() = uniform_real(rng, -config.offset_range, config.offset_range);
    f.offset.y() = uniform_real(rng, -config.offset_range, config.offset_range);
    f.c1 = static_cast<int>(uniform_index(rng, 3));
    f.c2 = static_cast<int>(uniform_index(rng, 3));
    return f;
  }
  return DescriptorFeature{static_cast<int>(uniform_index(rng, descriptor_dim))};
}

// Draws each candidate feature, evaluates it over `index`, draws its
// thresholds uniformly in [min, max) of the observed responses and hands
// everything to `fn`. RNG consumption is independent of the data.
template <typename Fn>
void for_each_candidate(std::span<const TrainingSample> samples,
                        std::span<const std::uint32_t> index, ForestMode mode,
                        const ForestConfig& config, Rng& rng, std::vector<double>& responses,
                        std::vector<double>& thresholds, Fn&& fn) {
  const std::size_t dim = samples[index[0]].descriptor.size();
  responses.resize(index.size());
  thresholds.resize(static_cast<std::size_t>(config.thresholds_per_candidate));
  for (int c = 0; c < config.candidates_per_node; ++c) {
    const FeatureSelector feature = draw_feature(mode, dim, config, rng);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < index.size(); ++i) {
      const double r = raw_response(samples[index[i]], feature);
      responses[i] = r;
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    for (double& t : thresholds) t = lo + uniform_unit(rng) * (hi - lo);
    fn(feature, std::span<const double>(responses), std::span<const double>(thresholds), lo < hi);
  }
}

struct BinStats {
  std::size_t count = 0;
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  double sum_sq = 0.0;
};

struct BestSplit {
  FeatureSelector feature;
  double threshold = 0.0;
  double score = std::numeric_limits<double>::infinity();
  bool found = false;
};

class SplitSearch {
 public:
  SplitSearch(std::span<const TrainingSample> samples, ForestMode mode, const ForestConfig& config)
      : samples_(samples), mode_(mode), config_(config) {}

  // Best split of samples[index] at `depth`, or !found.
  BestSplit run(std::span<const std::uint32_t> index, int depth, Rng& rng) {
    const SplitObjective objective = objective_for_depth(depth, config_);
    const std::size_t n = index.size();
    const std::size_t min_side = static_cast<std::size_t>(config_.min_leaf_samples);

    if (objective == SplitObjective::Variance) {
      // Labels centred on the node mean keep the moment sums well conditioned.
      Eigen::Vector3d mean = Eigen::Vector3d::Zero();
      for (const auto i : index) mean += samples_[i].world_label;
      mean /= static_cast<double>(n);
      centred_.resize(n);
      centred_sq_.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        centred_[i] = samples_[index[i]].world_label - mean;
        centred_sq_[i] = centred_[i].squaredNorm();
      }
    }

    const std::size_t t_count = static_cast<std::size_t>(config_.thresholds_per_candidate);
    order_.resize(t_count);
    sorted_.resize(t_count);
    bins_.resize(t_count + 1);
    scores_.resize(t_count);

    BestSplit best;
    for_each_candidate(
        samples_, index, mode_, config_, rng, responses_, thresholds_,
        [&](const FeatureSelector& feature, std::span<const double> responses,
            std::span<const double> thresholds, bool separable) {
          if (!separable) return;
          std::iota(order_.begin(), order_.end(), std::size_t{0});
          std::stable_sort(order_.begin(), order_.end(),
                           [&](std::size_t a, std::size_t b) { return thresholds[a] < thresholds[b]; });
          for (std::size_t j = 0; j < t_count; ++j) sorted_[j] = thresholds[order_[j]];
          std::fill(bins_.begin(), bins_.end(), BinStats{});

          // Bin b holds responses in (sorted[b-1], sorted[b]]; the left side of
          // sorted threshold j is the union of bins 0..j.
          for (std::size_t i = 0; i < n; ++i) {
            const auto b = static_cast<std::size_t>(
                std::lower_bound(sorted_.begin(), sorted_.end(), responses[i]) - sorted_.begin());
            BinStats& bin = bins_[b];
            ++bin.count;
            if (objective == SplitObjective::Variance) {
              bin.sum += centred_[i];
              bin.sum_sq += centred_sq_[i];
            }
          }

          BinStats total;
          for (const auto& b : bins_) {
            total.count += b.count;
            total.sum += b.sum;
            total.sum_sq += b.sum_sq;
          }
          BinStats left;
          for (std::size_t j = 0; j < t_count; ++j) {
            left.count += bins_[j].count;
            left.sum += bins_[j].sum;
            left.sum_sq += bins_[j].sum_sq;
            const std::size_t right_count = n - left.count;
            double score = std::numeric_limits<double>::infinity();
            if (left.count >= min_side && right_count >= min_side) {
              if (objective == SplitObjective::Balanced) {
                score = balanced_objective(left.count, right_count);
              } else {
                const double nl = static_cast<double>(left.count);
                const double nr = static_cast<double>(right_count);
                const Eigen::Vector3d right_sum = total.sum - left.sum;
                const double right_sq = total.sum_sq - left.sum_sq;
                score = ((left.sum_sq - left.sum.squaredNorm() / nl) +
                         (right_sq - right_sum.squaredNorm() / nr)) /
                        static_cast<double>(n);
              }
            }
            scores_[order_[j]] = score;
          }
          // Generation order decides ties.
          for (std::size_t t = 0; t < t_count; ++t) {
            if (scores_[t] < best.score) {
              best.score = scores_[t];
              best.feature = feature;
              best.threshold = thresholds[t];
              best.found = true;
            }
          }
        });
    return best;
  }

  void enumerate(std::span<const std::uint32_t> index, Rng& rng,
                 std::vector<WeakLearnerParams>& out) {
    for_each_candidate(samples_, index, mode_, config_, rng, responses_, thresholds_,
                       [&](const FeatureSelector& feature, std::span<const double>,
                           std::span<const double> thresholds, bool) {
                         for (const double t : thresholds) out.push_back({feature, t});
                       });
  }

 private:
  std::span<const TrainingSample> samples_;
  ForestMode mode_;
  const ForestConfig& config_;
  std::vector<double> responses_;
  std::vector<double> thresholds_;
  std::vector<Eigen::Vector3d> centred_;
  std::vector<double> centred_sq_;
  std::vector<std::size_t> order_;
  std::vector<double> sorted_;
  std::vector<BinStats> bins_;
  std::vector<double> scores_;
};

void check_samples(std::span<const TrainingSample> samples, ForestMode mode) {
  if (samples.empty()) throw InvalidInput("no training samples");
  const std::size_t dim = samples.front().descriptor.size();
  for (const auto& s : samples) {
    check_query(s, mode, dim);
    if (!s.world_label.allFinite()) throw InvalidInput("training label is not finite");
  }
  if (mode == ForestMode::OutdoorRgb && dim == 0)
    throw InvalidInput("outdoor samples need descriptors to split on");
}

class TreeBuilder {
 public:
  TreeBuilder(std::span<const TrainingSample> samples, ForestMode mode, const ForestConfig& config,
              Rng& rng)
      : samples_(samples), mode_(mode), config_(config), rng_(rng), search_(samples, mode, config) {}

  std::vector<TreeNode> build() {
    std::vector<std::uint32_t> index(samples_.size());
    std::iota(index.begin(), index.end(), 0u);
    grow(index.begin(), index.end(), 0);
    return std::move(nodes_);
  }

 private:
  using Iter = std::vector<std::uint32_t>::iterator;

  std::int32_t grow(Iter begin, Iter end, int depth) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back(LeafNode{});
    const std::span<const std::uint32_t> index(&*begin, static_cast<std::size_t>(end - begin));

    const bool can_split = depth < config_.max_depth &&
                           index.size() >= 2 * static_cast<std::size_t>(config_.min_leaf_samples);
    if (can_split) {
      const BestSplit split = search_.run(index, depth, rng_);
      if (split.found) {
        const Iter middle = std::stable_partition(begin, end, [&](std::uint32_t i) {
          return raw_response(samples_[i], split.feature) <= split.threshold;
        });
        SplitNode node;
        node.params = {split.feature, split.threshold};
        node.depth = depth;
        node.objective = objective_for_depth(depth, config_);
        node.left = grow(begin, middle, depth + 1);
        node.right = grow(middle, end, depth + 1);
        nodes_[static_cast<std::size_t>(id)] = std::move(node);
        return id;
      }
    }
    nodes_[static_cast<std::size_t>(id)] = make_leaf(index, depth);
    return id;
  }

  LeafNode make_leaf(std::span<const std::uint32_t> index, int depth) const {
    LeafNode leaf;
    leaf.depth = depth;
    leaf.sample_count = static_cast<int>(index.size());
    leaf.mean_descriptor.assign(samples_[index[0]].descriptor.size(), 0.0);
    for (const auto i : index) {
      leaf.mean_position += samples_[i].world_label;
      const auto& d = samples_[i].descriptor;
      for (std::size_t k = 0; k < d.size(); ++k) leaf.mean_descriptor[k] += d[k];
    }
    const double n = static_cast<double>(index.size());
    leaf.mean_position /= n;
    for (double& v : leaf.mean_descriptor) v /= n;
    return leaf;
  }

  std::span<const TrainingSample> samples_;
  ForestMode mode_;
  const ForestConfig& config_;
  Rng& rng_;
  SplitSearch search_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

const char* to_string(ForestMode mode) {
  return mode == ForestMode::IndoorRgbd ? "indoor-rgbd" : "outdoor-rgb";
}

const char* to_string(SplitObjective objective) {
  return objective == SplitObjective::Balanced ? "balanced" : "variance";
}

TrainingSample TrainingSample::from_frame(const RgbdFrame& frame, int x, int y,
                                          std::vector<double> descriptor,
                                          const Eigen::Vector3d& world_label) {
  if (!frame.in_bounds(x, y)) throw InvalidInput("sample pixel outside the frame");
  const double d = frame.depth_at(x, y);
  if (!(d > 0.0)) throw InvalidDepth("sample pixel has no depth");
  TrainingSample s;
  s.pixel = {static_cast<double>(x), static_cast<double>(y)};
  s.descriptor = std::move(descriptor);
  s.world_label = world_label;
  s.frame = &frame;
  s.inverse_depth = 1.0 / d;
  return s;
}

void ForestConfig::validate() const {
  if (tree_count < 1) throw InvalidInput("tree_count must be >= 1");
  if (max_depth < 0) throw InvalidInput("max_depth must be >= 0");
  if (balanced_depth_limit < 0 || balanced_depth_limit > max_depth)
    throw InvalidInput("balanced_depth_limit must lie in [0, max_depth]");
  if (min_leaf_samples < 1) throw InvalidInput("min_leaf_samples must be >= 1");
  if (candidates_per_node < 1) throw InvalidInput("candidates_per_node must be >= 1");
  if (thresholds_per_candidate < 1) throw InvalidInput("thresholds_per_candidate must be >= 1");
  if (max_backtrack_leaves < 1) throw InvalidInput("max_backtrack_leaves must be >= 1");
  if (!(offset_range >= 0.0) || !std::isfinite(offset_range))
    throw InvalidInput("offset_range must be finite and >= 0");
}

RegressionTree::RegressionTree(ForestMode mode, std::size_t descriptor_dim,
                               std::vector<TreeNode> nodes)
    : mode_(mode), descriptor_dim_(descriptor_dim), nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw InvalidInput("tree has no nodes");
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<std::pair<std::int32_t, int>> stack = {{0, 0}};
  while (!stack.empty()) {
    const auto [id, depth] = stack.back();
    stack.pop_back();
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
      throw InvalidInput("tree child index out of range");
    if (seen[static_cast<std::size_t>(id)]++) throw InvalidInput("tree node reachable twice");
    const TreeNode& node = nodes_[static_cast<std::size_t>(id)];
    if (const auto* split = std::get_if<SplitNode>(&node)) {
      if (split->depth != depth) throw InvalidInput("split node depth inconsistent with its position");
      if (!std::isfinite(split->params.threshold)) throw InvalidInput("split threshold not finite");
      if (const auto* rf = std::get_if<RandomFeature>(&split->params.feature)) {
        if (mode != ForestMode::IndoorRgbd) throw InvalidInput("random feature in an outdoor tree");
        if (rf->c1 < 0 || rf->c1 > 2 || rf->c2 < 0 || rf->c2 > 2)
          throw InvalidInput("random feature channel out of range");
        if (!rf->offset.allFinite()) throw InvalidInput("random feature offset not finite");
      } else {
        const int dim = std::get<DescriptorFeature>(split->params.feature).dimension;
        if (mode != ForestMode::OutdoorRgb) throw InvalidInput("descriptor split in an indoor tree");
        if (dim < 0 || static_cast<std::size_t>(dim) >= descriptor_dim)
          throw InvalidInput("descriptor split dimension out of range");
      }
      stack.push_back({split->right, depth + 1});
      stack.push_back({split->left, depth + 1});
    } else {
      const auto& leaf = std::get<LeafNode>(node);
      if (leaf.depth != depth) throw InvalidInput("leaf depth inconsistent with its position");
      if (leaf.sample_count < 1) throw InvalidInput("leaf without samples");
      if (leaf.mean_descriptor.size() != descriptor_dim)
        throw InvalidInput("leaf descriptor length mismatch");
      if (!leaf.mean_position.allFinite()) throw InvalidInput("leaf position not finite");
      ++leaf_count_;
      depth_ = std::max(depth_, depth);
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw InvalidInput("tree has unreachable nodes");
}

double balanced_objective(std::size_t left_count, std::size_t right_count) {
  if (left_count + right_count == 0) throw InvalidInput("balanced_objective: both sides empty");
  const double l = static_cast<double>(left_count);
  const double r = static_cast<double>(right_count);
  return std::abs(l - r) / (l + r);
}

double spatial_variance(std::span<const Eigen::Vector3d> points) {
  if (points.empty()) throw InvalidInput("spatial_variance: empty set");
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  double sum = 0.0;
  for (const auto& p : points) sum += (p - mean).squaredNorm();
  return sum / static_cast<double>(points.size());
}

double variance_objective(std::span<const Eigen::Vector3d> left,
                          std::span<const Eigen::Vector3d> right) {
  const double n = static_cast<double>(left.size() + right.size());
  if (n == 0.0) throw InvalidInput("variance_objective: both sides empty");
  double q = 0.0;
  if (!left.empty()) q += static_cast<double>(left.size()) / n * spatial_variance(left);
  if (!right.empty()) q += static_cast<double>(right.size()) / n * spatial_variance(right);
  return q;
}

double feature_response(const TrainingSample& sample, const FeatureSelector& feature) {
  if (const auto* rf = std::get_if<RandomFeature>(&feature)) {
    if (sample.frame == nullptr) throw InvalidInput("random feature needs an RGB-D frame");
    return random_feature_response(*sample.frame, static_cast<int>(sample.pixel.x()),
                                   static_cast<int>(sample.pixel.y()), rf->offset, rf->c1, rf->c2);
  }
  const int dim = std::get<DescriptorFeature>(feature).dimension;
  if (dim < 0 || static_cast<std::size_t>(dim) >= sample.descriptor.size())
    throw InvalidInput("descriptor feature index out of range");
  return sample.descriptor[static_cast<std::size_t>(dim)];
}

WeakLearnerOutcome evaluate_weak_learner(const TrainingSample& sample,
                                         const WeakLearnerParams& params) {
  const double r = feature_response(sample, params.feature);
  return {r <= params.threshold ? Branch::Left : Branch::Right, r};
}

SplitObjective objective_for_depth(int depth, const ForestConfig& config) {
  return depth < config.balanced_depth_limit ? SplitObjective::Balanced : SplitObjective::Variance;
}

std::vector<WeakLearnerParams> enumerate_split_candidates(std::span<const TrainingSample> samples,
                                                          ForestMode mode,
                                                          const ForestConfig& config, Rng& rng) {
  check_samples(samples, mode);
  std::vector<std::uint32_t> index(samples.size());
  std::iota(index.begin(), index.end(), 0u);
  std::vector<WeakLearnerParams> out;
  SplitSearch(samples, mode, config).enumerate(index, rng, out);
  return out;
}

std::optional<SplitChoice> choose_split(std::span<const TrainingSample> samples, int depth,
                                        ForestMode mode, const ForestConfig& config, Rng& rng) {
  check_samples(samples, mode);
  if (samples.size() < 2 * static_cast<std::size_t>(config.min_leaf_samples)) return std::nullopt;
  std::vector<std::uint32_t> index(samples.size());
  std::iota(index.begin(), index.end(), 0u);
  const BestSplit best = SplitSearch(samples, mode, config).run(index, depth, rng);
  if (!best.found) return std::nullopt;

  SplitChoice choice;
  choice.params = {best.feature, best.threshold};
  choice.objective = objective_for_depth(depth, config);
  choice.score = best.score;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    (raw_response(samples[i], best.feature) <= best.threshold ? choice.left : choice.right).push_back(i);
  }
  return choice;
}

RegressionTree build_tree(std::span<const TrainingSample> samples, ForestMode mode,
                          const ForestConfig& config, Rng& rng) {
  config.validate();
  check_samples(samples, mode);
  TreeBuilder builder(samples, mode, config, rng);
  return RegressionTree(mode, samples.front().descriptor.size(), builder.build());
}

Forest train_forest(const SampleProvider& provider, ForestMode mode, const ForestConfig& config,
                    int threads) {
  config.validate();
  std::vector<std::optional<RegressionTree>> trees(static_cast<std::size_t>(config.tree_count));
  parallel_for(config.tree_count, threads, [&](int t) {
    const std::vector<TrainingSample> samples = provider(t);
    Rng rng(config.rng_seed + static_cast<std::uint64_t>(t));
    trees[static_cast<std::size_t>(t)] = build_tree(samples, mode, config, rng);
  });

  Forest forest;
  forest.mode = mode;
  forest.config = config;
  forest.descriptor_dim = trees.front()->descriptor_dim();
  for (auto& tree : trees) {
    if (tree->descriptor_dim() != forest.descriptor_dim)
      throw InvalidInput("trees were given samples with different descriptor lengths");
    forest.trees.push_back(std::move(*tree));
  }
  return forest;
}

Forest train_forest(const std::vector<std::vector<TrainingSample>>& per_tree_samples,
                    ForestMode mode, const ForestConfig& config, int threads) {
  if (per_tree_samples.size() != static_cast<std::size_t>(config.tree_count))
    throw InvalidInput("need exactly one sample list per tree");
  for (const auto& list : per_tree_samples) {
    if (list.empty()) throw InvalidInput("empty per-tree sample list");
    if (list.front().descriptor.size() != per_tree_samples.front().front().descriptor.size())
      throw InvalidInput("sample lists have different descriptor lengths");
  }
  return train_forest([&](int t) { return per_tree_samples[static_cast<std::size_t>(t)]; }, mode,
                      config, threads);
}

Prediction predict_greedy(const RegressionTree& tree, const TrainingSample& sample) {
  check_query(sample, tree.mode(), tree.descriptor_dim());
  std::int32_t id = 0;
  while (const auto* split = std::get_if<SplitNode>(&tree.node(id))) {
    id = raw_response(sample, split->params.feature) <= split->params.threshold ? split->left
                                                                                : split->right;
  }
  const auto& leaf = std::get<LeafNode>(tree.node(id));
  Prediction p;
  p.world_point = leaf.mean_position;
  p.descriptor_distance = descriptor_distance(sample.descriptor, leaf.mean_descriptor);
  p.leaves_examined = 1;
  p.leaf = id;
  return p;
}

Prediction predict_backtracking(const RegressionTree& tree, const TrainingSample& sample,
                                int max_leaves) {
  if (max_leaves < 1) throw InvalidInput("max_leaves must be >= 1");
  check_query(sample, tree.mode(), tree.descriptor_dim());

  struct Pending {
    double key;
    std::uint64_t order;
    std::int32_t node;
  };
  // Min-heap on key; equal keys pop in insertion order.
  const auto later = [](const Pending& a, const Pending& b) {
    return a.key > b.key || (a.key == b.key && a.order > b.order);
  };
  std::vector<Pending> queue;
  std::uint64_t pushed = 0;

  Prediction best;
  best.descriptor_distance = std::numeric_limits<double>::infinity();
  int examined = 0;

  const auto traverse = [&](std::int32_t id) {
    while (const auto* split = std::get_if<SplitNode>(&tree.node(id))) {
      const double r = raw_response(sample, split->params.feature);
      const bool left = r <= split->params.threshold;
      queue.push_back({std::abs(r - split->params.threshold), pushed++,
                       left ? split->right : split->left});
      std::push_heap(queue.begin(), queue.end(), later);
      id = left ? split->left : split->right;
    }
    const auto& leaf = std::get<LeafNode>(tree.node(id));
    const double dist = descriptor_distance(sample.descriptor, leaf.mean_descriptor);
    if (best.leaf < 0 || dist < best.descriptor_distance) {
      best.world_point = leaf.mean_position;
      best.descriptor_distance = dist;
      best.leaf = id;
    }
    ++examined;
  };

  traverse(0);
  while (!queue.empty() && examined < max_leaves) {
    std::pop_heap(queue.begin(), queue.end(), later);
    const std::int32_t next = queue.back().node;
    queue.pop_back();
    traverse(next);
  }
  best.leaves_examined = examined;
  return best;
}

std::vector<Prediction> forest_predict(const Forest& forest, const TrainingSample& sample,
                                       int max_leaves) {
  std::vector<Prediction> out;
  out.reserve(forest.trees.size());
  for (const auto& tree : forest.trees) out.push_back(predict_backtracking(tree, sample, max_leaves));
  return out;
}

TreeStats tree_stats(const RegressionTree& tree) {
  TreeStats s;
  s.depth = tree.depth();
  const auto levels = static_cast<std::size_t>(tree.depth()) + 1;
  s.leaves_per_depth.assign(levels, 0);
  s.balanced_splits_per_depth.assign(levels, 0);
  s.variance_splits_per_depth.assign(levels, 0);
  for (const auto& node : tree.nodes()) {
    if (const auto* split = std::get_if<SplitNode>(&node)) {
      ++s.split_count;
      auto& bucket = split->objective == SplitObjective::Balanced ? s.balanced_splits_per_depth
                                                                  : s.variance_splits_per_depth;
      ++bucket[static_cast<std::size_t>(split->depth)];
    } else {
      const auto& leaf = std::get<LeafNode>(node);
      ++s.leaf_count;
      ++s.leaves_per_depth[static_cast<std::size_t>(leaf.depth)];
      s.training_samples += static_cast<std::size_t>(leaf.sample_count);
    }
  }
  return s;
}

}  // namespace btrf

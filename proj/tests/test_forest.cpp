#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "btrf/forest.hpp"
#include "btrf/forest_io.hpp"
#include "btrf/synth.hpp"
#include "support.hpp"

using namespace btrf;
using test::descriptor_sample;
using test::random_point;
using test::random_vector;

namespace {

std::vector<TrainingSample> random_outdoor_samples(Rng& rng, std::size_t n, std::size_t dim) {
  std::vector<TrainingSample> s;
  for (std::size_t i = 0; i < n; ++i)
    s.push_back(descriptor_sample(random_vector(rng, dim), random_point(rng, -3, 3)));
  return s;
}

struct IndoorFixture {
  std::vector<RgbdFrame> frames;
  std::vector<TrainingSample> samples;
};

/// Small rendered views of the synthetic room with WHT descriptors.
IndoorFixture indoor_fixture(std::uint64_t seed, int frames, int per_frame) {
  IndoorFixture fx;
  const SyntheticScene scene = SyntheticScene::generate(seed);
  const Intrinsics k{60, 60, 32, 24, 64, 48};
  const Trajectory traj = sample_trajectory(scene, frames, 1, seed);
  fx.frames.reserve(static_cast<std::size_t>(frames));
  for (const auto& pose : traj.train) fx.frames.push_back(render_frame(scene, pose, k).frame);
  Rng rng(seed);
  for (std::size_t f = 0; f < fx.frames.size(); ++f) {
    const RgbdFrame& frame = fx.frames[f];
    for (int i = 0; i < per_frame; ++i) {
      const int x = static_cast<int>(uniform_index(rng, 64));
      const int y = static_cast<int>(uniform_index(rng, 48));
      const Eigen::Vector3d cam = backproject(Eigen::Vector2d(x, y), frame.depth_at(x, y), k);
      fx.samples.push_back(TrainingSample::from_frame(frame, x, y, wht_descriptor(frame, x, y),
                                                      traj.train[f].to_world(cam)));
    }
  }
  return fx;
}

/// Leaf reached by greedy descent, recomputed from the public node API.
std::int32_t descend(const RegressionTree& tree, const TrainingSample& s) {
  std::int32_t id = 0;
  while (const auto* split = std::get_if<SplitNode>(&tree.node(id)))
    id = evaluate_weak_learner(s, split->params).branch == Branch::Left ? split->left : split->right;
  return id;
}

/// Checks every structural and statistical invariant of a trained tree.
void check_trained_tree(const RegressionTree& tree, std::span<const TrainingSample> samples,
                        const ForestConfig& config) {
  std::map<std::int32_t, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < samples.size(); ++i) members[descend(tree, samples[i])].push_back(i);

  CHECK(tree.depth() <= config.max_depth);
  std::size_t leaves = 0;
  for (std::size_t id = 0; id < tree.nodes().size(); ++id) {
    const TreeNode& node = tree.nodes()[id];
    if (const auto* split = std::get_if<SplitNode>(&node)) {
      CHECK(split->objective == (split->depth < config.balanced_depth_limit ? SplitObjective::Balanced
                                                                            : SplitObjective::Variance));
      continue;
    }
    ++leaves;
    const auto& leaf = std::get<LeafNode>(node);
    const auto& m = members[static_cast<std::int32_t>(id)];
    REQUIRE(m.size() == static_cast<std::size_t>(leaf.sample_count));
    CHECK(leaf.sample_count >= config.min_leaf_samples);
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    std::vector<double> desc(tree.descriptor_dim(), 0.0);
    for (const auto i : m) {
      mean += samples[i].world_label;
      for (std::size_t k = 0; k < desc.size(); ++k) desc[k] += samples[i].descriptor[k];
    }
    mean /= static_cast<double>(m.size());
    CHECK((leaf.mean_position - mean).norm() <= 1e-9 * std::max(1.0, mean.norm()));
    for (std::size_t k = 0; k < desc.size(); ++k)
      CHECK(std::abs(leaf.mean_descriptor[k] - desc[k] / m.size()) <=
            1e-9 * std::max(1.0, std::abs(desc[k] / m.size())));
  }
  CHECK(leaves == tree.leaf_count());
  CHECK(members.size() == leaves);
}

}  // namespace

TEST_CASE("balanced objective examples and symmetry") {
  CHECK(balanced_objective(50, 50) == 0.0);
  CHECK(balanced_objective(100, 0) == 1.0);
  CHECK(balanced_objective(75, 25) == 0.5);
  CHECK_THROWS_AS(balanced_objective(0, 0), InvalidInput);
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const auto a = uniform_index(rng, 1000);
    const auto b = uniform_index(rng, 1000) + 1;
    const double q = balanced_objective(a, b);
    CHECK(q == balanced_objective(b, a));
    CHECK(q >= 0.0);
    CHECK(q <= 1.0);
  }
}

TEST_CASE("spatial variance examples") {
  const std::vector<Eigen::Vector3d> one{{1, 2, 3}};
  const std::vector<Eigen::Vector3d> two{{0, 0, 0}, {2, 0, 0}};
  const std::vector<Eigen::Vector3d> three{{0, 0, 0}, {0, 0, 0}, {0, 6, 0}};
  CHECK(spatial_variance(one) == 0.0);
  CHECK(spatial_variance(two) == 1.0);
  CHECK(spatial_variance(three) == 8.0);
  CHECK_THROWS_AS(spatial_variance(std::vector<Eigen::Vector3d>{}), InvalidInput);
}

TEST_CASE("variance objective examples") {
  const std::vector<Eigen::Vector3d> zeros{{0, 0, 0}, {0, 0, 0}};
  const std::vector<Eigen::Vector3d> tens{{10, 0, 0}, {10, 0, 0}};
  const std::vector<Eigen::Vector3d> four{{0, 0, 0}, {0, 0, 0}, {10, 0, 0}, {10, 0, 0}};
  const std::vector<Eigen::Vector3d> pair{{0, 0, 0}, {10, 0, 0}};
  const std::vector<Eigen::Vector3d> none;
  CHECK(variance_objective(zeros, tens) == 0.0);
  CHECK(variance_objective(four, none) == 25.0);
  CHECK(variance_objective(pair, pair) == 25.0);
  CHECK_THROWS_AS(variance_objective(none, none), InvalidInput);
}

TEST_CASE("variance objective is shift invariant") {
  Rng rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<Eigen::Vector3d> l, r, ls, rs;
    const Eigen::Vector3d shift = random_point(rng, -100, 100);
    const auto nl = uniform_index(rng, 20);
    const auto nr = uniform_index(rng, 20) + 1;
    for (std::size_t i = 0; i < nl; ++i) l.push_back(random_point(rng, -5, 5));
    for (std::size_t i = 0; i < nr; ++i) r.push_back(random_point(rng, -5, 5));
    for (const auto& p : l) ls.push_back(p + shift);
    for (const auto& p : r) rs.push_back(p + shift);
    const double a = variance_objective(l, r);
    const double b = variance_objective(ls, rs);
    CHECK(std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("weak learner boundary goes left") {
  const TrainingSample s04 = descriptor_sample({0.4, 0.0});
  const TrainingSample s06 = descriptor_sample({0.6, 0.0});
  const TrainingSample s05 = descriptor_sample({0.5, 0.0});
  const WeakLearnerParams p{DescriptorFeature{0}, 0.5};
  CHECK(evaluate_weak_learner(s04, p).branch == Branch::Left);
  CHECK(evaluate_weak_learner(s06, p).branch == Branch::Right);
  CHECK(evaluate_weak_learner(s05, p).branch == Branch::Left);
  CHECK(evaluate_weak_learner(s06, p).response == 0.6);
  CHECK_THROWS_AS(evaluate_weak_learner(s05, {DescriptorFeature{2}, 0.0}), InvalidInput);
  CHECK_THROWS_AS(evaluate_weak_learner(s05, {RandomFeature{}, 0.0}), InvalidInput);
}

TEST_CASE("choose_split matches an exhaustive scoring of its candidates") {
  Rng data_rng(3);
  ForestConfig config;
  config.candidates_per_node = 12;
  config.thresholds_per_candidate = 8;
  config.min_leaf_samples = 3;
  config.balanced_depth_limit = 2;
  for (int trial = 0; trial < 60; ++trial) {
    const auto samples = random_outdoor_samples(data_rng, 20 + uniform_index(data_rng, 80), 5);
    const int depth = static_cast<int>(uniform_index(data_rng, 4));
    const std::uint64_t seed = data_rng();
    Rng enumerate_rng(seed);
    Rng choose_rng(seed);
    const auto candidates = enumerate_split_candidates(samples, ForestMode::OutdoorRgb, config, enumerate_rng);
    REQUIRE(candidates.size() == 12 * 8);
    const auto choice = choose_split(samples, depth, ForestMode::OutdoorRgb, config, choose_rng);

    double best = std::numeric_limits<double>::infinity();
    std::size_t best_index = 0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      std::vector<Eigen::Vector3d> l, r;
      for (const auto& s : samples)
        (evaluate_weak_learner(s, candidates[c]).branch == Branch::Left ? l : r).push_back(s.world_label);
      if (l.size() < 3 || r.size() < 3) continue;
      const double score = depth < 2 ? balanced_objective(l.size(), r.size()) : variance_objective(l, r);
      if (score < best - 1e-12) {
        best = score;
        best_index = c;
      }
    }
    REQUIRE(choice.has_value());
    CHECK(choice->score == doctest::Approx(best).epsilon(1e-9));
    CHECK(choice->objective == (depth < 2 ? SplitObjective::Balanced : SplitObjective::Variance));
    // The winner scores the minimum under the independent objective too.
    std::vector<Eigen::Vector3d> l, r;
    for (const auto i : choice->left) l.push_back(samples[i].world_label);
    for (const auto i : choice->right) r.push_back(samples[i].world_label);
    const double replay = depth < 2 ? balanced_objective(l.size(), r.size()) : variance_objective(l, r);
    CHECK(replay == doctest::Approx(best).epsilon(1e-9));
    if (depth < 2) {
      CHECK(std::get<DescriptorFeature>(choice->params.feature).dimension ==
            std::get<DescriptorFeature>(candidates[best_index].feature).dimension);
      CHECK(choice->params.threshold == candidates[best_index].threshold);
    }
    for (const auto i : choice->left) CHECK(evaluate_weak_learner(samples[i], choice->params).branch == Branch::Left);
    for (const auto i : choice->right) CHECK(evaluate_weak_learner(samples[i], choice->params).branch == Branch::Right);
    CHECK(choice->left.size() + choice->right.size() == samples.size());
  }
}

TEST_CASE("choose_split oracle on indoor random features") {
  const IndoorFixture fx = indoor_fixture(4, 3, 40);
  ForestConfig config;
  config.candidates_per_node = 16;
  config.thresholds_per_candidate = 8;
  for (int depth : {0, 7}) {
    Rng a(99), b(99);
    const auto candidates = enumerate_split_candidates(fx.samples, ForestMode::IndoorRgbd, config, a);
    const auto choice = choose_split(fx.samples, depth, ForestMode::IndoorRgbd, config, b);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : candidates) {
      std::vector<Eigen::Vector3d> l, r;
      for (const auto& s : fx.samples)
        (evaluate_weak_learner(s, c).branch == Branch::Left ? l : r).push_back(s.world_label);
      if (l.size() < 5 || r.size() < 5) continue;
      best = std::min(best, depth < 6 ? balanced_objective(l.size(), r.size()) : variance_objective(l, r));
    }
    REQUIRE(choice.has_value());
    CHECK(choice->score == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("choose_split separates two label clusters with zero variance") {
  Rng rng(5);
  std::vector<TrainingSample> samples;
  for (int i = 0; i < 40; ++i) {
    const bool a = i % 2 == 0;
    std::vector<double> d = random_vector(rng, 4);
    d[0] = a ? uniform_real(rng, 0.0, 0.01) : uniform_real(rng, 0.99, 1.0);
    samples.push_back(descriptor_sample(d, a ? Eigen::Vector3d(0, 0, 0) : Eigen::Vector3d(5, 1, 2)));
  }
  ForestConfig config;
  Rng split_rng(6);
  const auto choice = choose_split(samples, 10, ForestMode::OutdoorRgb, config, split_rng);
  REQUIRE(choice.has_value());
  CHECK(choice->score == 0.0);
  CHECK(choice->left.size() == 20);
}

TEST_CASE("balanced objective prefers the even partition") {
  std::vector<TrainingSample> samples;
  for (int i = 0; i < 100; ++i)
    samples.push_back(descriptor_sample({i < 40 ? 0.0 : 1.0, i % 2 == 0 ? 0.0 : 1.0}));
  ForestConfig config;
  Rng rng(7);
  const auto choice = choose_split(samples, 0, ForestMode::OutdoorRgb, config, rng);
  REQUIRE(choice.has_value());
  CHECK(std::get<DescriptorFeature>(choice->params.feature).dimension == 1);
  CHECK(choice->score == 0.0);
  CHECK(choice->left.size() == 50);
}

TEST_CASE("choose_split: no split for identical or too few samples") {
  std::vector<TrainingSample> same(30, descriptor_sample({0.5, 0.5, 0.5}, {1, 1, 1}));
  ForestConfig config;
  Rng rng(8);
  CHECK_FALSE(choose_split(same, 0, ForestMode::OutdoorRgb, config, rng).has_value());
  Rng rng2(9);
  const auto few = random_outdoor_samples(rng2, 9, 3);
  CHECK_FALSE(choose_split(few, 0, ForestMode::OutdoorRgb, config, rng2).has_value());
}

TEST_CASE("build_tree small cases") {
  ForestConfig config;
  Rng rng(10);
  const std::vector<TrainingSample> one{descriptor_sample({0.1, 0.2}, {1, 2, 3})};
  const RegressionTree single = build_tree(one, ForestMode::OutdoorRgb, config, rng);
  REQUIRE(single.leaf_count() == 1);
  const auto& leaf = std::get<LeafNode>(single.node(0));
  CHECK(leaf.mean_position == Eigen::Vector3d(1, 2, 3));
  CHECK(leaf.mean_descriptor == std::vector<double>{0.1, 0.2});
  CHECK(leaf.sample_count == 1);

  std::vector<TrainingSample> clusters;
  Eigen::Vector3d ca = Eigen::Vector3d::Zero(), cb = Eigen::Vector3d::Zero();
  for (int i = 0; i < 60; ++i) {
    const bool a = i < 30;
    const Eigen::Vector3d p = (a ? Eigen::Vector3d(0, 0, 0) : Eigen::Vector3d(10, 0, 0)) + random_point(rng, -0.5, 0.5);
    (a ? ca : cb) += p / 30.0;
    clusters.push_back(descriptor_sample({a ? 0.0 : 1.0}, p));
  }
  const RegressionTree two = build_tree(clusters, ForestMode::OutdoorRgb, config, rng);
  REQUIRE(two.leaf_count() == 2);
  std::vector<Eigen::Vector3d> means;
  for (const auto& n : two.nodes())
    if (const auto* l = std::get_if<LeafNode>(&n)) means.push_back(l->mean_position);
  const bool a_first = means[0].x() < 5;
  CHECK((means[a_first ? 0 : 1] - ca).norm() < 1e-12);
  CHECK((means[a_first ? 1 : 0] - cb).norm() < 1e-12);

  CHECK_THROWS_AS(build_tree(std::vector<TrainingSample>{}, ForestMode::OutdoorRgb, config, rng), InvalidInput);
}

TEST_CASE("trained outdoor trees satisfy every structural invariant") {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const auto samples = random_outdoor_samples(rng, 200 + uniform_index(rng, 800), 8);
    ForestConfig config;
    config.min_leaf_samples = 1 + static_cast<int>(uniform_index(rng, 8));
    config.max_depth = 3 + static_cast<int>(uniform_index(rng, 20));
    config.balanced_depth_limit = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(config.max_depth) + 1));
    config.candidates_per_node = 8;
    Rng build_rng(rng());
    const RegressionTree tree = build_tree(samples, ForestMode::OutdoorRgb, config, build_rng);
    check_trained_tree(tree, samples, config);
  }
}

TEST_CASE("trained indoor trees satisfy every structural invariant") {
  const IndoorFixture fx = indoor_fixture(12, 6, 300);
  ForestConfig config;
  config.candidates_per_node = 16;
  Rng rng(13);
  const RegressionTree tree = build_tree(fx.samples, ForestMode::IndoorRgbd, config, rng);
  CHECK(tree.leaf_count() > 10);
  check_trained_tree(tree, fx.samples, config);
}

TEST_CASE("training is deterministic and thread-count independent") {
  const IndoorFixture fx = indoor_fixture(14, 4, 200);
  ForestConfig config;
  config.tree_count = 3;
  config.candidates_per_node = 16;
  const std::vector<std::vector<TrainingSample>> lists(3, fx.samples);
  const Forest a = train_forest(lists, ForestMode::IndoorRgbd, config, 1);
  const Forest b = train_forest(lists, ForestMode::IndoorRgbd, config, 3);
  CHECK(serialize_forest(a) == serialize_forest(b));
  config.rng_seed = 1;
  const Forest c = train_forest(lists, ForestMode::IndoorRgbd, config, 1);
  CHECK(serialize_forest(a) != serialize_forest(c));

  // Tree t of a forest equals build_tree with seed + t.
  Rng rng(0 + 2);
  config.rng_seed = 0;
  const RegressionTree t2 = build_tree(fx.samples, ForestMode::IndoorRgbd, config, rng);
  Forest single;
  single.mode = ForestMode::IndoorRgbd;
  single.descriptor_dim = 60;
  single.config = config;
  single.config.tree_count = 1;
  single.trees.push_back(t2);
  Forest third = a;
  third.config.tree_count = 1;
  third.trees.erase(third.trees.begin(), third.trees.begin() + 2);
  CHECK(serialize_forest(single) == serialize_forest(third));
}

TEST_CASE("train_forest input checks") {
  Rng rng(15);
  ForestConfig config;
  config.tree_count = 2;
  const auto a = random_outdoor_samples(rng, 20, 4);
  const auto b = random_outdoor_samples(rng, 20, 5);
  CHECK_THROWS_AS(train_forest({a, b}, ForestMode::OutdoorRgb, config), InvalidInput);
  CHECK_THROWS_AS(train_forest({a}, ForestMode::OutdoorRgb, config), InvalidInput);
  CHECK_THROWS_AS(train_forest({a, {}}, ForestMode::OutdoorRgb, config), InvalidInput);
  config.balanced_depth_limit = 30;
  CHECK_THROWS_AS(config.validate(), InvalidInput);
}

TEST_CASE("greedy prediction basics") {
  ForestConfig config;
  config.min_leaf_samples = 1;
  Rng rng(16);
  const auto samples = random_outdoor_samples(rng, 300, 6);
  const RegressionTree tree = build_tree(samples, ForestMode::OutdoorRgb, config, rng);
  // Overfit tree: distinct descriptors end in distinct leaves.
  for (const auto& s : samples) {
    const Prediction p = predict_greedy(tree, s);
    CHECK(p.world_point == s.world_label);
    CHECK(p.descriptor_distance == 0.0);
    CHECK(p.leaves_examined == 1);
  }
  const std::vector<TrainingSample> one{descriptor_sample({1.0}, {4, 5, 6})};
  const RegressionTree leaf_only = build_tree(one, ForestMode::OutdoorRgb, config, rng);
  CHECK(predict_greedy(leaf_only, descriptor_sample({-3.0})).world_point == Eigen::Vector3d(4, 5, 6));
  CHECK_THROWS_AS(predict_greedy(leaf_only, descriptor_sample({1.0, 2.0})), InvalidInput);
}

TEST_CASE("backtracking equals brute force with an unlimited leaf budget") {
  Rng rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t dim = 1 + uniform_index(rng, 16);
    const RegressionTree tree = test::random_descriptor_tree(rng, dim, 1 + uniform_index(rng, 300));
    for (int q = 0; q < 50; ++q) {
      const TrainingSample s = descriptor_sample(random_vector(rng, dim));
      double brute = std::numeric_limits<double>::infinity();
      for (const auto& n : tree.nodes())
        if (const auto* l = std::get_if<LeafNode>(&n)) brute = std::min(brute, descriptor_distance(s.descriptor, l->mean_descriptor));
      const Prediction p = predict_backtracking(tree, s, static_cast<int>(tree.leaf_count()));
      CHECK(p.descriptor_distance == brute);
      CHECK(p.leaves_examined == static_cast<int>(tree.leaf_count()));
      const auto& leaf = std::get<LeafNode>(tree.node(p.leaf));
      CHECK(p.world_point == leaf.mean_position);
    }
  }
}

TEST_CASE("backtracking budget: one leaf is greedy, more leaves never hurt") {
  Rng rng(18);
  for (int trial = 0; trial < 30; ++trial) {
    const RegressionTree tree = test::random_descriptor_tree(rng, 6, 2 + uniform_index(rng, 200));
    for (int q = 0; q < 30; ++q) {
      const TrainingSample s = descriptor_sample(random_vector(rng, 6));
      const Prediction g = predict_greedy(tree, s);
      const Prediction b1 = predict_backtracking(tree, s, 1);
      CHECK(g.leaf == b1.leaf);
      CHECK(g.descriptor_distance == b1.descriptor_distance);
      double prev = b1.descriptor_distance;
      for (int n : {2, 4, 8, 16, 64}) {
        const Prediction b = predict_backtracking(tree, s, n);
        CHECK(b.descriptor_distance <= prev);
        CHECK(b.leaves_examined <= n);
        prev = b.descriptor_distance;
      }
    }
  }
}

TEST_CASE("backtracking ties keep the first leaf found") {
  // Root splits on dim 0 at 0; both leaves carry the same descriptor.
  std::vector<TreeNode> nodes(3);
  SplitNode root;
  root.params = {DescriptorFeature{0}, 0.0};
  root.left = 1;
  root.right = 2;
  nodes[0] = root;
  nodes[1] = LeafNode{{1, 0, 0}, {0.5, 0.5}, 1, 1};
  nodes[2] = LeafNode{{2, 0, 0}, {0.5, 0.5}, 1, 1};
  const RegressionTree tree(ForestMode::OutdoorRgb, 2, nodes);
  CHECK(predict_backtracking(tree, descriptor_sample({-1.0, 0.0}), 2).world_point.x() == 1.0);
  CHECK(predict_backtracking(tree, descriptor_sample({1.0, 0.0}), 2).world_point.x() == 2.0);
}

TEST_CASE("forest_predict returns one prediction per tree") {
  Rng rng(19);
  Forest forest;
  forest.mode = ForestMode::OutdoorRgb;
  forest.descriptor_dim = 4;
  const RegressionTree t = test::random_descriptor_tree(rng, 4, 50);
  for (int i = 0; i < 5; ++i) forest.trees.push_back(t);
  const TrainingSample s = descriptor_sample(random_vector(rng, 4));
  const auto preds = forest_predict(forest, s, 16);
  REQUIRE(preds.size() == 5);
  for (const auto& p : preds) {
    CHECK(p.leaves_examined <= 16);
    CHECK(p.world_point == preds[0].world_point);
  }
}

TEST_CASE("tree validation rejects malformed node lists") {
  std::vector<TreeNode> bad(3);
  SplitNode root;
  root.params = {DescriptorFeature{5}, 0.0};
  root.left = 1;
  root.right = 2;
  bad[0] = root;
  bad[1] = LeafNode{{0, 0, 0}, {0.0}, 1, 1};
  bad[2] = LeafNode{{0, 0, 0}, {0.0}, 1, 1};
  CHECK_THROWS_AS(RegressionTree(ForestMode::OutdoorRgb, 1, bad), InvalidInput);  // dim out of range
  std::get<SplitNode>(bad[0]).params.feature = DescriptorFeature{0};
  CHECK_NOTHROW(RegressionTree(ForestMode::OutdoorRgb, 1, bad));
  CHECK_THROWS_AS(RegressionTree(ForestMode::IndoorRgbd, 1, bad), InvalidInput);  // mode mismatch
  std::get<SplitNode>(bad[0]).right = 1;
  CHECK_THROWS_AS(RegressionTree(ForestMode::OutdoorRgb, 1, bad), InvalidInput);  // shared child
  std::get<SplitNode>(bad[0]).right = 2;
  std::get<LeafNode>(bad[2]).depth = 3;
  CHECK_THROWS_AS(RegressionTree(ForestMode::OutdoorRgb, 1, bad), InvalidInput);  // depth
}

TEST_CASE("serialization round trip is bit exact and preserves predictions") {
  const IndoorFixture fx = indoor_fixture(20, 4, 150);
  ForestConfig config;
  config.tree_count = 2;
  config.candidates_per_node = 16;
  config.rng_seed = 77;
  const Forest forest = train_forest(std::vector<std::vector<TrainingSample>>(2, fx.samples),
                                     ForestMode::IndoorRgbd, config);
  const std::string bytes = serialize_forest(forest);
  CHECK(bytes.substr(0, 4) == "BTRF");
  const Forest back = deserialize_forest(bytes);
  CHECK(serialize_forest(back) == bytes);
  CHECK(back.config.rng_seed == 77);
  for (const auto& s : fx.samples) {
    const auto a = forest_predict(forest, s, 16);
    const auto b = forest_predict(back, s, 16);
    for (std::size_t t = 0; t < a.size(); ++t) {
      CHECK(a[t].world_point == b[t].world_point);
      CHECK(a[t].descriptor_distance == b[t].descriptor_distance);
      CHECK(a[t].leaf == b[t].leaf);
    }
  }

  Rng rng(21);
  Forest outdoor;
  outdoor.mode = ForestMode::OutdoorRgb;
  outdoor.descriptor_dim = 64;
  outdoor.trees.push_back(test::random_descriptor_tree(rng, 64, 40));
  const std::string ob = serialize_forest(outdoor);
  CHECK(serialize_forest(deserialize_forest(ob)) == ob);
}

TEST_CASE("corrupt model data is rejected") {
  Rng rng(22);
  Forest f;
  f.mode = ForestMode::OutdoorRgb;
  f.descriptor_dim = 64;
  f.trees.push_back(test::random_descriptor_tree(rng, 64, 10));
  const std::string bytes = serialize_forest(f);
  CHECK_THROWS_AS(deserialize_forest(bytes.substr(0, bytes.size() - 3)), DataError);
  CHECK_THROWS_AS(deserialize_forest("XXXX" + bytes.substr(4)), DataError);
  std::string wrong_version = bytes;
  wrong_version[4] = 9;
  CHECK_THROWS_AS(deserialize_forest(wrong_version), DataError);
  CHECK_THROWS_AS(deserialize_forest(bytes + "extra"), DataError);
  CHECK_THROWS_AS(load_forest_file("/nonexistent/model.btrf"), DataError);
}

TEST_CASE("tree statistics count nodes per level") {
  Rng rng(23);
  const RegressionTree t = test::random_descriptor_tree(rng, 3, 64);
  const TreeStats s = tree_stats(t);
  CHECK(s.leaf_count == 64);
  CHECK(s.split_count == 63);
  std::size_t leaves = 0;
  for (auto c : s.leaves_per_depth) leaves += c;
  CHECK(leaves == 64);
  CHECK(s.depth == t.depth());
}

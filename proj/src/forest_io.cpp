#include "btrf/forest_io.hpp"

#include <fstream>
#include <sstream>

#include "binary_io.hpp"

namespace btrf {

namespace {

using detail::put_f64;
using detail::put_u32;
using detail::put_u64;
using detail::put_u8;

constexpr std::uint8_t kSplitTag = 0;
constexpr std::uint8_t kLeafTag = 1;
constexpr std::uint8_t kRandomFeatureTag = 0;
constexpr std::uint8_t kDescriptorFeatureTag = 1;
// WHT coefficients kept in sequency zig-zag order, DC first.
constexpr std::uint8_t kSequencyZigzag = 1;
constexpr std::uint8_t kNoTransform = 0;

DescriptorKind descriptor_kind(ForestMode mode) {
  return mode == ForestMode::IndoorRgbd ? DescriptorKind::Wht60 : DescriptorKind::External64;
}

void write_node(std::ostream& out, const RegressionTree& tree, std::int32_t id) {
  const TreeNode& node = tree.node(id);
  if (const auto* split = std::get_if<SplitNode>(&node)) {
    put_u8(out, kSplitTag);
    put_u32(out, static_cast<std::uint32_t>(split->depth));
    put_u8(out, static_cast<std::uint8_t>(split->objective));
    if (const auto* rf = std::get_if<RandomFeature>(&split->params.feature)) {
      put_u8(out, kRandomFeatureTag);
      put_f64(out, rf->offset.x());
      put_f64(out, rf->offset.y());
      put_u8(out, static_cast<std::uint8_t>(rf->c1));
      put_u8(out, static_cast<std::uint8_t>(rf->c2));
    } else {
      put_u8(out, kDescriptorFeatureTag);
      put_u32(out, static_cast<std::uint32_t>(std::get<DescriptorFeature>(split->params.feature).dimension));
    }
    put_f64(out, split->params.threshold);
    write_node(out, tree, split->left);
    write_node(out, tree, split->right);
    return;
  }
  const auto& leaf = std::get<LeafNode>(node);
  put_u8(out, kLeafTag);
  put_u32(out, static_cast<std::uint32_t>(leaf.depth));
  put_u32(out, static_cast<std::uint32_t>(leaf.sample_count));
  for (int i = 0; i < 3; ++i) put_f64(out, leaf.mean_position[i]);
  for (const double v : leaf.mean_descriptor) put_f64(out, v);
}

std::int32_t read_node(detail::Reader& in, std::size_t dim, std::uint32_t remaining_budget,
                       std::vector<TreeNode>& nodes) {
  if (nodes.size() >= remaining_budget) in.fail("node stream longer than its declared count");
  const auto id = static_cast<std::int32_t>(nodes.size());
  const std::uint8_t tag = in.u8();
  if (tag == kSplitTag) {
    nodes.emplace_back(SplitNode{});
    SplitNode split;
    split.depth = static_cast<int>(in.u32());
    const std::uint8_t objective = in.u8();
    if (objective > 1) in.fail("unknown split objective id");
    split.objective = static_cast<SplitObjective>(objective);
    const std::uint8_t feature = in.u8();
    if (feature == kRandomFeatureTag) {
      RandomFeature rf;
      rf.offset.x() = in.f64();
      rf.offset.y() = in.f64();
      rf.c1 = in.u8();
      rf.c2 = in.u8();
      split.params.feature = rf;
    } else if (feature == kDescriptorFeatureTag) {
      split.params.feature = DescriptorFeature{static_cast<int>(in.u32())};
    } else {
      in.fail("unknown feature tag");
    }
    split.params.threshold = in.f64();
    split.left = read_node(in, dim, remaining_budget, nodes);
    split.right = read_node(in, dim, remaining_budget, nodes);
    nodes[static_cast<std::size_t>(id)] = std::move(split);
  } else if (tag == kLeafTag) {
    LeafNode leaf;
    leaf.depth = static_cast<int>(in.u32());
    leaf.sample_count = static_cast<int>(in.u32());
    for (int i = 0; i < 3; ++i) leaf.mean_position[i] = in.f64();
    leaf.mean_descriptor.resize(dim);
    for (double& v : leaf.mean_descriptor) v = in.f64();
    nodes.emplace_back(std::move(leaf));
  } else {
    in.fail("unknown node tag");
  }
  return id;
}

}  // namespace

void save_forest(std::ostream& out, const Forest& forest) {
  out.write("BTRF", 4);
  put_u32(out, kForestFormatVersion);
  put_u8(out, static_cast<std::uint8_t>(forest.mode));
  put_u8(out, static_cast<std::uint8_t>(descriptor_kind(forest.mode)));
  put_u32(out, static_cast<std::uint32_t>(forest.trees.size()));
  put_u32(out, static_cast<std::uint32_t>(forest.descriptor_dim));

  const ForestConfig& c = forest.config;
  put_u32(out, static_cast<std::uint32_t>(c.tree_count));
  put_u32(out, static_cast<std::uint32_t>(c.max_depth));
  put_u32(out, static_cast<std::uint32_t>(c.balanced_depth_limit));
  put_u32(out, static_cast<std::uint32_t>(c.min_leaf_samples));
  put_u32(out, static_cast<std::uint32_t>(c.candidates_per_node));
  put_u32(out, static_cast<std::uint32_t>(c.thresholds_per_candidate));
  put_u32(out, static_cast<std::uint32_t>(c.max_backtrack_leaves));
  put_u64(out, c.rng_seed);
  put_f64(out, c.offset_range);

  if (forest.mode == ForestMode::IndoorRgbd) {
    put_u32(out, kWhtPatchSize);
    put_u32(out, kWhtCoefficientsPerChannel);
    put_u8(out, kSequencyZigzag);
  } else {
    put_u32(out, 0);
    put_u32(out, 0);
    put_u8(out, kNoTransform);
  }

  for (const auto& tree : forest.trees) {
    put_u32(out, static_cast<std::uint32_t>(tree.nodes().size()));
    write_node(out, tree, 0);
  }
  if (!out) throw DataError("failed writing model stream");
}

Forest load_forest(std::istream& in, const std::string& name) {
  detail::Reader r(in, name);
  r.expect_magic("BTRF");
  const std::uint32_t version = r.u32();
  if (version != kForestFormatVersion)
    r.fail("unsupported model format version " + std::to_string(version));

  Forest forest;
  const std::uint8_t mode = r.u8();
  if (mode > 1) r.fail("unknown forest mode");
  forest.mode = static_cast<ForestMode>(mode);
  if (r.u8() != static_cast<std::uint8_t>(descriptor_kind(forest.mode)))
    r.fail("descriptor kind does not match forest mode");
  const std::uint32_t tree_count = r.u32();
  forest.descriptor_dim = r.u32();

  ForestConfig& c = forest.config;
  c.tree_count = static_cast<int>(r.u32());
  c.max_depth = static_cast<int>(r.u32());
  c.balanced_depth_limit = static_cast<int>(r.u32());
  c.min_leaf_samples = static_cast<int>(r.u32());
  c.candidates_per_node = static_cast<int>(r.u32());
  c.thresholds_per_candidate = static_cast<int>(r.u32());
  c.max_backtrack_leaves = static_cast<int>(r.u32());
  c.rng_seed = r.u64();
  c.offset_range = r.f64();

  const std::uint32_t patch = r.u32();
  const std::uint32_t coeffs = r.u32();
  const std::uint8_t order = r.u8();
  if (forest.mode == ForestMode::IndoorRgbd &&
      (patch != kWhtPatchSize || coeffs != kWhtCoefficientsPerChannel || order != kSequencyZigzag))
    r.fail("model uses a different WHT descriptor convention");
  if (forest.descriptor_dim != descriptor_length(descriptor_kind(forest.mode)))
    r.fail("descriptor dimension does not match the descriptor kind");

  for (std::uint32_t t = 0; t < tree_count; ++t) {
    const std::uint32_t node_count = r.u32();
    std::vector<TreeNode> nodes;
    nodes.reserve(std::min<std::uint32_t>(node_count, 1u << 20));
    read_node(r, forest.descriptor_dim, node_count, nodes);
    if (nodes.size() != node_count) r.fail("node count does not match the node stream");
    try {
      forest.trees.emplace_back(forest.mode, forest.descriptor_dim, std::move(nodes));
    } catch (const InvalidInput& e) {
      r.fail(std::string("invalid tree: ") + e.what());
    }
  }
  if (forest.trees.empty()) r.fail("model has no trees");
  r.expect_end();
  return forest;
}

void save_forest_file(const std::string& path, const Forest& forest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file: " + path);
  save_forest(out, forest);
}

Forest load_forest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path);
  return load_forest(in, path);
}

std::string serialize_forest(const Forest& forest) {
  std::ostringstream out(std::ios::binary);
  save_forest(out, forest);
  return std::move(out).str();
}

Forest deserialize_forest(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  return load_forest(in, "<memory>");
}

}  // namespace btrf

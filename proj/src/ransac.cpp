#include "btrf/ransac.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "btrf/random.hpp"

namespace btrf {

namespace {

bool draw_distinct(std::size_t n, std::size_t k, Rng& rng, std::array<std::size_t, 4>& out) {
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t v;
    bool repeat;
    int guard = 0;
    do {
      v = static_cast<std::size_t>(uniform_index(rng, n));
      repeat = std::find(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(i), v) !=
               out.begin() + static_cast<std::ptrdiff_t>(i);
    } while (repeat && ++guard < 64);
    if (repeat) return false;
    out[i] = v;
  }
  return true;
}

std::optional<CameraPose> solve_minimal(std::span<const Correspondence> data,
                                        const std::array<std::size_t, 4>& pick, PoseSolver solver,
                                        const Intrinsics* intrinsics) {
  try {
    if (solver == PoseSolver::Kabsch3D) {
      std::array<Eigen::Vector3d, 3> cam;
      std::array<Eigen::Vector3d, 3> world;
      for (int i = 0; i < 3; ++i) {
        cam[i] = std::get<Eigen::Vector3d>(data[pick[i]].observation);
        world[i] = data[pick[i]].world;
      }
      return kabsch(cam, world);
    }
    std::array<PixelCorrespondence, 4> pairs;
    for (int i = 0; i < 4; ++i)
      pairs[i] = {data[pick[i]].world, std::get<Eigen::Vector2d>(data[pick[i]].observation)};
    return p3p_solve(pairs, *intrinsics);
  } catch (const DegenerateConfiguration&) {
    return std::nullopt;
  }
}

std::vector<std::size_t> collect_inliers(std::span<const Correspondence> data,
                                         const CameraPose& pose, PoseSolver solver,
                                         const Intrinsics* intrinsics, double threshold) {
  std::vector<std::size_t> inliers;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (hypothesis_residual(pose, data[i], solver, intrinsics) < threshold) inliers.push_back(i);
  return inliers;
}

std::optional<CameraPose> refit(std::span<const Correspondence> data,
                                const std::vector<std::size_t>& inliers, const CameraPose& start,
                                PoseSolver solver, const Intrinsics* intrinsics) {
  if (inliers.size() < minimal_sample_size(solver)) return std::nullopt;
  try {
    if (solver == PoseSolver::Kabsch3D) {
      std::vector<Eigen::Vector3d> cam;
      std::vector<Eigen::Vector3d> world;
      cam.reserve(inliers.size());
      world.reserve(inliers.size());
      for (const auto i : inliers) {
        cam.push_back(std::get<Eigen::Vector3d>(data[i].observation));
        world.push_back(data[i].world);
      }
      return kabsch(cam, world);
    }
    std::vector<PixelCorrespondence> pairs;
    pairs.reserve(inliers.size());
    for (const auto i : inliers)
      pairs.push_back({data[i].world, std::get<Eigen::Vector2d>(data[i].observation)});
    return refine_pose_2d3d(start, pairs, *intrinsics).pose;
  } catch (const DegenerateConfiguration&) {
    return std::nullopt;
  }
}

}  // namespace

void RansacConfig::validate() const {
  if (hypothesis_count < 1) throw InvalidInput("hypothesis_count must be >= 1");
  if (block_size < 1) throw InvalidInput("block_size must be >= 1");
  if (!(inlier_threshold_3d > 0.0) || !(inlier_threshold_2d > 0.0))
    throw InvalidInput("inlier thresholds must be positive");
  if (max_sample_retries < 1) throw InvalidInput("max_sample_retries must be >= 1");
}

double hypothesis_residual(const CameraPose& pose, const Correspondence& c, PoseSolver solver,
                           const Intrinsics* intrinsics) {
  if (solver == PoseSolver::Kabsch3D) {
    const auto* obs = std::get_if<Eigen::Vector3d>(&c.observation);
    if (obs == nullptr) throw InvalidInput("3-D residual needs a camera-space observation");
    return (pose.to_world(*obs) - c.world).norm();
  }
  const auto* pixel = std::get_if<Eigen::Vector2d>(&c.observation);
  if (pixel == nullptr) throw InvalidInput("2-D residual needs a pixel observation");
  if (intrinsics == nullptr) throw InvalidInput("2-D residual needs intrinsics");
  const Eigen::Vector3d x = pose.to_camera(c.world);
  if (!(x.z() > 0.0)) return std::numeric_limits<double>::infinity();
  return (project(x, *intrinsics) - *pixel).norm();
}

int preemption_survivors(int hypothesis_count, int round) {
  if (round >= 62) return 0;
  return static_cast<int>(static_cast<std::uint64_t>(hypothesis_count) >> round);
}

std::size_t minimal_sample_size(PoseSolver solver) {
  return solver == PoseSolver::Kabsch3D ? 3 : 4;
}

RansacResult preemptive_ransac(std::span<const Correspondence> data, PoseSolver solver,
                               const Intrinsics* intrinsics, const RansacConfig& config) {
  config.validate();
  const std::size_t minimal = minimal_sample_size(solver);
  if (data.size() < minimal)
    throw InsufficientData("preemptive_ransac: " + std::to_string(data.size()) +
                           " correspondences, need " + std::to_string(minimal));
  if (solver == PoseSolver::Pnp2D && intrinsics == nullptr)
    throw InvalidInput("preemptive_ransac: 2-D mode needs intrinsics");
  for (const auto& c : data) {
    const bool camera_point = std::holds_alternative<Eigen::Vector3d>(c.observation);
    if (camera_point != (solver == PoseSolver::Kabsch3D))
      throw InvalidInput("preemptive_ransac: observation kind does not match the solver");
  }

  const double threshold = config.threshold(solver);
  Rng rng(config.rng_seed);
  RansacResult result;

  // Hypothesis pool. A draw is rejected when the solver fails or when the
  // resulting pose does not explain its own minimal sample.
  std::vector<Hypothesis> pool;
  pool.reserve(static_cast<std::size_t>(config.hypothesis_count));
  for (int h = 0; h < config.hypothesis_count; ++h) {
    for (int attempt = 0; attempt < config.max_sample_retries; ++attempt) {
      std::array<std::size_t, 4> pick{};
      if (!draw_distinct(data.size(), minimal, rng, pick)) continue;
      const auto pose = solve_minimal(data, pick, solver, intrinsics);
      if (!pose || !pose->is_valid()) continue;
      bool consistent = true;
      for (std::size_t i = 0; i < minimal && consistent; ++i)
        consistent = hypothesis_residual(*pose, data[pick[i]], solver, intrinsics) < threshold;
      if (!consistent) continue;
      pool.push_back({*pose, 0, true});
      break;
    }
  }
  result.hypotheses_generated = static_cast<int>(pool.size());
  if (pool.empty()) return result;

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order.begin(), order.end(), rng);

  // Alive hypotheses, kept sorted by descending score then creation index.
  std::vector<std::size_t> alive(pool.size());
  std::iota(alive.begin(), alive.end(), std::size_t{0});
  result.alive_per_round.push_back(static_cast<int>(alive.size()));

  std::size_t consumed = 0;
  int round = 0;
  while (alive.size() > 1 && consumed < order.size()) {
    const Correspondence& c = data[order[consumed]];
    for (const auto h : alive)
      if (hypothesis_residual(pool[h].pose, c, solver, intrinsics) < threshold) ++pool[h].score;
    ++consumed;
    if (consumed % static_cast<std::size_t>(config.block_size) == 0) {
      ++round;
      const auto keep = std::min<std::size_t>(
          alive.size(), static_cast<std::size_t>(
                            std::max(1, preemption_survivors(config.hypothesis_count, round))));
      std::stable_sort(alive.begin(), alive.end(),
                       [&](std::size_t a, std::size_t b) { return pool[a].score > pool[b].score; });
      for (std::size_t i = keep; i < alive.size(); ++i) pool[alive[i]].alive = false;
      alive.resize(keep);
      result.alive_per_round.push_back(static_cast<int>(alive.size()));
    }
  }
  std::stable_sort(alive.begin(), alive.end(),
                   [&](std::size_t a, std::size_t b) { return pool[a].score > pool[b].score; });
  result.observations_consumed = static_cast<int>(consumed);

  // Full rescoring of the survivor, then refit on inliers while the inlier
  // set keeps growing.
  CameraPose pose = pool[alive.front()].pose;
  std::vector<std::size_t> inliers = collect_inliers(data, pose, solver, intrinsics, threshold);
  for (int iter = 0; iter < 5; ++iter) {
    const auto refined = refit(data, inliers, pose, solver, intrinsics);
    if (!refined || !refined->is_valid()) break;
    auto refined_inliers = collect_inliers(data, *refined, solver, intrinsics, threshold);
    if (refined_inliers.size() < inliers.size()) break;
    const bool unchanged = refined_inliers == inliers;
    pose = *refined;
    inliers = std::move(refined_inliers);
    if (unchanged) break;
  }

  result.pose = pose;
  result.inliers = std::move(inliers);
  result.success = result.inliers.size() >= static_cast<std::size_t>(config.min_final_inliers(solver));
  return result;
}

}  // namespace btrf

#include "btrf/commands.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <Eigen/Geometry>
#include <json.hpp>

#include "btrf/forest_io.hpp"
#include "btrf/parallel.hpp"
#include "btrf/pipeline.hpp"
#include "btrf/report.hpp"
#include "btrf/synth.hpp"

namespace btrf {

namespace fs = std::filesystem;

namespace {

std::ostream& out_of(const CommandContext& ctx) { return ctx.out ? *ctx.out : std::cout; }

void phase(const CommandContext& ctx, const std::string& name) {
  if (ctx.phase_observer) ctx.phase_observer(name);
}

SceneDataset open_dataset(const RunConfig& config, const CommandContext& ctx) {
  SceneDataset ds(config.dataset);
  if (ctx.load_observer) ds.set_observer(ctx.load_observer);
  return ds;
}

void check_mode(const Forest& forest, const SceneDataset& ds) {
  const ForestMode data_mode = ds.is_outdoor() ? ForestMode::OutdoorRgb : ForestMode::IndoorRgbd;
  if (forest.mode != data_mode)
    throw InvalidInput(std::string("model mode ") + to_string(forest.mode) +
                       " does not match dataset mode " + to_string(data_mode));
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

/// Pose-estimation inputs for one test frame; holds no ground truth.
struct QueryFrame {
  RgbdFrame rgbd;
  std::vector<Keypoint> keypoints;
};

QueryFrame load_query(const SceneDataset& ds, const Forest& forest, int index) {
  QueryFrame q;
  if (forest.mode == ForestMode::IndoorRgbd)
    q.rgbd = ds.load_rgbd(Split::Test, index);
  else
    q.keypoints = ds.load_keypoints(Split::Test, index);
  return q;
}

RelocalizationResult relocalize(const Forest& forest, const QueryFrame& q, const Intrinsics& k,
                                const RunConfig& config, int frame_index, int n_max) {
  QueryOptions options = config.query;
  options.max_backtrack_leaves = n_max;
  options.seed = config.query.seed + static_cast<std::uint64_t>(frame_index);
  options.ransac.rng_seed = config.query.ransac.rng_seed + static_cast<std::uint64_t>(frame_index);
  if (forest.mode == ForestMode::IndoorRgbd) return relocalize_rgbd(forest, q.rgbd, k, options);
  return relocalize_rgb(forest, q.keypoints, k, options);
}

std::string pose_columns(const CameraPose& pose) {
  const Eigen::Quaterniond q(pose.rotation);
  std::ostringstream s;
  s << std::setprecision(17) << pose.translation.x() << ',' << pose.translation.y() << ','
    << pose.translation.z() << ',' << q.w() << ',' << q.x() << ',' << q.y() << ',' << q.z();
  return s.str();
}

nlohmann::json stats_json(const TreeStats& s) {
  return {{"split_nodes", s.split_count},
          {"leaf_nodes", s.leaf_count},
          {"depth", s.depth},
          {"training_samples", s.training_samples},
          {"leaves_per_depth", s.leaves_per_depth},
          {"balanced_splits_per_depth", s.balanced_splits_per_depth},
          {"variance_splits_per_depth", s.variance_splits_per_depth}};
}

}  // namespace

int cmd_synth(const RunConfig& config, const CommandContext& ctx) {
  const SynthSettings& s = config.synth;
  const SyntheticScene scene = SyntheticScene::generate(s.seed, s.room_size, s.components);
  const Trajectory traj = sample_trajectory(scene, s.train_frames, s.test_frames, s.seed);
  fs::create_directories(config.dataset);
  write_intrinsics_file((fs::path(config.dataset) / "intrinsics.txt").string(), s.intrinsics);

  const auto write_split = [&](Split split, const std::vector<CameraPose>& poses) {
    parallel_for(static_cast<int>(poses.size()), ctx.threads, [&](int i) {
      const RenderedView view = render_frame(scene, poses[static_cast<std::size_t>(i)], s.intrinsics);
      write_rgbd_frame(config.dataset, split, i, view.frame, poses[static_cast<std::size_t>(i)]);
    });
  };
  write_split(Split::Train, traj.train);
  write_split(Split::Test, traj.test);
  out_of(ctx) << "wrote " << traj.train.size() << " train and " << traj.test.size()
              << " test frames to " << config.dataset << '\n';
  return kExitOk;
}

int cmd_train(const RunConfig& config, const CommandContext& ctx) {
  const SceneDataset ds = open_dataset(config, ctx);
  const Intrinsics k = ds.intrinsics();
  const auto frames = ds.frames(Split::Train);
  if (frames.empty()) throw DataError("no training frames in " + config.dataset);
  const ForestMode data_mode = ds.is_outdoor() ? ForestMode::OutdoorRgb : ForestMode::IndoorRgbd;
  if (data_mode != config.mode)
    throw InvalidInput(std::string("config mode ") + to_string(config.mode) +
                       " does not match dataset mode " + to_string(data_mode));

  const auto start = std::chrono::steady_clock::now();
  Forest forest;
  if (config.mode == ForestMode::IndoorRgbd) {
    IndoorTrainingSet data;
    data.intrinsics = k;
    data.frames.resize(frames.size());
    data.poses.resize(frames.size());
    parallel_for(static_cast<int>(frames.size()), ctx.threads, [&](int i) {
      data.frames[static_cast<std::size_t>(i)] = ds.load_rgbd(Split::Train, frames[static_cast<std::size_t>(i)]);
      data.poses[static_cast<std::size_t>(i)] = ds.load_pose(Split::Train, frames[static_cast<std::size_t>(i)]);
    });
    forest = train_indoor_forest(data, config.forest, config.training_options(ctx.threads));
  } else {
    OutdoorTrainingSet data;
    data.intrinsics = k;
    data.points = ds.load_points3d();
    for (const int f : frames) {
      data.keypoints.push_back(ds.load_keypoints(Split::Train, f));
      data.poses.push_back(ds.load_pose(Split::Train, f));
    }
    forest = train_outdoor_forest(data, config.forest, config.training_options(ctx.threads));
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (fs::path(config.model).has_parent_path()) fs::create_directories(fs::path(config.model).parent_path());
  save_forest_file(config.model, forest);

  nlohmann::json manifest;
  std::ostringstream cfg;
  write_config(cfg, config);
  std::istringstream lines(cfg.str());
  for (std::string line; std::getline(lines, line);) {
    const auto eq = line.find(" = ");
    manifest["config"][line.substr(0, eq)] = line.substr(eq + 3);
  }
  manifest["mode"] = to_string(forest.mode);
  manifest["seed"] = config.forest.rng_seed;
  manifest["training_frames"] = frames.size();
  manifest["descriptor_dim"] = forest.descriptor_dim;
  nlohmann::json trees = nlohmann::json::array();
  for (std::size_t t = 0; t < forest.trees.size(); ++t) {
    auto j = stats_json(tree_stats(forest.trees[t]));
    j["seed"] = config.forest.rng_seed + t;
    trees.push_back(j);
  }
  manifest["trees"] = trees;
  open_output(config.model + ".manifest.json") << manifest.dump(2) << '\n';

  out_of(ctx) << "trained " << forest.trees.size() << " trees on " << frames.size() << " frames in "
              << std::fixed << std::setprecision(1) << seconds << " s; model: " << config.model << '\n';
  return kExitOk;
}

int cmd_relocalize(const RunConfig& config, const CommandContext& ctx) {
  const Forest forest = load_forest_file(config.model);
  const SceneDataset ds = open_dataset(config, ctx);
  check_mode(forest, ds);
  const Intrinsics k = ds.intrinsics();
  const auto frames = ds.frames(Split::Test);
  if (frames.empty()) throw InvalidInput("no test frames in " + config.dataset);

  std::vector<RelocalizationResult> results(frames.size());
  phase(ctx, "estimate-begin");
  parallel_for(static_cast<int>(frames.size()), ctx.threads, [&](int i) {
    const int f = frames[static_cast<std::size_t>(i)];
    results[static_cast<std::size_t>(i)] =
        relocalize(forest, load_query(ds, forest, f), k, config, f, config.query.max_backtrack_leaves);
  });
  phase(ctx, "estimate-end");

  const fs::path dir = fs::path(config.output_dir) / "relocalized";
  fs::create_directories(dir);
  std::size_t localized = 0;
  auto& out = out_of(ctx);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& r = results[i];
    char name[40];
    std::snprintf(name, sizeof(name), "frame-%06d.pose.txt", frames[i]);
    if (r.pose) {
      write_pose_file((dir / name).string(), *r.pose);
      ++localized;
    }
    out << "frame " << frames[i] << ": " << (r.pose ? "ok" : "failed") << ", " << r.inlier_count
        << " inliers of " << r.correspondences_used << ", " << std::fixed << std::setprecision(1)
        << r.runtime_ms << " ms\n";
  }
  out << localized << " of " << frames.size() << " frames relocalized\n";
  return localized == 0 ? kExitRelocalizationFailure : kExitOk;
}

int cmd_evaluate(const RunConfig& config, const CommandContext& ctx) {
  const Forest forest = load_forest_file(config.model);
  const SceneDataset ds = open_dataset(config, ctx);
  check_mode(forest, ds);
  const Intrinsics k = ds.intrinsics();
  const auto frames = ds.frames(Split::Test);
  if (frames.empty()) throw InvalidInput("empty test set in " + config.dataset);

  const std::size_t sweeps = config.n_max_sweep.size();
  std::vector<std::vector<RelocalizationResult>> results(sweeps,
                                                         std::vector<RelocalizationResult>(frames.size()));
  phase(ctx, "estimate-begin");
  parallel_for(static_cast<int>(frames.size()), ctx.threads, [&](int i) {
    const int f = frames[static_cast<std::size_t>(i)];
    const QueryFrame q = load_query(ds, forest, f);
    for (std::size_t s = 0; s < sweeps; ++s)
      results[s][static_cast<std::size_t>(i)] = relocalize(forest, q, k, config, f, config.n_max_sweep[s]);
  });
  phase(ctx, "estimate-end");

  phase(ctx, "metrics-begin");
  std::vector<CameraPose> truth;
  for (const int f : frames) truth.push_back(ds.load_pose(Split::Test, f));

  const fs::path dir(config.output_dir);
  const ReportFormat fmt = config.report_format;
  std::vector<SummaryRow> summary;
  bool any_localized = false;
  for (std::size_t s = 0; s < sweeps; ++s) {
    const SequenceMetrics m = evaluate_sequence(results[s], truth);
    const int n_max = config.n_max_sweep[s];
    std::vector<FrameRow> rows;
    double runtime = 0.0;
    auto pairs = open_output(dir / ("poses_nmax" + std::to_string(n_max) + ".csv"));
    pairs << "frame,localized,est_tx,est_ty,est_tz,est_qw,est_qx,est_qy,est_qz,"
             "gt_tx,gt_ty,gt_tz,gt_qw,gt_qx,gt_qy,gt_qz\n";
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const auto& r = results[s][i];
      const auto& e = m.frames[i];
      rows.push_back({frames[i], e.error.translation_m, e.error.rotation_deg, r.inlier_count, e.correct,
                      r.runtime_ms});
      runtime += r.runtime_ms;
      any_localized = any_localized || r.pose.has_value();
      pairs << frames[i] << ',' << (r.pose ? 1 : 0) << ','
            << (r.pose ? pose_columns(*r.pose) : std::string("nan,nan,nan,nan,nan,nan,nan")) << ','
            << pose_columns(truth[i]) << '\n';
    }
    summary.push_back({n_max, static_cast<int>(frames.size()), m.percent_correct, m.median_translational,
                       m.median_rotational, runtime / static_cast<double>(frames.size())});
    auto report = open_output(dir / ("frames_nmax" + std::to_string(n_max) + "." + report_extension(fmt)));
    write_frame_report(report, rows, fmt);
  }
  auto summary_file = open_output(dir / (std::string("summary.") + report_extension(fmt)));
  write_summary_report(summary_file, summary, fmt);
  write_summary_report(out_of(ctx), summary, fmt);
  return any_localized ? kExitOk : kExitRelocalizationFailure;
}

int cmd_inspect(const std::string& model_path, const CommandContext& ctx) {
  const Forest forest = load_forest_file(model_path);
  auto& out = out_of(ctx);
  out << "model: " << model_path << '\n'
      << "mode: " << to_string(forest.mode) << ", trees: " << forest.trees.size()
      << ", descriptor length: " << forest.descriptor_dim << '\n'
      << "seed: " << forest.config.rng_seed << ", max depth: " << forest.config.max_depth
      << ", balanced above depth: " << forest.config.balanced_depth_limit
      << ", min leaf samples: " << forest.config.min_leaf_samples << "\n\n";

  out << std::left << std::setw(6) << "tree" << std::setw(8) << "depth" << std::setw(10) << "splits"
      << std::setw(10) << "leaves" << "samples\n";
  std::vector<TreeStats> stats;
  int max_depth = 0;
  for (std::size_t t = 0; t < forest.trees.size(); ++t) {
    stats.push_back(tree_stats(forest.trees[t]));
    const auto& s = stats.back();
    max_depth = std::max(max_depth, s.depth);
    out << std::left << std::setw(6) << t << std::setw(8) << s.depth << std::setw(10) << s.split_count
        << std::setw(10) << s.leaf_count << s.training_samples << '\n';
  }

  out << "\nper level, all trees:\n"
      << std::left << std::setw(7) << "level" << std::setw(10) << "objective" << std::setw(10)
      << "balanced" << std::setw(10) << "variance" << "leaves\n";
  for (int d = 0; d <= max_depth; ++d) {
    std::size_t balanced = 0, variance = 0, leaves = 0;
    for (const auto& s : stats) {
      if (d > s.depth) continue;
      balanced += s.balanced_splits_per_depth[static_cast<std::size_t>(d)];
      variance += s.variance_splits_per_depth[static_cast<std::size_t>(d)];
      leaves += s.leaves_per_depth[static_cast<std::size_t>(d)];
    }
    const char* objective = balanced && variance ? "mixed" : balanced ? "balanced" : variance ? "variance" : "-";
    out << std::left << std::setw(7) << d << std::setw(10) << objective << std::setw(10) << balanced
        << std::setw(10) << variance << leaves << '\n';
  }
  return kExitOk;
}

int run_guarded(const std::function<int()>& command, std::ostream& err) {
  try {
    return command();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const InvalidInput& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace btrf

#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "btrf/commands.hpp"
#include "btrf/config.hpp"
#include "btrf/dataset.hpp"
#include "btrf/forest_io.hpp"
#include "btrf/report.hpp"
#include "support.hpp"

using namespace btrf;
namespace fs = std::filesystem;

namespace {

RunConfig tiny_config(const test::TempDir& dir) {
  RunConfig c;
  c.dataset = dir.str("scene");
  c.model = dir.str("model.btrf");
  c.output_dir = dir.str("results");
  c.synth.seed = 3;
  c.synth.train_frames = 20;
  c.synth.test_frames = 3;
  c.synth.intrinsics = {150, 150, 80, 60, 160, 120};
  c.forest.tree_count = 2;
  c.pixels_per_image = 1500;
  c.query.query_pixels = 1500;
  c.n_max_sweep = {1, 16};
  return c;
}

struct Captured {
  std::ostringstream out;
  std::ostringstream err;
  CommandContext ctx;
  Captured() {
    ctx.out = &out;
    ctx.err = &err;
    ctx.threads = 2;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BTRF_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config defaults round trip through text") {
  std::ostringstream out;
  write_config(out, RunConfig{});
  std::istringstream in(out.str());
  const RunConfig back = parse_config(in);
  std::ostringstream again;
  write_config(again, back);
  CHECK(again.str() == out.str());
  CHECK(out.str().find("ransac.inlier_threshold_3d = 0.05\n") != std::string::npos);
  CHECK(back.forest.tree_count == 5);
  CHECK(back.forest.max_depth == 25);
  CHECK(back.forest.balanced_depth_limit == 6);
  CHECK(back.query.ransac.hypothesis_count == 256);
  CHECK(back.query.ransac.block_size == 64);
  CHECK(back.n_max_sweep == std::vector<int>{1, 4, 16});
}

TEST_CASE("config parsing of values, comments and errors") {
  std::istringstream in(
      "# comment\n"
      "mode = outdoor\n"
      "forest.tree_count = 3   # trailing\n"
      "forest.max_backtrack_leaves = 8\n"
      "evaluate.n_max_sweep = 1, 2, 32\n"
      "synth.room_size = 5, 4, 3\n"
      "report_format = json-lines\n");
  const RunConfig c = parse_config(in);
  CHECK(c.mode == ForestMode::OutdoorRgb);
  CHECK(c.forest.tree_count == 3);
  CHECK(c.forest.max_backtrack_leaves == 8);
  CHECK(c.query.max_backtrack_leaves == 8);
  CHECK(c.n_max_sweep == std::vector<int>{1, 2, 32});
  CHECK(c.synth.room_size == Eigen::Vector3d(5, 4, 3));
  CHECK(c.report_format == ReportFormat::JsonLines);

  for (const char* bad : {"nope = 1\n", "forest.tree_count = x\n", "forest.tree_count\n",
                          "mode = sideways\n", "report_format = xml\n", "synth.room_size = 1,2\n"}) {
    std::istringstream b(bad);
    CHECK_THROWS_AS(parse_config(b), ConfigError);
  }
  RunConfig r;
  r.forest.tree_count = 0;
  CHECK_THROWS_AS(r.validate(), ConfigError);
  CHECK_THROWS_AS(load_config_file("/nonexistent/btrf.cfg"), ConfigError);
}

TEST_CASE("reports: csv header, json-lines round trip, infinities") {
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<FrameRow> rows{{0, 0.0123, 1.5, 120, true, 33.25}, {1, inf, inf, 0, false, 12.0}};
  std::ostringstream csv;
  write_frame_report(csv, rows, ReportFormat::Csv);
  CHECK(csv.str().rfind("frame,trans_err_m,rot_err_deg,inliers,correct,runtime_ms\n", 0) == 0);
  CHECK(csv.str().find("inf") != std::string::npos);

  std::ostringstream jl;
  write_frame_report(jl, rows, ReportFormat::JsonLines);
  std::istringstream jin(jl.str());
  CHECK(read_frame_rows_jsonl(jin) == rows);
  std::istringstream lines(jl.str());
  for (std::string line; std::getline(lines, line);) CHECK(nlohmann::json::accept(line));

  const std::vector<SummaryRow> summary{{16, 20, 0.95, 0.01, 0.5, 100.0}, {1, 20, 0.0, inf, inf, 50.0}};
  std::ostringstream sl;
  write_summary_report(sl, summary, ReportFormat::JsonLines);
  std::istringstream sin(sl.str());
  CHECK(read_summary_rows_jsonl(sin) == summary);

  std::ostringstream text;
  write_summary_report(text, summary, ReportFormat::Text);
  CHECK(text.str().find("16") != std::string::npos);
  CHECK(std::string(report_extension(ReportFormat::Csv)) == "csv");
  CHECK(parse_report_format("text") == ReportFormat::Text);
}

TEST_CASE("dataset layout round trip and errors") {
  test::TempDir dir("dataset");
  Rng rng(1);
  RgbdFrame frame = test::random_frame(rng, 16, 12, 0.5, 4.0, 0.2);
  const CameraPose pose = test::random_pose(rng);
  write_rgbd_frame(dir.str(), Split::Test, 7, frame, pose);
  write_rgbd_frame(dir.str(), Split::Train, 2, frame, pose);
  write_intrinsics_file(dir.str("intrinsics.txt"), {20, 20, 8, 6, 16, 12});
  const SceneDataset ds(dir.str());
  CHECK_FALSE(ds.is_outdoor());
  CHECK(ds.frames(Split::Test) == std::vector<int>{7});
  CHECK(fs::exists(ds.frame_path(Split::Test, 7, "color.png")));
  const RgbdFrame back = ds.load_rgbd(Split::Test, 7);
  CHECK(back.rgb == frame.rgb);
  for (std::size_t i = 0; i < frame.depth.size(); ++i)
    CHECK(std::abs(back.depth[i] - frame.depth[i]) <= 0.0005 + 1e-12);
  CHECK(ds.load_pose(Split::Test, 7).matrix().isApprox(pose.matrix(), 1e-12));
  CHECK(ds.intrinsics().width == 16);

  fs::remove(ds.frame_path(Split::Test, 7, "pose.txt"));
  try {
    (void)ds.load_pose(Split::Test, 7);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("test frame 7") != std::string::npos);
  }
  CHECK_THROWS_AS(SceneDataset(dir.str("missing")), DataError);

  std::vector<Eigen::Vector3d> pts{{1, 2, 3}, {4, 5, 6}};
  write_points3d(dir.str("points3d.txt"), pts);
  CHECK(ds.load_points3d() == pts);
  CHECK(ds.is_outdoor());
}

TEST_CASE("commands end to end with ground truth isolation") {
  test::TempDir dir("cli");
  const RunConfig config = tiny_config(dir);
  Captured c;
  REQUIRE(cmd_synth(config, c.ctx) == kExitOk);
  const SceneDataset ds(config.dataset);
  CHECK(ds.frames(Split::Train).size() == 20);
  CHECK(ds.frames(Split::Test).size() == 3);

  REQUIRE(cmd_train(config, c.ctx) == kExitOk);
  CHECK(fs::exists(config.model));
  const auto manifest = nlohmann::json::parse(slurp(config.model + ".manifest.json"));
  CHECK(manifest["trees"].size() == 2);
  CHECK(manifest["training_frames"] == 20);
  CHECK(manifest["config"]["forest.tree_count"] == "2");

  std::mutex mu;
  std::vector<std::string> log;
  Captured e;
  e.ctx.phase_observer = [&](const std::string& p) {
    std::lock_guard lock(mu);
    log.push_back("phase:" + p);
  };
  e.ctx.load_observer = [&](const LoadEvent& ev) {
    std::lock_guard lock(mu);
    if (ev.kind == LoadEvent::Kind::Pose && ev.split == Split::Test) log.push_back("test-pose");
  };
  REQUIRE(cmd_evaluate(config, e.ctx) == kExitOk);
  bool estimating = false, saw_end = false;
  int poses_after = 0;
  for (const auto& entry : log) {
    if (entry == "phase:estimate-begin") estimating = true;
    if (entry == "phase:estimate-end") {
      estimating = false;
      saw_end = true;
    }
    if (entry == "test-pose") {
      CHECK_FALSE(estimating);
      CHECK(saw_end);
      ++poses_after;
    }
  }
  CHECK(poses_after == 3);
  for (const char* f : {"summary.txt", "frames_nmax1.txt", "frames_nmax16.txt", "poses_nmax16.csv"})
    CHECK(fs::exists(fs::path(config.output_dir) / f));

  Captured r;
  int test_pose_loads = 0;
  r.ctx.load_observer = [&](const LoadEvent& ev) {
    std::lock_guard lock(mu);
    if (ev.kind == LoadEvent::Kind::Pose && ev.split == Split::Test) ++test_pose_loads;
  };
  CHECK(cmd_relocalize(config, r.ctx) == kExitOk);
  CHECK(test_pose_loads == 0);
  CHECK(fs::exists(fs::path(config.output_dir) / "relocalized"));

  Captured i;
  CHECK(cmd_inspect(config.model, i.ctx) == kExitOk);
  CHECK(i.out.str().find("objective") != std::string::npos);
  CHECK(i.out.str().find("balanced") != std::string::npos);

  // Missing test pose: evaluation fails with a data error naming the frame.
  const int first = ds.frames(Split::Test).front();
  fs::remove(ds.frame_path(Split::Test, first, "pose.txt"));
  Captured m;
  const int code = run_guarded([&] { return cmd_evaluate(config, m.ctx); }, m.err);
  CHECK(code == kExitData);
  CHECK(m.err.str().find("test frame " + std::to_string(first)) != std::string::npos);

  // Empty test set.
  for (const int f : ds.frames(Split::Test))
    for (const char* s : {"color.png", "depth.png", "pose.txt"}) fs::remove(ds.frame_path(Split::Test, f, s));
  Captured z;
  CHECK(run_guarded([&] { return cmd_evaluate(config, z.ctx); }, z.err) == kExitData);

  // Model and config mode disagree with the dataset.
  RunConfig outdoor = config;
  outdoor.mode = ForestMode::OutdoorRgb;
  Captured o;
  CHECK(run_guarded([&] { return cmd_train(outdoor, o.ctx); }, o.err) == kExitData);
}

TEST_CASE("a minimal model trains in well under a second") {
  test::TempDir dir("tiny");
  RunConfig config = tiny_config(dir);
  config.synth.train_frames = 1;
  config.synth.test_frames = 1;
  Captured c;
  REQUIRE(cmd_synth(config, c.ctx) == kExitOk);
  config.forest.tree_count = 1;
  config.images_per_tree_indoor = 1;
  config.pixels_per_image = 10;
  const auto start = std::chrono::steady_clock::now();
  REQUIRE(cmd_train(config, c.ctx) == kExitOk);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(seconds < 1.0);
  const Forest f = load_forest_file(config.model);
  CHECK(f.trees.size() == 1);
  CHECK(tree_stats(f.trees[0]).training_samples == 10);
}

TEST_CASE("command line exit codes") {
  test::TempDir dir("exit");
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("--print-defaults") == 0);
  CHECK(run_cli("") == 1);
  CHECK(run_cli("bogus") == 1);
  CHECK(run_cli("train -s no_such_key=1") == 1);
  CHECK(run_cli("train -s forest.tree_count") == 1);
  CHECK(run_cli("train -d " + dir.str("absent")) == 2);
  CHECK(run_cli("inspect " + dir.str("absent.btrf")) == 2);

  std::ofstream(dir.str("small.cfg")) << "synth.seed = 3\nsynth.train_frames = 20\nsynth.test_frames = 3\n"
                                         "synth.width = 160\nsynth.height = 120\nsynth.fx = 150\nsynth.fy = 150\n"
                                         "synth.cx = 80\nsynth.cy = 60\nforest.tree_count = 2\n"
                                         "train.pixels_per_image = 1500\nquery.pixels = 1500\n";
  const std::string common = " -c " + dir.str("small.cfg") + " -d " + dir.str("scene") + " -m " + dir.str("m.btrf");
  CHECK(run_cli("synth" + common) == 0);
  CHECK(run_cli("train" + common + " -j 2") == 0);
  CHECK(run_cli("evaluate" + common + " -o " + dir.str("out") + " -f csv") == 0);
  CHECK(fs::exists(dir.path() / "out" / "summary.csv"));
  CHECK(run_cli("inspect " + dir.str("m.btrf")) == 0);

  // Relocalization that cannot localize anything exits 3.
  CHECK(run_cli("relocalize" + common + " -o " + dir.str("r") + " -s ransac.min_inliers_3d=100000") == 3);
}

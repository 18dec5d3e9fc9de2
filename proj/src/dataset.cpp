#include "btrf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <regex>
#include <sstream>

#include "btrf/image_io.hpp"

namespace btrf {

namespace fs = std::filesystem;

namespace {

std::string frame_name(int index, const std::string& suffix) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame-%06d.", index);
  return buf + suffix;
}

std::vector<int> scan(const fs::path& dir, const std::string& suffix) {
  std::vector<int> out;
  if (!fs::is_directory(dir)) return out;
  const std::regex pattern("frame-(\\d{6})\\." + std::regex_replace(suffix, std::regex("\\."), "\\.") + "$");
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) out.push_back(std::stoi(m[1].str()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

const char* to_string(Split split) { return split == Split::Train ? "train" : "test"; }

SceneDataset::SceneDataset(std::string root) : root_(std::move(root)) {
  if (!fs::is_directory(root_)) throw DataError("dataset directory not found: " + root_);
}

std::string SceneDataset::frame_path(Split split, int index, const std::string& suffix) const {
  return (fs::path(root_) / to_string(split) / frame_name(index, suffix)).string();
}

bool SceneDataset::is_outdoor() const {
  return !scan(fs::path(root_) / to_string(Split::Train), "keys").empty() ||
         fs::exists(fs::path(root_) / "points3d.txt");
}

std::vector<int> SceneDataset::frames(Split split) const {
  return scan(fs::path(root_) / to_string(split), is_outdoor() ? "keys" : "color.png");
}

Intrinsics SceneDataset::intrinsics() const {
  notify(LoadEvent::Kind::Intrinsics, Split::Train, -1);
  return read_intrinsics_file((fs::path(root_) / "intrinsics.txt").string());
}

RgbdFrame SceneDataset::load_rgbd(Split split, int index) const {
  const std::string color_path = frame_path(split, index, "color.png");
  const std::string depth_path = frame_path(split, index, "depth.png");
  notify(LoadEvent::Kind::Color, split, index);
  const Image8 color = read_png_rgb(color_path);
  notify(LoadEvent::Kind::Depth, split, index);
  const Image16 depth = read_png_gray16(depth_path);
  if (color.width != depth.width || color.height != depth.height)
    throw DataError("colour and depth sizes differ for " + depth_path);

  RgbdFrame frame(color.width, color.height);
  frame.rgb = color.data;
  for (std::size_t i = 0; i < depth.data.size(); ++i) frame.depth[i] = depth.data[i] / 1000.0;
  return frame;
}

CameraPose SceneDataset::load_pose(Split split, int index) const {
  notify(LoadEvent::Kind::Pose, split, index);
  const std::string path = frame_path(split, index, "pose.txt");
  if (!fs::exists(path))
    throw DataError("missing pose file for " + std::string(to_string(split)) + " frame " +
                    std::to_string(index) + ": " + path);
  return read_pose_file(path);
}

std::vector<Keypoint> SceneDataset::load_keypoints(Split split, int index) const {
  notify(LoadEvent::Kind::Keypoints, split, index);
  return read_keypoint_file(frame_path(split, index, "keys"));
}

std::vector<Eigen::Vector3d> SceneDataset::load_points3d() const {
  notify(LoadEvent::Kind::Points, Split::Train, -1);
  const std::string path = (fs::path(root_) / "points3d.txt").string();
  std::ifstream in(path);
  if (!in) throw DataError("cannot open SfM points: " + path);
  std::vector<Eigen::Vector3d> points;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::istringstream ls(line);
    Eigen::Vector3d p;
    if (!(ls >> p.x() >> p.y() >> p.z()) || !p.allFinite())
      throw DataError(path + ":" + std::to_string(line_no) + ": expected `x y z`");
    points.push_back(p);
  }
  return points;
}

void write_rgbd_frame(const std::string& root, Split split, int index, const RgbdFrame& frame,
                      const CameraPose& pose) {
  const fs::path dir = fs::path(root) / to_string(split);
  fs::create_directories(dir);
  Image8 color{frame.width, frame.height, 3, frame.rgb};
  write_png_rgb((dir / frame_name(index, "color.png")).string(), color);

  Image16 depth{frame.width, frame.height, std::vector<std::uint16_t>(frame.depth.size())};
  for (std::size_t i = 0; i < frame.depth.size(); ++i) {
    const double mm = std::round(frame.depth[i] * 1000.0);
    depth.data[i] = static_cast<std::uint16_t>(std::clamp(mm, 0.0, 65535.0));
  }
  write_png_gray16((dir / frame_name(index, "depth.png")).string(), depth);
  write_pose_file((dir / frame_name(index, "pose.txt")).string(), pose);
}

void write_points3d(const std::string& path, const std::vector<Eigen::Vector3d>& points) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write SfM points: " + path);
  out << std::setprecision(17);
  for (const auto& p : points) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
}

}  // namespace btrf

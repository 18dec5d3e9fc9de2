#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "btrf/errors.hpp"
#include "btrf/geometry.hpp"

namespace btrf {

/// Colour plus metric depth, row-major. Depth 0 marks a missing measurement.
struct RgbdFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // width * height * 3, interleaved R,G,B
  std::vector<double> depth;      // width * height, meters

  RgbdFrame() = default;
  RgbdFrame(int w, int h) : width(w), height(h), rgb(std::size_t(w) * h * 3, 0), depth(std::size_t(w) * h, 0.0) {}

  std::uint8_t color(int x, int y, int channel) const {
    return rgb[(std::size_t(y) * width + x) * 3 + channel];
  }
  std::uint8_t& color(int x, int y, int channel) {
    return rgb[(std::size_t(y) * width + x) * 3 + channel];
  }
  double depth_at(int x, int y) const { return depth[std::size_t(y) * width + x]; }
  double& depth_at(int x, int y) { return depth[std::size_t(y) * width + x]; }
  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }

  /// Throws InvalidInput when buffers disagree with the size or depth < 0.
  void validate() const;
};

enum class DescriptorKind : std::uint8_t {
  Wht60 = 0,       // 20 sequency-ordered WHT coefficients per RGB channel
  External64 = 1,  // ingested 64-d descriptor, unit L2
};

std::size_t descriptor_length(DescriptorKind kind);

struct Keypoint {
  Eigen::Vector2d pixel;
  std::vector<double> descriptor;  // External64, unit L2 after ingestion
};

inline constexpr int kWhtPatchSize = 32;
inline constexpr int kWhtCoefficientsPerChannel = 20;
inline constexpr std::size_t kExternalDescriptorLength = 64;

/// I(p, c1) - I(q, c2) with q = p + offset / D(p), rounded to the nearest
/// pixel and clamped to the image. Throws InvalidDepth when D(p) <= 0.
double random_feature_response(const RgbdFrame& frame, int x, int y,
                               const Eigen::Vector2d& offset, int c1, int c2);

/// Same response when the depth at (x, y) is already known.
inline double random_feature_response_unchecked(const RgbdFrame& frame, int x, int y,
                                                double inverse_depth, double offset_x,
                                                double offset_y, int c1, int c2) {
  int qx = static_cast<int>(std::lround(x + offset_x * inverse_depth));
  int qy = static_cast<int>(std::lround(y + offset_y * inverse_depth));
  qx = qx < 0 ? 0 : (qx >= frame.width ? frame.width - 1 : qx);
  qy = qy < 0 ? 0 : (qy >= frame.height ? frame.height - 1 : qy);
  return double(frame.color(x, y, c1)) - double(frame.color(qx, qy, c2));
}

/// In-place orthonormal 1-D fast Walsh-Hadamard transform in natural
/// (Hadamard) order. Length must be a power of two.
void fwht_inplace(std::span<double> values);

/// Orthonormal 2-D WHT of an n x n row-major block, natural order.
void wht2d_inplace(std::span<double> block, int n);

/// Natural (Hadamard) row index of the Walsh function with `sequency`
/// sign changes, for transforms of length n.
int sequency_to_natural(int sequency, int n);

/// (row, col) sequency pairs in JPEG-style zig-zag order, first `count`.
std::vector<std::array<int, 2>> zigzag_order(int n, int count);

/// 60-d descriptor: for each of R, G, B a 32x32 patch centred on (x, y)
/// (top-left at x-16, y-16, edge replicated), orthonormal 2-D WHT, first 20
/// coefficients in sequency zig-zag order (DC first).
std::vector<double> wht_descriptor(const RgbdFrame& frame, int x, int y);

/// Euclidean distance; throws InvalidInput on length mismatch.
double descriptor_distance(std::span<const double> a, std::span<const double> b);

/// Rescales to unit L2 norm; zero vectors are rejected.
void normalize_descriptor(std::vector<double>& descriptor);

/// Keypoint file: binary "BKPT" container or the text variant
/// `x y v1 ... v64` per line. Descriptors come back unit-normalised.
std::vector<Keypoint> read_keypoint_file(const std::string& path);
void write_keypoint_file(const std::string& path, std::span<const Keypoint> keypoints);
void write_keypoint_text_file(const std::string& path, std::span<const Keypoint> keypoints);

}  // namespace btrf

#include "btrf/features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include "binary_io.hpp"

namespace btrf {

namespace {

constexpr int kLog2Patch = 5;
static_assert((1 << kLog2Patch) == kWhtPatchSize);

struct WhtLayout {
  // Natural-order (row, col) index of each kept coefficient.
  std::array<std::array<int, 2>, kWhtCoefficientsPerChannel> natural{};
  // Natural column indices that at least one kept coefficient touches.
  std::vector<int> columns;
};

const WhtLayout& wht_layout() {
  static const WhtLayout layout = [] {
    WhtLayout l;
    const auto order = zigzag_order(kWhtPatchSize, kWhtCoefficientsPerChannel);
    for (int i = 0; i < kWhtCoefficientsPerChannel; ++i) {
      l.natural[i] = {sequency_to_natural(order[i][0], kWhtPatchSize),
                      sequency_to_natural(order[i][1], kWhtPatchSize)};
      if (std::find(l.columns.begin(), l.columns.end(), l.natural[i][1]) == l.columns.end())
        l.columns.push_back(l.natural[i][1]);
    }
    return l;
  }();
  return layout;
}

// Unnormalised butterfly over `n` values spaced by `stride`.
void fwht_strided(double* data, int n, int stride) {
  for (int half = 1; half < n; half *= 2) {
    for (int i = 0; i < n; i += 2 * half) {
      for (int j = i; j < i + half; ++j) {
        const double a = data[j * stride];
        const double b = data[(j + half) * stride];
        data[j * stride] = a + b;
        data[(j + half) * stride] = a - b;
      }
    }
  }
}

}  // namespace

void RgbdFrame::validate() const {
  if (width <= 0 || height <= 0) throw InvalidInput("frame size must be positive");
  if (rgb.size() != std::size_t(width) * height * 3) throw InvalidInput("rgb buffer size mismatch");
  if (depth.size() != std::size_t(width) * height) throw InvalidInput("depth buffer size mismatch");
  for (const double d : depth)
    if (!(d >= 0.0) || !std::isfinite(d)) throw InvalidInput("depth must be finite and >= 0");
}

std::size_t descriptor_length(DescriptorKind kind) {
  switch (kind) {
    case DescriptorKind::Wht60:
      return 3 * kWhtCoefficientsPerChannel;
    case DescriptorKind::External64:
      return kExternalDescriptorLength;
  }
  throw InvalidInput("unknown descriptor kind");
}

double random_feature_response(const RgbdFrame& frame, int x, int y,
                               const Eigen::Vector2d& offset, int c1, int c2) {
  if (!frame.in_bounds(x, y)) throw InvalidInput("random feature: pixel outside the image");
  if (c1 < 0 || c1 > 2 || c2 < 0 || c2 > 2) throw InvalidInput("random feature: bad channel");
  const double d = frame.depth_at(x, y);
  if (!(d > 0.0)) throw InvalidDepth("random feature: no depth at query pixel");
  return random_feature_response_unchecked(frame, x, y, 1.0 / d, offset.x(), offset.y(), c1, c2);
}

void fwht_inplace(std::span<double> values) {
  const int n = static_cast<int>(values.size());
  if (n == 0 || !std::has_single_bit(static_cast<unsigned>(n)))
    throw InvalidInput("fwht: length must be a power of two");
  fwht_strided(values.data(), n, 1);
  const double scale = 1.0 / std::sqrt(double(n));
  for (double& v : values) v *= scale;
}

void wht2d_inplace(std::span<double> block, int n) {
  if (n <= 0 || !std::has_single_bit(static_cast<unsigned>(n)) ||
      block.size() != std::size_t(n) * n)
    throw InvalidInput("wht2d: block must be n x n with n a power of two");
  for (int r = 0; r < n; ++r) fwht_strided(block.data() + std::size_t(r) * n, n, 1);
  for (int c = 0; c < n; ++c) fwht_strided(block.data() + c, n, n);
  const double scale = 1.0 / double(n);
  for (double& v : block) v *= scale;
}

int sequency_to_natural(int sequency, int n) {
  if (n <= 0 || !std::has_single_bit(static_cast<unsigned>(n)) || sequency < 0 || sequency >= n)
    throw InvalidInput("sequency index out of range");
  const int bits = std::countr_zero(static_cast<unsigned>(n));
  const unsigned gray = static_cast<unsigned>(sequency ^ (sequency >> 1));
  unsigned reversed = 0;
  for (int b = 0; b < bits; ++b)
    if (gray & (1u << b)) reversed |= 1u << (bits - 1 - b);
  return static_cast<int>(reversed);
}

std::vector<std::array<int, 2>> zigzag_order(int n, int count) {
  std::vector<std::array<int, 2>> order;
  order.reserve(std::size_t(n) * n);
  for (int diag = 0; diag <= 2 * (n - 1); ++diag) {
    const int lo = std::max(0, diag - (n - 1));
    const int hi = std::min(diag, n - 1);
    // Even diagonals run bottom-left to top-right (row decreasing).
    if (diag % 2 == 0) {
      for (int r = hi; r >= lo; --r) order.push_back({r, diag - r});
    } else {
      for (int r = lo; r <= hi; ++r) order.push_back({r, diag - r});
    }
  }
  if (count < 0 || count > static_cast<int>(order.size())) throw InvalidInput("zigzag: bad count");
  order.resize(static_cast<std::size_t>(count));
  return order;
}

std::vector<double> wht_descriptor(const RgbdFrame& frame, int x, int y) {
  constexpr int n = kWhtPatchSize;
  constexpr int half = n / 2;
  const WhtLayout& layout = wht_layout();

  std::array<int, n> xs{};
  std::array<int, n> ys{};
  for (int i = 0; i < n; ++i) {
    xs[i] = std::clamp(x - half + i, 0, frame.width - 1);
    ys[i] = std::clamp(y - half + i, 0, frame.height - 1);
  }

  std::vector<double> out;
  out.reserve(3 * kWhtCoefficientsPerChannel);
  std::array<double, n * n> block{};
  for (int c = 0; c < 3; ++c) {
    for (int r = 0; r < n; ++r) {
      const std::uint8_t* row = frame.rgb.data() + std::size_t(ys[r]) * frame.width * 3;
      double* dst = block.data() + r * n;
      for (int i = 0; i < n; ++i) dst[i] = row[xs[i] * 3 + c];
      fwht_strided(dst, n, 1);
    }
    // Only the columns holding kept coefficients need the second pass.
    for (const int col : layout.columns) fwht_strided(block.data() + col, n, n);
    for (const auto& rc : layout.natural) out.push_back(block[rc[0] * n + rc[1]] / double(n));
  }
  return out;
}

double descriptor_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidInput("descriptor length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

void normalize_descriptor(std::vector<double>& descriptor) {
  double sum = 0.0;
  for (const double v : descriptor) sum += v * v;
  const double norm = std::sqrt(sum);
  if (!(norm > 0.0) || !std::isfinite(norm)) throw InvalidInput("cannot normalise a zero descriptor");
  for (double& v : descriptor) v /= norm;
}

std::vector<Keypoint> read_keypoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open keypoint file: " + path);

  char magic[4] = {};
  in.read(magic, 4);
  std::vector<Keypoint> keypoints;
  if (in.gcount() == 4 && std::string(magic, 4) == "BKPT") {
    detail::Reader reader(in, path);
    const std::uint32_t version = reader.u32();
    if (version != 1) reader.fail("unsupported keypoint format version " + std::to_string(version));
    const std::uint32_t count = reader.u32();
    const std::uint32_t dim = reader.u32();
    if (dim != kExternalDescriptorLength) reader.fail("descriptor dimension must be 64");
    keypoints.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      Keypoint kp;
      kp.pixel.x() = reader.f32();
      kp.pixel.y() = reader.f32();
      kp.descriptor.resize(dim);
      for (auto& v : kp.descriptor) v = reader.f32();
      keypoints.push_back(std::move(kp));
    }
    reader.expect_end();
  } else {
    in.clear();
    in.seekg(0);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
      std::istringstream ls(line);
      Keypoint kp;
      std::vector<double> values;
      double v;
      while (ls >> v) values.push_back(v);
      if (values.size() != 2 + kExternalDescriptorLength)
        throw DataError(path + ":" + std::to_string(line_no) + ": expected x y and 64 values");
      kp.pixel = {values[0], values[1]};
      kp.descriptor.assign(values.begin() + 2, values.end());
      keypoints.push_back(std::move(kp));
    }
  }

  for (std::size_t i = 0; i < keypoints.size(); ++i) {
    try {
      normalize_descriptor(keypoints[i].descriptor);
    } catch (const InvalidInput&) {
      throw DataError(path + ": keypoint " + std::to_string(i) + " has a zero descriptor");
    }
  }
  return keypoints;
}

void write_keypoint_file(const std::string& path, std::span<const Keypoint> keypoints) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write keypoint file: " + path);
  out.write("BKPT", 4);
  detail::put_u32(out, 1);
  detail::put_u32(out, static_cast<std::uint32_t>(keypoints.size()));
  detail::put_u32(out, static_cast<std::uint32_t>(kExternalDescriptorLength));
  for (const auto& kp : keypoints) {
    if (kp.descriptor.size() != kExternalDescriptorLength)
      throw InvalidInput("keypoint descriptor must have 64 values");
    detail::put_f32(out, static_cast<float>(kp.pixel.x()));
    detail::put_f32(out, static_cast<float>(kp.pixel.y()));
    for (const double v : kp.descriptor) detail::put_f32(out, static_cast<float>(v));
  }
}

void write_keypoint_text_file(const std::string& path, std::span<const Keypoint> keypoints) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write keypoint file: " + path);
  out.precision(9);
  for (const auto& kp : keypoints) {
    out << kp.pixel.x() << ' ' << kp.pixel.y();
    for (const double v : kp.descriptor) out << ' ' << v;
    out << '\n';
  }
}

}  // namespace btrf

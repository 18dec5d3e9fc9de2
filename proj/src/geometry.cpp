#include "btrf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace btrf {

namespace {

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& omega) {
  const double angle = omega.norm();
  if (angle < 1e-12) return Eigen::Matrix3d::Identity() + skew(omega);
  return Eigen::AngleAxisd(angle, omega / angle).toRotationMatrix();
}

Eigen::Vector3d bearing(const Eigen::Vector2d& pixel, const Intrinsics& k) {
  return Eigen::Vector3d((pixel.x() - k.cx) / k.fx, (pixel.y() - k.cy) / k.fy, 1.0).normalized();
}

// Real roots of c[0] x^4 + c[1] x^3 + c[2] x^2 + c[3] x + c[4], Newton-polished.
std::vector<double> quartic_real_roots(const std::array<double, 5>& c) {
  std::vector<double> roots;
  double largest = 0.0;
  for (const double v : c) largest = std::max(largest, std::abs(v));
  if (largest == 0.0) return roots;
  int degree = 4;
  int lead = 0;
  while (degree > 0 && std::abs(c[lead]) < 1e-14 * largest) {
    ++lead;
    --degree;
  }
  if (degree == 0) return roots;

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
  for (int i = 0; i < degree; ++i) companion(0, i) = -c[lead + 1 + i] / c[lead];
  for (int i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  const auto& eig = solver.eigenvalues();

  auto eval = [&](double x, double& derivative) {
    double value = 0.0;
    derivative = 0.0;
    for (int i = lead; i <= 4; ++i) {
      derivative = derivative * x + value;
      value = value * x + c[i];
    }
    return value;
  };

  for (int i = 0; i < degree; ++i) {
    const double re = eig[i].real();
    if (std::abs(eig[i].imag()) > 1e-6 * std::max(1.0, std::abs(re))) continue;
    double x = re;
    for (int it = 0; it < 8; ++it) {
      double d = 0.0;
      const double f = eval(x, d);
      if (d == 0.0) break;
      const double step = f / d;
      x -= step;
      if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(x))) break;
    }
    roots.push_back(x);
  }
  return roots;
}

}  // namespace

void Intrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw InvalidInput("focal lengths must be positive");
  if (width <= 0 || height <= 0) throw InvalidInput("image size must be positive");
  if (cx < 0.0 || cy < 0.0 || cx > width || cy > height)
    throw InvalidInput("principal point outside the image");
}

Eigen::Matrix4d CameraPose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

CameraPose CameraPose::from_matrix(const Eigen::Matrix4d& m) {
  return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
}

bool CameraPose::is_valid() const {
  const Eigen::Matrix3d gram = rotation.transpose() * rotation - Eigen::Matrix3d::Identity();
  return gram.cwiseAbs().maxCoeff() < 1e-9 && rotation.determinant() > 0.0 &&
         translation.allFinite();
}

Eigen::Vector3d backproject(const Eigen::Vector2d& pixel, double depth, const Intrinsics& k) {
  if (!(depth > 0.0)) throw InvalidInput("backproject: depth must be positive");
  return {(pixel.x() - k.cx) * depth / k.fx, (pixel.y() - k.cy) * depth / k.fy, depth};
}

Eigen::Vector2d project(const Eigen::Vector3d& x_cam, const Intrinsics& k) {
  if (!(x_cam.z() > 0.0)) throw InvalidInput("project: point behind the camera");
  return {k.fx * x_cam.x() / x_cam.z() + k.cx, k.fy * x_cam.y() / x_cam.z() + k.cy};
}

CameraPose kabsch(std::span<const Eigen::Vector3d> camera,
                  std::span<const Eigen::Vector3d> world) {
  if (camera.size() != world.size()) throw InvalidInput("kabsch: point count mismatch");
  if (camera.size() < 3) throw InsufficientData("kabsch: need at least 3 points");

  const double n = static_cast<double>(camera.size());
  Eigen::Vector3d mean_cam = Eigen::Vector3d::Zero();
  Eigen::Vector3d mean_world = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < camera.size(); ++i) {
    mean_cam += camera[i];
    mean_world += world[i];
  }
  mean_cam /= n;
  mean_world /= n;

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d cam_scatter = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < camera.size(); ++i) {
    const Eigen::Vector3d a = camera[i] - mean_cam;
    cov += (world[i] - mean_world) * a.transpose();
    cam_scatter += a * a.transpose();
  }

  // Rank of the centred camera cloud; collinear sets have one dominant axis.
  const Eigen::Vector3d spread = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(
                                     cam_scatter, Eigen::EigenvaluesOnly)
                                     .eigenvalues();
  if (!(spread(1) > 1e-12 * std::max(spread(2), 1e-300)))
    throw DegenerateConfiguration("kabsch: camera points are collinear or coincident");

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d correction = Eigen::Matrix3d::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) correction(2, 2) = -1.0;

  CameraPose pose;
  pose.rotation = svd.matrixU() * correction * svd.matrixV().transpose();
  pose.translation = mean_world - pose.rotation * mean_cam;
  return pose;
}

std::vector<CameraPose> p3p_candidates(std::span<const PixelCorrespondence, 3> pairs,
                                       const Intrinsics& k) {
  const Eigen::Vector3d& p1 = pairs[0].world;
  const Eigen::Vector3d& p2 = pairs[1].world;
  const Eigen::Vector3d& p3 = pairs[2].world;
  if ((p2 - p1).cross(p3 - p1).norm() < 1e-12 * std::max(1.0, (p2 - p1).squaredNorm()))
    throw DegenerateConfiguration("p3p: world points are collinear");

  const Eigen::Vector3d j1 = bearing(pairs[0].pixel, k);
  const Eigen::Vector3d j2 = bearing(pairs[1].pixel, k);
  const Eigen::Vector3d j3 = bearing(pairs[2].pixel, k);
  const double cos_a = j2.dot(j3);
  const double cos_b = j1.dot(j3);
  const double cos_g = j1.dot(j2);
  constexpr double kParallel = 1.0 - 1e-12;
  if (cos_a > kParallel || cos_b > kParallel || cos_g > kParallel)
    throw DegenerateConfiguration("p3p: parallel viewing rays");

  const double a2 = (p2 - p3).squaredNorm();
  const double b2 = (p1 - p3).squaredNorm();
  const double c2 = (p1 - p2).squaredNorm();

  // Grunert's formulation: s2 = u * s1, s3 = v * s1, quartic in v.
  const double amc = (a2 - c2) / b2;
  const double apc = (a2 + c2) / b2;
  const std::array<double, 5> coeffs = {
      (amc - 1.0) * (amc - 1.0) - 4.0 * c2 / b2 * cos_a * cos_a,
      4.0 * (amc * (1.0 - amc) * cos_b - (1.0 - apc) * cos_a * cos_g +
             2.0 * c2 / b2 * cos_a * cos_a * cos_b),
      2.0 * (amc * amc - 1.0 + 2.0 * amc * amc * cos_b * cos_b +
             2.0 * (b2 - c2) / b2 * cos_a * cos_a - 4.0 * apc * cos_a * cos_b * cos_g +
             2.0 * (b2 - a2) / b2 * cos_g * cos_g),
      4.0 * (-amc * (1.0 + amc) * cos_b + 2.0 * a2 / b2 * cos_g * cos_g * cos_b -
             (1.0 - apc) * cos_a * cos_g),
      (1.0 + amc) * (1.0 + amc) - 4.0 * a2 / b2 * cos_g * cos_g,
  };

  std::vector<CameraPose> poses;
  const std::array<Eigen::Vector3d, 3> world = {p1, p2, p3};
  for (const double v : quartic_real_roots(coeffs)) {
    if (!(v > 0.0)) continue;
    const double s1_sq = b2 / (1.0 + v * v - 2.0 * v * cos_b);
    if (!(s1_sq > 0.0)) continue;
    const double s1 = std::sqrt(s1_sq);

    double u = 0.0;
    const double denom = 2.0 * (cos_g - v * cos_a);
    if (std::abs(denom) > 1e-10) {
      u = ((amc - 1.0) * v * v - 2.0 * amc * cos_b * v + 1.0 + amc) / denom;
    } else {
      // a^2 = s1^2 (u^2 + v^2 - 2uv cos_a): take the root that also fits c^2.
      const double disc = v * v * cos_a * cos_a - (v * v - a2 / s1_sq);
      if (disc < 0.0) continue;
      const double r = std::sqrt(disc);
      auto c_residual = [&](double uu) {
        return std::abs(s1_sq * (1.0 + uu * uu - 2.0 * uu * cos_g) - c2);
      };
      const double u0 = v * cos_a + r;
      const double u1 = v * cos_a - r;
      u = c_residual(u0) <= c_residual(u1) ? u0 : u1;
    }
    if (!(u > 0.0)) continue;

    const std::array<Eigen::Vector3d, 3> cam = {s1 * j1, u * s1 * j2, v * s1 * j3};
    try {
      poses.push_back(kabsch(cam, world));
    } catch (const DegenerateConfiguration&) {
    }
  }
  return poses;
}

CameraPose p3p_solve(std::span<const PixelCorrespondence, 4> pairs, const Intrinsics& k) {
  const auto candidates = p3p_candidates(pairs.first<3>(), k);
  double best_error = std::numeric_limits<double>::infinity();
  const CameraPose* best = nullptr;
  for (const auto& pose : candidates) {
    const Eigen::Vector3d x = pose.to_camera(pairs[3].world);
    if (!(x.z() > 0.0)) continue;
    const double err = (project(x, k) - pairs[3].pixel).squaredNorm();
    if (err < best_error) {
      best_error = err;
      best = &pose;
    }
  }
  if (best == nullptr) throw DegenerateConfiguration("p3p: no real solution");
  return *best;
}

double reprojection_cost(const CameraPose& pose, std::span<const PixelCorrespondence> pairs,
                         const Intrinsics& k) {
  double cost = 0.0;
  for (const auto& c : pairs) {
    const Eigen::Vector3d x = pose.to_camera(c.world);
    if (!(x.z() > 0.0)) return std::numeric_limits<double>::infinity();
    cost += (project(x, k) - c.pixel).squaredNorm();
  }
  return cost;
}

CameraPose apply_left_increment(const CameraPose& pose,
                                const Eigen::Matrix<double, 6, 1>& delta) {
  const CameraPose w2c = pose.inverse();
  const Eigen::Matrix3d r = so3_exp(delta.head<3>());
  const CameraPose updated{r * w2c.rotation, r * w2c.translation + delta.tail<3>()};
  return updated.inverse();
}

Eigen::Matrix<double, 2, 6> reprojection_jacobian(const CameraPose& pose,
                                                  const Eigen::Vector3d& world,
                                                  const Intrinsics& k) {
  const Eigen::Vector3d x = pose.to_camera(world);
  const double iz = 1.0 / x.z();
  Eigen::Matrix<double, 2, 3> dproj;
  dproj << k.fx * iz, 0.0, -k.fx * x.x() * iz * iz, 0.0, k.fy * iz, -k.fy * x.y() * iz * iz;
  Eigen::Matrix<double, 3, 6> dx;
  dx.leftCols<3>() = -skew(x);
  dx.rightCols<3>() = Eigen::Matrix3d::Identity();
  return dproj * dx;
}

RefinementResult refine_pose_2d3d(const CameraPose& initial,
                                  std::span<const PixelCorrespondence> inliers,
                                  const Intrinsics& k, int max_iterations, double min_update) {
  if (inliers.size() < 4) throw InsufficientData("refine_pose_2d3d: need at least 4 inliers");

  RefinementResult result;
  result.pose = initial;
  result.initial_cost = reprojection_cost(initial, inliers, k);
  result.final_cost = result.initial_cost;
  if (!std::isfinite(result.initial_cost)) {
    result.degenerate = true;
    return result;
  }

  for (int iter = 0; iter < max_iterations; ++iter) {
    Eigen::Matrix<double, 6, 6> normal = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> gradient = Eigen::Matrix<double, 6, 1>::Zero();
    for (const auto& c : inliers) {
      const Eigen::Vector2d r = project(result.pose.to_camera(c.world), k) - c.pixel;
      const Eigen::Matrix<double, 2, 6> j = reprojection_jacobian(result.pose, c.world, k);
      normal.noalias() += j.transpose() * j;
      gradient.noalias() += j.transpose() * r;
    }

    Eigen::LDLT<Eigen::Matrix<double, 6, 6>> ldlt(normal);
    const double scale = normal.diagonal().cwiseAbs().maxCoeff();
    if (ldlt.info() != Eigen::Success || !(scale > 0.0) ||
        ldlt.vectorD().minCoeff() <= 1e-12 * scale) {
      result.degenerate = true;
      break;
    }
    Eigen::Matrix<double, 6, 1> step = -ldlt.solve(gradient);
    result.iterations = iter + 1;

    // Backtrack so the cost never increases.
    bool accepted = false;
    for (int halving = 0; halving < 10 && !accepted; ++halving) {
      const CameraPose candidate = apply_left_increment(result.pose, step);
      const double cost = reprojection_cost(candidate, inliers, k);
      if (cost <= result.final_cost) {
        result.pose = candidate;
        result.final_cost = cost;
        accepted = true;
      } else {
        step *= 0.5;
      }
    }
    if (!accepted || step.norm() < min_update) break;
  }
  return result;
}

PoseError pose_error(const CameraPose& estimate, const CameraPose& truth) {
  PoseError e;
  e.translation_m = (estimate.translation - truth.translation).norm();
  const double cosine =
      std::clamp(((truth.rotation.transpose() * estimate.rotation).trace() - 1.0) / 2.0, -1.0, 1.0);
  e.rotation_deg = std::acos(cosine) * 180.0 / std::numbers::pi;
  return e;
}

Eigen::Matrix3d axis_angle(const Eigen::Vector3d& axis, double angle_rad) {
  return Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix();
}

CameraPose read_pose_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open pose file: " + path);
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      if (!(in >> m(r, c))) throw DataError("malformed pose file (need 16 numbers): " + path);
  if (!m.allFinite()) throw DataError("non-finite pose: " + path);
  CameraPose pose = CameraPose::from_matrix(m);
  // Files written with few digits are re-orthonormalised.
  if (!pose.is_valid()) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(pose.rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
    pose.rotation = svd.matrixU() * svd.matrixV().transpose();
  }
  if (pose.rotation.determinant() < 0.0) throw DataError("pose rotation is a reflection: " + path);
  return pose;
}

void write_pose_file(const std::string& path, const CameraPose& pose) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write pose file: " + path);
  out << std::setprecision(17);
  const Eigen::Matrix4d m = pose.matrix();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) out << m(r, c) << (c == 3 ? '\n' : ' ');
  }
}

Intrinsics read_intrinsics_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open intrinsics file: " + path);
  Intrinsics k;
  if (!(in >> k.fx >> k.fy >> k.cx >> k.cy >> k.width >> k.height))
    throw DataError("malformed intrinsics file (need fx fy cx cy width height): " + path);
  try {
    k.validate();
  } catch (const InvalidInput& e) {
    throw DataError(std::string(e.what()) + ": " + path);
  }
  return k;
}

void write_intrinsics_file(const std::string& path, const Intrinsics& k) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write intrinsics file: " + path);
  out << std::setprecision(17) << k.fx << ' ' << k.fy << ' ' << k.cx << ' ' << k.cy << ' '
      << k.width << ' ' << k.height << '\n';
}

}  // namespace btrf

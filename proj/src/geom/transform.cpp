#include "polynet/error.hpp"
#include "polynet/geom.hpp"

#include <cmath>
#include <random>

namespace polynet {

namespace {

constexpr double kOrthoTol = 1e-12;

}  // namespace

RigidTransform::RigidTransform(const Eigen::Matrix3d& rotation, const Point3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation.allFinite() || !translation.allFinite())
    throw Error(ErrorCode::InvalidTransform, "non-finite entries");
  const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho > kOrthoTol)
    throw Error(ErrorCode::InvalidTransform, "rotation is not orthonormal (deviation " + std::to_string(ortho) + ")");
  if (std::abs(rotation.determinant() - 1.0) > kOrthoTol)
    throw Error(ErrorCode::InvalidTransform, "rotation determinant is not +1");
}

RigidTransform RigidTransform::after(const RigidTransform& first) const {
  RigidTransform out;
  out.rotation_ = rotation_ * first.rotation_;
  out.translation_ = rotation_ * first.translation_ + translation_;
  return out;
}

Polyhedron apply_rigid_transform(const Polyhedron& p, const RigidTransform& t) {
  Polyhedron out = p;
  for (auto& v : out.vertices) v = t.apply(v);
  return out;
}

RigidTransform sample_random_rotation(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Quaterniond q;
  double norm = 0.0;
  do {
    q = Eigen::Quaterniond(normal(rng), normal(rng), normal(rng), normal(rng));
    norm = q.norm();
  } while (norm < 1e-9);
  q.coeffs() /= norm;
  return RigidTransform(q.toRotationMatrix(), Point3::Zero());
}

Alignment kabsch_align(std::span<const Point3> a, std::span<const Point3> b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::Dimension, "kabsch_align needs equally sized point sets");
  if (a.size() < 3) throw Error(ErrorCode::RankDeficient, "kabsch_align needs at least 3 points");

  const auto n = static_cast<Eigen::Index>(a.size());
  Eigen::Matrix3Xd pa(3, n);
  Eigen::Matrix3Xd pb(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    pa.col(i) = a[static_cast<std::size_t>(i)];
    pb.col(i) = b[static_cast<std::size_t>(i)];
  }
  const Point3 ca = pa.rowwise().mean();
  const Point3 cb = pb.rowwise().mean();
  pa.colwise() -= ca;
  pb.colwise() -= cb;

  for (const Eigen::Matrix3Xd* m : {&pa, &pb}) {
    Eigen::JacobiSVD<Eigen::Matrix3Xd> spread(*m);
    const auto sv = spread.singularValues();
    if (!(sv(1) > 1e-12 * std::max(sv(0), 1e-300)))
      throw Error(ErrorCode::RankDeficient, "points are collinear");
  }

  const Eigen::Matrix3d cov = pb * pa.transpose();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d fix = Eigen::Matrix3d::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) fix(2, 2) = -1.0;
  Eigen::Matrix3d rotation = svd.matrixU() * fix * svd.matrixV().transpose();

  // Re-orthonormalize so the RigidTransform guard sees det +1 to 1e-12.
  Eigen::JacobiSVD<Eigen::Matrix3d> clean(rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
  rotation = clean.matrixU() * clean.matrixV().transpose();

  Alignment out;
  out.transform = RigidTransform(rotation, cb - rotation * ca);
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sq += (out.transform.apply(a[i]) - b[i]).squaredNorm();
  out.rmsd = std::sqrt(sq / static_cast<double>(a.size()));
  return out;
}

}  // namespace polynet

#include "aeroseg/augment.hpp"

#include "aeroseg/error.hpp"

#include <cmath>

namespace aeroseg {

void AugmentationParams::validate() const {
  for (double t : targets())
    if (!(t >= 0.0)) throw ValidationError("augmentation targets must be >= 0");
  if (!(xi3_target < 1.0)) throw ValidationError("mirror probability xi3 must be < 1");
  if (tau < 1) throw ValidationError("tau must be >= 1");
  if (epoch < 0 || epoch > tau) throw ValidationError("epoch must lie in [0, tau]");
}

std::array<double, 5> AugmentationParams::scheduled() const {
  std::array<double, 5> out{};
  const auto t = targets();
  for (std::size_t i = 0; i < 5; ++i) out[i] = scheduled_value(t[i], epoch, tau);
  return out;
}

double scheduled_value(double target, int epoch, int tau) {
  if (tau <= 0) throw ValidationError("schedule length tau must be positive");
  const double phase = static_cast<double>(epoch) * std::numbers::pi / tau - std::numbers::pi;
  return target * (1.0 + std::cos(phase)) / 2.0;
}

Eigen::Matrix3d rotation_xyz(const Vec3& angles) {
  const double cx = std::cos(angles.x()), sx = std::sin(angles.x());
  const double cy = std::cos(angles.y()), sy = std::sin(angles.y());
  const double cz = std::cos(angles.z()), sz = std::sin(angles.z());
  Eigen::Matrix3d rx, ry, rz;
  rx << 1, 0, 0, 0, cx, -sx, 0, sx, cx;
  ry << cy, 0, sy, 0, 1, 0, -sy, 0, cy;
  rz << cz, -sz, 0, sz, cz, 0, 0, 0, 1;
  return rz * ry * rx;
}

LabeledMesh rotate_mesh(const LabeledMesh& mesh, const Vec3& angles) {
  const auto r = rotation_xyz(angles);
  LabeledMesh out = mesh;
  for (auto& v : out.vertices) v = r * v;
  return out;
}

LabeledMesh apply_rotation(const LabeledMesh& mesh, double xi1, Rng& rng) {
  if (xi1 <= 0.0) return mesh;
  std::uniform_real_distribution<double> angle(0.0, xi1);
  const double ax = angle(rng);
  const double ay = angle(rng);
  const double az = angle(rng);
  return rotate_mesh(mesh, {ax, ay, az});
}

LabeledMesh apply_noise(const LabeledMesh& mesh, double xi2, Rng& rng, bool symmetric) {
  if (xi2 <= 0.0) return mesh;
  std::uniform_real_distribution<double> noise(symmetric ? -xi2 : 0.0, xi2);
  LabeledMesh out = mesh;
  for (auto& v : out.vertices) {
    const double dx = noise(rng);
    const double dy = noise(rng);
    const double dz = noise(rng);
    v += Vec3{dx, dy, dz};
  }
  return out;
}

LabeledMesh mirror_mesh(const LabeledMesh& mesh, const std::array<bool, 3>& planes) {
  // XY negates z, XZ negates y, YZ negates x.
  const Vec3 sign{planes[2] ? -1.0 : 1.0, planes[1] ? -1.0 : 1.0, planes[0] ? -1.0 : 1.0};
  LabeledMesh out = mesh;
  for (auto& v : out.vertices) v = v.cwiseProduct(sign);
  const int flips = int(planes[0]) + int(planes[1]) + int(planes[2]);
  if (flips % 2 == 1)
    for (auto& f : out.faces) std::swap(f[1], f[2]);
  return out;
}

LabeledMesh apply_mirror(const LabeledMesh& mesh, double xi3, Rng& rng) {
  if (xi3 <= 0.0) return mesh;
  std::bernoulli_distribution coin(xi3);
  std::array<bool, 3> planes{};
  for (auto& p : planes) p = coin(rng);
  if (!planes[0] && !planes[1] && !planes[2]) return mesh;
  return mirror_mesh(mesh, planes);
}

double bernstein(int i, int n, double t) {
  double binom = 1.0;
  for (int k = 1; k <= i; ++k) binom = binom * (n - i + k) / k;
  return binom * std::pow(t, i) * std::pow(1.0 - t, n - i);
}

FfdLattice::FfdLattice(const BoundingBox& box, std::array<int, 3> dims) : box_(box), dims_(dims) {
  for (int d : dims_)
    if (d < 2) throw ValidationError("FFD lattice needs at least 2 control points per axis");
  const Vec3 ext = box_.extent();
  if (!(ext.minCoeff() > 0.0))
    throw ValidationError("FFD lattice over a degenerate bounding box");
  displacements_.assign(static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2], Vec3::Zero());
}

void FfdLattice::fill_uniform(double amplitude, Rng& rng) {
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  for (auto& d : displacements_) {
    const double x = u(rng);
    const double y = u(rng);
    const double z = u(rng);
    d = {x, y, z};
  }
}

Vec3 FfdLattice::local(const Vec3& p) const {
  return (p - box_.min).cwiseQuotient(box_.extent());
}

Vec3 FfdLattice::offset(const Vec3& p) const {
  const Vec3 s = local(p);
  std::array<std::vector<double>, 3> w;
  for (int a = 0; a < 3; ++a) {
    const int n = dims_[a] - 1;
    w[a].resize(dims_[a]);
    for (int i = 0; i <= n; ++i) w[a][i] = bernstein(i, n, s[a]);
  }
  Vec3 acc = Vec3::Zero();
  for (int i = 0; i < dims_[0]; ++i)
    for (int j = 0; j < dims_[1]; ++j) {
      const double wij = w[0][i] * w[1][j];
      for (int k = 0; k < dims_[2]; ++k) acc += (wij * w[2][k]) * displacement(i, j, k);
    }
  return acc;
}

LabeledMesh deform_mesh(const LabeledMesh& mesh, const FfdLattice& lattice) {
  LabeledMesh out = mesh;
  for (auto& v : out.vertices) v = lattice.deform(v);
  return out;
}

LabeledMesh apply_ffd(const LabeledMesh& mesh, double xi4, Rng& rng) {
  if (xi4 <= 0.0) return mesh;
  FfdLattice lattice(bounding_box(mesh.vertices));
  lattice.fill_uniform(xi4, rng);
  return deform_mesh(mesh, lattice);
}

LabeledMesh scale_mesh(const LabeledMesh& mesh, double factor) {
  LabeledMesh out = mesh;
  for (auto& v : out.vertices) v *= factor;
  return out;
}

LabeledMesh apply_scale(const LabeledMesh& mesh, double xi5, Rng& rng) {
  if (xi5 <= 0.0) return mesh;
  std::uniform_real_distribution<double> u(-xi5, xi5);
  return scale_mesh(mesh, 1.0 - u(rng));
}

LabeledMesh augment(const LabeledMesh& mesh, const AugmentationParams& params, Rng& rng) {
  params.validate();
  const auto xi = params.scheduled();
  auto out = apply_rotation(mesh, xi[0], rng);
  out = apply_noise(out, xi[1], rng, params.symmetric_noise);
  out = apply_mirror(out, xi[2], rng);
  out = apply_ffd(out, xi[3], rng);
  return apply_scale(out, xi[4], rng);
}

}  // namespace aeroseg

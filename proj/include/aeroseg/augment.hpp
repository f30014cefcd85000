#pragma once

// Stochastic geometric augmentations with an epoch-scheduled intensity.
//
// Every augmentation is geometric only: vertex count, face list and face labels
// pass through untouched (mirroring may reverse face winding, never membership).
// Callers own the RNG stream; a fixed seed gives bit-identical output.

#include "aeroseg/geometry.hpp"

#include <array>
#include <numbers>
#include <random>

namespace aeroseg {

using Rng = std::mt19937_64;

struct AugmentationParams {
  double xi1_target = std::numbers::pi / 6.0;  // max rotation angle per axis (radians)
  double xi2_target = 0.001;                   // max vertex noise (normalized units)
  double xi3_target = 0.2;                     // mirror probability per plane
  double xi4_target = 0.4;                     // max FFD control-point displacement
  double xi5_target = 0.15;                    // max scale perturbation
  int epoch = 0;
  int tau = 1;
  bool symmetric_noise = false;  // U(-xi2, xi2) instead of U(0, xi2)

  /// Throws ValidationError when a target is negative, xi3 >= 1, tau < 1 or epoch outside [0, tau].
  void validate() const;
  std::array<double, 5> targets() const {
    return {xi1_target, xi2_target, xi3_target, xi4_target, xi5_target};
  }
  /// The five intensities at the current epoch.
  std::array<double, 5> scheduled() const;
};

/// target * (1 + cos(epoch*pi/tau - pi)) / 2. Throws ValidationError when tau <= 0.
double scheduled_value(double target, int epoch, int tau);

/// Rotation about X, then Y, then Z: v' = Rz(az) * Ry(ay) * Rx(ax) * v.
Eigen::Matrix3d rotation_xyz(const Vec3& angles);
LabeledMesh rotate_mesh(const LabeledMesh& mesh, const Vec3& angles);
LabeledMesh apply_rotation(const LabeledMesh& mesh, double xi1, Rng& rng);

LabeledMesh apply_noise(const LabeledMesh& mesh, double xi2, Rng& rng, bool symmetric = false);

/// Planes in order XY (negates z), XZ (negates y), YZ (negates x).
LabeledMesh mirror_mesh(const LabeledMesh& mesh, const std::array<bool, 3>& planes);
LabeledMesh apply_mirror(const LabeledMesh& mesh, double xi3, Rng& rng);

/// Bezier free-form deformation lattice spanning a bounding box.
class FfdLattice {
 public:
  static constexpr int kDefaultDim = 4;

  /// Throws ValidationError when the box is flat along any axis or a dim is < 2.
  FfdLattice(const BoundingBox& box, std::array<int, 3> dims = {kDefaultDim, kDefaultDim,
                                                                kDefaultDim});

  std::array<int, 3> dims() const { return dims_; }
  std::size_t control_count() const { return displacements_.size(); }
  Vec3& displacement(int i, int j, int k) { return displacements_[index(i, j, k)]; }
  const Vec3& displacement(int i, int j, int k) const { return displacements_[index(i, j, k)]; }
  void fill_uniform(double amplitude, Rng& rng);

  /// Lattice-local coordinates in [0,1]^3 for `p` (unclamped).
  Vec3 local(const Vec3& p) const;
  /// Displacement at `p`: sum of Bernstein-weighted control displacements.
  Vec3 offset(const Vec3& p) const;
  Vec3 deform(const Vec3& p) const { return p + offset(p); }

 private:
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * dims_[1] + j) * dims_[2] + k;
  }

  BoundingBox box_;
  std::array<int, 3> dims_;
  std::vector<Vec3> displacements_;
};

/// Bernstein polynomial B_{i,n}(t).
double bernstein(int i, int n, double t);

LabeledMesh deform_mesh(const LabeledMesh& mesh, const FfdLattice& lattice);
LabeledMesh apply_ffd(const LabeledMesh& mesh, double xi4, Rng& rng);

LabeledMesh scale_mesh(const LabeledMesh& mesh, double factor);
/// Samples SA ~ U(-xi5, xi5) and scales by (1 - SA).
LabeledMesh apply_scale(const LabeledMesh& mesh, double xi5, Rng& rng);

/// Rotation, noise, mirror, FFD, scale, at the intensities scheduled for `params.epoch`.
LabeledMesh augment(const LabeledMesh& mesh, const AugmentationParams& params, Rng& rng);

}  // namespace aeroseg

#pragma once

#include "aeroseg/autodiff.hpp"

#include <span>
#include <vector>

namespace aeroseg::nn {

inline constexpr double kLogClamp = 1e-12;
inline constexpr double kDefaultGamma = 0.1;

/// Mean categorical cross-entropy of row-stochastic `probs` against labels.
double cls_loss(const Matrix& probs, std::span<const PartLabel> labels);
/// Sum over transforms of ||I - A A^T||_F^2.
double treg_loss(const std::vector<Matrix>& transforms);
double total_loss(const Matrix& probs, std::span<const PartLabel> labels,
                  const std::vector<Matrix>& transforms, double gamma = kDefaultGamma);

struct LossTerms {
  Var total;
  Var classification;
  Var regularization;  // 1x1 zero constant when there are no transforms
};

/// Differentiable L = L_cls + gamma * L_treg on the tape.
LossTerms total_loss(Var probs, std::span<const PartLabel> labels,
                     const std::vector<Var>& transforms, double gamma = kDefaultGamma);

}  // namespace aeroseg::nn

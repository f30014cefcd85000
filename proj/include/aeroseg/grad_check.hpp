#pragma once

#include "aeroseg/autodiff.hpp"

#include <functional>
#include <string>
#include <vector>

namespace aeroseg::nn {

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  std::size_t entries_checked = 0;

  bool passed(double tolerance) const { return max_relative_error < tolerance; }
};

/// Builds a scalar loss on a fresh tape from the current parameter values.
using ScalarFunction = std::function<Var(Tape&)>;

/// Compares reverse-mode gradients of `loss` with central differences
/// (f(x+h) - f(x-h)) / 2h for every entry of every parameter.
///
/// Relative error per entry is |analytic - numeric| / max(|analytic|, |numeric|, floor);
/// the floor keeps near-zero gradients from dominating through round-off.
GradCheckReport grad_check(const ScalarFunction& loss, const std::vector<Parameter*>& params,
                           double step = 1e-5, double floor = 1e-6);

}  // namespace aeroseg::nn

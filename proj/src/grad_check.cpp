#include "aeroseg/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace aeroseg::nn {

GradCheckReport grad_check(const ScalarFunction& loss, const std::vector<Parameter*>& params,
                           double step, double floor) {
  for (auto* p : params) p->grad.setZero();
  {
    Tape tape;
    tape.backward(loss(tape));
  }
  std::vector<Matrix> analytic;
  analytic.reserve(params.size());
  for (auto* p : params) analytic.push_back(p->grad);

  auto evaluate = [&loss]() {
    Tape tape;
    return loss(tape).scalar();
  };

  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    for (Eigen::Index i = 0; i < p.value.size(); ++i) {
      double& x = p.value.data()[i];
      const double saved = x;
      x = saved + step;
      const double up = evaluate();
      x = saved - step;
      const double down = evaluate();
      x = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[k].data()[i];
      const double rel =
          std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
      ++report.entries_checked;
      if (rel > report.max_relative_error) {
        report.max_relative_error = rel;
        report.worst_parameter = p.name;
        report.worst_index = static_cast<std::size_t>(i);
      }
    }
  }
  return report;
}

}  // namespace aeroseg::nn

#include "aeroseg/loss.hpp"

namespace aeroseg::nn {

double cls_loss(const Matrix& probs, std::span<const PartLabel> labels) {
  Tape tape;
  return cross_entropy(tape.constant(probs), labels, kLogClamp).scalar();
}

double treg_loss(const std::vector<Matrix>& transforms) {
  double total = 0.0;
  for (const auto& a : transforms) {
    Tape tape;
    total += orthogonality_penalty(tape.constant(a)).scalar();
  }
  return total;
}

double total_loss(const Matrix& probs, std::span<const PartLabel> labels,
                  const std::vector<Matrix>& transforms, double gamma) {
  return cls_loss(probs, labels) + gamma * treg_loss(transforms);
}

LossTerms total_loss(Var probs, std::span<const PartLabel> labels,
                     const std::vector<Var>& transforms, double gamma) {
  Tape& tape = probs.tape();
  LossTerms terms;
  terms.classification = cross_entropy(probs, labels, kLogClamp);
  if (transforms.empty()) {
    terms.regularization = tape.constant(Matrix::Zero(1, 1));
  } else {
    terms.regularization = orthogonality_penalty(transforms.front());
    for (std::size_t i = 1; i < transforms.size(); ++i)
      terms.regularization = add(terms.regularization, orthogonality_penalty(transforms[i]));
  }
  terms.total = add(terms.classification, scale(terms.regularization, gamma));
  return terms;
}

}  // namespace aeroseg::nn

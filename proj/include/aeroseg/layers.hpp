#pragma once

// Network building blocks. Each layer owns its Parameters and appends pointers
// to them through `collect`, in a fixed order that checkpoints rely on.

#include "aeroseg/augment.hpp"
#include "aeroseg/autodiff.hpp"

#include <memory>
#include <string>
#include <vector>

namespace aeroseg::nn {

enum class Init { he, zero };

class Linear {
 public:
  Linear(int in, int out, const std::string& name, Rng& rng, Init init = Init::he);

  Var forward(Tape& tape, Var x);
  void collect(std::vector<Parameter*>& out);
  int in() const { return static_cast<int>(weight_.value.rows()); }
  int out() const { return static_cast<int>(weight_.value.cols()); }
  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }

 private:
  Parameter weight_;  // in x out
  Parameter bias_;    // 1 x out
};

class LayerNorm {
 public:
  LayerNorm(int width, const std::string& name);

  Var forward(Tape& tape, Var x);
  void collect(std::vector<Parameter*>& out);

 private:
  Parameter gain_;
  Parameter bias_;
};

/// Residual per-point block:
///   y = relu( norm(lin2( relu(norm(lin1(x))) )) + shortcut(x) )
/// with a linear projection shortcut when the widths differ.
class ResPBlock {
 public:
  ResPBlock(int in, int out, const std::string& name, Rng& rng);

  Var forward(Tape& tape, Var x);
  void collect(std::vector<Parameter*>& out);
  int out_width() const { return lin2_.out(); }

 private:
  Linear lin1_;
  LayerNorm norm1_;
  Linear lin2_;
  LayerNorm norm2_;
  std::unique_ptr<Linear> projection_;
};

/// Predicts a width x width feature transform from a point set:
/// two ResP blocks, a max-pool over points, then a linear head whose output is
/// reshaped and offset by the identity. The head starts at zero, so A = I initially.
class TNet {
 public:
  TNet(int width, int hidden, const std::string& name, Rng& rng);

  Var transform(Tape& tape, Var x);
  void collect(std::vector<Parameter*>& out);
  int width() const { return width_; }
  Linear& head() { return head_; }

 private:
  int width_;
  ResPBlock block1_;
  ResPBlock block2_;
  Linear head_;
};

/// Multi-head graph attention layer; output width heads * head_width.
class GatLayer {
 public:
  GatLayer(int in, int heads, int head_width, double dropout, const std::string& name, Rng& rng);

  /// `dropout_rng` non-null enables attention dropout (training mode).
  Var forward(Tape& tape, Var x, const Neighborhoods& nb, Rng* dropout_rng = nullptr);
  void collect(std::vector<Parameter*>& out);
  int heads() const { return heads_; }
  int out_width() const { return heads_ * head_width_; }

 private:
  int heads_;
  int head_width_;
  double dropout_;
  Parameter weight_;    // in x heads*head_width
  Parameter attn_src_;  // heads x head_width
  Parameter attn_dst_;  // heads x head_width
  Parameter bias_;      // 1 x heads*head_width
};

/// Value-level face aggregation of exactly three vertex rows: [min | mean | max].
Matrix aggregate_face(const Matrix& three_rows);

}  // namespace aeroseg::nn

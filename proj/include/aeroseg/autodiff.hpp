#pragma once

// Minimal reverse-mode differentiation over dense row-major matrices.
//
// A Tape records every operation of one forward pass in creation order, which is
// already a topological order, so backward() is a single reverse sweep. Leaves
// are either constants (no gradient) or Parameters, whose gradient buffer is
// Parameter::grad itself, so backward() adds into it. Nodes whose inputs carry no
// gradient are marked and their backward closures skip the work.

#include "aeroseg/geometry.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aeroseg::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Parameter {
  Parameter(std::string name, Matrix value)
      : name(std::move(name)), value(std::move(value)), grad(Matrix::Zero(this->value.rows(),
                                                                          this->value.cols())) {}

  std::string name;
  Matrix value;
  Matrix grad;
};

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid as long as the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  /// Shortcut for 1x1 nodes.
  double scalar() const { return value()(0, 0); }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  /// Refers to the parameter's storage; no copy is made.
  Var parameter(Parameter& p);
  /// Records an operation result. `inputs` decide whether a gradient is needed.
  Var record(Matrix value, std::initializer_list<Var> inputs, Backward backward);

  const Matrix& value(std::size_t id) const;
  /// Gradient buffer of a node, zero-initialized on first access. For a parameter
  /// leaf this is Parameter::grad, which is never cleared by the tape.
  Matrix& grad(std::size_t id);
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  /// Seeds d(output)/d(output) = 1 for a 1x1 node and sweeps backwards.
  void backward(Var output);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
    bool has_grad = false;
  };

  std::deque<Node> nodes_;
};

inline const Matrix& Var::value() const { return tape_->value(id_); }

// ---- operations -------------------------------------------------------------

Var matmul(Var a, Var b);
Var add(Var a, Var b);
/// Adds a 1 x cols row to every row of `a`.
Var add_row(Var a, Var row);
Var scale(Var a, double s);
Var relu(Var a);

/// Per-row normalization over the feature axis with learnable gain/bias rows.
Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);

Var softmax_rows(Var x);
/// Column-wise maximum over rows: N x d -> 1 x d.
Var max_pool_rows(Var x);
/// Reinterprets the row-major storage as rows x cols.
Var reshape(Var x, Eigen::Index rows, Eigen::Index cols);
Var add_identity(Var square);

/// Order-invariant face pooling: per face [min | mean | max] of its three vertex rows.
Var face_pool(Var vertex_features, std::span<const Face> faces);

/// Multi-head graph attention.
///
/// `projected` holds the per-head linear projections side by side (N x heads*width).
/// Scores are LeakyReLU(0.2) of src . h_i + dst . h_j over each node's
/// neighborhood (self included), softmax-normalized per node and head. `keep_scale`,
/// when present, multiplies each normalized coefficient (edge-major, head-minor), which
/// implements inverted dropout. Output heads are concatenated: N x heads*width.
Var graph_attention(Var projected, Var attn_src, Var attn_dst, const Neighborhoods& nb,
                    int heads, const std::vector<double>* keep_scale = nullptr);

/// -(1/N) sum_i log(max(p_i,label_i, eps)).
Var cross_entropy(Var probs, std::span<const PartLabel> labels, double eps = 1e-12);
/// ||I - A A^T||_F^2.
Var orthogonality_penalty(Var a);

/// Throws NonFiniteError if the value holds NaN or Inf.
void require_finite(Var v, int layer, const char* stage);

}  // namespace aeroseg::nn

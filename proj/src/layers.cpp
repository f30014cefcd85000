#include "aeroseg/layers.hpp"

#include "aeroseg/error.hpp"

#include <cmath>

namespace aeroseg::nn {

namespace {

Matrix he_normal(int rows, int cols, int fan_in, Rng& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

Matrix glorot_uniform(int rows, int cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / (rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

}  // namespace

Linear::Linear(int in, int out, const std::string& name, Rng& rng, Init init)
    : weight_(name + ".weight", init == Init::he ? he_normal(in, out, in, rng)
                                                 : Matrix(Matrix::Zero(in, out))),
      bias_(name + ".bias", Matrix::Zero(1, out)) {}

Var Linear::forward(Tape& tape, Var x) {
  return add_row(matmul(x, tape.parameter(weight_)), tape.parameter(bias_));
}

void Linear::collect(std::vector<Parameter*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

LayerNorm::LayerNorm(int width, const std::string& name)
    : gain_(name + ".gain", Matrix::Ones(1, width)), bias_(name + ".bias", Matrix::Zero(1, width)) {}

Var LayerNorm::forward(Tape& tape, Var x) {
  return layer_norm(x, tape.parameter(gain_), tape.parameter(bias_));
}

void LayerNorm::collect(std::vector<Parameter*>& out) {
  out.push_back(&gain_);
  out.push_back(&bias_);
}

ResPBlock::ResPBlock(int in, int out, const std::string& name, Rng& rng)
    : lin1_(in, out, name + ".lin1", rng),
      norm1_(out, name + ".norm1"),
      lin2_(out, out, name + ".lin2", rng),
      norm2_(out, name + ".norm2") {
  if (in != out) projection_ = std::make_unique<Linear>(in, out, name + ".proj", rng);
}

Var ResPBlock::forward(Tape& tape, Var x) {
  auto h = relu(norm1_.forward(tape, lin1_.forward(tape, x)));
  h = norm2_.forward(tape, lin2_.forward(tape, h));
  const Var shortcut = projection_ ? projection_->forward(tape, x) : x;
  return relu(add(h, shortcut));
}

void ResPBlock::collect(std::vector<Parameter*>& out) {
  lin1_.collect(out);
  norm1_.collect(out);
  lin2_.collect(out);
  norm2_.collect(out);
  if (projection_) projection_->collect(out);
}

TNet::TNet(int width, int hidden, const std::string& name, Rng& rng)
    : width_(width),
      block1_(width, hidden, name + ".block1", rng),
      block2_(hidden, hidden, name + ".block2", rng),
      head_(hidden, width * width, name + ".head", rng, Init::zero) {}

Var TNet::transform(Tape& tape, Var x) {
  auto h = block2_.forward(tape, block1_.forward(tape, x));
  auto pooled = max_pool_rows(h);
  return add_identity(reshape(head_.forward(tape, pooled), width_, width_));
}

void TNet::collect(std::vector<Parameter*>& out) {
  block1_.collect(out);
  block2_.collect(out);
  head_.collect(out);
}

GatLayer::GatLayer(int in, int heads, int head_width, double dropout, const std::string& name,
                   Rng& rng)
    : heads_(heads),
      head_width_(head_width),
      dropout_(dropout),
      weight_(name + ".weight", glorot_uniform(in, heads * head_width, rng)),
      attn_src_(name + ".attn_src", glorot_uniform(heads, head_width, rng)),
      attn_dst_(name + ".attn_dst", glorot_uniform(heads, head_width, rng)),
      bias_(name + ".bias", Matrix::Zero(1, heads * head_width)) {
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ValidationError("dropout must lie in [0, 1)");
}

Var GatLayer::forward(Tape& tape, Var x, const Neighborhoods& nb, Rng* dropout_rng) {
  auto projected = matmul(x, tape.parameter(weight_));
  std::vector<double> keep;
  if (dropout_rng && dropout_ > 0.0) {
    keep.resize(nb.indices.size() * static_cast<std::size_t>(heads_));
    std::bernoulli_distribution drop(dropout_);
    const double kept = 1.0 / (1.0 - dropout_);
    for (auto& k : keep) k = drop(*dropout_rng) ? 0.0 : kept;
  }
  auto attended = graph_attention(projected, tape.parameter(attn_src_), tape.parameter(attn_dst_),
                                  nb, heads_, keep.empty() ? nullptr : &keep);
  return add_row(attended, tape.parameter(bias_));
}

void GatLayer::collect(std::vector<Parameter*>& out) {
  out.push_back(&weight_);
  out.push_back(&attn_src_);
  out.push_back(&attn_dst_);
  out.push_back(&bias_);
}

Matrix aggregate_face(const Matrix& three_rows) {
  if (three_rows.rows() != 3) throw Error("aggregate_face needs exactly three rows");
  Tape tape;
  const Face face{0, 1, 2};
  return face_pool(tape.constant(three_rows), std::span<const Face>(&face, 1)).value();
}

}  // namespace aeroseg::nn

#include "aeroseg/autodiff.hpp"

#include "aeroseg/error.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace aeroseg::nn {

Var Tape::constant(Matrix value) {
  Node& n = nodes_.emplace_back();
  n.value = std::move(value);
  return {this, nodes_.size() - 1};
}

Var Tape::parameter(Parameter& p) {
  Node& n = nodes_.emplace_back();
  n.param = &p;
  n.requires_grad = true;
  return {this, nodes_.size() - 1};
}

Var Tape::record(Matrix value, std::initializer_list<Var> inputs, Backward backward) {
  Node& n = nodes_.emplace_back();
  n.value = std::move(value);
  n.requires_grad = std::any_of(inputs.begin(), inputs.end(),
                                [this](Var v) { return nodes_[v.id()].requires_grad; });
  if (n.requires_grad) n.backward = std::move(backward);
  return {this, nodes_.size() - 1};
}

const Matrix& Tape::value(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.param ? n.param->value : n.value;
}

Matrix& Tape::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (n.param) return n.param->grad;
  if (!n.has_grad) {
    const Matrix& v = value(id);
    n.grad = Matrix::Zero(v.rows(), v.cols());
    n.has_grad = true;
  }
  return n.grad;
}

void Tape::backward(Var output) {
  if (output.rows() != 1 || output.cols() != 1)
    throw Error("backward() needs a scalar (1x1) output");
  grad(output.id())(0, 0) += 1.0;
  for (std::size_t id = output.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.has_grad || !n.requires_grad || !n.backward) continue;
    n.backward(*this, id);
  }
}

Var matmul(Var a, Var b) {
  Matrix out;
  out.noalias() = a.value() * b.value();
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(ia)) t.grad(ia).noalias() += g * t.value(ib).transpose();
    if (t.requires_grad(ib)) t.grad(ib).noalias() += t.value(ia).transpose() * g;
  });
}

Var add(Var a, Var b) {
  Matrix out = a.value() + b.value();
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(ia)) t.grad(ia) += g;
    if (t.requires_grad(ib)) t.grad(ib) += g;
  });
}

Var add_row(Var a, Var row) {
  Matrix out = a.value().rowwise() + row.value().row(0);
  const auto ia = a.id(), ir = row.id();
  return a.tape().record(std::move(out), {a, row}, [ia, ir](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(ia)) t.grad(ia) += g;
    if (t.requires_grad(ir)) t.grad(ir) += g.colwise().sum();
  });
}

Var scale(Var a, double s) {
  Matrix out = a.value() * s;
  const auto ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia, s](Tape& t, std::size_t self) {
    t.grad(ia) += t.grad(self) * s;
  });
}

Var relu(Var a) {
  Matrix out = a.value().cwiseMax(0.0);
  const auto ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    const Matrix& x = t.value(ia);
    t.grad(ia).array() += (x.array() > 0.0).select(g.array(), 0.0);
  });
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  const Matrix& in = x.value();
  const auto n = in.rows(), d = in.cols();
  auto xhat = std::make_shared<Matrix>(n, d);
  auto inv_std = std::make_shared<Eigen::VectorXd>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mean = in.row(i).mean();
    const double var = (in.row(i).array() - mean).square().mean();
    (*inv_std)(i) = 1.0 / std::sqrt(var + eps);
    xhat->row(i) = (in.row(i).array() - mean) * (*inv_std)(i);
  }
  Matrix out = (xhat->array().rowwise() * gain.value().row(0).array()).matrix();
  out.rowwise() += bias.value().row(0);
  const auto ix = x.id(), ig = gain.id(), ib = bias.id();
  return x.tape().record(
      std::move(out), {x, gain, bias}, [ix, ig, ib, xhat, inv_std](Tape& t, std::size_t self) {
        const Matrix& g = t.grad(self);
        if (t.requires_grad(ig))
          t.grad(ig) += (g.array() * xhat->array()).colwise().sum().matrix();
        if (t.requires_grad(ib)) t.grad(ib) += g.colwise().sum();
        if (!t.requires_grad(ix)) return;
        const auto& gamma = t.value(ig).row(0).array();
        Matrix& gx = t.grad(ix);
        for (Eigen::Index i = 0; i < g.rows(); ++i) {
          const Eigen::ArrayXd dxhat = (g.row(i).array() * gamma).transpose();
          const Eigen::ArrayXd xh = xhat->row(i).array().transpose();
          const double m1 = dxhat.mean();
          const double m2 = (dxhat * xh).mean();
          gx.row(i).array() += ((dxhat - m1 - xh * m2) * (*inv_std)(i)).transpose();
        }
      });
}

Var softmax_rows(Var x) {
  const Matrix& in = x.value();
  Matrix out(in.rows(), in.cols());
  for (Eigen::Index i = 0; i < in.rows(); ++i) {
    const double m = in.row(i).maxCoeff();
    out.row(i) = (in.row(i).array() - m).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  const auto ix = x.id();
  auto y = std::make_shared<Matrix>(out);
  return x.tape().record(std::move(out), {x}, [ix, y](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    Matrix& gx = t.grad(ix);
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      const double dot = g.row(i).dot(y->row(i));
      gx.row(i).array() += y->row(i).array() * (g.row(i).array() - dot);
    }
  });
}

Var max_pool_rows(Var x) {
  const Matrix& in = x.value();
  Matrix out(1, in.cols());
  auto arg = std::make_shared<std::vector<Eigen::Index>>(in.cols());
  for (Eigen::Index c = 0; c < in.cols(); ++c) {
    Eigen::Index r = 0;
    out(0, c) = in.col(c).maxCoeff(&r);
    (*arg)[c] = r;
  }
  const auto ix = x.id();
  return x.tape().record(std::move(out), {x}, [ix, arg](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    Matrix& gx = t.grad(ix);
    for (Eigen::Index c = 0; c < g.cols(); ++c) gx((*arg)[c], c) += g(0, c);
  });
}

Var reshape(Var x, Eigen::Index rows, Eigen::Index cols) {
  const Matrix& in = x.value();
  if (rows * cols != in.size()) throw Error("reshape: element count mismatch");
  Matrix out = Eigen::Map<const Matrix>(in.data(), rows, cols);
  const auto ix = x.id();
  return x.tape().record(std::move(out), {x}, [ix](Tape& t, std::size_t self) {
    Matrix& gx = t.grad(ix);
    const Matrix& g = t.grad(self);
    Eigen::Map<Matrix>(gx.data(), g.rows(), g.cols()) += g;
  });
}

Var add_identity(Var square) {
  Matrix out = square.value();
  if (out.rows() != out.cols()) throw Error("add_identity: matrix is not square");
  out.diagonal().array() += 1.0;
  const auto ix = square.id();
  return square.tape().record(std::move(out), {square}, [ix](Tape& t, std::size_t self) {
    t.grad(ix) += t.grad(self);
  });
}

Var face_pool(Var vertex_features, std::span<const Face> faces) {
  const Matrix& in = vertex_features.value();
  const auto w = in.cols();
  const auto nf = static_cast<Eigen::Index>(faces.size());
  Matrix out(nf, 3 * w);
  // Per (face, column): which of the three corners supplied the min and the max.
  auto arg = std::make_shared<std::vector<std::uint8_t>>(static_cast<std::size_t>(nf * w) * 2);
  for (Eigen::Index f = 0; f < nf; ++f) {
    const auto& face = faces[static_cast<std::size_t>(f)];
    for (Eigen::Index c = 0; c < w; ++c) {
      const double v[3] = {in(face[0], c), in(face[1], c), in(face[2], c)};
      int lo = 0, hi = 0;
      for (int k = 1; k < 3; ++k) {
        if (v[k] < v[lo]) lo = k;
        if (v[k] > v[hi]) hi = k;
      }
      // Summing in sorted order keeps the mean bit-identical under corner permutation.
      const double mid = (lo == hi) ? v[lo] : v[3 - lo - hi];
      out(f, c) = v[lo];
      out(f, w + c) = (v[lo] + mid + v[hi]) / 3.0;
      out(f, 2 * w + c) = v[hi];
      (*arg)[static_cast<std::size_t>(f * w + c) * 2] = static_cast<std::uint8_t>(lo);
      (*arg)[static_cast<std::size_t>(f * w + c) * 2 + 1] = static_cast<std::uint8_t>(hi);
    }
  }
  const auto ix = vertex_features.id();
  auto face_copy = std::make_shared<std::vector<Face>>(faces.begin(), faces.end());
  return vertex_features.tape().record(
      std::move(out), {vertex_features}, [ix, arg, face_copy, w](Tape& t, std::size_t self) {
        const Matrix& g = t.grad(self);
        Matrix& gx = t.grad(ix);
        for (Eigen::Index f = 0; f < g.rows(); ++f) {
          const auto& face = (*face_copy)[static_cast<std::size_t>(f)];
          for (int k = 0; k < 3; ++k) gx.row(face[k]) += g.row(f).segment(w, w) / 3.0;
          for (Eigen::Index c = 0; c < w; ++c) {
            const auto base = static_cast<std::size_t>(f * w + c) * 2;
            gx(face[(*arg)[base]], c) += g(f, c);
            gx(face[(*arg)[base + 1]], c) += g(f, 2 * w + c);
          }
        }
      });
}

Var graph_attention(Var projected, Var attn_src, Var attn_dst, const Neighborhoods& nb, int heads,
                    const std::vector<double>* keep_scale) {
  constexpr double kSlope = 0.2;
  const Matrix& p = projected.value();
  const auto n = p.rows();
  const auto width = p.cols() / heads;
  if (width * heads != p.cols()) throw Error("graph_attention: width not divisible by heads");
  if (static_cast<std::size_t>(n) != nb.node_count())
    throw Error("graph_attention: feature rows do not match graph nodes");
  const auto edges = nb.indices.size();
  if (keep_scale && keep_scale->size() != edges * heads)
    throw Error("graph_attention: dropout mask has the wrong size");

  const Matrix& src = attn_src.value();
  const Matrix& dst = attn_dst.value();
  Matrix s(n, heads), d(n, heads);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int h = 0; h < heads; ++h) {
      s(i, h) = p.row(i).segment(h * width, width).dot(src.row(h));
      d(i, h) = p.row(i).segment(h * width, width).dot(dst.row(h));
    }

  auto pre = std::make_shared<std::vector<double>>(edges * heads);
  auto alpha = std::make_shared<std::vector<double>>(edges * heads);
  Matrix out = Matrix::Zero(n, p.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto lo = nb.offsets[i], hi = nb.offsets[i + 1];
    for (int h = 0; h < heads; ++h) {
      double peak = -std::numeric_limits<double>::infinity();
      for (auto e = lo; e < hi; ++e) {
        const double z = s(i, h) + d(nb.indices[e], h);
        (*pre)[e * heads + h] = z;
        const double act = z > 0.0 ? z : kSlope * z;
        (*alpha)[e * heads + h] = act;
        peak = std::max(peak, act);
      }
      double total = 0.0;
      for (auto e = lo; e < hi; ++e) {
        double& a = (*alpha)[e * heads + h];
        a = std::exp(a - peak);
        total += a;
      }
      auto row = out.row(i).segment(h * width, width);
      for (auto e = lo; e < hi; ++e) {
        double& a = (*alpha)[e * heads + h];
        a /= total;
        const double coef = keep_scale ? a * (*keep_scale)[e * heads + h] : a;
        row += coef * p.row(nb.indices[e]).segment(h * width, width);
      }
    }
  }

  auto keep = keep_scale ? std::make_shared<std::vector<double>>(*keep_scale) : nullptr;
  const auto ip = projected.id(), is = attn_src.id(), id = attn_dst.id();
  const Neighborhoods* graph = &nb;
  return projected.tape().record(
      std::move(out), {projected, attn_src, attn_dst},
      [=](Tape& t, std::size_t self) {
        const Matrix& g = t.grad(self);
        const Matrix& pv = t.value(ip);
        const Matrix& sv = t.value(is);
        const Matrix& dv = t.value(id);
        const bool want_p = t.requires_grad(ip);
        Matrix gp = Matrix::Zero(n, pv.cols());
        Matrix gs = Matrix::Zero(n, heads), gd = Matrix::Zero(n, heads);
        std::vector<double> galpha;
        for (Eigen::Index i = 0; i < n; ++i) {
          const auto lo = graph->offsets[i], hi = graph->offsets[i + 1];
          galpha.resize(hi - lo);
          for (int h = 0; h < heads; ++h) {
            const auto gi = g.row(i).segment(h * width, width);
            double weighted = 0.0;
            for (auto e = lo; e < hi; ++e) {
              const auto j = graph->indices[e];
              const double a = (*alpha)[e * heads + h];
              const double k = keep ? (*keep)[e * heads + h] : 1.0;
              gp.row(j).segment(h * width, width) += (a * k) * gi;
              const double ga = gi.dot(pv.row(j).segment(h * width, width)) * k;
              galpha[e - lo] = ga;
              weighted += a * ga;
            }
            for (auto e = lo; e < hi; ++e) {
              const double a = (*alpha)[e * heads + h];
              const double gz = a * (galpha[e - lo] - weighted) *
                                ((*pre)[e * heads + h] > 0.0 ? 1.0 : kSlope);
              gs(i, h) += gz;
              gd(graph->indices[e], h) += gz;
            }
          }
        }
        Matrix gsrc = Matrix::Zero(heads, width), gdst = Matrix::Zero(heads, width);
        for (Eigen::Index i = 0; i < n; ++i)
          for (int h = 0; h < heads; ++h) {
            const auto pi = pv.row(i).segment(h * width, width);
            gsrc.row(h) += gs(i, h) * pi;
            gdst.row(h) += gd(i, h) * pi;
            gp.row(i).segment(h * width, width) += gs(i, h) * sv.row(h) + gd(i, h) * dv.row(h);
          }
        if (want_p) t.grad(ip) += gp;
        if (t.requires_grad(is)) t.grad(is) += gsrc;
        if (t.requires_grad(id)) t.grad(id) += gdst;
      });
}

Var cross_entropy(Var probs, std::span<const PartLabel> labels, double eps) {
  const Matrix& p = probs.value();
  if (static_cast<std::size_t>(p.rows()) != labels.size())
    throw Error("cross_entropy: label count does not match rows");
  const auto n = p.rows();
  auto cls = std::make_shared<std::vector<Eigen::Index>>(labels.size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto c = static_cast<Eigen::Index>(index_of(labels[static_cast<std::size_t>(i)]));
    (*cls)[static_cast<std::size_t>(i)] = c;
    total += std::log(std::max(p(i, c), eps));
  }
  Matrix out(1, 1);
  out(0, 0) = -total / static_cast<double>(n);
  const auto ip = probs.id();
  return probs.tape().record(std::move(out), {probs}, [ip, cls, eps, n](Tape& t,
                                                                         std::size_t self) {
    const double g = t.grad(self)(0, 0);
    const Matrix& pv = t.value(ip);
    Matrix& gp = t.grad(ip);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto c = (*cls)[static_cast<std::size_t>(i)];
      if (pv(i, c) > eps) gp(i, c) -= g / (static_cast<double>(n) * pv(i, c));
    }
  });
}

Var orthogonality_penalty(Var a) {
  const Matrix& av = a.value();
  if (av.rows() != av.cols()) throw Error("orthogonality_penalty: matrix is not square");
  auto residual = std::make_shared<Matrix>(Matrix::Identity(av.rows(), av.cols()));
  residual->noalias() -= av * av.transpose();
  Matrix out(1, 1);
  out(0, 0) = residual->squaredNorm();
  const auto ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia, residual](Tape& t, std::size_t self) {
    const double g = t.grad(self)(0, 0);
    t.grad(ia).noalias() += (-4.0 * g) * (*residual) * t.value(ia);
  });
}

void require_finite(Var v, int layer, const char* stage) {
  if (!v.value().allFinite()) throw NonFiniteError(layer, stage);
}

}  // namespace aeroseg::nn

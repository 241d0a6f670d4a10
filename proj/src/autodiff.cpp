#include "xlqa/autodiff.hpp"

#include <cmath>

#include "xlqa/errors.hpp"

namespace xlqa::autodiff {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
}  // namespace

int Tape::check(Value v) const {
  if (!v.valid() || v.id >= static_cast<int>(nodes_.size())) {
    throw contract_error("autodiff: dangling value handle");
  }
  return v.id;
}

Value Tape::push(Matrix value, bool requires_grad,
                 std::function<void(Tape&, const Matrix&)> backward) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Value{static_cast<int>(nodes_.size()) - 1};
}

void Tape::accumulate(Value v, const Matrix& g) {
  Node& node = nodes_[check(v)];
  if (!node.requires_grad) return;
  node.grad += g;
}

Value Tape::leaf(Matrix value, bool requires_grad) {
  return push(std::move(value), requires_grad, nullptr);
}

Value Tape::add(Value a, Value b) {
  const Matrix& va = value(a);
  const Matrix& vb = value(b);
  if (va.rows() != vb.rows() || va.cols() != vb.cols()) {
    throw contract_error("add: shape mismatch");
  }
  const bool rg = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  return push(va + vb, rg, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Value Tape::sub(Value a, Value b) {
  const Matrix& va = value(a);
  const Matrix& vb = value(b);
  if (va.rows() != vb.rows() || va.cols() != vb.cols()) {
    throw contract_error("sub: shape mismatch");
  }
  const bool rg = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  return push(va - vb, rg, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, -g);
  });
}

Value Tape::add_rowvec(Value x, Value b) {
  const Matrix& vx = value(x);
  const Matrix& vb = value(b);
  if (vb.rows() != 1 || vb.cols() != vx.cols()) {
    throw contract_error("add_rowvec: bias must be 1 x cols(x)");
  }
  Matrix out = vx;
  out.rowwise() += vb.row(0);
  const bool rg = nodes_[x.id].requires_grad || nodes_[b.id].requires_grad;
  return push(std::move(out), rg, [x, b](Tape& t, const Matrix& g) {
    t.accumulate(x, g);
    t.accumulate(b, g.colwise().sum());
  });
}

Value Tape::matmul(Value a, Value b) {
  const Matrix& va = value(a);
  const Matrix& vb = value(b);
  if (va.cols() != vb.rows()) throw contract_error("matmul: inner dimensions differ");
  const bool rg = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  return push(va * vb, rg, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g * t.value(b).transpose());
    t.accumulate(b, t.value(a).transpose() * g);
  });
}

Value Tape::matmul_nt(Value a, Value b) {
  const Matrix& va = value(a);
  const Matrix& vb = value(b);
  if (va.cols() != vb.cols()) throw contract_error("matmul_nt: column counts differ");
  const bool rg = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  return push(va * vb.transpose(), rg, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g * t.value(b));
    t.accumulate(b, g.transpose() * t.value(a));
  });
}

Value Tape::transpose(Value x) {
  const bool rg = nodes_[x.id].requires_grad;
  return push(value(x).transpose(), rg,
              [x](Tape& t, const Matrix& g) { t.accumulate(x, g.transpose()); });
}

Value Tape::scale(Value x, double c) {
  const bool rg = nodes_[x.id].requires_grad;
  return push(value(x) * c, rg,
              [x, c](Tape& t, const Matrix& g) { t.accumulate(x, g * c); });
}

Value Tape::rows(Value x, std::vector<int> indices) {
  const Matrix& vx = value(x);
  Matrix out(static_cast<Eigen::Index>(indices.size()), vx.cols());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] < 0 || indices[k] >= vx.rows()) {
      throw contract_error("rows: index out of range");
    }
    out.row(static_cast<Eigen::Index>(k)) = vx.row(indices[k]);
  }
  const bool rg = nodes_[x.id].requires_grad;
  return push(std::move(out), rg, [x, idx = std::move(indices)](Tape& t, const Matrix& g) {
    const Matrix& vx = t.value(x);
    Matrix gx = Matrix::Zero(vx.rows(), vx.cols());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      gx.row(idx[k]) += g.row(static_cast<Eigen::Index>(k));
    }
    t.accumulate(x, gx);
  });
}

Value Tape::slice_cols(Value x, int start, int count) {
  const Matrix& vx = value(x);
  if (start < 0 || count < 0 || start + count > vx.cols()) {
    throw contract_error("slice_cols: range out of bounds");
  }
  const bool rg = nodes_[x.id].requires_grad;
  return push(vx.middleCols(start, count), rg, [x, start, count](Tape& t, const Matrix& g) {
    const Matrix& vx = t.value(x);
    Matrix gx = Matrix::Zero(vx.rows(), vx.cols());
    gx.middleCols(start, count) = g;
    t.accumulate(x, gx);
  });
}

Value Tape::concat_cols(const std::vector<Value>& parts) {
  if (parts.empty()) throw contract_error("concat_cols: empty part list");
  Eigen::Index rows = value(parts[0]).rows();
  Eigen::Index cols = 0;
  bool rg = false;
  for (const Value p : parts) {
    if (value(p).rows() != rows) throw contract_error("concat_cols: row counts differ");
    cols += value(p).cols();
    rg = rg || nodes_[p.id].requires_grad;
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (const Value p : parts) {
    out.middleCols(at, value(p).cols()) = value(p);
    at += value(p).cols();
  }
  return push(std::move(out), rg, [parts](Tape& t, const Matrix& g) {
    Eigen::Index at = 0;
    for (const Value p : parts) {
      const Eigen::Index w = t.value(p).cols();
      t.accumulate(p, g.middleCols(at, w));
      at += w;
    }
  });
}

Value Tape::softmax_rows(Value x) {
  const Matrix& vx = value(x);
  Matrix out(vx.rows(), vx.cols());
  for (Eigen::Index i = 0; i < vx.rows(); ++i) {
    const double m = vx.row(i).maxCoeff();
    Eigen::ArrayXd e = (vx.row(i).array() - m).exp();
    out.row(i) = (e / e.sum()).matrix();
  }
  const bool rg = nodes_[x.id].requires_grad;
  const Value y = push(std::move(out), rg, nullptr);
  nodes_[y.id].backward = [x, y](Tape& t, const Matrix& g) {
    const Matrix& vy = t.value(y);
    Matrix gx(vy.rows(), vy.cols());
    for (Eigen::Index i = 0; i < vy.rows(); ++i) {
      const double dot = g.row(i).dot(vy.row(i));
      gx.row(i) = (g.row(i).array() - dot).matrix().cwiseProduct(vy.row(i));
    }
    t.accumulate(x, gx);
  };
  return y;
}

Value Tape::layer_norm(Value x, Value gamma, Value beta, double eps) {
  const Matrix& vx = value(x);
  const Matrix& vg = value(gamma);
  const Matrix& vb = value(beta);
  if (vg.rows() != 1 || vb.rows() != 1 || vg.cols() != vx.cols() || vb.cols() != vx.cols()) {
    throw contract_error("layer_norm: gamma/beta must be 1 x cols(x)");
  }
  Matrix normalized(vx.rows(), vx.cols());
  Eigen::VectorXd inv_std(vx.rows());
  for (Eigen::Index i = 0; i < vx.rows(); ++i) {
    const double mu = vx.row(i).mean();
    const Eigen::ArrayXd centered = vx.row(i).array() - mu;
    const double var = centered.square().mean();
    const double inv = 1.0 / std::sqrt(var + eps);
    inv_std(i) = inv;
    normalized.row(i) = (centered * inv).matrix();
  }
  Matrix out = normalized;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    out.row(i) = out.row(i).cwiseProduct(vg.row(0)) + vb.row(0);
  }
  const bool rg = nodes_[x.id].requires_grad || nodes_[gamma.id].requires_grad ||
                  nodes_[beta.id].requires_grad;
  return push(std::move(out), rg,
              [x, gamma, beta, normalized = std::move(normalized),
               inv_std = std::move(inv_std)](Tape& t, const Matrix& g) {
                const Matrix& vg = t.value(gamma);
                const Eigen::Index n = normalized.cols();
                Matrix gx(normalized.rows(), n);
                for (Eigen::Index i = 0; i < normalized.rows(); ++i) {
                  const Eigen::RowVectorXd gh = g.row(i).cwiseProduct(vg.row(0));
                  const double mean_gh = gh.mean();
                  const double mean_ghx = gh.cwiseProduct(normalized.row(i)).mean();
                  gx.row(i) = inv_std(i) * (gh.array() - mean_gh -
                                            normalized.row(i).array() * mean_ghx)
                                  .matrix();
                }
                t.accumulate(x, gx);
                Matrix ggamma = Matrix::Zero(1, n);
                Matrix gbeta = Matrix::Zero(1, n);
                for (Eigen::Index i = 0; i < normalized.rows(); ++i) {
                  ggamma.row(0) += g.row(i).cwiseProduct(normalized.row(i));
                  gbeta.row(0) += g.row(i);
                }
                t.accumulate(gamma, ggamma);
                t.accumulate(beta, gbeta);
              });
}

Value Tape::gelu(Value x) {
  const Matrix& vx = value(x);
  Matrix out = vx.unaryExpr(
      [](double v) { return v * 0.5 * (1.0 + std::erf(v * kInvSqrt2)); });
  const bool rg = nodes_[x.id].requires_grad;
  return push(std::move(out), rg, [x](Tape& t, const Matrix& g) {
    const Matrix& vx = t.value(x);
    const Matrix d = vx.unaryExpr([](double v) {
      const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
      const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
      return cdf + v * pdf;
    });
    t.accumulate(x, g.cwiseProduct(d));
  });
}

Value Tape::mean_rows_ranges(Value x, std::vector<std::pair<int, int>> ranges) {
  const Matrix& vx = value(x);
  int expect = 0;
  for (const auto& [start, end] : ranges) {
    if (start != expect || end <= start || end > vx.rows()) {
      throw input_error("mean_rows_ranges: ranges must partition a prefix of the rows");
    }
    expect = end;
  }
  Matrix out(static_cast<Eigen::Index>(ranges.size()), vx.cols());
  for (std::size_t k = 0; k < ranges.size(); ++k) {
    const auto [start, end] = ranges[k];
    out.row(static_cast<Eigen::Index>(k)) =
        vx.middleRows(start, end - start).colwise().mean();
  }
  const bool rg = nodes_[x.id].requires_grad;
  return push(std::move(out), rg, [x, ranges = std::move(ranges)](Tape& t, const Matrix& g) {
    const Matrix& vx = t.value(x);
    Matrix gx = Matrix::Zero(vx.rows(), vx.cols());
    for (std::size_t k = 0; k < ranges.size(); ++k) {
      const auto [start, end] = ranges[k];
      const double w = 1.0 / static_cast<double>(end - start);
      for (int r = start; r < end; ++r) {
        gx.row(r) += g.row(static_cast<Eigen::Index>(k)) * w;
      }
    }
    t.accumulate(x, gx);
  });
}

Value Tape::sum_squares(Value x) {
  const Matrix& vx = value(x);
  Matrix out(1, 1);
  out(0, 0) = vx.squaredNorm();
  const bool rg = nodes_[x.id].requires_grad;
  return push(std::move(out), rg, [x](Tape& t, const Matrix& g) {
    t.accumulate(x, 2.0 * g(0, 0) * t.value(x));
  });
}

Value Tape::add_scalars(const std::vector<Value>& scalars) {
  Matrix out = Matrix::Zero(1, 1);
  bool rg = false;
  for (const Value s : scalars) {
    const Matrix& vs = value(s);
    if (vs.rows() != 1 || vs.cols() != 1) throw contract_error("add_scalars: non-scalar term");
    out(0, 0) += vs(0, 0);
    rg = rg || nodes_[s.id].requires_grad;
  }
  return push(std::move(out), rg, [scalars](Tape& t, const Matrix& g) {
    for (const Value s : scalars) t.accumulate(s, g);
  });
}

Value Tape::cross_entropy(Value logits, int target) {
  const Matrix& vx = value(logits);
  if (vx.rows() != 1) throw contract_error("cross_entropy: logits must be a single row");
  if (target < 0 || target >= vx.cols()) throw contract_error("cross_entropy: target out of range");
  const double m = vx.row(0).maxCoeff();
  const Eigen::ArrayXd shifted = vx.row(0).array() - m;
  const double lse = m + std::log(shifted.exp().sum());
  Matrix out(1, 1);
  out(0, 0) = lse - vx(0, target);
  const bool rg = nodes_[logits.id].requires_grad;
  return push(std::move(out), rg, [logits, target](Tape& t, const Matrix& g) {
    const Matrix& vx = t.value(logits);
    const double m = vx.row(0).maxCoeff();
    Eigen::ArrayXd e = (vx.row(0).array() - m).exp();
    Matrix gx = (e / e.sum()).matrix().transpose();
    gx(0, target) -= 1.0;
    t.accumulate(logits, g(0, 0) * gx);
  });
}

void Tape::backward(Value root) {
  const int r = check(root);
  const Matrix& rv = nodes_[r].value;
  if (rv.rows() != 1 || rv.cols() != 1) {
    throw contract_error("backward: root of the recorded computation is not a scalar");
  }
  for (int i = 0; i <= r; ++i) {
    Node& node = nodes_[i];
    if (node.requires_grad) {
      node.grad = Matrix::Zero(node.value.rows(), node.value.cols());
    }
  }
  if (!nodes_[r].requires_grad) return;  // nothing below depends on a parameter
  nodes_[r].grad(0, 0) = 1.0;
  for (int i = r; i >= 0; --i) {
    Node& node = nodes_[i];
    if (!node.requires_grad || !node.backward) continue;
    node.backward(*this, node.grad);
  }
}

}  // namespace xlqa::autodiff

#ifndef XLQA_AUTODIFF_HPP
#define XLQA_AUTODIFF_HPP

#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace xlqa::autodiff {

using Matrix = Eigen::MatrixXd;

// Handle into a Tape.
struct Value {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Records a forward computation over double matrices and plays the exact
// reverse-mode derivatives back on demand. One tape per recorded scalar;
// nodes are append-only so reverse creation order is a topological order.
class Tape {
 public:
  Value leaf(Matrix value, bool requires_grad = false);
  Value constant(Matrix value) { return leaf(std::move(value), false); }

  const Matrix& value(Value v) const { return nodes_[check(v)].value; }
  const Matrix& grad(Value v) const { return nodes_[check(v)].grad; }

  Value add(Value a, Value b);
  Value sub(Value a, Value b);
  // x (n x c) plus a broadcast 1 x c row vector.
  Value add_rowvec(Value x, Value b);
  Value matmul(Value a, Value b);
  // a * b^T without materializing the transpose.
  Value matmul_nt(Value a, Value b);
  Value transpose(Value x);
  Value scale(Value x, double c);
  Value rows(Value x, std::vector<int> indices);
  Value slice_cols(Value x, int start, int count);
  Value concat_cols(const std::vector<Value>& parts);
  Value softmax_rows(Value x);
  Value layer_norm(Value x, Value gamma, Value beta, double eps = 1e-5);
  Value gelu(Value x);
  // Per-range arithmetic mean of rows; ranges are [start, end) row indices.
  Value mean_rows_ranges(Value x, std::vector<std::pair<int, int>> ranges);
  // Frobenius inner product of x with itself -> 1x1.
  Value sum_squares(Value x);
  Value add_scalars(const std::vector<Value>& scalars);  // all 1x1
  // -log softmax(logits)(0, target) for a 1 x k logits row -> 1x1.
  Value cross_entropy(Value logits, int target);

  // Seeds d(root)/d(root) = 1 and accumulates grads into every node with
  // requires_grad set anywhere below it. root must be 1x1.
  void backward(Value root);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    std::function<void(Tape&, const Matrix&)> backward;  // adds into parent grads
  };

  int check(Value v) const;
  Value push(Matrix value, bool requires_grad,
             std::function<void(Tape&, const Matrix&)> backward);
  void accumulate(Value v, const Matrix& g);

  std::vector<Node> nodes_;
};

}  // namespace xlqa::autodiff

#endif  // XLQA_AUTODIFF_HPP

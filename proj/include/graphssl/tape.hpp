#pragma once

#include <deque>
#include <functional>
#include <utility>
#include <vector>

#include "graphssl/tensor.hpp"

namespace graphssl {

class Tape;

// Handle to a node on a tape. Cheap to copy; valid for the tape's lifetime.
struct Var {
  int id = -1;
};

// Reverse-mode autodiff over a linear tape of primitive applications.
// Values are computed eagerly at op construction; node order is therefore a
// topological order and a single reverse sweep implements backward().
//
// Shape rules: all kernels operate on rank<=2 tensors. add/subtract/multiply
// accept equal shapes, or a 1xd second operand broadcast across rows; no
// other broadcasting exists.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Records an input tensor. Parameters pass requires_grad=true.
  Var leaf(Tensor value, bool requires_grad = false);

  const Tensor& value(Var v) const;

  // Gradient accumulated by the last backward(); zeros for untouched nodes.
  Tensor grad(Var v) const;

  bool requires_grad(Var v) const;

  std::size_t size() const { return nodes_.size(); }

  // Seeds d(loss)/d(loss) = 1 and sweeps the tape in reverse. The loss must
  // be a 1x1 tensor recorded on this tape.
  void backward(Var loss);

  // --- primitive kernels -------------------------------------------------
  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var subtract(Var a, Var b);
  Var multiply(Var a, Var b);
  Var scalar_mul(Var a, double c);
  Var add_scalar(Var a, double c);
  Var relu(Var a);
  Var sqrt(Var a);                 // domain: strictly positive values
  Var pow(Var a, double exponent); // negative base requires integer exponent
  Var exp(Var a);
  Var log(Var a);                  // domain: strictly positive values
  Var transpose(Var a);
  Var row_slice(Var a, std::size_t begin, std::size_t end);
  Var concat_rows(Var a, Var b);
  Var sum(Var a);        // 1x1
  Var mean(Var a);       // 1x1
  Var mean_axis0(Var a); // 1xd
  Var var_axis0(Var a);  // 1xd, unbiased (n-1); requires n >= 2
  Var l2_row_normalize(Var a);     // rows must be nonzero
  Var log_softmax_rows(Var a);
  // Squared p-norm per row: (sum_j |x_ij|^p)^(2/p), one column. Subgradient
  // at zero coordinates is 0.
  Var pnorm_sq_rows(Var a, double p);

  // Mean of data rows per segment id; ids in [0, num_segments), every
  // segment nonempty.
  Var segment_mean(Var data, const std::vector<int>& segment_ids, int num_segments);

  // out[v] = sum over directed edges (u -> v) of features[u].
  Var aggregate_neighbors(Var features, const std::vector<std::pair<int, int>>& directed_edges);

 private:
  struct Node {
    Tensor value;
    Tensor grad;  // allocated on first accumulation
    bool requires_grad = false;
    // Reads this node's grad and scatters into parents. Null for leaves.
    std::function<void(Tape&, const Node&)> backprop;
  };

  Var record(Tensor value, std::initializer_list<Var> parents,
             std::function<void(Tape&, const Node&)> backprop);
  void accumulate(int id, const Tensor& g);
  const Node& node(Var v) const;

  // Deque keeps references to earlier nodes valid while ops append.
  std::deque<Node> nodes_;
};

// Max over coordinates of |analytic - central difference| / max(1, |a|, |b|)
// for a scalar function built by `f` from a single input var.
double finite_difference_check(const std::function<Var(Tape&, Var)>& f, const Tensor& point,
                               double step);

}  // namespace graphssl

#include "graphssl/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace graphssl {

namespace {

void check_same_or_row(const Tensor& a, const Tensor& b, const char* op) {
  if (a.same_shape(b)) return;
  if (b.rows() == 1 && b.cols() == a.cols()) return;
  throw std::invalid_argument(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) +
                              "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                              "x" + std::to_string(b.cols()) + ")");
}

// Reduce a full-shape gradient onto a possibly row-broadcast operand.
Tensor reduce_to_shape(const Tensor& g, std::size_t rows, std::size_t cols) {
  if (g.rows() == rows && g.cols() == cols) return g;
  Tensor out(rows, cols);
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < cols; ++j) out(0, j) += g(i, j);
  return out;
}

}  // namespace

Var Tape::leaf(Tensor value, bool requires_grad) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Tape::Node& Tape::node(Var v) const {
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
    throw std::invalid_argument("Tape: var not on this tape");
  return nodes_[static_cast<std::size_t>(v.id)];
}

const Tensor& Tape::value(Var v) const { return node(v).value; }

Tensor Tape::grad(Var v) const {
  const Node& n = node(v);
  if (n.grad.empty()) return Tensor(n.value.rows(), n.value.cols());
  return n.grad;
}

bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }

Var Tape::record(Tensor value, std::initializer_list<Var> parents,
                 std::function<void(Tape&, const Node&)> backprop) {
  bool rg = false;
  for (Var p : parents) rg = rg || node(p).requires_grad;
  Node n;
  n.value = std::move(value);
  n.requires_grad = rg;
  if (rg) n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

void Tape::accumulate(int id, const Tensor& g) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.requires_grad) return;
  if (n.grad.empty()) n.grad = Tensor(n.value.rows(), n.value.cols());
  if (!n.grad.same_shape(g)) throw std::logic_error("Tape: gradient shape mismatch");
  for (std::size_t k = 0; k < g.size(); ++k) n.grad[k] += g[k];
}

void Tape::backward(Var loss) {
  const Node& ln = node(loss);
  if (ln.value.size() != 1) throw std::invalid_argument("backward: loss must be a scalar");
  for (Node& n : nodes_) n.grad = Tensor();
  accumulate(loss.id, Tensor::scalar(1.0));
  for (int id = loss.id; id >= 0; --id) {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.grad.empty() && n.backprop) n.backprop(*this, n);
  }
}

// --- kernels ---------------------------------------------------------------

Var Tape::matmul(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.cols() != B.rows())
    throw std::invalid_argument("matmul: inner dimensions differ (" + std::to_string(A.cols()) +
                                " vs " + std::to_string(B.rows()) + ")");
  const std::size_t n = A.rows(), k = A.cols(), m = B.cols();
  Tensor C(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = A.data() + i * k;
    double* crow = C.data() + i * m;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double aik = arow[kk];
      if (aik == 0.0) continue;
      const double* brow = B.data() + kk * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += aik * brow[j];
    }
  }
  int ai = a.id, bi = b.id;
  return record(std::move(C), {a, b}, [ai, bi](Tape& t, const Node& out) {
    const Tensor& G = out.grad;
    const Tensor& A = t.nodes_[ai].value;
    const Tensor& B = t.nodes_[bi].value;
    const std::size_t n = A.rows(), k = A.cols(), m = B.cols();
    if (t.nodes_[ai].requires_grad) {
      Tensor dA(n, k);  // G * B^T
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
          const double g = G(i, j);
          if (g == 0.0) continue;
          for (std::size_t kk = 0; kk < k; ++kk) dA(i, kk) += g * B(kk, j);
        }
      t.accumulate(ai, dA);
    }
    if (t.nodes_[bi].requires_grad) {
      Tensor dB(k, m);  // A^T * G
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t kk = 0; kk < k; ++kk) {
          const double av = A(i, kk);
          if (av == 0.0) continue;
          for (std::size_t j = 0; j < m; ++j) dB(kk, j) += av * G(i, j);
        }
      t.accumulate(bi, dB);
    }
  });
}

Var Tape::add(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  check_same_or_row(A, B, "add");
  const bool bcast = !A.same_shape(B);
  Tensor C = A;
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) C(i, j) += B(bcast ? 0 : i, j);
  int ai = a.id, bi = b.id;
  return record(std::move(C), {a, b}, [ai, bi](Tape& t, const Node& out) {
    t.accumulate(ai, out.grad);
    const Tensor& B = t.nodes_[bi].value;
    t.accumulate(bi, reduce_to_shape(out.grad, B.rows(), B.cols()));
  });
}

Var Tape::subtract(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  check_same_or_row(A, B, "subtract");
  const bool bcast = !A.same_shape(B);
  Tensor C = A;
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) C(i, j) -= B(bcast ? 0 : i, j);
  int ai = a.id, bi = b.id;
  return record(std::move(C), {a, b}, [ai, bi](Tape& t, const Node& out) {
    t.accumulate(ai, out.grad);
    const Tensor& B = t.nodes_[bi].value;
    Tensor g = reduce_to_shape(out.grad, B.rows(), B.cols());
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = -g[k];
    t.accumulate(bi, g);
  });
}

Var Tape::multiply(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  check_same_or_row(A, B, "multiply");
  const bool bcast = !A.same_shape(B);
  Tensor C = A;
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) C(i, j) *= B(bcast ? 0 : i, j);
  int ai = a.id, bi = b.id;
  return record(std::move(C), {a, b}, [ai, bi, bcast](Tape& t, const Node& out) {
    const Tensor& A = t.nodes_[ai].value;
    const Tensor& B = t.nodes_[bi].value;
    const Tensor& G = out.grad;
    if (t.nodes_[ai].requires_grad) {
      Tensor dA(A.rows(), A.cols());
      for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < A.cols(); ++j) dA(i, j) = G(i, j) * B(bcast ? 0 : i, j);
      t.accumulate(ai, dA);
    }
    if (t.nodes_[bi].requires_grad) {
      Tensor full(A.rows(), A.cols());
      for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < A.cols(); ++j) full(i, j) = G(i, j) * A(i, j);
      t.accumulate(bi, reduce_to_shape(full, B.rows(), B.cols()));
    }
  });
}

Var Tape::scalar_mul(Var a, double c) {
  Tensor C = value(a);
  for (std::size_t k = 0; k < C.size(); ++k) C[k] *= c;
  int ai = a.id;
  return record(std::move(C), {a}, [ai, c](Tape& t, const Node& out) {
    Tensor g = out.grad;
    for (std::size_t k = 0; k < g.size(); ++k) g[k] *= c;
    t.accumulate(ai, g);
  });
}

Var Tape::add_scalar(Var a, double c) {
  Tensor C = value(a);
  for (std::size_t k = 0; k < C.size(); ++k) C[k] += c;
  int ai = a.id;
  return record(std::move(C), {a},
                [ai](Tape& t, const Node& out) { t.accumulate(ai, out.grad); });
}

Var Tape::relu(Var a) {
  Tensor C = value(a);
  for (std::size_t k = 0; k < C.size(); ++k) C[k] = C[k] > 0.0 ? C[k] : 0.0;
  int ai = a.id;
  return record(std::move(C), {a}, [ai](Tape& t, const Node& out) {
    const Tensor& A = t.nodes_[ai].value;
    Tensor g = out.grad;
    for (std::size_t k = 0; k < g.size(); ++k)
      if (A[k] <= 0.0) g[k] = 0.0;
    t.accumulate(ai, g);
  });
}

Var Tape::sqrt(Var a) {
  Tensor C = value(a);
  for (std::size_t k = 0; k < C.size(); ++k) {
    if (C[k] <= 0.0) throw std::domain_error("sqrt: input must be strictly positive");
    C[k] = std::sqrt(C[k]);
  }
  int ai = a.id;
  return record(std::move(C), {a}, [ai](Tape& t, const Node& out) {
    Tensor g = out.grad;
    for (std::size_t k = 0; k < g.size(); ++k) g[k] *= 0.5 / out.value[k];
    t.accumulate(ai, g);
  });
}

Var Tape::pow(Var a, double e) {
  const Tensor& A = value(a);
  const bool integral = e == std::floor(e);
  Tensor C = A;
  for (std::size_t k = 0; k < C.size(); ++k) {
    if (C[k] < 0.0 && !integral)
      throw std::domain_error("pow: negative base with non-integer exponent");
    C[k] = std::pow(C[k], e);
  }
  int ai = a.id;
  return record(std::move(C), {a}, [ai, e](Tape& t, const Node& out) {
    const Tensor& A = t.nodes_[ai].value;
    Tensor g = out.grad;
    for (std::size_t k = 0; k < g.size(); ++k) {
      double x = A[k];
      double d;
      if (x == 0.0) {
        d = (e == 1.0) ? 1.0 : 0.0;  // subgradient 0 where x^(e-1) blows up
      } else {
        d = e * std::pow(x, e - 1.0);
      }
      g[k] *= d;
    }
    t.accumulate(ai, g);
  });
}

Var Tape::exp(Var a) {
  Tensor C = value(a);
  for (std::size_t k = 0; k < C.size(); ++k) C[k] = std::exp(C[k]);
  int ai = a.id;
  return record(std::move(C), {a}, [ai](Tape& t, const Node& out) {
    Tensor g = out.grad;
    for (std::size_t k = 0; k < g.size(); ++k) g[k] *= out.value[k];
    t.accumulate(ai, g);
  });
}

Var Tape::log(Var a) {
  const Tensor& A = value(a);
  Tensor C = A;
  for (std::size_t k = 0; k < C.size(); ++k) {
    if (C[k] <= 0.0) throw std::domain_error("log: input must be strictly positive");
    C[k] = std::log(C[k]);
  }
  int ai = a.id;
  return record(std::move(C), {a}, [ai](Tape& t, const Node& out) {
    const Tensor& A = t.nodes_[ai].value;
    Tensor g = out.grad;
    for (std::size_t k = 0; k < g.size(); ++k) g[k] /= A[k];
    t.accumulate(ai, g);
  });
}

Var Tape::transpose(Var a) {
  const Tensor& A = value(a);
  Tensor C(A.cols(), A.rows());
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) C(j, i) = A(i, j);
  int ai = a.id;
  return record(std::move(C), {a}, [ai](Tape& t, const Node& out) {
    const Tensor& G = out.grad;
    Tensor g(G.cols(), G.rows());
    for (std::size_t i = 0; i < G.rows(); ++i)
      for (std::size_t j = 0; j < G.cols(); ++j) g(j, i) = G(i, j);
    t.accumulate(ai, g);
  });
}

Var Tape::row_slice(Var a, std::size_t begin, std::size_t end) {
  const Tensor& A = value(a);
  if (begin >= end || end > A.rows()) throw std::invalid_argument("row_slice: bad range");
  Tensor C(end - begin, A.cols());
  for (std::size_t i = begin; i < end; ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) C(i - begin, j) = A(i, j);
  int ai = a.id;
  return record(std::move(C), {a}, [ai, begin](Tape& t, const Node& out) {
    const Tensor& A = t.nodes_[ai].value;
    Tensor g(A.rows(), A.cols());
    for (std::size_t i = 0; i < out.grad.rows(); ++i)
      for (std::size_t j = 0; j < out.grad.cols(); ++j) g(begin + i, j) = out.grad(i, j);
    t.accumulate(ai, g);
  });
}

Var Tape::concat_rows(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.cols() != B.cols()) throw std::invalid_argument("concat_rows: column counts differ");
  Tensor C(A.rows() + B.rows(), A.cols());
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) C(i, j) = A(i, j);
  for (std::size_t i = 0; i < B.rows(); ++i)
    for (std::size_t j = 0; j < B.cols(); ++j) C(A.rows() + i, j) = B(i, j);
  int ai = a.id, bi = b.id;
  std::size_t arows = A.rows();
  return record(std::move(C), {a, b}, [ai, bi, arows](Tape& t, const Node& out) {
    const Tensor& G = out.grad;
    const Tensor& A = t.nodes_[ai].value;
    const Tensor& B = t.nodes_[bi].value;
    Tensor ga(A.rows(), A.cols()), gb(B.rows(), B.cols());
    for (std::size_t i = 0; i < A.rows(); ++i)
      for (std::size_t j = 0; j < G.cols(); ++j) ga(i, j) = G(i, j);
    for (std::size_t i = 0; i < B.rows(); ++i)
      for (std::size_t j = 0; j < G.cols(); ++j) gb(i, j) = G(arows + i, j);
    t.accumulate(ai, ga);
    t.accumulate(bi, gb);
  });
}

Var Tape::sum(Var a) {
  const Tensor& A = value(a);
  double s = 0.0;
  for (std::size_t k = 0; k < A.size(); ++k) s += A[k];
  int ai = a.id;
  return record(Tensor::scalar(s), {a}, [ai](Tape& t, const Node& out) {
    const Tensor& A = t.nodes_[ai].value;
    Tensor g(A.rows(), A.cols(), out.grad.item());
    t.accumulate(ai, g);
  });
}

Var Tape::mean(Var a) {
  const Tensor& A = value(a);
  if (A.size() == 0) throw std::invalid_argument("mean: empty tensor");
  double s = 0.0;
  for (std::size_t k = 0; k < A.size(); ++k) s += A[k];
  const double inv = 1.0 / static_cast<double>(A.size());
  int ai = a.id;
  return record(Tensor::scalar(s * inv), {a}, [ai, inv](Tape& t, const Node& out) {
    const Tensor& A = t.nodes_[ai].value;
    Tensor g(A.rows(), A.cols(), out.grad.item() * inv);
    t.accumulate(ai, g);
  });
}

Var Tape::mean_axis0(Var a) {
  const Tensor& A = value(a);
  if (A.rows() == 0) throw std::invalid_argument("mean_axis0: empty tensor");
  Tensor C(1, A.cols());
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) C(0, j) += A(i, j);
  const double inv = 1.0 / static_cast<double>(A.rows());
  for (std::size_t j = 0; j < A.cols(); ++j) C(0, j) *= inv;
  int ai = a.id;
  return record(std::move(C), {a}, [ai, inv](Tape& t, const Node& out) {
    const Tensor& A = t.nodes_[ai].value;
    Tensor g(A.rows(), A.cols());
    for (std::size_t i = 0; i < A.rows(); ++i)
      for (std::size_t j = 0; j < A.cols(); ++j) g(i, j) = out.grad(0, j) * inv;
    t.accumulate(ai, g);
  });
}

Var Tape::var_axis0(Var a) {
  const Tensor& A = value(a);
  const std::size_t n = A.rows();
  if (n < 2) throw std::invalid_argument("var_axis0: needs at least 2 rows");
  Tensor m(1, A.cols());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) m(0, j) += A(i, j);
  for (std::size_t j = 0; j < A.cols(); ++j) m(0, j) /= static_cast<double>(n);
  Tensor C(1, A.cols());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) {
      const double d = A(i, j) - m(0, j);
      C(0, j) += d * d;
    }
  const double inv = 1.0 / static_cast<double>(n - 1);
  for (std::size_t j = 0; j < A.cols(); ++j) C(0, j) *= inv;
  int ai = a.id;
  return record(std::move(C), {a}, [ai, m, inv](Tape& t, const Node& out) {
    const Tensor& A = t.nodes_[ai].value;
    Tensor g(A.rows(), A.cols());
    for (std::size_t i = 0; i < A.rows(); ++i)
      for (std::size_t j = 0; j < A.cols(); ++j)
        g(i, j) = out.grad(0, j) * 2.0 * (A(i, j) - m(0, j)) * inv;
    t.accumulate(ai, g);
  });
}

Var Tape::l2_row_normalize(Var a) {
  const Tensor& A = value(a);
  std::vector<double> norms(A.rows());
  Tensor C(A.rows(), A.cols());
  for (std::size_t i = 0; i < A.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < A.cols(); ++j) s += A(i, j) * A(i, j);
    if (s == 0.0) throw std::domain_error("l2_row_normalize: zero row");
    norms[i] = std::sqrt(s);
    for (std::size_t j = 0; j < A.cols(); ++j) C(i, j) = A(i, j) / norms[i];
  }
  int ai = a.id;
  return record(std::move(C), {a}, [ai, norms](Tape& t, const Node& out) {
    const Tensor& Y = out.value;
    const Tensor& G = out.grad;
    Tensor g(Y.rows(), Y.cols());
    for (std::size_t i = 0; i < Y.rows(); ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < Y.cols(); ++j) dot += Y(i, j) * G(i, j);
      for (std::size_t j = 0; j < Y.cols(); ++j)
        g(i, j) = (G(i, j) - Y(i, j) * dot) / norms[i];
    }
    t.accumulate(ai, g);
  });
}

Var Tape::log_softmax_rows(Var a) {
  const Tensor& A = value(a);
  if (A.cols() == 0) throw std::invalid_argument("log_softmax_rows: empty rows");
  Tensor C(A.rows(), A.cols());
  for (std::size_t i = 0; i < A.rows(); ++i) {
    double mx = A(i, 0);
    for (std::size_t j = 1; j < A.cols(); ++j) mx = std::max(mx, A(i, j));
    double s = 0.0;
    for (std::size_t j = 0; j < A.cols(); ++j) s += std::exp(A(i, j) - mx);
    const double lse = mx + std::log(s);
    for (std::size_t j = 0; j < A.cols(); ++j) C(i, j) = A(i, j) - lse;
  }
  int ai = a.id;
  return record(std::move(C), {a}, [ai](Tape& t, const Node& out) {
    const Tensor& Y = out.value;
    const Tensor& G = out.grad;
    Tensor g(Y.rows(), Y.cols());
    for (std::size_t i = 0; i < Y.rows(); ++i) {
      double rowsum = 0.0;
      for (std::size_t j = 0; j < Y.cols(); ++j) rowsum += G(i, j);
      for (std::size_t j = 0; j < Y.cols(); ++j)
        g(i, j) = G(i, j) - std::exp(Y(i, j)) * rowsum;
    }
    t.accumulate(ai, g);
  });
}

Var Tape::pnorm_sq_rows(Var a, double p) {
  if (p < 1.0) throw std::invalid_argument("pnorm_sq_rows: p must be >= 1");
  const Tensor& A = value(a);
  std::vector<double> sums(A.rows());
  Tensor C(A.rows(), 1);
  for (std::size_t i = 0; i < A.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < A.cols(); ++j) s += std::pow(std::abs(A(i, j)), p);
    sums[i] = s;
    C(i, 0) = s == 0.0 ? 0.0 : std::pow(s, 2.0 / p);
  }
  int ai = a.id;
  return record(std::move(C), {a}, [ai, p, sums](Tape& t, const Node& out) {
    const Tensor& A = t.nodes_[ai].value;
    Tensor g(A.rows(), A.cols());
    for (std::size_t i = 0; i < A.rows(); ++i) {
      if (sums[i] == 0.0) continue;  // subgradient 0 on all-zero rows
      const double outer = 2.0 * std::pow(sums[i], 2.0 / p - 1.0) * out.grad(i, 0);
      for (std::size_t j = 0; j < A.cols(); ++j) {
        const double x = A(i, j);
        if (x == 0.0) continue;  // subgradient 0 at the kink
        const double sign = x > 0.0 ? 1.0 : -1.0;
        g(i, j) = outer * std::pow(std::abs(x), p - 1.0) * sign;
      }
    }
    t.accumulate(ai, g);
  });
}

Var Tape::segment_mean(Var data, const std::vector<int>& segment_ids, int num_segments) {
  const Tensor& A = value(data);
  if (segment_ids.size() != A.rows())
    throw std::invalid_argument("segment_mean: ids length differs from row count");
  if (num_segments <= 0) throw std::invalid_argument("segment_mean: num_segments must be positive");
  std::vector<int> counts(static_cast<std::size_t>(num_segments), 0);
  for (int s : segment_ids) {
    if (s < 0 || s >= num_segments) throw std::invalid_argument("segment_mean: id out of range");
    ++counts[static_cast<std::size_t>(s)];
  }
  for (int s = 0; s < num_segments; ++s)
    if (counts[static_cast<std::size_t>(s)] == 0)
      throw std::invalid_argument("segment_mean: empty segment " + std::to_string(s));
  Tensor C(static_cast<std::size_t>(num_segments), A.cols());
  for (std::size_t i = 0; i < A.rows(); ++i) {
    const std::size_t s = static_cast<std::size_t>(segment_ids[i]);
    for (std::size_t j = 0; j < A.cols(); ++j) C(s, j) += A(i, j);
  }
  for (std::size_t s = 0; s < C.rows(); ++s)
    for (std::size_t j = 0; j < A.cols(); ++j) C(s, j) /= static_cast<double>(counts[s]);
  int ai = data.id;
  return record(std::move(C), {data}, [ai, segment_ids, counts](Tape& t, const Node& out) {
    const Tensor& A = t.nodes_[ai].value;
    Tensor g(A.rows(), A.cols());
    for (std::size_t i = 0; i < A.rows(); ++i) {
      const std::size_t s = static_cast<std::size_t>(segment_ids[i]);
      const double inv = 1.0 / static_cast<double>(counts[s]);
      for (std::size_t j = 0; j < A.cols(); ++j) g(i, j) = out.grad(s, j) * inv;
    }
    t.accumulate(ai, g);
  });
}

Var Tape::aggregate_neighbors(Var features,
                              const std::vector<std::pair<int, int>>& directed_edges) {
  const Tensor& A = value(features);
  const int n = static_cast<int>(A.rows());
  for (const auto& [u, v] : directed_edges)
    if (u < 0 || u >= n || v < 0 || v >= n)
      throw std::invalid_argument("aggregate_neighbors: edge index out of range");
  Tensor C(A.rows(), A.cols());
  for (const auto& [u, v] : directed_edges) {
    const std::size_t uu = static_cast<std::size_t>(u), vv = static_cast<std::size_t>(v);
    for (std::size_t j = 0; j < A.cols(); ++j) C(vv, j) += A(uu, j);
  }
  int ai = features.id;
  return record(std::move(C), {features}, [ai, directed_edges](Tape& t, const Node& out) {
    const Tensor& A = t.nodes_[ai].value;
    Tensor g(A.rows(), A.cols());
    for (const auto& [u, v] : directed_edges) {
      const std::size_t uu = static_cast<std::size_t>(u), vv = static_cast<std::size_t>(v);
      for (std::size_t j = 0; j < A.cols(); ++j) g(uu, j) += out.grad(vv, j);
    }
    t.accumulate(ai, g);
  });
}

// --- finite differences ------------------------------------------------------

double finite_difference_check(const std::function<Var(Tape&, Var)>& f, const Tensor& point,
                               double step) {
  if (step <= 0.0) throw std::invalid_argument("finite_difference_check: step must be positive");
  Tensor analytic;
  {
    Tape tape;
    Var x = tape.leaf(point, true);
    Var loss = f(tape, x);
    if (tape.value(loss).size() != 1)
      throw std::invalid_argument("finite_difference_check: f must produce a scalar");
    tape.backward(loss);
    analytic = tape.grad(x);
  }
  auto eval = [&](const Tensor& at) {
    Tape tape;
    Var x = tape.leaf(at, false);
    return tape.value(f(tape, x)).item();
  };
  double max_err = 0.0;
  for (std::size_t k = 0; k < point.size(); ++k) {
    Tensor hi = point, lo = point;
    hi[k] += step;
    lo[k] -= step;
    const double numeric = (eval(hi) - eval(lo)) / (2.0 * step);
    const double a = analytic[k];
    const double err = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
    max_err = std::max(max_err, err);
  }
  return max_err;
}

}  // namespace graphssl

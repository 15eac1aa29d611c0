#include "defx/autodiff.hpp"

#include <cmath>
#include <utility>

#include "defx/kernels.hpp"

namespace defx {

const char* op_name(OpKind op) {
  switch (op) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kMatmul: return "matmul";
    case OpKind::kAdd: return "add";
    case OpKind::kConcat: return "concat";
    case OpKind::kRelu: return "relu";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kTanh: return "tanh";
    case OpKind::kMul: return "elementwise-mul";
    case OpKind::kRowSelect: return "row-select";
    case OpKind::kMaxPoolRows: return "max-pool-over-rows";
    case OpKind::kSoftmaxRow: return "softmax-row";
    case OpKind::kLogSumExp: return "log-sum-exp";
    case OpKind::kDot: return "dot";
    case OpKind::kScale: return "scalar-scale";
    case OpKind::kNegate: return "negate";
    case OpKind::kSum: return "sum";
  }
  return "?";
}

ShapeError::ShapeError(const char* op, const std::string& lhs, const std::string& rhs)
    : std::invalid_argument(rhs.empty()
                                ? std::string(op) + ": bad shape " + lhs
                                : std::string(op) + ": incompatible shapes " + lhs + " and " + rhs) {}

namespace {

Tensor& ensure_grad(Node* n) {
  if (n->grad.data.empty()) n->grad = Tensor::zeros(n->value.shape);
  return n->grad;
}

void softmax_into(const double* x, double* y, int n) {
  double mx = x[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, x[i]);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    y[i] = std::exp(x[i] - mx);
    total += y[i];
  }
  for (int i = 0; i < n; ++i) y[i] /= total;
}

}  // namespace

Node* Tape::push(Node node) {
#ifndef NDEBUG
  if (!node.value.all_finite())
    throw std::runtime_error(std::string("non-finite value after ") + op_name(node.op));
#endif
  nodes_.push_back(std::move(node));
  return &nodes_.back();
}

Node* Tape::leaf(Tensor value) {
  std::int64_t n = 1;
  for (int d : value.shape) n *= d;
  if (value.shape.empty() || n != static_cast<std::int64_t>(value.data.size()))
    throw ShapeError("leaf", value.shape_str(), "");
  Node node;
  node.op = OpKind::kLeaf;
  node.value = std::move(value);
  return push(std::move(node));
}

Node* Tape::matmul(Node* a, Node* b) {
  const Tensor& A = a->value;
  const Tensor& B = b->value;
  Node node;
  node.op = OpKind::kMatmul;
  node.parents = {a, b};
  if (A.rank() == 2 && B.rank() == 2 && A.cols() == B.rows()) {
    node.value = Tensor::zeros({A.rows(), B.cols()});
    kernels::matmul(A.data.data(), B.data.data(), node.value.data.data(), A.rows(), A.cols(), B.cols());
  } else if (A.rank() == 2 && B.rank() == 1 && A.cols() == B.len()) {
    node.value = Tensor::zeros({A.rows()});
    kernels::matvec(A.data.data(), B.data.data(), node.value.data.data(), A.rows(), A.cols());
  } else {
    throw ShapeError("matmul", A.shape_str(), B.shape_str());
  }
  return push(std::move(node));
}

Node* Tape::add(Node* a, Node* b) {
  const Tensor& A = a->value;
  const Tensor& B = b->value;
  Node node;
  node.op = OpKind::kAdd;
  node.parents = {a, b};
  if (A.same_shape(B)) {
    node.value = A;
    for (std::size_t i = 0; i < node.value.data.size(); ++i) node.value.data[i] += B.data[i];
  } else if (A.rank() == 2 && B.rank() == 1 && A.cols() == B.len()) {
    // Row-wise bias: B added to every row of A.
    node.value = A;
    for (int i = 0; i < A.rows(); ++i)
      for (int j = 0; j < A.cols(); ++j) node.value.at(i, j) += B.at(j);
  } else {
    throw ShapeError("add", A.shape_str(), B.shape_str());
  }
  return push(std::move(node));
}

Node* Tape::concat(const std::vector<Node*>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  Node node;
  node.op = OpKind::kConcat;
  node.axis = 1;
  node.parents = parts;
  const int rank = parts[0]->value.rank();
  if (rank == 1) {
    int total = 0;
    for (Node* p : parts) {
      if (p->value.rank() != 1)
        throw ShapeError("concat", parts[0]->value.shape_str(), p->value.shape_str());
      total += p->value.len();
    }
    node.value = Tensor::zeros({total});
    int off = 0;
    for (Node* p : parts) {
      for (int l = 0; l < p->value.len(); ++l) node.value.at(off + l) = p->value.at(l);
      off += p->value.len();
    }
  } else {
    const int m = parts[0]->value.rows();
    int total = 0;
    for (Node* p : parts) {
      if (p->value.rank() != 2 || p->value.rows() != m)
        throw ShapeError("concat", parts[0]->value.shape_str(), p->value.shape_str());
      total += p->value.cols();
    }
    node.value = Tensor::zeros({m, total});
    int off = 0;
    for (Node* p : parts) {
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < p->value.cols(); ++j) node.value.at(i, off + j) = p->value.at(i, j);
      off += p->value.cols();
    }
  }
  return push(std::move(node));
}

Node* Tape::stack_rows(const std::vector<Node*>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  Node node;
  node.op = OpKind::kConcat;
  node.axis = 0;
  node.parents = parts;
  const int rank = parts[0]->value.rank();
  int width = rank == 1 ? parts[0]->value.len() : parts[0]->value.cols();
  int rows = 0;
  for (Node* p : parts) {
    const Tensor& v = p->value;
    if (v.rank() != rank || (rank == 1 ? v.len() : v.cols()) != width)
      throw ShapeError("concat", parts[0]->value.shape_str(), v.shape_str());
    rows += rank == 1 ? 1 : v.rows();
  }
  node.value = Tensor::zeros({rows, width});
  int r = 0;
  for (Node* p : parts) {
    const Tensor& v = p->value;
    const int pr = rank == 1 ? 1 : v.rows();
    for (int i = 0; i < pr; ++i)
      for (int j = 0; j < width; ++j) node.value.at(r + i, j) = v.data[static_cast<std::size_t>(i) * width + j];
    r += pr;
  }
  return push(std::move(node));
}

Node* Tape::relu(Node* x) {
  Node node;
  node.op = OpKind::kRelu;
  node.parents = {x};
  node.value = x->value;
  for (double& v : node.value.data) v = v > 0.0 ? v : 0.0;
  return push(std::move(node));
}

Node* Tape::sigmoid(Node* x) {
  Node node;
  node.op = OpKind::kSigmoid;
  node.parents = {x};
  node.value = x->value;
  for (double& v : node.value.data) v = 1.0 / (1.0 + std::exp(-v));
  return push(std::move(node));
}

Node* Tape::tanh(Node* x) {
  Node node;
  node.op = OpKind::kTanh;
  node.parents = {x};
  node.value = x->value;
  for (double& v : node.value.data) v = std::tanh(v);
  return push(std::move(node));
}

Node* Tape::mul(Node* a, Node* b) {
  if (!a->value.same_shape(b->value))
    throw ShapeError("elementwise-mul", a->value.shape_str(), b->value.shape_str());
  Node node;
  node.op = OpKind::kMul;
  node.parents = {a, b};
  node.value = a->value;
  for (std::size_t i = 0; i < node.value.data.size(); ++i) node.value.data[i] *= b->value.data[i];
  return push(std::move(node));
}

Node* Tape::row_select(Node* x, int row) {
  const Tensor& v = x->value;
  Node node;
  node.op = OpKind::kRowSelect;
  node.parents = {x};
  node.row = row;
  if (v.rank() == 2 && row >= 0 && row < v.rows()) {
    node.value = Tensor::zeros({v.cols()});
    for (int j = 0; j < v.cols(); ++j) node.value.at(j) = v.at(row, j);
  } else if (v.rank() == 1 && row >= 0 && row < v.len()) {
    node.value = Tensor::scalar(v.at(row));
  } else {
    throw std::invalid_argument(std::string("row-select: index ") + std::to_string(row) +
                                " out of range for shape " + v.shape_str());
  }
  return push(std::move(node));
}

Node* Tape::max_pool_rows(Node* x) {
  const Tensor& v = x->value;
  if (v.rank() != 2) throw ShapeError("max-pool-over-rows", v.shape_str(), "");
  Node node;
  node.op = OpKind::kMaxPoolRows;
  node.parents = {x};
  node.value = Tensor::zeros({v.cols()});
  for (int j = 0; j < v.cols(); ++j) {
    double best = v.at(0, j);
    for (int i = 1; i < v.rows(); ++i) best = std::max(best, v.at(i, j));
    node.value.at(j) = best;
  }
  return push(std::move(node));
}

Node* Tape::softmax_row(Node* x) {
  const Tensor& v = x->value;
  Node node;
  node.op = OpKind::kSoftmaxRow;
  node.parents = {x};
  node.value = v;
  if (v.rank() == 1) {
    softmax_into(v.data.data(), node.value.data.data(), v.len());
  } else {
    for (int i = 0; i < v.rows(); ++i)
      softmax_into(v.data.data() + static_cast<std::size_t>(i) * v.cols(),
                   node.value.data.data() + static_cast<std::size_t>(i) * v.cols(), v.cols());
  }
  return push(std::move(node));
}

Node* Tape::log_sum_exp(Node* x) {
  const Tensor& v = x->value;
  if (v.rank() != 1) throw ShapeError("log-sum-exp", v.shape_str(), "");
  double mx = v.data[0];
  for (double d : v.data) mx = std::max(mx, d);
  double total = 0.0;
  for (double d : v.data) total += std::exp(d - mx);
  Node node;
  node.op = OpKind::kLogSumExp;
  node.parents = {x};
  node.value = Tensor::scalar(mx + std::log(total));
  return push(std::move(node));
}

Node* Tape::dot(Node* a, Node* b) {
  const Tensor& A = a->value;
  const Tensor& B = b->value;
  if (A.rank() != 1 || B.rank() != 1 || A.len() != B.len())
    throw ShapeError("dot", A.shape_str(), B.shape_str());
  double acc = 0.0;
  for (int i = 0; i < A.len(); ++i) acc += A.at(i) * B.at(i);
  Node node;
  node.op = OpKind::kDot;
  node.parents = {a, b};
  node.value = Tensor::scalar(acc);
  return push(std::move(node));
}

Node* Tape::scale(Node* x, double factor) {
  Node node;
  node.op = OpKind::kScale;
  node.parents = {x};
  node.factor = factor;
  node.value = x->value;
  for (double& v : node.value.data) v *= factor;
  return push(std::move(node));
}

Node* Tape::negate(Node* x) {
  Node node;
  node.op = OpKind::kNegate;
  node.parents = {x};
  node.value = x->value;
  for (double& v : node.value.data) v = -v;
  return push(std::move(node));
}

Node* Tape::sum(Node* x) {
  double acc = 0.0;
  for (double v : x->value.data) acc += v;
  Node node;
  node.op = OpKind::kSum;
  node.parents = {x};
  node.value = Tensor::scalar(acc);
  return push(std::move(node));
}

namespace {

void backprop_node(Node& n) {
  const Tensor& g = n.grad;
  switch (n.op) {
    case OpKind::kLeaf:
      break;
    case OpKind::kMatmul: {
      Node* a = n.parents[0];
      Node* b = n.parents[1];
      const Tensor& A = a->value;
      const Tensor& B = b->value;
      Tensor& da = ensure_grad(a);
      Tensor& db = ensure_grad(b);
      if (B.rank() == 2) {
        kernels::matmul_nt_acc(g.data.data(), B.data.data(), da.data.data(), A.rows(), B.cols(), A.cols());
        kernels::matmul_tn_acc(A.data.data(), g.data.data(), db.data.data(), A.rows(), A.cols(), B.cols());
      } else {
        kernels::outer_acc(g.data.data(), B.data.data(), da.data.data(), A.rows(), A.cols());
        kernels::matvec_t_acc(A.data.data(), g.data.data(), db.data.data(), A.rows(), A.cols());
      }
      break;
    }
    case OpKind::kAdd: {
      Node* a = n.parents[0];
      Node* b = n.parents[1];
      Tensor& da = ensure_grad(a);
      Tensor& db = ensure_grad(b);
      for (std::size_t i = 0; i < g.data.size(); ++i) da.data[i] += g.data[i];
      if (b->value.same_shape(n.value)) {
        for (std::size_t i = 0; i < g.data.size(); ++i) db.data[i] += g.data[i];
      } else {
        // Row-broadcast bias: column sums.
        for (int i = 0; i < g.rows(); ++i)
          for (int j = 0; j < g.cols(); ++j) db.at(j) += g.at(i, j);
      }
      break;
    }
    case OpKind::kConcat: {
      if (n.axis == 1 && n.value.rank() == 1) {
        int off = 0;
        for (Node* p : n.parents) {
          Tensor& dp = ensure_grad(p);
          for (int l = 0; l < p->value.len(); ++l) dp.at(l) += g.at(off + l);
          off += p->value.len();
        }
      } else if (n.axis == 1) {
        int off = 0;
        for (Node* p : n.parents) {
          Tensor& dp = ensure_grad(p);
          for (int i = 0; i < p->value.rows(); ++i)
            for (int j = 0; j < p->value.cols(); ++j) dp.at(i, j) += g.at(i, off + j);
          off += p->value.cols();
        }
      } else {
        int r = 0;
        const int width = n.value.cols();
        for (Node* p : n.parents) {
          Tensor& dp = ensure_grad(p);
          const int pr = p->value.rank() == 1 ? 1 : p->value.rows();
          for (int i = 0; i < pr; ++i)
            for (int j = 0; j < width; ++j)
              dp.data[static_cast<std::size_t>(i) * width + j] += g.at(r + i, j);
          r += pr;
        }
      }
      break;
    }
    case OpKind::kRelu: {
      Node* p = n.parents[0];
      Tensor& dp = ensure_grad(p);
      for (std::size_t i = 0; i < g.data.size(); ++i)
        if (p->value.data[i] > 0.0) dp.data[i] += g.data[i];
      break;
    }
    case OpKind::kSigmoid: {
      Tensor& dp = ensure_grad(n.parents[0]);
      for (std::size_t i = 0; i < g.data.size(); ++i) {
        const double y = n.value.data[i];
        dp.data[i] += g.data[i] * y * (1.0 - y);
      }
      break;
    }
    case OpKind::kTanh: {
      Tensor& dp = ensure_grad(n.parents[0]);
      for (std::size_t i = 0; i < g.data.size(); ++i) {
        const double y = n.value.data[i];
        dp.data[i] += g.data[i] * (1.0 - y * y);
      }
      break;
    }
    case OpKind::kMul: {
      Node* a = n.parents[0];
      Node* b = n.parents[1];
      Tensor& da = ensure_grad(a);
      Tensor& db = ensure_grad(b);
      for (std::size_t i = 0; i < g.data.size(); ++i) {
        da.data[i] += g.data[i] * b->value.data[i];
        db.data[i] += g.data[i] * a->value.data[i];
      }
      break;
    }
    case OpKind::kRowSelect: {
      Node* p = n.parents[0];
      Tensor& dp = ensure_grad(p);
      if (p->value.rank() == 2) {
        for (int j = 0; j < p->value.cols(); ++j) dp.at(n.row, j) += g.at(j);
      } else {
        dp.at(n.row) += g.at(0);
      }
      break;
    }
    case OpKind::kMaxPoolRows: {
      Node* p = n.parents[0];
      const Tensor& v = p->value;
      Tensor& dp = ensure_grad(p);
      for (int j = 0; j < v.cols(); ++j) {
        int arg = 0;
        for (int i = 1; i < v.rows(); ++i)
          if (v.at(i, j) > v.at(arg, j)) arg = i;
        dp.at(arg, j) += g.at(j);
      }
      break;
    }
    case OpKind::kSoftmaxRow: {
      Node* p = n.parents[0];
      Tensor& dp = ensure_grad(p);
      const int w = n.value.rank() == 1 ? n.value.len() : n.value.cols();
      const int rows = n.value.rank() == 1 ? 1 : n.value.rows();
      for (int i = 0; i < rows; ++i) {
        const double* s = n.value.data.data() + static_cast<std::size_t>(i) * w;
        const double* gi = g.data.data() + static_cast<std::size_t>(i) * w;
        double inner = 0.0;
        for (int j = 0; j < w; ++j) inner += gi[j] * s[j];
        double* d = dp.data.data() + static_cast<std::size_t>(i) * w;
        for (int j = 0; j < w; ++j) d[j] += s[j] * (gi[j] - inner);
      }
      break;
    }
    case OpKind::kLogSumExp: {
      Node* p = n.parents[0];
      Tensor& dp = ensure_grad(p);
      const double L = n.value.at(0);
      const double go = g.at(0);
      for (int i = 0; i < p->value.len(); ++i)
        dp.at(i) += go * std::exp(p->value.at(i) - L);
      break;
    }
    case OpKind::kDot: {
      Node* a = n.parents[0];
      Node* b = n.parents[1];
      Tensor& da = ensure_grad(a);
      Tensor& db = ensure_grad(b);
      const double go = g.at(0);
      for (int i = 0; i < a->value.len(); ++i) {
        da.at(i) += go * b->value.at(i);
        db.at(i) += go * a->value.at(i);
      }
      break;
    }
    case OpKind::kScale: {
      Tensor& dp = ensure_grad(n.parents[0]);
      for (std::size_t i = 0; i < g.data.size(); ++i) dp.data[i] += n.factor * g.data[i];
      break;
    }
    case OpKind::kNegate: {
      Tensor& dp = ensure_grad(n.parents[0]);
      for (std::size_t i = 0; i < g.data.size(); ++i) dp.data[i] -= g.data[i];
      break;
    }
    case OpKind::kSum: {
      Tensor& dp = ensure_grad(n.parents[0]);
      const double go = g.at(0);
      for (double& d : dp.data) d += go;
      break;
    }
  }
}

}  // namespace

void Tape::backward(Node* loss) {
  if (loss->value.numel() != 1)
    throw std::invalid_argument(std::string("backward: loss must be scalar, got shape ") +
                                loss->value.shape_str());
  for (Node& n : nodes_) {
    n.needed = false;
    n.grad = Tensor();
  }
  // Mark the subgraph that feeds the loss.
  std::vector<Node*> stack = {loss};
  loss->needed = true;
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    for (Node* p : n->parents) {
      if (!p->needed) {
        p->needed = true;
        stack.push_back(p);
      }
    }
  }
  loss->grad = Tensor::filled(loss->value.shape, 1.0);
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (!it->needed || it->grad.data.empty()) continue;
    backprop_node(*it);
  }
}

}  // namespace defx

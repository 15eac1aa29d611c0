#pragma once

#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include "defx/tensor.hpp"

namespace defx {

enum class OpKind {
  kLeaf,
  kMatmul,
  kAdd,
  kConcat,
  kRelu,
  kSigmoid,
  kTanh,
  kMul,
  kRowSelect,
  kMaxPoolRows,
  kSoftmaxRow,
  kLogSumExp,
  kDot,
  kScale,
  kNegate,
  kSum,
};

const char* op_name(OpKind op);

// Raised when an op is applied to incompatible shapes; the message names the
// op and both shapes.
struct ShapeError : std::invalid_argument {
  ShapeError(const char* op, const std::string& lhs, const std::string& rhs);
};

struct Node {
  OpKind op = OpKind::kLeaf;
  std::vector<Node*> parents;
  Tensor value;
  Tensor grad;          // allocated during backward, same shape as value
  double factor = 1.0;  // kScale
  int row = -1;         // kRowSelect
  int axis = 0;         // kConcat: 0 = stack as rows, 1 = concat along width
  bool needed = false;  // scratch flag used by backward
};

// One computation graph. The tape owns its nodes; creation order is a
// topological order, which backward() walks in reverse so every node is
// visited only after all of its consumers.
class Tape {
 public:
  Node* leaf(Tensor value);

  // A {m,k} x B {k,n} -> {m,n}, or A {m,k} x x {k} -> {m}.
  Node* matmul(Node* a, Node* b);
  // Same shape elementwise, or {m,n} + {n} adding the vector to every row.
  Node* add(Node* a, Node* b);
  // Concatenate along the width: {d1},{d2} -> {d1+d2}; {m,d1},{m,d2} -> {m,d1+d2}.
  Node* concat(const std::vector<Node*>& parts);
  // Lay parts out as rows: {d} x k -> {k,d}; {m1,d},{m2,d} -> {m1+m2,d}.
  Node* stack_rows(const std::vector<Node*>& parts);
  Node* relu(Node* x);
  Node* sigmoid(Node* x);
  Node* tanh(Node* x);
  // Elementwise product, same shape.
  Node* mul(Node* a, Node* b);
  // Row of a matrix -> {n}; element of a vector -> {1}.
  Node* row_select(Node* x, int row);
  // Columnwise max of a matrix -> {n}. Gradient routes to the first maximal
  // row (lowest index) on ties.
  Node* max_pool_rows(Node* x);
  // Rowwise softmax of a matrix, or softmax of a vector.
  Node* softmax_row(Node* x);
  // log sum exp of a vector -> {1}, max-shifted.
  Node* log_sum_exp(Node* x);
  Node* dot(Node* a, Node* b);
  Node* scale(Node* x, double factor);
  Node* negate(Node* x);
  // Sum of all entries -> {1}.
  Node* sum(Node* x);

  // Reverse sweep from a scalar loss. Gradients accumulate additively into
  // every node reachable from the loss; the loss node's grad is set to 1.
  void backward(Node* loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  Node* push(Node node);

  std::deque<Node> nodes_;
};

}  // namespace defx

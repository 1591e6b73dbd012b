#pragma once

#include <string>
#include <vector>

#include "nser/param_store.hpp"
#include "nser/tensor.hpp"

namespace nser {

// Per-example reverse-mode differentiation tape. A forward computation is
// recorded as a sequence of nodes; backward() walks the recording in reverse
// and accumulates parameter gradients into the attached ParamStore.
//
// Gradient contract: backward() adds into the store's gradient buffers, so
// two backward calls without zeroing double the stored gradients. In-tape
// adjoints are reset at the start of every backward pass.
class Tape {
 public:
  using NodeId = int;

  explicit Tape(ParamStore* store) : store_(store) {}

  NodeId constant(Tensor value);

  // Leaf over a whole parameter tensor.
  NodeId param(const std::string& name);

  // Leaf over one row of a rank-2 parameter (an embedding lookup). The
  // backward pass scatters only into that row.
  NodeId param_row(const std::string& name, int row);

  // scores[i] = <table[rows[i], :], vec> for a rank-2 parameter `table`.
  // Backward reaches both the selected rows and vec.
  NodeId rows_scores(const std::string& table, std::vector<int> rows,
                     NodeId vec);

  // y = x W + b for 1-D x: x[in], W[in,out], b[out] -> y[out].
  NodeId affine_vec(NodeId x, NodeId W, NodeId b);

  NodeId relu(NodeId x);
  NodeId sigmoid(NodeId x);
  NodeId softmax_logprobs(NodeId logits);
  NodeId concat(NodeId a, NodeId b);  // 1-D
  NodeId pick(NodeId v, int index);   // -> scalar
  NodeId dot(NodeId a, NodeId b);     // -> scalar
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId scale(NodeId a, float s);
  NodeId sum(const std::vector<NodeId>& xs);  // scalars -> scalar

  const Tensor& value(NodeId id) const { return nodes_[checked(id)].value; }
  float scalar(NodeId id) const;
  size_t node_count() const { return nodes_.size(); }

  // Seeds d(root)=1 and accumulates d(root)/d(theta) into the store.
  // root must be a scalar recorded on this tape.
  void backward(NodeId root);

 private:
  enum class Op {
    kConstant,
    kParam,
    kParamRow,
    kRowsScores,
    kAffineVec,
    kRelu,
    kSigmoid,
    kSoftmaxLogprobs,
    kConcat,
    kPick,
    kDot,
    kAdd,
    kSub,
    kScale,
    kSum,
  };

  struct Node {
    Op op;
    Tensor value;
    Tensor grad;
    int a = -1;
    int b = -1;
    int c = -1;
    int aux = 0;
    float factor = 1.0f;
    std::vector<int> rows;  // row ids for kParamRow/kRowsScores, inputs for kSum
    std::string pname;
  };

  size_t checked(NodeId id) const;
  NodeId push(Node n);
  void backprop(Node& n);

  ParamStore* store_;
  std::vector<Node> nodes_;
};

}  // namespace nser

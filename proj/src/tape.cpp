#include "nser/tape.hpp"

#include <cmath>

#include "nser/error.hpp"

namespace nser {

size_t Tape::checked(NodeId id) const {
  if (id < 0 || static_cast<size_t>(id) >= nodes_.size())
    throw Error("Tape: invalid node id " + std::to_string(id));
  return static_cast<size_t>(id);
}

Tape::NodeId Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

float Tape::scalar(NodeId id) const {
  const Tensor& v = value(id);
  if (v.size() != 1) throw Error("Tape: node is not a scalar");
  return v.data[0];
}

Tape::NodeId Tape::constant(Tensor value) {
  Node n;
  n.op = Op::kConstant;
  n.value = std::move(value);
  return push(std::move(n));
}

Tape::NodeId Tape::param(const std::string& name) {
  Node n;
  n.op = Op::kParam;
  n.pname = name;
  n.value = store_->value(name);
  return push(std::move(n));
}

Tape::NodeId Tape::param_row(const std::string& name, int row) {
  const Tensor& t = store_->value(name);
  if (t.rank() != 2) throw Error("param_row: " + name + " is not rank-2");
  int d = t.dim(1);
  Node n;
  n.op = Op::kParamRow;
  n.pname = name;
  n.aux = row;
  n.value = Tensor::zeros({d});
  const float* src = &t.data[static_cast<size_t>(row) * d];
  std::copy(src, src + d, n.value.data.begin());
  return push(std::move(n));
}

Tape::NodeId Tape::rows_scores(const std::string& table, std::vector<int> rows,
                               NodeId vec) {
  const Tensor& t = store_->value(table);
  const Tensor& v = value(vec);
  if (t.rank() != 2 || t.dim(1) != static_cast<int>(v.size()))
    throw Error("rows_scores: dimension mismatch for " + table);
  int d = t.dim(1);
  Node n;
  n.op = Op::kRowsScores;
  n.pname = table;
  n.a = vec;
  n.rows = std::move(rows);
  n.value = Tensor::zeros({static_cast<int>(n.rows.size())});
  for (size_t i = 0; i < n.rows.size(); ++i) {
    const float* row = &t.data[static_cast<size_t>(n.rows[i]) * d];
    float s = 0.0f;
    for (int j = 0; j < d; ++j) s += row[j] * v.data[j];
    n.value.data[i] = s;
  }
  return push(std::move(n));
}

Tape::NodeId Tape::affine_vec(NodeId x, NodeId W, NodeId b) {
  const Tensor& xv = value(x);
  Tensor x2({1, static_cast<int>(xv.size())}, xv.data);
  Tensor y = affine_forward(x2, value(W), value(b));
  Node n;
  n.op = Op::kAffineVec;
  n.a = x;
  n.b = W;
  n.c = b;
  n.value = Tensor({y.dim(1)}, std::move(y.data));
  return push(std::move(n));
}

Tape::NodeId Tape::relu(NodeId x) {
  Node n;
  n.op = Op::kRelu;
  n.a = x;
  n.value = nser::relu(value(x));
  return push(std::move(n));
}

Tape::NodeId Tape::sigmoid(NodeId x) {
  Node n;
  n.op = Op::kSigmoid;
  n.a = x;
  n.value = nser::sigmoid(value(x));
  return push(std::move(n));
}

Tape::NodeId Tape::softmax_logprobs(NodeId logits) {
  Node n;
  n.op = Op::kSoftmaxLogprobs;
  n.a = logits;
  n.value = nser::softmax_logprobs(value(logits));
  return push(std::move(n));
}

Tape::NodeId Tape::concat(NodeId a, NodeId b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  Node n;
  n.op = Op::kConcat;
  n.a = a;
  n.b = b;
  n.value = Tensor::zeros({static_cast<int>(av.size() + bv.size())});
  std::copy(av.data.begin(), av.data.end(), n.value.data.begin());
  std::copy(bv.data.begin(), bv.data.end(), n.value.data.begin() + av.size());
  return push(std::move(n));
}

Tape::NodeId Tape::pick(NodeId v, int index) {
  const Tensor& vv = value(v);
  if (index < 0 || static_cast<size_t>(index) >= vv.size())
    throw Error("pick: index out of range");
  Node n;
  n.op = Op::kPick;
  n.a = v;
  n.aux = index;
  n.value = Tensor({1}, {vv.data[static_cast<size_t>(index)]});
  return push(std::move(n));
}

Tape::NodeId Tape::dot(NodeId a, NodeId b) {
  Node n;
  n.op = Op::kDot;
  n.a = a;
  n.b = b;
  n.value = Tensor({1}, {nser::dot(value(a), value(b))});
  return push(std::move(n));
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (!av.same_shape(bv)) throw Error("add: shape mismatch");
  Node n;
  n.op = Op::kAdd;
  n.a = a;
  n.b = b;
  n.value = av;
  for (size_t i = 0; i < bv.size(); ++i) n.value.data[i] += bv.data[i];
  return push(std::move(n));
}

Tape::NodeId Tape::sub(NodeId a, NodeId b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (!av.same_shape(bv)) throw Error("sub: shape mismatch");
  Node n;
  n.op = Op::kSub;
  n.a = a;
  n.b = b;
  n.value = av;
  for (size_t i = 0; i < bv.size(); ++i) n.value.data[i] -= bv.data[i];
  return push(std::move(n));
}

Tape::NodeId Tape::scale(NodeId a, float s) {
  Node n;
  n.op = Op::kScale;
  n.a = a;
  n.factor = s;
  n.value = value(a);
  for (float& v : n.value.data) v *= s;
  return push(std::move(n));
}

Tape::NodeId Tape::sum(const std::vector<NodeId>& xs) {
  if (xs.empty()) throw Error("sum: empty input list");
  Node n;
  n.op = Op::kSum;
  float s = 0.0f;
  for (NodeId id : xs) {
    s += scalar(id);
    n.rows.push_back(id);
  }
  n.value = Tensor({1}, {s});
  return push(std::move(n));
}

void Tape::backward(NodeId root) {
  if (nodes_.empty()) throw Error("backward: no recorded forward computation");
  size_t r = checked(root);
  if (nodes_[r].value.size() != 1)
    throw Error("backward: root node is not a scalar");
  for (Node& n : nodes_) {
    n.grad = Tensor::zeros(n.value.shape);
  }
  nodes_[r].grad.data[0] = 1.0f;
  for (size_t i = nodes_.size(); i-- > 0;) {
    backprop(nodes_[i]);
  }
}

void Tape::backprop(Node& n) {
  const std::vector<float>& g = n.grad.data;
  switch (n.op) {
    case Op::kConstant:
      break;
    case Op::kParam: {
      Tensor& pg = store_->grad(n.pname);
      for (size_t i = 0; i < g.size(); ++i) pg.data[i] += g[i];
      break;
    }
    case Op::kParamRow: {
      Tensor& pg = store_->grad(n.pname);
      int d = pg.dim(1);
      float* dst = &pg.data[static_cast<size_t>(n.aux) * d];
      for (int j = 0; j < d; ++j) dst[j] += g[static_cast<size_t>(j)];
      break;
    }
    case Op::kRowsScores: {
      const Tensor& table = store_->value(n.pname);
      Tensor& tg = store_->grad(n.pname);
      Node& vec = nodes_[checked(n.a)];
      int d = table.dim(1);
      for (size_t i = 0; i < n.rows.size(); ++i) {
        float gi = g[i];
        if (gi == 0.0f) continue;
        size_t off = static_cast<size_t>(n.rows[i]) * d;
        for (int j = 0; j < d; ++j) {
          vec.grad.data[static_cast<size_t>(j)] += gi * table.data[off + j];
          tg.data[off + j] += gi * vec.value.data[static_cast<size_t>(j)];
        }
      }
      break;
    }
    case Op::kAffineVec: {
      Node& x = nodes_[checked(n.a)];
      Node& W = nodes_[checked(n.b)];
      Node& b = nodes_[checked(n.c)];
      int in = static_cast<int>(x.value.size());
      int out = static_cast<int>(n.value.size());
      for (int j = 0; j < out; ++j) b.grad.data[static_cast<size_t>(j)] += g[static_cast<size_t>(j)];
      for (int i = 0; i < in; ++i) {
        const float* wrow = &W.value.data[static_cast<size_t>(i) * out];
        float* wgrow = &W.grad.data[static_cast<size_t>(i) * out];
        float xi = x.value.data[static_cast<size_t>(i)];
        float acc = 0.0f;
        for (int j = 0; j < out; ++j) {
          float gj = g[static_cast<size_t>(j)];
          acc += wrow[j] * gj;
          wgrow[j] += xi * gj;
        }
        x.grad.data[static_cast<size_t>(i)] += acc;
      }
      break;
    }
    case Op::kRelu: {
      Node& x = nodes_[checked(n.a)];
      for (size_t i = 0; i < g.size(); ++i)
        if (x.value.data[i] > 0.0f) x.grad.data[i] += g[i];
      break;
    }
    case Op::kSigmoid: {
      Node& x = nodes_[checked(n.a)];
      for (size_t i = 0; i < g.size(); ++i) {
        float y = n.value.data[i];
        x.grad.data[i] += g[i] * y * (1.0f - y);
      }
      break;
    }
    case Op::kSoftmaxLogprobs: {
      Node& x = nodes_[checked(n.a)];
      double gsum = 0.0;
      for (float v : g) gsum += v;
      for (size_t i = 0; i < g.size(); ++i) {
        float p = std::exp(n.value.data[i]);
        x.grad.data[i] += g[i] - p * static_cast<float>(gsum);
      }
      break;
    }
    case Op::kConcat: {
      Node& a = nodes_[checked(n.a)];
      Node& b = nodes_[checked(n.b)];
      size_t na = a.value.size();
      for (size_t i = 0; i < na; ++i) a.grad.data[i] += g[i];
      for (size_t i = 0; i < b.value.size(); ++i) b.grad.data[i] += g[na + i];
      break;
    }
    case Op::kPick: {
      Node& v = nodes_[checked(n.a)];
      v.grad.data[static_cast<size_t>(n.aux)] += g[0];
      break;
    }
    case Op::kDot: {
      Node& a = nodes_[checked(n.a)];
      Node& b = nodes_[checked(n.b)];
      float gv = g[0];
      for (size_t i = 0; i < a.value.size(); ++i) {
        a.grad.data[i] += gv * b.value.data[i];
        b.grad.data[i] += gv * a.value.data[i];
      }
      break;
    }
    case Op::kAdd: {
      Node& a = nodes_[checked(n.a)];
      Node& b = nodes_[checked(n.b)];
      for (size_t i = 0; i < g.size(); ++i) {
        a.grad.data[i] += g[i];
        b.grad.data[i] += g[i];
      }
      break;
    }
    case Op::kSub: {
      Node& a = nodes_[checked(n.a)];
      Node& b = nodes_[checked(n.b)];
      for (size_t i = 0; i < g.size(); ++i) {
        a.grad.data[i] += g[i];
        b.grad.data[i] -= g[i];
      }
      break;
    }
    case Op::kScale: {
      Node& a = nodes_[checked(n.a)];
      for (size_t i = 0; i < g.size(); ++i) a.grad.data[i] += n.factor * g[i];
      break;
    }
    case Op::kSum: {
      for (int id : n.rows) nodes_[checked(id)].grad.data[0] += g[0];
      break;
    }
  }
}

}  // namespace nser

#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace nser {

// Dense row-major float32 tensor. Values exposed by any public operation are
// finite; kernels check their outputs.
struct Tensor {
  std::vector<int> shape;
  std::vector<float> data;

  Tensor() = default;
  Tensor(std::vector<int> s, std::vector<float> d)
      : shape(std::move(s)), data(std::move(d)) {}

  static Tensor zeros(std::vector<int> shape);
  static Tensor full(std::vector<int> shape, float value);

  size_t size() const { return data.size(); }
  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }

  float& at(int i) { return data[static_cast<size_t>(i)]; }
  float at(int i) const { return data[static_cast<size_t>(i)]; }
  float& at(int r, int c) { return data[static_cast<size_t>(r) * shape[1] + c]; }
  float at(int r, int c) const {
    return data[static_cast<size_t>(r) * shape[1] + c];
  }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }
  std::string shape_str() const;
};

size_t shape_numel(const std::vector<int>& shape);

// Throws nser::Error naming `what` if any element is not finite.
void check_finite(const Tensor& t, const std::string& what);

// y = x W + b.  x: [n, in], W: [in, out], b: [out] -> y: [n, out].
Tensor affine_forward(const Tensor& x, const Tensor& W, const Tensor& b);

Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);

// Log-probabilities of a softmax over a vector of logits, stabilized by
// max-subtraction; the exp/log reduction runs in double so that
// sum(exp(out)) == 1 within 1e-6 even for extreme logits.
Tensor softmax_logprobs(const Tensor& logits);

float dot(const Tensor& a, const Tensor& b);

}  // namespace nser

#include "nser/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nser/error.hpp"

namespace nser {

size_t shape_numel(const std::vector<int>& shape) {
  size_t n = 1;
  for (int d : shape) n *= static_cast<size_t>(d);
  return n;
}

Tensor Tensor::zeros(std::vector<int> shape) {
  size_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<float>(n, 0.0f));
}

Tensor Tensor::full(std::vector<int> shape, float value) {
  size_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<float>(n, value));
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ",";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

void check_finite(const Tensor& t, const std::string& what) {
  for (float v : t.data) {
    if (!std::isfinite(v)) throw Error("non-finite value in " + what);
  }
}

Tensor affine_forward(const Tensor& x, const Tensor& W, const Tensor& b) {
  if (x.rank() != 2 || W.rank() != 2 || b.rank() != 1)
    throw Error("affine_forward: expected x[n,in], W[in,out], b[out], got x" +
                x.shape_str() + " W" + W.shape_str() + " b" + b.shape_str());
  int n = x.dim(0), in = x.dim(1), out = W.dim(1);
  if (W.dim(0) != in || b.dim(0) != out)
    throw Error("affine_forward: shape mismatch x" + x.shape_str() + " W" +
                W.shape_str() + " b" + b.shape_str());
  Tensor y = Tensor::zeros({n, out});
  for (int r = 0; r < n; ++r) {
    for (int j = 0; j < out; ++j) y.at(r, j) = b.at(j);
    for (int i = 0; i < in; ++i) {
      float xi = x.at(r, i);
      if (xi == 0.0f) continue;
      const float* wrow = &W.data[static_cast<size_t>(i) * out];
      float* yrow = &y.data[static_cast<size_t>(r) * out];
      for (int j = 0; j < out; ++j) yrow[j] += xi * wrow[j];
    }
  }
  check_finite(y, "affine_forward output");
  return y;
}

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (float& v : y.data) v = v > 0.0f ? v : 0.0f;
  return y;
}

Tensor sigmoid(const Tensor& x) {
  Tensor y = x;
  for (float& v : y.data) v = 1.0f / (1.0f + std::exp(-v));
  return y;
}

Tensor softmax_logprobs(const Tensor& logits) {
  if (logits.size() == 0) throw Error("softmax_logprobs: empty input");
  float mx = *std::max_element(logits.data.begin(), logits.data.end());
  double sum = 0.0;
  for (float v : logits.data) sum += std::exp(static_cast<double>(v - mx));
  double lse = std::log(sum);
  Tensor out = logits;
  for (float& v : out.data)
    v = static_cast<float>(static_cast<double>(v - mx) - lse);
  check_finite(out, "softmax_logprobs output");
  return out;
}

float dot(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size())
    throw Error("dot: size mismatch " + a.shape_str() + " vs " + b.shape_str());
  float s = 0.0f;
  for (size_t i = 0; i < a.size(); ++i) s += a.data[i] * b.data[i];
  return s;
}

}  // namespace nser

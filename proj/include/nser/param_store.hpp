#pragma once

#include <string>
#include <vector>

#include "nser/tensor.hpp"

namespace nser {

// Named parameter tensors with paired gradient and momentum buffers.
// Single-writer: one trainer mutates the store; read-only snapshots may be
// shared for inference.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Tensor value;
    Tensor grad;
    Tensor momentum;
  };

  // Registers a parameter. Name must be unique.
  Entry& add(const std::string& name, Tensor value);

  bool contains(const std::string& name) const;
  Entry& entry(const std::string& name);
  const Entry& entry(const std::string& name) const;
  Tensor& value(const std::string& name) { return entry(name).value; }
  const Tensor& value(const std::string& name) const {
    return entry(name).value;
  }
  Tensor& grad(const std::string& name) { return entry(name).grad; }

  // Entries in insertion order.
  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }

  void zero_grads();

  // theta <- theta - lr * (momentum-smoothed grad); gradients zeroed.
  // Throws naming the parameter if a non-finite gradient is encountered.
  void sgd_step(float lr, float momentum);

 private:
  std::vector<Entry> entries_;
};

}  // namespace nser

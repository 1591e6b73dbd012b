#include "nser/param_store.hpp"

#include <cmath>

#include "nser/error.hpp"

namespace nser {

ParamStore::Entry& ParamStore::add(const std::string& name, Tensor value) {
  if (contains(name)) throw Error("ParamStore: duplicate parameter " + name);
  Entry e;
  e.name = name;
  e.grad = Tensor::zeros(value.shape);
  e.momentum = Tensor::zeros(value.shape);
  e.value = std::move(value);
  entries_.push_back(std::move(e));
  return entries_.back();
}

bool ParamStore::contains(const std::string& name) const {
  for (const Entry& e : entries_)
    if (e.name == name) return true;
  return false;
}

ParamStore::Entry& ParamStore::entry(const std::string& name) {
  for (Entry& e : entries_)
    if (e.name == name) return e;
  throw Error("ParamStore: unknown parameter " + name);
}

const ParamStore::Entry& ParamStore::entry(const std::string& name) const {
  for (const Entry& e : entries_)
    if (e.name == name) return e;
  throw Error("ParamStore: unknown parameter " + name);
}

void ParamStore::zero_grads() {
  for (Entry& e : entries_)
    std::fill(e.grad.data.begin(), e.grad.data.end(), 0.0f);
}

void ParamStore::sgd_step(float lr, float momentum) {
  for (Entry& e : entries_) {
    for (size_t i = 0; i < e.value.size(); ++i) {
      float g = e.grad.data[i];
      if (!std::isfinite(g))
        throw Error("sgd_step: non-finite gradient in parameter " + e.name);
      float m = momentum * e.momentum.data[i] + g;
      e.momentum.data[i] = m;
      e.value.data[i] -= lr * m;
      e.grad.data[i] = 0.0f;
    }
  }
}

}  // namespace nser

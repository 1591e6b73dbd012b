#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "nser/checkpoint.hpp"
#include "nser/error.hpp"
#include "nser/param_store.hpp"
#include "nser/rng.hpp"
#include "nser/tape.hpp"
#include "nser/tensor.hpp"

using namespace nser;

TEST_CASE("affine_forward zero weights") {
  Tensor x({1, 2}, {1.0f, 2.0f});
  Tensor W = Tensor::zeros({2, 3});
  Tensor b = Tensor::zeros({3});
  Tensor y = affine_forward(x, W, b);
  for (float v : y.data) CHECK(v == 0.0f);
}

TEST_CASE("affine_forward identity plus bias") {
  Tensor x({1, 2}, {1.0f, 2.0f});
  Tensor W({2, 2}, {1.0f, 0.0f, 0.0f, 1.0f});
  Tensor b({2}, {1.0f, 1.0f});
  Tensor y = affine_forward(x, W, b);
  CHECK(y.data[0] == doctest::Approx(2.0f));
  CHECK(y.data[1] == doctest::Approx(3.0f));
}

TEST_CASE("affine_forward matches naive triple loop") {
  Rng rng(11);
  Tensor x = Tensor::zeros({3, 5});
  Tensor W = Tensor::zeros({5, 4});
  Tensor b = Tensor::zeros({4});
  for (float& v : x.data) v = static_cast<float>(rng.uniform_real(-2, 2));
  for (float& v : W.data) v = static_cast<float>(rng.uniform_real(-2, 2));
  for (float& v : b.data) v = static_cast<float>(rng.uniform_real(-2, 2));
  Tensor y = affine_forward(x, W, b);
  for (int r = 0; r < 3; ++r) {
    for (int j = 0; j < 4; ++j) {
      double acc = b.at(j);
      for (int i = 0; i < 5; ++i) acc += static_cast<double>(x.at(r, i)) * W.at(i, j);
      CHECK(std::abs(y.at(r, j) - acc) < 1e-6);
    }
  }
}

TEST_CASE("affine_forward rejects mismatched shapes") {
  Tensor x({1, 3}, {1, 2, 3});
  Tensor W = Tensor::zeros({2, 2});
  Tensor b = Tensor::zeros({2});
  CHECK_THROWS_AS(affine_forward(x, W, b), Error);
}

TEST_CASE("sigmoid at zero") {
  Tensor x({1}, {0.0f});
  CHECK(sigmoid(x).data[0] == doctest::Approx(0.5f));
}

TEST_CASE("softmax_logprobs equal logits") {
  Tensor logits({4}, {3.0f, 3.0f, 3.0f, 3.0f});
  Tensor lp = softmax_logprobs(logits);
  for (float v : lp.data) CHECK(v == doctest::Approx(-1.386294f).epsilon(1e-5));
}

TEST_CASE("softmax_logprobs extreme logits vs long-double oracle") {
  Tensor logits({2}, {1000.0f, 1000.5f});
  Tensor lp = softmax_logprobs(logits);
  // oracle in long double
  long double e0 = expl(0.0L), e1 = expl(0.5L);
  long double z = e0 + e1;
  CHECK(std::abs(lp.data[0] - static_cast<float>(logl(e0 / z))) < 1e-6);
  CHECK(std::abs(lp.data[1] - static_cast<float>(logl(e1 / z))) < 1e-6);
  double sum = 0.0;
  for (float v : lp.data) sum += std::exp(static_cast<double>(v));
  CHECK(std::abs(sum - 1.0) < 1e-6);
}

TEST_CASE("softmax_logprobs normalization at n=10000 with extreme spread") {
  Rng rng(3);
  Tensor logits = Tensor::zeros({10000});
  for (float& v : logits.data)
    v = static_cast<float>(rng.uniform_real(-300.0, 300.0));
  logits.data[17] = 5000.0f;
  Tensor lp = softmax_logprobs(logits);
  double sum = 0.0;
  for (float v : lp.data) sum += std::exp(static_cast<double>(v));
  CHECK(std::abs(sum - 1.0) < 1e-6);
}

TEST_CASE("tape: grad of sum(W x) has outer structure of x") {
  ParamStore store;
  store.add("W", Tensor({2, 2}, {0.5f, -1.0f, 2.0f, 0.25f}));
  Tape t(&store);
  Tape::NodeId x = t.constant(Tensor({2}, {3.0f, -2.0f}));
  Tape::NodeId W = t.param("W");
  Tape::NodeId b = t.constant(Tensor::zeros({2}));
  Tape::NodeId y = t.affine_vec(x, W, b);
  Tape::NodeId loss = t.sum({t.pick(y, 0), t.pick(y, 1)});
  t.backward(loss);
  // d/dW[i][j] sum_j (x W)_j = x_i for every j
  const Tensor& gw = store.grad("W");
  CHECK(gw.at(0, 0) == doctest::Approx(3.0f));
  CHECK(gw.at(0, 1) == doctest::Approx(3.0f));
  CHECK(gw.at(1, 0) == doctest::Approx(-2.0f));
  CHECK(gw.at(1, 1) == doctest::Approx(-2.0f));
}

TEST_CASE("tape: two backward calls without zeroing double the gradients") {
  ParamStore store;
  store.add("w", Tensor({2}, {1.0f, 2.0f}));
  Tape t(&store);
  Tape::NodeId w = t.param("w");
  Tape::NodeId x = t.constant(Tensor({2}, {4.0f, -1.0f}));
  Tape::NodeId loss = t.dot(w, x);
  t.backward(loss);
  Tensor first = store.grad("w");
  t.backward(loss);
  for (size_t i = 0; i < first.size(); ++i)
    CHECK(store.grad("w").data[i] == doctest::Approx(2.0f * first.data[i]));
}

TEST_CASE("tape: backward without a recorded forward fails") {
  ParamStore store;
  Tape t(&store);
  CHECK_THROWS_AS(t.backward(0), Error);
}

TEST_CASE("tape: backward rejects non-scalar root") {
  ParamStore store;
  Tape t(&store);
  Tape::NodeId v = t.constant(Tensor({2}, {1.0f, 2.0f}));
  CHECK_THROWS_AS(t.backward(v), Error);
}

TEST_CASE("tape: softmax/pick/sigmoid backward against hand-derived values") {
  ParamStore store;
  store.add("z", Tensor({3}, {0.1f, 0.7f, -0.4f}));
  Tape t(&store);
  Tape::NodeId z = t.param("z");
  Tape::NodeId lp = t.softmax_logprobs(z);
  Tape::NodeId loss = t.scale(t.pick(lp, 1), -1.0f);  // NLL of class 1
  t.backward(loss);
  // d NLL / d z_i = p_i - [i == 1]
  double mx = 0.7, sum = 0.0;
  double p[3];
  const float zv[3] = {0.1f, 0.7f, -0.4f};
  for (int i = 0; i < 3; ++i) sum += std::exp(static_cast<double>(zv[i]) - mx);
  for (int i = 0; i < 3; ++i)
    p[i] = std::exp(static_cast<double>(zv[i]) - mx) / sum;
  CHECK(store.grad("z").data[0] == doctest::Approx(p[0]).epsilon(1e-4));
  CHECK(store.grad("z").data[1] == doctest::Approx(p[1] - 1.0).epsilon(1e-4));
  CHECK(store.grad("z").data[2] == doctest::Approx(p[2]).epsilon(1e-4));
}

TEST_CASE("sgd_step: lr=0 leaves parameters unchanged") {
  ParamStore store;
  store.add("w", Tensor({2}, {1.0f, -3.0f}));
  store.grad("w").data = {5.0f, 5.0f};
  store.sgd_step(0.0f, 0.9f);
  CHECK(store.value("w").data[0] == 1.0f);
  CHECK(store.value("w").data[1] == -3.0f);
}

TEST_CASE("sgd_step: momentum=0 single step is exactly theta - lr g") {
  ParamStore store;
  store.add("w", Tensor({2}, {1.0f, 2.0f}));
  store.grad("w").data = {2.0f, -4.0f};
  store.sgd_step(0.5f, 0.0f);
  CHECK(store.value("w").data[0] == doctest::Approx(0.0f));
  CHECK(store.value("w").data[1] == doctest::Approx(4.0f));
  // gradients zeroed
  CHECK(store.grad("w").data[0] == 0.0f);
  CHECK(store.grad("w").data[1] == 0.0f);
}

TEST_CASE("sgd_step: 100 steps on a quadratic bowl decrease the loss monotonically") {
  ParamStore store;
  store.add("w", Tensor({3}, {4.0f, -3.0f, 2.5f}));
  Tensor target({3}, {1.0f, 0.5f, -1.0f});
  auto loss_value = [&]() {
    double acc = 0.0;
    for (int i = 0; i < 3; ++i) {
      double dlt = store.value("w").data[static_cast<size_t>(i)] -
                   target.data[static_cast<size_t>(i)];
      acc += dlt * dlt;
    }
    return acc;
  };
  // plain SGD: theta' - c = (1 - 2 lr)(theta - c), an exact contraction
  double prev = loss_value();
  for (int step = 0; step < 100; ++step) {
    Tape t(&store);
    Tape::NodeId w = t.param("w");
    Tape::NodeId delta = t.sub(w, t.constant(target));
    Tape::NodeId loss = t.dot(delta, delta);
    t.backward(loss);
    store.sgd_step(0.05f, 0.0f);
    double cur = loss_value();
    CHECK(cur < prev + 1e-12);
    prev = cur;
  }
  CHECK(prev < 1e-4);
}

TEST_CASE("sgd_step aborts naming the parameter on non-finite gradient") {
  ParamStore store;
  store.add("bad_param", Tensor({1}, {1.0f}));
  store.grad("bad_param").data[0] = std::numeric_limits<float>::infinity();
  CHECK_THROWS_WITH_AS(store.sgd_step(0.1f, 0.0f),
                       doctest::Contains("bad_param"), Error);
}

TEST_CASE("checkpoint round-trips bit-exactly and is byte-stable") {
  Rng rng(99);
  ParamStore store;
  store.add("beta", Tensor::zeros({3, 4}));
  store.add("alpha", Tensor::zeros({7}));
  for (auto& e : store.entries())
    for (float& v : e.value.data) v = static_cast<float>(rng.uniform_real(-1, 1));

  std::string p1 = "ckpt_test_a.bin", p2 = "ckpt_test_b.bin";
  save_checkpoint(p1, store, "model");
  save_checkpoint(p2, store, "model");
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  std::string b1((std::istreambuf_iterator<char>(f1)), {});
  std::string b2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(b1 == b2);
  CHECK(b1.substr(0, 5) == std::string("NSER\x01", 5));

  ParamStore loaded = load_checkpoint(p1, "model");
  for (const auto& e : store.entries()) {
    const Tensor& lv = loaded.value(e.name);
    CHECK(lv.shape == e.value.shape);
    for (size_t i = 0; i < lv.size(); ++i) CHECK(lv.data[i] == e.value.data[i]);
  }
  CHECK(checkpoint_kind(p1) == "model");
  CHECK_THROWS_AS(load_checkpoint(p1, "teacher"), Error);

  // flip one payload byte -> CRC failure
  b1[b1.size() - 7] = static_cast<char>(b1[b1.size() - 7] ^ 0x40);
  std::ofstream corrupt("ckpt_test_c.bin", std::ios::binary);
  corrupt.write(b1.data(), static_cast<std::streamsize>(b1.size()));
  corrupt.close();
  CHECK_THROWS_WITH_AS(load_checkpoint("ckpt_test_c.bin", "model"),
                       doctest::Contains("CRC"), Error);
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
  std::filesystem::remove("ckpt_test_c.bin");
}

TEST_CASE("rng substreams are deterministic and independent") {
  Rng a = substream(42, "split");
  Rng b = substream(42, "split");
  Rng c = substream(42, "init");
  CHECK(a.next_u64() == b.next_u64());
  CHECK(substream_seed(42, "split") != substream_seed(42, "init"));
  CHECK(substream_seed(42, "split") != substream_seed(43, "split"));
  (void)c;
}

TEST_CASE("rng sample returns k distinct elements") {
  Rng rng(5);
  std::vector<int> v = {1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<int> s = rng.sample(v, 3);
  CHECK(s.size() == 3);
  std::sort(s.begin(), s.end());
  CHECK(std::unique(s.begin(), s.end()) == s.end());
}

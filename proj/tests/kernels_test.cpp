#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <omp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "doctest.h"
#include "vidperf/kernels.hpp"
#include "vidperf/ref_kernels.hpp"
#include "vidperf/tensor.hpp"

using namespace vidperf;

namespace {

double rel(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

ConvWeights random_weights(std::int64_t c_out, std::int64_t c_in, std::array<int, 3> kernel,
                           std::uint64_t seed, bool with_bias = true) {
  ConvWeights w = ConvWeights::zeros(c_out, c_in, kernel);
  Tensor5D fill = random_normal(Shape5D{1, 1, 1, 1, w.weight_count()}, seed);
  std::copy(fill.data().begin(), fill.data().end(), w.w.begin());
  if (with_bias) {
    Tensor5D bias = random_normal(Shape5D{1, 1, 1, 1, c_out}, seed + 1);
    std::copy(bias.data().begin(), bias.data().end(), w.bias.begin());
  }
  return w;
}

double dot_weights(const ConvWeights& a, const ConvWeights& b) {
  double s = std::inner_product(a.w.begin(), a.w.end(), b.w.begin(), 0.0);
  return std::inner_product(a.bias.begin(), a.bias.end(), b.bias.begin(), s);
}

}  // namespace

TEST_CASE("temporal shift moves the documented channel ranges") {
  // x[t][c] = 100 t + c over 4 frames, 8 channels; fraction 1/8 each way
  // shifts channel 0 forward and channel 1 backward.
  Shape5D s{1, 4, 8, 1, 1};
  Tensor5D x(s);
  for (std::int64_t t = 0; t < 4; ++t)
    for (std::int64_t c = 0; c < 8; ++c) x.at(0, t, c, 0, 0) = 100.0 * t + c;

  Tensor5D y = temporal_shift(x, ShiftConfig::symmetric(Rational{1, 8}));
  for (std::int64_t t = 0; t < 4; ++t) {
    CHECK(y.at(0, t, 0, 0, 0) == (t == 0 ? 0.0 : 100.0 * (t - 1)));        // from the past
    CHECK(y.at(0, t, 1, 0, 0) == (t == 3 ? 0.0 : 100.0 * (t + 1) + 1));    // from the future
    for (std::int64_t c = 2; c < 8; ++c) CHECK(y.at(0, t, c, 0, 0) == 100.0 * t + c);
  }
}

TEST_CASE("temporal shift with fraction zero is the identity") {
  Tensor5D x = random_normal(Shape5D{2, 5, 4, 3, 3}, 11);
  Tensor5D y = temporal_shift(x, ShiftConfig::symmetric(Rational{0, 1}));
  CHECK(max_abs_diff(x, y) == 0.0);
}

TEST_CASE("temporal shift validates the channel split") {
  CHECK_THROWS_AS(validate_shift(ShiftConfig::symmetric(Rational{1, 3}), 8), ValidationError);
  CHECK_THROWS_AS(validate_shift(ShiftConfig::symmetric(Rational{2, 3}), 9), ValidationError);
  CHECK_NOTHROW(validate_shift(ShiftConfig::symmetric(Rational{1, 3}), 9));
}

TEST_CASE("temporal shift matches the reference and satisfies its adjoint") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Shape5D s{1 + static_cast<std::int64_t>(seed % 2), 3 + static_cast<std::int64_t>(seed % 4),
              8, 2, 3};
    ShiftConfig cfg = ShiftConfig::symmetric(Rational{1, (seed % 3 == 0) ? 4 : 8});
    Tensor5D x = random_normal(s, seed * 2 + 1);
    Tensor5D y = random_normal(s, seed * 2 + 2);

    Tensor5D ax = temporal_shift(x, cfg);
    CHECK(max_abs_diff(ax, ref::temporal_shift(x, cfg)) == 0.0);

    double lhs = dot(ax, y);
    double rhs = dot(x, temporal_shift_adjoint(y, cfg));
    CHECK(rel(lhs, rhs) < 1e-12);
  }
}

TEST_CASE("temporal shift is linear") {
  ShiftConfig cfg = ShiftConfig::symmetric(Rational{1, 8});
  Shape5D s{1, 4, 8, 3, 3};
  Tensor5D a = random_normal(s, 3);
  Tensor5D b = random_normal(s, 4);
  Tensor5D sum(s);
  for (std::int64_t i = 0; i < sum.size(); ++i)
    sum.data()[i] = 2.0 * a.data()[i] + b.data()[i];

  Tensor5D lhs = temporal_shift(sum, cfg);
  Tensor5D sa = temporal_shift(a, cfg);
  Tensor5D sb = temporal_shift(b, cfg);
  for (std::int64_t i = 0; i < lhs.size(); ++i)
    CHECK(lhs.data()[i] == 2.0 * sa.data()[i] + sb.data()[i]);
}

TEST_CASE("parallel conv matches the serial reference bitwise") {
  struct Case {
    Shape5D in;
    std::int64_t c_out;
    ConvGeometry g;
  };
  std::vector<Case> cases = {
      {{1, 1, 3, 8, 8}, 4, {{1, 3, 3}, {1, 1, 1}, {0, 1, 1}}},
      {{2, 1, 2, 9, 7}, 3, {{1, 3, 3}, {1, 2, 2}, {0, 1, 1}}},
      {{1, 1, 1, 11, 11}, 2, {{1, 7, 7}, {1, 2, 2}, {0, 3, 3}}},
      {{1, 1, 4, 5, 5}, 6, {{1, 1, 1}, {1, 1, 1}, {0, 0, 0}}},
      {{1, 6, 3, 6, 6}, 4, {{3, 3, 3}, {1, 1, 1}, {1, 1, 1}}},
      {{1, 8, 2, 7, 7}, 3, {{3, 3, 3}, {2, 2, 2}, {1, 1, 1}}},
      {{2, 5, 2, 5, 5}, 2, {{3, 1, 1}, {1, 1, 1}, {1, 0, 0}}},
      {{1, 9, 3, 12, 12}, 4, {{5, 7, 7}, {2, 2, 2}, {2, 3, 3}}},
      {{1, 4, 8, 4, 4}, 8, {{1, 1, 1}, {1, 2, 2}, {0, 0, 0}}},
      {{1, 7, 2, 3, 3}, 2, {{7, 3, 3}, {1, 1, 1}, {3, 1, 1}}},
  };
  std::uint64_t seed = 100;
  for (const Case& c : cases) {
    for (int rep = 0; rep < 2; ++rep) {
      Tensor5D x = random_normal(c.in, ++seed);
      ConvWeights w = random_weights(c.c_out, c.in.c, c.g.kernel, ++seed);
      Tensor5D got = conv_forward(x, w, c.g);
      Tensor5D want = ref::conv_forward(x, w, c.g);
      CHECK(got.shape() == want.shape());
      CHECK(max_abs_diff(got, want) == 0.0);
    }
  }
}

TEST_CASE("a kt=1 3D conv equals the 2D conv applied per frame") {
  Shape5D in{1, 4, 3, 8, 8};
  ConvGeometry g{{1, 3, 3}, {1, 2, 2}, {0, 1, 1}};
  Tensor5D x = random_normal(in, 21);
  ConvWeights w = random_weights(5, 3, g.kernel, 22);

  Tensor5D whole = conv_forward(x, w, g);

  for (std::int64_t t = 0; t < in.t; ++t) {
    Tensor5D frame(Shape5D{1, 1, in.c, in.h, in.w});
    for (std::int64_t c = 0; c < in.c; ++c)
      for (std::int64_t h = 0; h < in.h; ++h)
        for (std::int64_t ww = 0; ww < in.w; ++ww)
          frame.at(0, 0, c, h, ww) = x.at(0, t, c, h, ww);
    Tensor5D out = conv_forward(frame, w, g);
    for (std::int64_t c = 0; c < out.shape().c; ++c)
      for (std::int64_t h = 0; h < out.shape().h; ++h)
        for (std::int64_t ww = 0; ww < out.shape().w; ++ww)
          CHECK(out.at(0, 0, c, h, ww) == whole.at(0, t, c, h, ww));
  }
}

TEST_CASE("conv backward is the adjoint of conv forward") {
  struct Case {
    Shape5D in;
    std::int64_t c_out;
    ConvGeometry g;
  };
  std::vector<Case> cases = {
      {{1, 1, 3, 8, 8}, 4, {{1, 3, 3}, {1, 1, 1}, {0, 1, 1}}},
      {{1, 6, 3, 6, 6}, 4, {{3, 3, 3}, {2, 2, 2}, {1, 1, 1}}},
      {{2, 5, 2, 5, 5}, 3, {{3, 1, 1}, {1, 1, 1}, {1, 0, 0}}},
      {{1, 8, 2, 9, 9}, 2, {{5, 3, 3}, {2, 2, 2}, {2, 1, 1}}},
  };
  std::uint64_t seed = 300;
  for (const Case& c : cases) {
    Tensor5D x = random_normal(c.in, ++seed);
    ConvWeights w = random_weights(c.c_out, c.in.c, c.g.kernel, ++seed, /*with_bias=*/false);
    Tensor5D fx = conv_forward(x, w, c.g);
    Tensor5D y = random_normal(fx.shape(), ++seed);
    ConvGrads grads = conv_backward(x, w, c.g, y);

    // Linear in x with zero bias: <conv(x), y> == <x, grad_x>.
    CHECK(rel(dot(fx, y), dot(x, grads.grad_x)) < 1e-12);

    // Linear in the weights: <conv(x; d), y> == <d, grad_w> for any direction
    // d over weights and bias.
    ConvWeights d = random_weights(c.c_out, c.in.c, c.g.kernel, ++seed);
    CHECK(rel(dot(conv_forward(x, d, c.g), y), dot_weights(d, grads.grad_w)) < 1e-12);
  }
}

TEST_CASE("max pool matches the reference and routes gradients to the argmax") {
  ConvGeometry g{{1, 3, 3}, {1, 2, 2}, {0, 1, 1}};
  Tensor5D x = random_uniform(Shape5D{1, 2, 3, 9, 9}, 41, -1.0, 1.0);
  Tensor5D fx = max_pool_forward(x, g);
  CHECK(max_abs_diff(fx, ref::max_pool_forward(x, g)) == 0.0);

  // Directional derivative against the backward pass; random doubles are
  // tie-free so small probes never change the argmax.
  Tensor5D y = random_normal(fx.shape(), 42);
  Tensor5D grad = max_pool_backward(x, g, y);
  Tensor5D d = random_normal(x.shape(), 43);
  double eps = 1e-6;
  Tensor5D xp = x;
  Tensor5D xm = x;
  for (std::int64_t i = 0; i < x.size(); ++i) {
    xp.data()[i] += eps * d.data()[i];
    xm.data()[i] -= eps * d.data()[i];
  }
  double fd = (dot(max_pool_forward(xp, g), y) - dot(max_pool_forward(xm, g), y)) / (2 * eps);
  // The quotient carries ~1e-9 of cancellation noise at this step size; a
  // misrouted gradient would be off by O(1).
  CHECK(rel(fd, dot(grad, d)) < 1e-8);
}

TEST_CASE("max pool temporal window with padding") {
  // Padded positions must never win even when every value is negative.
  ConvGeometry g{{3, 1, 1}, {2, 1, 1}, {1, 0, 0}};
  Tensor5D x(Shape5D{1, 4, 1, 1, 1});
  for (std::int64_t t = 0; t < 4; ++t) x.at(0, t, 0, 0, 0) = -10.0 - static_cast<double>(t);
  Tensor5D fx = max_pool_forward(x, g);
  CHECK(fx.shape().t == 2);
  CHECK(fx.at(0, 0, 0, 0, 0) == -10.0);
  CHECK(fx.at(0, 1, 0, 0, 0) == -11.0);
  CHECK(max_abs_diff(fx, ref::max_pool_forward(x, g)) == 0.0);
}

TEST_CASE("max pool ties route the gradient to the first element in scan order") {
  ConvGeometry g{{1, 2, 2}, {1, 2, 2}, {0, 0, 0}};
  Tensor5D x(Shape5D{1, 1, 1, 2, 2}, 5.0);  // all four tie
  Tensor5D y(Shape5D{1, 1, 1, 1, 1});
  y.at(0, 0, 0, 0, 0) = 1.0;
  Tensor5D grad = max_pool_backward(x, g, y);
  CHECK(grad.at(0, 0, 0, 0, 0) == 1.0);
  CHECK(grad.at(0, 0, 0, 0, 1) == 0.0);
  CHECK(grad.at(0, 0, 0, 1, 0) == 0.0);
  CHECK(grad.at(0, 0, 0, 1, 1) == 0.0);
}

TEST_CASE("global average pool and its adjoint") {
  Shape5D s{2, 3, 4, 5, 5};
  Tensor5D x = random_normal(s, 51);
  Tensor5D fx = global_avg_pool_forward(x);
  CHECK(fx.shape() == Shape5D{2, 1, 4, 1, 1});
  CHECK(max_abs_diff(fx, ref::global_avg_pool_forward(x)) == 0.0);

  Tensor5D y = random_normal(fx.shape(), 52);
  Tensor5D grad = global_avg_pool_backward(s, y);
  CHECK(rel(dot(fx, y), dot(x, grad)) < 1e-12);
}

TEST_CASE("fully connected layer and its adjoint") {
  Shape5D s{3, 1, 16, 1, 1};
  Tensor5D x = random_normal(s, 61);
  FcWeights w = FcWeights::zeros(5, 16);
  Tensor5D wf = random_normal(Shape5D{1, 1, 1, 1, 80}, 62);
  std::copy(wf.data().begin(), wf.data().end(), w.w.begin());

  Tensor5D fx = fc_forward(x, w);
  CHECK(max_abs_diff(fx, ref::fc_forward(x, w)) == 0.0);

  Tensor5D y = random_normal(fx.shape(), 63);
  FcGrads grads = fc_backward(x, w, y);
  CHECK(rel(dot(fx, y), dot(x, grads.grad_x)) < 1e-12);

  // Bias gradient: d loss / d bias[j] sums y over the batch.
  for (std::int64_t j = 0; j < 5; ++j) {
    double want = 0.0;
    for (std::int64_t n = 0; n < 3; ++n) want += y.at(n, 0, j, 0, 0);
    CHECK(rel(grads.grad_w.bias[j], want) < 1e-12);
  }
}

TEST_CASE("relu masks gradients by the sign of the input") {
  Tensor5D x(Shape5D{1, 1, 1, 1, 5});
  double vals[5] = {-2.0, -0.0, 0.0, 0.5, 3.0};
  for (int i = 0; i < 5; ++i) x.data()[i] = vals[i];
  Tensor5D fx = relu_forward(x);
  CHECK(fx.data()[0] == 0.0);
  CHECK(fx.data()[3] == 0.5);
  CHECK(fx.data()[4] == 3.0);
  CHECK(max_abs_diff(fx, ref::relu_forward(x)) == 0.0);

  Tensor5D g(Shape5D{1, 1, 1, 1, 5}, 7.0);
  Tensor5D back = relu_backward(x, g);
  CHECK(back.data()[0] == 0.0);
  CHECK(back.data()[1] == 0.0);  // relu'(0) = 0
  CHECK(back.data()[2] == 0.0);
  CHECK(back.data()[3] == 7.0);
  CHECK(back.data()[4] == 7.0);
}

TEST_CASE("results do not depend on the number of threads") {
  Shape5D in{1, 6, 3, 8, 8};
  ConvGeometry g{{3, 3, 3}, {1, 2, 2}, {1, 1, 1}};
  Tensor5D x = random_normal(in, 71);
  ConvWeights w = random_weights(4, 3, g.kernel, 72);
  Tensor5D fx = conv_forward(x, w, g);
  Tensor5D y = random_normal(fx.shape(), 73);

  int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  Tensor5D f1 = conv_forward(x, w, g);
  ConvGrads g1 = conv_backward(x, w, g, y);
  omp_set_num_threads(4);
  Tensor5D f4 = conv_forward(x, w, g);
  ConvGrads g4 = conv_backward(x, w, g, y);
  omp_set_num_threads(saved);

  CHECK(max_abs_diff(f1, f4) == 0.0);
  CHECK(max_abs_diff(g1.grad_x, g4.grad_x) == 0.0);
  CHECK(g1.grad_w.w == g4.grad_w.w);
  CHECK(g1.grad_w.bias == g4.grad_w.bias);
}

TEST_CASE("tensor files round-trip and use the documented byte layout") {
  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() / "vidperf_tensor_test.bin";

  Tensor5D x = Tensor5D::from_data(Shape5D{1, 1, 1, 1, 2}, {1.0, -2.5});
  write_tensor(x, path.string());

  std::ifstream f(path, std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
  f.close();
  // Five uint32 little-endian dims, then float64 little-endian payload.
  std::vector<unsigned char> want = {
      1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0,
      0, 0, 0, 0, 0, 0, 0xF0, 0x3F,   // 1.0
      0, 0, 0, 0, 0, 0, 0x04, 0xC0};  // -2.5
  CHECK(bytes == want);

  Tensor5D back = read_tensor(path.string());
  CHECK(back.shape() == x.shape());
  CHECK(max_abs_diff(back, x) == 0.0);

  Tensor5D big = random_normal(Shape5D{2, 3, 4, 5, 6}, 81);
  write_tensor(big, path.string());
  CHECK(read_tensor(path.string()) == big);

  // Truncated payload and trailing bytes are both malformed.
  std::ofstream trunc(path, std::ios::binary);
  trunc.write(reinterpret_cast<const char*>(want.data()), 24);
  trunc.close();
  CHECK_THROWS_AS(read_tensor(path.string()), ValidationError);

  std::ofstream extra(path, std::ios::binary);
  extra.write(reinterpret_cast<const char*>(want.data()),
              static_cast<std::streamsize>(want.size()));
  extra.put('\0');
  extra.close();
  CHECK_THROWS_AS(read_tensor(path.string()), ValidationError);

  fs::remove(path);
  CHECK_THROWS_AS(read_tensor(path.string()), ValidationError);
}

TEST_CASE("conv rejects mismatched weights and impossible windows") {
  Tensor5D x = random_normal(Shape5D{1, 1, 3, 4, 4}, 91);
  ConvWeights w = random_weights(2, 4, {1, 3, 3}, 92);  // c_in mismatch
  CHECK_THROWS_AS(conv_forward(x, w, ConvGeometry{{1, 3, 3}, {1, 1, 1}, {0, 1, 1}}),
                  ValidationError);
  ConvWeights w2 = random_weights(2, 3, {1, 7, 7}, 93);
  CHECK_THROWS_AS(conv_forward(x, w2, ConvGeometry{{1, 7, 7}, {1, 1, 1}, {0, 0, 0}}),
                  ValidationError);
}

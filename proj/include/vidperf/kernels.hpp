#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "vidperf/tensor.hpp"

namespace vidperf {

// Channels [0, F) read from t-1, channels [F, F+B) read from t+1, the rest
// pass through. Boundary frames read zeros.
struct ShiftConfig {
  Rational fraction_fwd{1, 8};  // shifted from the past
  Rational fraction_bwd{1, 8};  // shifted from the future

  static ShiftConfig symmetric(Rational fraction) { return {fraction, fraction}; }
};

// Throws ValidationError unless both splits are integral and together leave
// at least the pass-through channels non-negative.
void validate_shift(const ShiftConfig& cfg, std::int64_t channels);

Tensor5D temporal_shift(const Tensor5D& x, const ShiftConfig& cfg);
// Adjoint of the shift (it is linear): <shift(x), y> == <x, shift_adjoint(y)>.
Tensor5D temporal_shift_adjoint(const Tensor5D& y, const ShiftConfig& cfg);

struct ConvGeometry {
  std::array<int, 3> kernel{1, 1, 1};
  std::array<int, 3> stride{1, 1, 1};
  std::array<int, 3> padding{0, 0, 0};
};

// Weights laid out (c_out, c_in, kt, kh, kw) row-major; bias per output
// channel.
struct ConvWeights {
  std::int64_t c_out = 0;
  std::int64_t c_in = 0;
  std::array<int, 3> kernel{1, 1, 1};
  std::vector<double> w;
  std::vector<double> bias;

  static ConvWeights zeros(std::int64_t c_out, std::int64_t c_in, std::array<int, 3> kernel);
  std::int64_t weight_count() const;
};

// geometry.kernel must match weights.kernel. The kt == 1, temporal stride 1,
// no temporal padding case runs the dedicated per-frame 2D path.
Tensor5D conv_forward(const Tensor5D& x, const ConvWeights& weights, const ConvGeometry& geom);

struct ConvGrads {
  Tensor5D grad_x;
  ConvWeights grad_w;
};
ConvGrads conv_backward(const Tensor5D& x, const ConvWeights& weights, const ConvGeometry& geom,
                        const Tensor5D& grad_out);

// Max pooling over the (t, h, w) window; padded positions never win the max.
// Ties resolve to the first element in (t, h, w) scan order, and the backward
// pass routes the gradient to that same element.
Tensor5D max_pool_forward(const Tensor5D& x, const ConvGeometry& geom);
Tensor5D max_pool_backward(const Tensor5D& x, const ConvGeometry& geom, const Tensor5D& grad_out);

Tensor5D global_avg_pool_forward(const Tensor5D& x);
Tensor5D global_avg_pool_backward(const Shape5D& in_shape, const Tensor5D& grad_out);

struct FcWeights {
  std::int64_t c_out = 0;
  std::int64_t c_in = 0;
  std::vector<double> w;  // (c_out, c_in) row-major
  std::vector<double> bias;

  static FcWeights zeros(std::int64_t c_out, std::int64_t c_in);
};

// Input must be [N][1][C][1][1]; output is [N][1][c_out][1][1].
Tensor5D fc_forward(const Tensor5D& x, const FcWeights& weights);

struct FcGrads {
  Tensor5D grad_x;
  FcWeights grad_w;
};
FcGrads fc_backward(const Tensor5D& x, const FcWeights& weights, const Tensor5D& grad_out);

Tensor5D relu_forward(const Tensor5D& x);
Tensor5D relu_backward(const Tensor5D& x, const Tensor5D& grad_out);

Tensor5D add(const Tensor5D& a, const Tensor5D& b);

}  // namespace vidperf

#pragma once

#include <cstdint>

#include "vidperf/kernels.hpp"

namespace vidperf::ref {

// Serial reference kernels: plain nested loops, no OpenMP, no layout tricks.
// They exist to pin down the semantics of the parallel kernels and to tally
// multiply-accumulates for the cost model. Padded taps are multiplied as
// literal zeros and counted, so the tally matches the analytic
// out_elems * (kt * kh * kw * c_in).

Tensor5D conv_forward(const Tensor5D& x, const ConvWeights& weights, const ConvGeometry& geom,
                      std::uint64_t* mac_count = nullptr);
Tensor5D fc_forward(const Tensor5D& x, const FcWeights& weights,
                    std::uint64_t* mac_count = nullptr);
Tensor5D max_pool_forward(const Tensor5D& x, const ConvGeometry& geom);
Tensor5D global_avg_pool_forward(const Tensor5D& x);
Tensor5D relu_forward(const Tensor5D& x);
Tensor5D temporal_shift(const Tensor5D& x, const ShiftConfig& cfg);

}  // namespace vidperf::ref

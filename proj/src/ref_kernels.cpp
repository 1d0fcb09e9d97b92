#include "vidperf/ref_kernels.hpp"

#include <fmt/format.h>

namespace vidperf::ref {

namespace {

Shape5D windowed_shape(const Shape5D& in, const ConvGeometry& geom, std::int64_t c_out) {
  auto extent = [](std::int64_t n, int k, int s, int p) -> std::int64_t {
    if (k < 1 || s < 1 || p < 0 || n + 2 * p < k) {
      throw ValidationError("window does not fit the input");
    }
    return (n + 2 * p - k) / s + 1;
  };
  Shape5D out = in;
  out.t = extent(in.t, geom.kernel[0], geom.stride[0], geom.padding[0]);
  out.h = extent(in.h, geom.kernel[1], geom.stride[1], geom.padding[1]);
  out.w = extent(in.w, geom.kernel[2], geom.stride[2], geom.padding[2]);
  if (c_out > 0) out.c = c_out;
  return out;
}

}  // namespace

Tensor5D conv_forward(const Tensor5D& x, const ConvWeights& wts, const ConvGeometry& geom,
                      std::uint64_t* mac_count) {
  const Shape5D& in = x.shape();
  if (in.c != wts.c_in || wts.kernel != geom.kernel) {
    throw ValidationError("ref conv: weights do not match input");
  }
  Shape5D os = windowed_shape(in, geom, wts.c_out);
  Tensor5D out(os);
  std::uint64_t macs = 0;
  for (std::int64_t n = 0; n < os.n; ++n)
    for (std::int64_t to = 0; to < os.t; ++to)
      for (std::int64_t co = 0; co < os.c; ++co)
        for (std::int64_t ho = 0; ho < os.h; ++ho)
          for (std::int64_t wo = 0; wo < os.w; ++wo) {
            double acc = wts.bias[co];
            for (std::int64_t ci = 0; ci < in.c; ++ci)
              for (int dt = 0; dt < geom.kernel[0]; ++dt)
                for (int dh = 0; dh < geom.kernel[1]; ++dh)
                  for (int dw = 0; dw < geom.kernel[2]; ++dw) {
                    std::int64_t ti = to * geom.stride[0] - geom.padding[0] + dt;
                    std::int64_t hi = ho * geom.stride[1] - geom.padding[1] + dh;
                    std::int64_t wi = wo * geom.stride[2] - geom.padding[2] + dw;
                    bool inside = ti >= 0 && ti < in.t && hi >= 0 && hi < in.h && wi >= 0 &&
                                  wi < in.w;
                    // Padding taps multiply a literal zero so the MAC tally
                    // equals the analytic count.
                    double v = inside ? x.at(n, ti, ci, hi, wi) : 0.0;
                    std::int64_t wi_flat =
                        (((co * wts.c_in + ci) * geom.kernel[0] + dt) * geom.kernel[1] + dh) *
                            geom.kernel[2] +
                        dw;
                    acc += v * wts.w[wi_flat];
                    ++macs;
                  }
            out.at(n, to, co, ho, wo) = acc;
          }
  if (mac_count) *mac_count = macs;
  return out;
}

Tensor5D fc_forward(const Tensor5D& x, const FcWeights& wts, std::uint64_t* mac_count) {
  const Shape5D& in = x.shape();
  if (in.t != 1 || in.h != 1 || in.w != 1 || in.c != wts.c_in) {
    throw ValidationError("ref fc: bad input shape");
  }
  Tensor5D out(Shape5D{in.n, 1, wts.c_out, 1, 1});
  std::uint64_t macs = 0;
  for (std::int64_t n = 0; n < in.n; ++n)
    for (std::int64_t j = 0; j < wts.c_out; ++j) {
      double acc = wts.bias[j];
      for (std::int64_t i = 0; i < wts.c_in; ++i) {
        acc += wts.w[j * wts.c_in + i] * x.at(n, 0, i, 0, 0);
        ++macs;
      }
      out.at(n, 0, j, 0, 0) = acc;
    }
  if (mac_count) *mac_count = macs;
  return out;
}

Tensor5D max_pool_forward(const Tensor5D& x, const ConvGeometry& geom) {
  const Shape5D& in = x.shape();
  Shape5D os = windowed_shape(in, geom, 0);
  Tensor5D out(os);
  for (std::int64_t n = 0; n < os.n; ++n)
    for (std::int64_t to = 0; to < os.t; ++to)
      for (std::int64_t c = 0; c < os.c; ++c)
        for (std::int64_t ho = 0; ho < os.h; ++ho)
          for (std::int64_t wo = 0; wo < os.w; ++wo) {
            double best = 0.0;
            bool seen = false;
            for (int dt = 0; dt < geom.kernel[0]; ++dt)
              for (int dh = 0; dh < geom.kernel[1]; ++dh)
                for (int dw = 0; dw < geom.kernel[2]; ++dw) {
                  std::int64_t ti = to * geom.stride[0] - geom.padding[0] + dt;
                  std::int64_t hi = ho * geom.stride[1] - geom.padding[1] + dh;
                  std::int64_t wi = wo * geom.stride[2] - geom.padding[2] + dw;
                  if (ti < 0 || ti >= in.t || hi < 0 || hi >= in.h || wi < 0 || wi >= in.w) {
                    continue;
                  }
                  double v = x.at(n, ti, c, hi, wi);
                  if (!seen || v > best) {
                    best = v;
                    seen = true;
                  }
                }
            if (!seen) throw ValidationError("ref pool: empty window");
            out.at(n, to, c, ho, wo) = best;
          }
  return out;
}

Tensor5D global_avg_pool_forward(const Tensor5D& x) {
  const Shape5D& in = x.shape();
  Shape5D os = in;
  os.t = os.h = os.w = 1;
  Tensor5D out(os);
  for (std::int64_t n = 0; n < in.n; ++n)
    for (std::int64_t c = 0; c < in.c; ++c) {
      double acc = 0.0;
      for (std::int64_t t = 0; t < in.t; ++t)
        for (std::int64_t h = 0; h < in.h; ++h)
          for (std::int64_t w = 0; w < in.w; ++w) acc += x.at(n, t, c, h, w);
      out.at(n, 0, c, 0, 0) = acc / (static_cast<double>(in.t) * in.h * in.w);
    }
  return out;
}

Tensor5D relu_forward(const Tensor5D& x) {
  Tensor5D out(x.shape());
  for (std::int64_t i = 0; i < x.size(); ++i) {
    out.data()[i] = x.data()[i] > 0.0 ? x.data()[i] : 0.0;
  }
  return out;
}

Tensor5D temporal_shift(const Tensor5D& x, const ShiftConfig& cfg) {
  const Shape5D& s = x.shape();
  validate_shift(cfg, s.c);
  std::int64_t fwd = exact_multiple(cfg.fraction_fwd, s.c);
  std::int64_t bwd = exact_multiple(cfg.fraction_bwd, s.c);
  Tensor5D out(s);
  for (std::int64_t n = 0; n < s.n; ++n)
    for (std::int64_t t = 0; t < s.t; ++t)
      for (std::int64_t c = 0; c < s.c; ++c) {
        std::int64_t src = c < fwd ? t - 1 : (c < fwd + bwd ? t + 1 : t);
        if (src < 0 || src >= s.t) continue;
        for (std::int64_t h = 0; h < s.h; ++h)
          for (std::int64_t w = 0; w < s.w; ++w) out.at(n, t, c, h, w) = x.at(n, src, c, h, w);
      }
  return out;
}

}  // namespace vidperf::ref

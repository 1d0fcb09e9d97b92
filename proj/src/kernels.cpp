#include "vidperf/kernels.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cassert>

namespace vidperf {

namespace {

PrimOp conv_primop(const ConvWeights& wts, const ConvGeometry& geom) {
  PrimOp op;
  op.kind = LayerKind::Conv3D;
  op.kernel = geom.kernel;
  op.stride = geom.stride;
  op.padding = geom.padding;
  op.channels_out = wts.c_out;
  return op;
}

void check_conv_args(const Tensor5D& x, const ConvWeights& wts, const ConvGeometry& geom) {
  if (wts.kernel != geom.kernel) {
    throw ValidationError("conv weights and geometry disagree on the kernel");
  }
  if (x.shape().c != wts.c_in) {
    throw ValidationError(
        fmt::format("conv expects {} input channels, tensor has {}", wts.c_in, x.shape().c));
  }
  if (static_cast<std::int64_t>(wts.w.size()) != wts.weight_count() ||
      static_cast<std::int64_t>(wts.bias.size()) != wts.c_out) {
    throw ValidationError("conv weight buffers have the wrong size");
  }
}

inline std::int64_t widx(const ConvWeights& wts, std::int64_t co, std::int64_t ci, int dt,
                         int dh, int dw) {
  return (((co * wts.c_in + ci) * wts.kernel[0] + dt) * wts.kernel[1] + dh) * wts.kernel[2] + dw;
}

// Output positions along one axis whose window covers input position i.
struct WindowRange {
  std::int64_t lo, hi;  // half-open
};
inline WindowRange covering_windows(std::int64_t i, int kernel, int stride, int padding,
                                    std::int64_t out_extent) {
  // Output o covers input i when o*stride - padding <= i < o*stride - padding + kernel.
  std::int64_t first = i + padding - kernel + 1;
  std::int64_t lo = first > 0 ? (first + stride - 1) / stride : 0;
  std::int64_t hi = (i + padding) / stride + 1;
  return {lo, std::min(hi, out_extent)};
}

}  // namespace

ConvWeights ConvWeights::zeros(std::int64_t c_out, std::int64_t c_in, std::array<int, 3> kernel) {
  ConvWeights w;
  w.c_out = c_out;
  w.c_in = c_in;
  w.kernel = kernel;
  w.w.assign(static_cast<std::size_t>(c_out * c_in * kernel[0] * kernel[1] * kernel[2]), 0.0);
  w.bias.assign(static_cast<std::size_t>(c_out), 0.0);
  return w;
}

std::int64_t ConvWeights::weight_count() const {
  return c_out * c_in * kernel[0] * kernel[1] * kernel[2];
}

FcWeights FcWeights::zeros(std::int64_t c_out, std::int64_t c_in) {
  FcWeights w;
  w.c_out = c_out;
  w.c_in = c_in;
  w.w.assign(static_cast<std::size_t>(c_out * c_in), 0.0);
  w.bias.assign(static_cast<std::size_t>(c_out), 0.0);
  return w;
}

// ---------------------------------------------------------------------------
// Temporal shift

void validate_shift(const ShiftConfig& cfg, std::int64_t channels) {
  for (const Rational& f : {cfg.fraction_fwd, cfg.fraction_bwd}) {
    if (f.num < 0) throw ValidationError("shift fraction must be non-negative");
    if (!divides_evenly(f, channels)) {
      throw ValidationError(fmt::format("shift fraction {} does not split {} channels evenly",
                                        to_string(f), channels));
    }
  }
  std::int64_t fwd = exact_multiple(cfg.fraction_fwd, channels);
  std::int64_t bwd = exact_multiple(cfg.fraction_bwd, channels);
  if (fwd + bwd > channels) {
    throw ValidationError(fmt::format("shift splits {}+{} exceed {} channels", fwd, bwd, channels));
  }
}

Tensor5D temporal_shift(const Tensor5D& x, const ShiftConfig& cfg) {
  const Shape5D& s = x.shape();
  validate_shift(cfg, s.c);
  std::int64_t fwd = exact_multiple(cfg.fraction_fwd, s.c);
  std::int64_t bwd = exact_multiple(cfg.fraction_bwd, s.c);
  Tensor5D out(s);
#pragma omp parallel for collapse(3)
  for (std::int64_t n = 0; n < s.n; ++n) {
    for (std::int64_t t = 0; t < s.t; ++t) {
      for (std::int64_t c = 0; c < s.c; ++c) {
        std::int64_t src_t;
        if (c < fwd) {
          src_t = t - 1;  // receives the past frame
        } else if (c < fwd + bwd) {
          src_t = t + 1;  // receives the future frame
        } else {
          src_t = t;
        }
        if (src_t < 0 || src_t >= s.t) continue;  // boundary stays zero
        for (std::int64_t h = 0; h < s.h; ++h) {
          for (std::int64_t w = 0; w < s.w; ++w) {
            out.at(n, t, c, h, w) = x.at(n, src_t, c, h, w);
          }
        }
      }
    }
  }
  return out;
}

Tensor5D temporal_shift_adjoint(const Tensor5D& y, const ShiftConfig& cfg) {
  // The shift moves data forward/backward in time, so the adjoint moves the
  // cotangent the opposite way on the same channel ranges.
  const Shape5D& s = y.shape();
  validate_shift(cfg, s.c);
  std::int64_t fwd = exact_multiple(cfg.fraction_fwd, s.c);
  std::int64_t bwd = exact_multiple(cfg.fraction_bwd, s.c);
  Tensor5D out(s);
#pragma omp parallel for collapse(3)
  for (std::int64_t n = 0; n < s.n; ++n) {
    for (std::int64_t t = 0; t < s.t; ++t) {
      for (std::int64_t c = 0; c < s.c; ++c) {
        std::int64_t src_t;
        if (c < fwd) {
          src_t = t + 1;
        } else if (c < fwd + bwd) {
          src_t = t - 1;
        } else {
          src_t = t;
        }
        if (src_t < 0 || src_t >= s.t) continue;
        for (std::int64_t h = 0; h < s.h; ++h) {
          for (std::int64_t w = 0; w < s.w; ++w) {
            out.at(n, t, c, h, w) = y.at(n, src_t, c, h, w);
          }
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Convolution

Tensor5D conv_forward(const Tensor5D& x, const ConvWeights& wts, const ConvGeometry& geom) {
  check_conv_args(x, wts, geom);
  const Shape5D& in = x.shape();
  Shape5D os = primop_output_shape(conv_primop(wts, geom), in);
  Tensor5D out(os);
  const int kt = geom.kernel[0], kh = geom.kernel[1], kw = geom.kernel[2];
  const int st = geom.stride[0], sh = geom.stride[1], sw = geom.stride[2];
  const int pt = geom.padding[0], ph = geom.padding[1], pw = geom.padding[2];

  bool frame_local = kt == 1 && st == 1 && pt == 0;
  if (frame_local) {
    // Per-frame 2D path. The accumulation order matches the 3D path with
    // dt pinned to 0, so a kt=1 3D conv is bit-identical.
#pragma omp parallel for collapse(3)
    for (std::int64_t n = 0; n < os.n; ++n) {
      for (std::int64_t t = 0; t < os.t; ++t) {
        for (std::int64_t co = 0; co < os.c; ++co) {
          for (std::int64_t ho = 0; ho < os.h; ++ho) {
            for (std::int64_t wo = 0; wo < os.w; ++wo) {
              double acc = wts.bias[co];
              for (std::int64_t ci = 0; ci < in.c; ++ci) {
                for (int dh = 0; dh < kh; ++dh) {
                  std::int64_t hi = ho * sh - ph + dh;
                  if (hi < 0 || hi >= in.h) continue;
                  for (int dw = 0; dw < kw; ++dw) {
                    std::int64_t wi = wo * sw - pw + dw;
                    if (wi < 0 || wi >= in.w) continue;
                    acc += x.at(n, t, ci, hi, wi) * wts.w[widx(wts, co, ci, 0, dh, dw)];
                  }
                }
              }
              out.at(n, t, co, ho, wo) = acc;
            }
          }
        }
      }
    }
    return out;
  }

#pragma omp parallel for collapse(3)
  for (std::int64_t n = 0; n < os.n; ++n) {
    for (std::int64_t to = 0; to < os.t; ++to) {
      for (std::int64_t co = 0; co < os.c; ++co) {
        for (std::int64_t ho = 0; ho < os.h; ++ho) {
          for (std::int64_t wo = 0; wo < os.w; ++wo) {
            double acc = wts.bias[co];
            for (std::int64_t ci = 0; ci < in.c; ++ci) {
              for (int dt = 0; dt < kt; ++dt) {
                std::int64_t ti = to * st - pt + dt;
                if (ti < 0 || ti >= in.t) continue;
                for (int dh = 0; dh < kh; ++dh) {
                  std::int64_t hi = ho * sh - ph + dh;
                  if (hi < 0 || hi >= in.h) continue;
                  for (int dw = 0; dw < kw; ++dw) {
                    std::int64_t wi = wo * sw - pw + dw;
                    if (wi < 0 || wi >= in.w) continue;
                    acc += x.at(n, ti, ci, hi, wi) * wts.w[widx(wts, co, ci, dt, dh, dw)];
                  }
                }
              }
            }
            out.at(n, to, co, ho, wo) = acc;
          }
        }
      }
    }
  }
  return out;
}

ConvGrads conv_backward(const Tensor5D& x, const ConvWeights& wts, const ConvGeometry& geom,
                        const Tensor5D& grad_out) {
  check_conv_args(x, wts, geom);
  const Shape5D& in = x.shape();
  Shape5D os = primop_output_shape(conv_primop(wts, geom), in);
  if (grad_out.shape() != os) throw ValidationError("conv_backward: grad_out shape mismatch");

  const int kt = geom.kernel[0], kh = geom.kernel[1], kw = geom.kernel[2];
  const int st = geom.stride[0], sh = geom.stride[1], sw = geom.stride[2];
  const int pt = geom.padding[0], ph = geom.padding[1], pw = geom.padding[2];

  ConvGrads grads{Tensor5D(in), ConvWeights::zeros(wts.c_out, wts.c_in, wts.kernel)};

  // Input gradient, gathered per input element so threads never share a sum.
#pragma omp parallel for collapse(3)
  for (std::int64_t n = 0; n < in.n; ++n) {
    for (std::int64_t ti = 0; ti < in.t; ++ti) {
      for (std::int64_t ci = 0; ci < in.c; ++ci) {
        for (std::int64_t hi = 0; hi < in.h; ++hi) {
          for (std::int64_t wi = 0; wi < in.w; ++wi) {
            double acc = 0.0;
            for (std::int64_t co = 0; co < wts.c_out; ++co) {
              for (int dt = 0; dt < kt; ++dt) {
                std::int64_t tnum = ti + pt - dt;
                if (tnum < 0 || tnum % st != 0) continue;
                std::int64_t to = tnum / st;
                if (to >= os.t) continue;
                for (int dh = 0; dh < kh; ++dh) {
                  std::int64_t hnum = hi + ph - dh;
                  if (hnum < 0 || hnum % sh != 0) continue;
                  std::int64_t ho = hnum / sh;
                  if (ho >= os.h) continue;
                  for (int dw = 0; dw < kw; ++dw) {
                    std::int64_t wnum = wi + pw - dw;
                    if (wnum < 0 || wnum % sw != 0) continue;
                    std::int64_t wo = wnum / sw;
                    if (wo >= os.w) continue;
                    acc += grad_out.at(n, to, co, ho, wo) * wts.w[widx(wts, co, ci, dt, dh, dw)];
                  }
                }
              }
            }
            grads.grad_x.at(n, ti, ci, hi, wi) = acc;
          }
        }
      }
    }
  }

  // Weight gradient, one (co, ci) slab per iteration.
#pragma omp parallel for collapse(2)
  for (std::int64_t co = 0; co < wts.c_out; ++co) {
    for (std::int64_t ci = 0; ci < wts.c_in; ++ci) {
      for (int dt = 0; dt < kt; ++dt) {
        for (int dh = 0; dh < kh; ++dh) {
          for (int dw = 0; dw < kw; ++dw) {
            double acc = 0.0;
            for (std::int64_t n = 0; n < os.n; ++n) {
              for (std::int64_t to = 0; to < os.t; ++to) {
                std::int64_t ti = to * st - pt + dt;
                if (ti < 0 || ti >= in.t) continue;
                for (std::int64_t ho = 0; ho < os.h; ++ho) {
                  std::int64_t hi = ho * sh - ph + dh;
                  if (hi < 0 || hi >= in.h) continue;
                  for (std::int64_t wo = 0; wo < os.w; ++wo) {
                    std::int64_t wi = wo * sw - pw + dw;
                    if (wi < 0 || wi >= in.w) continue;
                    acc += grad_out.at(n, to, co, ho, wo) * x.at(n, ti, ci, hi, wi);
                  }
                }
              }
            }
            grads.grad_w.w[widx(wts, co, ci, dt, dh, dw)] = acc;
          }
        }
      }
    }
  }

#pragma omp parallel for
  for (std::int64_t co = 0; co < wts.c_out; ++co) {
    double acc = 0.0;
    for (std::int64_t n = 0; n < os.n; ++n) {
      for (std::int64_t to = 0; to < os.t; ++to) {
        for (std::int64_t ho = 0; ho < os.h; ++ho) {
          for (std::int64_t wo = 0; wo < os.w; ++wo) {
            acc += grad_out.at(n, to, co, ho, wo);
          }
        }
      }
    }
    grads.grad_w.bias[co] = acc;
  }
  return grads;
}

// ---------------------------------------------------------------------------
// Pooling

namespace {

Shape5D pool_out_shape(const Tensor5D& x, const ConvGeometry& geom) {
  const Shape5D& in = x.shape();
  for (int d = 0; d < 3; ++d) {
    if (geom.kernel[d] < 1 || geom.stride[d] < 1 || geom.padding[d] < 0 ||
        geom.padding[d] >= geom.kernel[d]) {
      throw ValidationError("bad pooling window");
    }
  }
  Shape5D out = in;
  auto extent = [](std::int64_t n, int k, int s, int p) { return (n + 2 * p - k) / s + 1; };
  out.t = extent(in.t, geom.kernel[0], geom.stride[0], geom.padding[0]);
  out.h = extent(in.h, geom.kernel[1], geom.stride[1], geom.padding[1]);
  out.w = extent(in.w, geom.kernel[2], geom.stride[2], geom.padding[2]);
  if (!out.positive()) throw ValidationError("pooling window does not fit the input");
  return out;
}

}  // namespace

Tensor5D max_pool_forward(const Tensor5D& x, const ConvGeometry& geom) {
  const Shape5D& in = x.shape();
  Shape5D os = pool_out_shape(x, geom);
  Tensor5D out(os);
#pragma omp parallel for collapse(3)
  for (std::int64_t n = 0; n < os.n; ++n) {
    for (std::int64_t to = 0; to < os.t; ++to) {
      for (std::int64_t c = 0; c < os.c; ++c) {
        for (std::int64_t ho = 0; ho < os.h; ++ho) {
          for (std::int64_t wo = 0; wo < os.w; ++wo) {
            double best = 0.0;
            bool seen = false;
            for (int dt = 0; dt < geom.kernel[0]; ++dt) {
              std::int64_t ti = to * geom.stride[0] - geom.padding[0] + dt;
              if (ti < 0 || ti >= in.t) continue;
              for (int dh = 0; dh < geom.kernel[1]; ++dh) {
                std::int64_t hi = ho * geom.stride[1] - geom.padding[1] + dh;
                if (hi < 0 || hi >= in.h) continue;
                for (int dw = 0; dw < geom.kernel[2]; ++dw) {
                  std::int64_t wi = wo * geom.stride[2] - geom.padding[2] + dw;
                  if (wi < 0 || wi >= in.w) continue;
                  double v = x.at(n, ti, c, hi, wi);
                  if (!seen || v > best) {
                    best = v;
                    seen = true;
                  }
                }
              }
            }
            assert(seen);
            out.at(n, to, c, ho, wo) = best;
          }
        }
      }
    }
  }
  return out;
}

Tensor5D max_pool_backward(const Tensor5D& x, const ConvGeometry& geom,
                           const Tensor5D& grad_out) {
  const Shape5D& in = x.shape();
  Shape5D os = pool_out_shape(x, geom);
  if (grad_out.shape() != os) throw ValidationError("max_pool_backward: grad_out shape mismatch");
  Tensor5D gx(in);

  // For every input element, re-find the argmax of each window that covers
  // it; the element collects the window's gradient when it is that argmax.
  // Gathering keeps the loop race-free and the result independent of the
  // thread count.
#pragma omp parallel for collapse(3)
  for (std::int64_t n = 0; n < in.n; ++n) {
    for (std::int64_t ti = 0; ti < in.t; ++ti) {
      for (std::int64_t c = 0; c < in.c; ++c) {
        for (std::int64_t hi = 0; hi < in.h; ++hi) {
          for (std::int64_t wi = 0; wi < in.w; ++wi) {
            double acc = 0.0;
            WindowRange rt = covering_windows(ti, geom.kernel[0], geom.stride[0], geom.padding[0],
                                              os.t);
            WindowRange rh = covering_windows(hi, geom.kernel[1], geom.stride[1], geom.padding[1],
                                              os.h);
            WindowRange rw = covering_windows(wi, geom.kernel[2], geom.stride[2], geom.padding[2],
                                              os.w);
            for (std::int64_t to = rt.lo; to < rt.hi; ++to) {
              for (std::int64_t ho = rh.lo; ho < rh.hi; ++ho) {
                for (std::int64_t wo = rw.lo; wo < rw.hi; ++wo) {
                  std::int64_t at = -1, ah = -1, aw = -1;
                  double best = 0.0;
                  bool seen = false;
                  for (int dt = 0; dt < geom.kernel[0]; ++dt) {
                    std::int64_t t2 = to * geom.stride[0] - geom.padding[0] + dt;
                    if (t2 < 0 || t2 >= in.t) continue;
                    for (int dh = 0; dh < geom.kernel[1]; ++dh) {
                      std::int64_t h2 = ho * geom.stride[1] - geom.padding[1] + dh;
                      if (h2 < 0 || h2 >= in.h) continue;
                      for (int dw = 0; dw < geom.kernel[2]; ++dw) {
                        std::int64_t w2 = wo * geom.stride[2] - geom.padding[2] + dw;
                        if (w2 < 0 || w2 >= in.w) continue;
                        double v = x.at(n, t2, c, h2, w2);
                        if (!seen || v > best) {
                          best = v;
                          at = t2;
                          ah = h2;
                          aw = w2;
                          seen = true;
                        }
                      }
                    }
                  }
                  if (at == ti && ah == hi && aw == wi) {
                    acc += grad_out.at(n, to, c, ho, wo);
                  }
                }
              }
            }
            gx.at(n, ti, c, hi, wi) = acc;
          }
        }
      }
    }
  }
  return gx;
}

Tensor5D global_avg_pool_forward(const Tensor5D& x) {
  const Shape5D& in = x.shape();
  Shape5D os = in;
  os.t = os.h = os.w = 1;
  Tensor5D out(os);
  double denom = static_cast<double>(in.t) * in.h * in.w;
#pragma omp parallel for collapse(2)
  for (std::int64_t n = 0; n < in.n; ++n) {
    for (std::int64_t c = 0; c < in.c; ++c) {
      double acc = 0.0;
      for (std::int64_t t = 0; t < in.t; ++t) {
        for (std::int64_t h = 0; h < in.h; ++h) {
          for (std::int64_t w = 0; w < in.w; ++w) {
            acc += x.at(n, t, c, h, w);
          }
        }
      }
      out.at(n, 0, c, 0, 0) = acc / denom;
    }
  }
  return out;
}

Tensor5D global_avg_pool_backward(const Shape5D& in_shape, const Tensor5D& grad_out) {
  if (grad_out.shape().t != 1 || grad_out.shape().h != 1 || grad_out.shape().w != 1 ||
      grad_out.shape().n != in_shape.n || grad_out.shape().c != in_shape.c) {
    throw ValidationError("global_avg_pool_backward: grad_out shape mismatch");
  }
  Tensor5D gx(in_shape);
  double denom = static_cast<double>(in_shape.t) * in_shape.h * in_shape.w;
#pragma omp parallel for collapse(2)
  for (std::int64_t n = 0; n < in_shape.n; ++n) {
    for (std::int64_t c = 0; c < in_shape.c; ++c) {
      double g = grad_out.at(n, 0, c, 0, 0) / denom;
      for (std::int64_t t = 0; t < in_shape.t; ++t) {
        for (std::int64_t h = 0; h < in_shape.h; ++h) {
          for (std::int64_t w = 0; w < in_shape.w; ++w) {
            gx.at(n, t, c, h, w) = g;
          }
        }
      }
    }
  }
  return gx;
}

// ---------------------------------------------------------------------------
// Fully connected, ReLU, add

namespace {

void check_fc_args(const Tensor5D& x, const FcWeights& wts) {
  const Shape5D& s = x.shape();
  if (s.t != 1 || s.h != 1 || s.w != 1) {
    throw ValidationError("fc expects [N][1][C][1][1] input");
  }
  if (s.c != wts.c_in) {
    throw ValidationError(
        fmt::format("fc expects {} input features, tensor has {}", wts.c_in, s.c));
  }
  if (static_cast<std::int64_t>(wts.w.size()) != wts.c_out * wts.c_in ||
      static_cast<std::int64_t>(wts.bias.size()) != wts.c_out) {
    throw ValidationError("fc weight buffers have the wrong size");
  }
}

}  // namespace

Tensor5D fc_forward(const Tensor5D& x, const FcWeights& wts) {
  check_fc_args(x, wts);
  const Shape5D& in = x.shape();
  Tensor5D out(Shape5D{in.n, 1, wts.c_out, 1, 1});
#pragma omp parallel for collapse(2)
  for (std::int64_t n = 0; n < in.n; ++n) {
    for (std::int64_t j = 0; j < wts.c_out; ++j) {
      double acc = wts.bias[j];
      for (std::int64_t i = 0; i < wts.c_in; ++i) {
        acc += wts.w[j * wts.c_in + i] * x.at(n, 0, i, 0, 0);
      }
      out.at(n, 0, j, 0, 0) = acc;
    }
  }
  return out;
}

FcGrads fc_backward(const Tensor5D& x, const FcWeights& wts, const Tensor5D& grad_out) {
  check_fc_args(x, wts);
  if (grad_out.shape().c != wts.c_out || grad_out.shape().n != x.shape().n) {
    throw ValidationError("fc_backward: grad_out shape mismatch");
  }
  const Shape5D& in = x.shape();
  FcGrads grads{Tensor5D(in), FcWeights::zeros(wts.c_out, wts.c_in)};
#pragma omp parallel for collapse(2)
  for (std::int64_t n = 0; n < in.n; ++n) {
    for (std::int64_t i = 0; i < wts.c_in; ++i) {
      double acc = 0.0;
      for (std::int64_t j = 0; j < wts.c_out; ++j) {
        acc += grad_out.at(n, 0, j, 0, 0) * wts.w[j * wts.c_in + i];
      }
      grads.grad_x.at(n, 0, i, 0, 0) = acc;
    }
  }
#pragma omp parallel for collapse(2)
  for (std::int64_t j = 0; j < wts.c_out; ++j) {
    for (std::int64_t i = 0; i < wts.c_in; ++i) {
      double acc = 0.0;
      for (std::int64_t n = 0; n < in.n; ++n) {
        acc += grad_out.at(n, 0, j, 0, 0) * x.at(n, 0, i, 0, 0);
      }
      grads.grad_w.w[j * wts.c_in + i] = acc;
    }
  }
#pragma omp parallel for
  for (std::int64_t j = 0; j < wts.c_out; ++j) {
    double acc = 0.0;
    for (std::int64_t n = 0; n < in.n; ++n) acc += grad_out.at(n, 0, j, 0, 0);
    grads.grad_w.bias[j] = acc;
  }
  return grads;
}

Tensor5D relu_forward(const Tensor5D& x) {
  Tensor5D out(x.shape());
  auto src = x.data();
  auto dst = out.data();
#pragma omp parallel for
  for (std::int64_t i = 0; i < x.size(); ++i) dst[i] = src[i] > 0.0 ? src[i] : 0.0;
  return out;
}

Tensor5D relu_backward(const Tensor5D& x, const Tensor5D& grad_out) {
  if (x.shape() != grad_out.shape()) throw ValidationError("relu_backward: shape mismatch");
  Tensor5D out(x.shape());
  auto xs = x.data();
  auto gs = grad_out.data();
  auto dst = out.data();
#pragma omp parallel for
  for (std::int64_t i = 0; i < x.size(); ++i) dst[i] = xs[i] > 0.0 ? gs[i] : 0.0;
  return out;
}

Tensor5D add(const Tensor5D& a, const Tensor5D& b) {
  if (a.shape() != b.shape()) throw ValidationError("add: shape mismatch");
  Tensor5D out(a.shape());
  auto da = a.data();
  auto db = b.data();
  auto dst = out.data();
#pragma omp parallel for
  for (std::int64_t i = 0; i < a.size(); ++i) dst[i] = da[i] + db[i];
  return out;
}

}  // namespace vidperf

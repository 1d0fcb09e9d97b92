#include "vidperf/net.hpp"

#include <fmt/format.h>

#include <cmath>
#include <random>

namespace vidperf {

namespace {

ConvGeometry geometry(const PrimOp& op) { return {op.kernel, op.stride, op.padding}; }

ConvWeights init_conv(const PrimOp& op, std::int64_t c_in, std::mt19937_64& rng) {
  ConvWeights w = ConvWeights::zeros(op.channels_out, c_in, op.kernel);
  double fan_in = static_cast<double>(c_in) * op.kernel[0] * op.kernel[1] * op.kernel[2];
  std::normal_distribution<double> wdist(0.0, std::sqrt(2.0 / fan_in));
  for (double& v : w.w) v = wdist(rng);
  std::normal_distribution<double> bdist(0.0, 0.1);
  for (double& v : w.bias) v = bdist(rng);
  return w;
}

FcWeights init_fc(const PrimOp& op, std::int64_t c_in, std::mt19937_64& rng) {
  FcWeights w = FcWeights::zeros(op.channels_out, c_in);
  std::normal_distribution<double> wdist(0.0, std::sqrt(2.0 / static_cast<double>(c_in)));
  for (double& v : w.w) v = wdist(rng);
  std::normal_distribution<double> bdist(0.0, 0.1);
  for (double& v : w.bias) v = bdist(rng);
  return w;
}

bool is_conv(const PrimOp& op) {
  return op.kind == LayerKind::Conv2D || op.kind == LayerKind::Conv3D;
}

}  // namespace

Network::Network(ArchSpec arch, std::uint64_t seed) : arch_(std::move(arch)) {
  validate_or_throw(arch_);
  std::mt19937_64 rng(seed);
  Shape5D cur = arch_.input_shape;
  for (const ExpandedStage& stage : expand(arch_)) {
    for (const ResidualUnit& ru : stage.units) {
      Unit u;
      u.stage = stage.name;
      u.ops = ru;
      Shape5D s = cur;
      for (const PrimOp& op : ru.main) {
        if (is_conv(op)) {
          u.conv.emplace_back(init_conv(op, s.c, rng));
        } else {
          u.conv.emplace_back(std::nullopt);
          if (op.kind == LayerKind::FullyConnected) u.fc = init_fc(op, s.c, rng);
        }
        s = primop_output_shape(op, s);
      }
      if (ru.projection) u.proj = init_conv(*ru.projection, cur.c, rng);
      cur = unit_output_shape(ru, cur);
      units_.push_back(std::move(u));
    }
  }
  for (Unit& u : units_) {
    auto add_conv = [&](std::optional<ConvWeights>& cw) {
      if (!cw) return;
      for (double& v : cw->w) flat_.push_back(&v);
      for (double& v : cw->bias) flat_.push_back(&v);
    };
    for (auto& cw : u.conv) add_conv(cw);
    add_conv(u.proj);
    if (u.fc) {
      for (double& v : u.fc->w) flat_.push_back(&v);
      for (double& v : u.fc->bias) flat_.push_back(&v);
    }
  }
}

std::vector<double> Network::param_vector() const {
  std::vector<double> out;
  out.reserve(flat_.size());
  for (double* p : flat_) out.push_back(*p);
  return out;
}

Tensor5D Network::run_unit(const Unit& unit, const Tensor5D& x,
                           std::vector<Tensor5D>* tape) const {
  Tensor5D cur = x;
  for (std::size_t i = 0; i < unit.ops.main.size(); ++i) {
    const PrimOp& op = unit.ops.main[i];
    if (tape) tape->push_back(cur);
    Tensor5D next;
    switch (op.kind) {
      case LayerKind::Conv2D:
      case LayerKind::Conv3D:
        next = conv_forward(cur, *unit.conv[i], geometry(op));
        break;
      case LayerKind::TemporalShift:
        next = temporal_shift(cur, ShiftConfig::symmetric(op.shift_fraction));
        break;
      case LayerKind::MaxPoolSpatial:
      case LayerKind::MaxPoolTemporal:
        next = max_pool_forward(cur, geometry(op));
        break;
      case LayerKind::AvgPoolGlobal:
        next = global_avg_pool_forward(cur);
        break;
      case LayerKind::FullyConnected:
        next = fc_forward(cur, *unit.fc);
        break;
      case LayerKind::ResBlockBottleneck:
        throw ValidationError("block leaked into the primitive executor");
    }
    if (op.relu_after) {
      if (tape) tape->push_back(next);
      next = relu_forward(next);
    }
    cur = std::move(next);
  }
  if (unit.ops.residual) {
    Tensor5D skip = unit.proj ? conv_forward(x, *unit.proj, geometry(*unit.ops.projection)) : x;
    Tensor5D pre = add(cur, skip);
    if (tape) tape->push_back(pre);
    cur = relu_forward(pre);
  }
  return cur;
}

Tensor5D Network::forward(const Tensor5D& x) const {
  const Shape5D& want = arch_.input_shape;
  const Shape5D& got = x.shape();
  if (got.t != want.t || got.c != want.c || got.h != want.h || got.w != want.w) {
    throw ValidationError(
        fmt::format("input t={} c={} h={} w={} does not match the architecture", got.t, got.c,
                    got.h, got.w));
  }
  Tensor5D cur = x;
  for (const Unit& u : units_) cur = run_unit(u, cur, nullptr);
  return cur;
}

double Network::loss(const Tensor5D& x) const {
  Tensor5D y = forward(x);
  double acc = 0.0;
  for (double v : y.data()) acc += v * v;
  return acc;
}

namespace {

// Gradient buffers shaped like one unit's parameters, flattened in the same
// order the constructor used.
struct UnitGrads {
  std::vector<std::optional<ConvWeights>> conv;
  std::optional<ConvWeights> proj;
  std::optional<FcWeights> fc;
};

}  // namespace

Network::Gradients Network::loss_gradients(const Tensor5D& x) const {
  // Forward, remembering per-unit inputs and tapes.
  std::vector<std::vector<Tensor5D>> tapes(units_.size());
  std::vector<Tensor5D> unit_inputs;
  Tensor5D cur = x;
  {
    const Shape5D& want = arch_.input_shape;
    if (cur.shape().t != want.t || cur.shape().c != want.c || cur.shape().h != want.h ||
        cur.shape().w != want.w) {
      throw ValidationError("input shape does not match the architecture");
    }
  }
  for (std::size_t ui = 0; ui < units_.size(); ++ui) {
    unit_inputs.push_back(cur);
    cur = run_unit(units_[ui], cur, &tapes[ui]);
  }

  Gradients result;
  for (double v : cur.data()) result.loss += v * v;

  Tensor5D g(cur.shape());
  for (std::int64_t i = 0; i < cur.size(); ++i) g.data()[i] = 2.0 * cur.data()[i];

  std::vector<UnitGrads> grads(units_.size());
  for (std::size_t ui = units_.size(); ui-- > 0;) {
    const Unit& u = units_[ui];
    std::vector<Tensor5D>& tape = tapes[ui];
    UnitGrads& ug = grads[ui];
    ug.conv.resize(u.conv.size());

    Tensor5D skip_grad;
    bool has_skip = false;
    if (u.ops.residual) {
      Tensor5D pre = std::move(tape.back());
      tape.pop_back();
      g = relu_backward(pre, g);
      skip_grad = g;
      has_skip = true;
    }

    for (std::size_t i = u.ops.main.size(); i-- > 0;) {
      const PrimOp& op = u.ops.main[i];
      if (op.relu_after) {
        Tensor5D pre = std::move(tape.back());
        tape.pop_back();
        g = relu_backward(pre, g);
      }
      Tensor5D xin = std::move(tape.back());
      tape.pop_back();
      switch (op.kind) {
        case LayerKind::Conv2D:
        case LayerKind::Conv3D: {
          ConvGrads cg = conv_backward(xin, *u.conv[i], geometry(op), g);
          ug.conv[i] = std::move(cg.grad_w);
          g = std::move(cg.grad_x);
          break;
        }
        case LayerKind::TemporalShift:
          g = temporal_shift_adjoint(g, ShiftConfig::symmetric(op.shift_fraction));
          break;
        case LayerKind::MaxPoolSpatial:
        case LayerKind::MaxPoolTemporal:
          g = max_pool_backward(xin, geometry(op), g);
          break;
        case LayerKind::AvgPoolGlobal:
          g = global_avg_pool_backward(xin.shape(), g);
          break;
        case LayerKind::FullyConnected: {
          FcGrads fg = fc_backward(xin, *u.fc, g);
          ug.fc = std::move(fg.grad_w);
          g = std::move(fg.grad_x);
          break;
        }
        case LayerKind::ResBlockBottleneck:
          throw ValidationError("block leaked into the primitive executor");
      }
    }

    if (has_skip) {
      if (u.proj) {
        ConvGrads pg =
            conv_backward(unit_inputs[ui], *u.proj, geometry(*u.ops.projection), skip_grad);
        ug.proj = std::move(pg.grad_w);
        g = add(g, pg.grad_x);
      } else {
        g = add(g, skip_grad);
      }
    }
  }

  result.input = std::move(g);
  result.params.reserve(flat_.size());
  for (std::size_t ui = 0; ui < units_.size(); ++ui) {
    const Unit& u = units_[ui];
    UnitGrads& ug = grads[ui];
    auto push_conv = [&](const std::optional<ConvWeights>& param,
                         const std::optional<ConvWeights>& grad) {
      if (!param) return;
      const ConvWeights& gw = grad ? *grad
                                   : ConvWeights::zeros(param->c_out, param->c_in, param->kernel);
      for (double v : gw.w) result.params.push_back(v);
      for (double v : gw.bias) result.params.push_back(v);
    };
    for (std::size_t i = 0; i < u.conv.size(); ++i) push_conv(u.conv[i], ug.conv[i]);
    push_conv(u.proj, ug.proj);
    if (u.fc) {
      const FcWeights& gw = ug.fc ? *ug.fc : FcWeights::zeros(u.fc->c_out, u.fc->c_in);
      for (double v : gw.w) result.params.push_back(v);
      for (double v : gw.bias) result.params.push_back(v);
    }
  }
  return result;
}

GradcheckResult gradcheck(const ArchSpec& arch, const Tensor5D& x, double eps,
                          std::uint64_t seed) {
  if (eps <= 0.0) throw ValidationError("gradcheck eps must be positive");
  Network net(arch, seed);
  std::int64_t scalars = net.param_count() + x.size();
  if (scalars > 10000) {
    throw ValidationError(fmt::format(
        "gradcheck wants desk-sized problems: {} scalars exceeds the 10^4 cap", scalars));
  }

  Network::Gradients analytic = net.loss_gradients(x);
  if (!std::isfinite(analytic.loss) || !analytic.input.all_finite()) {
    throw ValidationError("non-finite values in the analytic pass");
  }
  for (double v : analytic.params) {
    if (!std::isfinite(v)) throw ValidationError("non-finite parameter gradient");
  }

  auto rel_error = [](double a, double n) {
    double denom = std::max({std::abs(a), std::abs(n), 1e-3});
    return std::abs(a - n) / denom;
  };

  GradcheckResult result;
  auto probe = [&](double numeric, double analytic_v) {
    if (!std::isfinite(numeric)) throw ValidationError("non-finite finite-difference probe");
    result.max_rel_error = std::max(result.max_rel_error, rel_error(analytic_v, numeric));
    ++result.checked_scalars;
  };

  for (std::int64_t i = 0; i < net.param_count(); ++i) {
    double saved = net.get_param(i);
    net.set_param(i, saved + eps);
    double up = net.loss(x);
    net.set_param(i, saved - eps);
    double down = net.loss(x);
    net.set_param(i, saved);
    probe((up - down) / (2.0 * eps), analytic.params[static_cast<std::size_t>(i)]);
  }

  Tensor5D probe_x = x;
  for (std::int64_t i = 0; i < x.size(); ++i) {
    double saved = probe_x.data()[i];
    probe_x.data()[i] = saved + eps;
    double up = net.loss(probe_x);
    probe_x.data()[i] = saved - eps;
    double down = net.loss(probe_x);
    probe_x.data()[i] = saved;
    probe((up - down) / (2.0 * eps), analytic.input.data()[i]);
  }
  return result;
}

}  // namespace vidperf

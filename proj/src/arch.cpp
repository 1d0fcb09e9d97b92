#include "vidperf/arch.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace vidperf {

const char* to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv2D: return "conv2d";
    case LayerKind::Conv3D: return "conv3d";
    case LayerKind::TemporalShift: return "temporal-shift";
    case LayerKind::MaxPoolSpatial: return "max-pool-spatial";
    case LayerKind::MaxPoolTemporal: return "max-pool-temporal";
    case LayerKind::AvgPoolGlobal: return "avg-pool-global";
    case LayerKind::FullyConnected: return "fully-connected";
    case LayerKind::ResBlockBottleneck: return "res-block-bottleneck";
  }
  return "?";
}

LayerKind layer_kind_from_string(const std::string& text) {
  for (LayerKind k :
       {LayerKind::Conv2D, LayerKind::Conv3D, LayerKind::TemporalShift,
        LayerKind::MaxPoolSpatial, LayerKind::MaxPoolTemporal, LayerKind::AvgPoolGlobal,
        LayerKind::FullyConnected, LayerKind::ResBlockBottleneck}) {
    if (text == to_string(k)) return k;
  }
  throw ValidationError(fmt::format("unknown layer kind '{}'", text));
}

const char* to_string(InflationSpec::Target t) {
  switch (t) {
    case InflationSpec::Target::First1x1: return "first-1x1";
    case InflationSpec::Target::All3x3: return "all-3x3";
    case InflationSpec::Target::Conv1Stem: return "conv1-stem";
  }
  return "?";
}

const char* to_string(InflationSpec::ApplyTo a) {
  switch (a) {
    case InflationSpec::ApplyTo::EveryBlock: return "every-block";
    case InflationSpec::ApplyTo::EveryOtherBlock: return "every-other-block";
  }
  return "?";
}

const std::vector<std::string>& canonical_stage_names() {
  static const std::vector<std::string> names = {"conv1", "pool1",       "res2", "res3",
                                                 "res4",  "res5",        "global-pool", "fc"};
  return names;
}

// ---------------------------------------------------------------------------
// Presets

namespace {

LayerSpec conv_layer(LayerKind kind, std::array<int, 3> kernel, std::array<int, 3> stride,
                     std::array<int, 3> padding, std::int64_t channels_out) {
  LayerSpec l;
  l.kind = kind;
  l.kernel = kernel;
  l.stride = stride;
  l.padding = padding;
  l.channels_out = channels_out;
  return l;
}

LayerSpec spatial_pool_3x3_s2() {
  LayerSpec l;
  l.kind = LayerKind::MaxPoolSpatial;
  l.kernel = {1, 3, 3};
  l.stride = {1, 2, 2};
  l.padding = {0, 1, 1};
  return l;
}

LayerSpec temporal_pool_s2() {
  LayerSpec l;
  l.kind = LayerKind::MaxPoolTemporal;
  l.kernel = {3, 1, 1};
  l.stride = {2, 1, 1};
  l.padding = {1, 0, 0};
  return l;
}

LayerSpec global_pool() {
  LayerSpec l;
  l.kind = LayerKind::AvgPoolGlobal;
  return l;
}

LayerSpec fully_connected(std::int64_t classes) {
  LayerSpec l;
  l.kind = LayerKind::FullyConnected;
  l.channels_out = classes;
  return l;
}

LayerSpec bottleneck(std::int64_t channels_out, std::array<int, 3> mid_kernel,
                     std::array<int, 3> stride, Rational shift = Rational{0, 1},
                     std::optional<InflationSpec> inflate = std::nullopt) {
  LayerSpec l;
  l.kind = LayerKind::ResBlockBottleneck;
  l.kernel = mid_kernel;
  l.stride = stride;
  l.padding = {mid_kernel[0] / 2, mid_kernel[1] / 2, mid_kernel[2] / 2};
  l.channels_out = channels_out;
  l.shift_fraction = shift;
  l.inflate = inflate;
  return l;
}

constexpr std::array<int, 4> kBlocksPerStage = {3, 4, 6, 3};  // res2..res5
constexpr std::array<std::int64_t, 4> kStageChannels = {256, 512, 1024, 2048};

}  // namespace

std::vector<std::string> preset_names() {
  return {"tsm8f", "i3d_3x3x3", "i3d_3x1x1", "micro-tsm", "micro-linear"};
}

bool is_preset(const std::string& name) {
  auto names = preset_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

ArchSpec build_preset(const std::string& name) {
  if (name == "tsm8f") return build_tsm8f();
  if (name == "i3d_3x3x3") return build_i3d_3x3x3();
  if (name == "i3d_3x1x1") return build_i3d_3x1x1();
  if (name == "micro-tsm") return build_micro_tsm();
  if (name == "micro-linear") return build_micro_linear();
  throw ValidationError(fmt::format("unknown preset '{}'", name));
}

ArchSpec build_tsm8f(Rational shift_fraction) {
  ArchSpec a;
  a.name = "tsm8f";
  a.input_shape = {1, 8, 3, 224, 224};
  a.num_classes = 400;
  a.stages.push_back(
      {"conv1", {conv_layer(LayerKind::Conv2D, {1, 7, 7}, {1, 2, 2}, {0, 3, 3}, 64)}});
  a.stages.push_back({"pool1", {spatial_pool_3x3_s2()}});
  for (int s = 0; s < 4; ++s) {
    StageSpec stage;
    stage.name = canonical_stage_names()[2 + s];
    for (int b = 0; b < kBlocksPerStage[s]; ++b) {
      std::array<int, 3> stride = (s > 0 && b == 0) ? std::array<int, 3>{1, 2, 2}
                                                    : std::array<int, 3>{1, 1, 1};
      stage.layers.push_back(bottleneck(kStageChannels[s], {1, 3, 3}, stride, shift_fraction));
    }
    a.stages.push_back(std::move(stage));
  }
  a.stages.push_back({"global-pool", {global_pool()}});
  a.stages.push_back({"fc", {fully_connected(a.num_classes)}});
  return a;
}

ArchSpec build_i3d_3x3x3() {
  ArchSpec a;
  a.name = "i3d_3x3x3";
  a.input_shape = {1, 16, 3, 224, 224};
  a.num_classes = 400;
  // Full 7x7x7 stem; time is only reduced by pool1 and the stage strides.
  a.stages.push_back(
      {"conv1", {conv_layer(LayerKind::Conv3D, {7, 7, 7}, {1, 2, 2}, {3, 3, 3}, 64)}});
  a.stages.push_back({"pool1", {spatial_pool_3x3_s2(), temporal_pool_s2()}});
  InflationSpec inflate{InflationSpec::Target::All3x3, 3, InflationSpec::ApplyTo::EveryBlock};
  for (int s = 0; s < 4; ++s) {
    StageSpec stage;
    stage.name = canonical_stage_names()[2 + s];
    for (int b = 0; b < kBlocksPerStage[s]; ++b) {
      std::array<int, 3> stride = (s > 0 && b == 0) ? std::array<int, 3>{2, 2, 2}
                                                    : std::array<int, 3>{1, 1, 1};
      stage.layers.push_back(
          bottleneck(kStageChannels[s], {3, 3, 3}, stride, Rational{0, 1}, inflate));
    }
    a.stages.push_back(std::move(stage));
  }
  a.stages.push_back({"global-pool", {global_pool()}});
  a.stages.push_back({"fc", {fully_connected(a.num_classes)}});
  return a;
}

ArchSpec build_i3d_3x1x1() {
  ArchSpec a;
  a.name = "i3d_3x1x1";
  a.input_shape = {1, 32, 3, 224, 224};
  a.num_classes = 400;
  // 5x7x7 stride-2 stem; 3x1x1 kernels go into the first 1x1 of every other
  // bottleneck, so the spatial convs stay 2D.
  a.stages.push_back(
      {"conv1", {conv_layer(LayerKind::Conv3D, {5, 7, 7}, {2, 2, 2}, {2, 3, 3}, 64)}});
  a.stages.push_back({"pool1", {spatial_pool_3x3_s2(), temporal_pool_s2()}});
  InflationSpec inflate{InflationSpec::Target::First1x1, 3,
                        InflationSpec::ApplyTo::EveryOtherBlock};
  for (int s = 0; s < 4; ++s) {
    StageSpec stage;
    stage.name = canonical_stage_names()[2 + s];
    if (s == 1) stage.layers.push_back(temporal_pool_s2());
    for (int b = 0; b < kBlocksPerStage[s]; ++b) {
      std::array<int, 3> stride = (s > 0 && b == 0) ? std::array<int, 3>{1, 2, 2}
                                                    : std::array<int, 3>{1, 1, 1};
      std::optional<InflationSpec> blk_inflate;
      if (b % 2 == 0) blk_inflate = inflate;
      stage.layers.push_back(
          bottleneck(kStageChannels[s], {1, 3, 3}, stride, Rational{0, 1}, blk_inflate));
    }
    a.stages.push_back(std::move(stage));
  }
  a.stages.push_back({"global-pool", {global_pool()}});
  a.stages.push_back({"fc", {fully_connected(a.num_classes)}});
  return a;
}

ArchSpec build_micro_tsm(Rational shift_fraction) {
  ArchSpec a;
  a.name = "micro-tsm";
  a.input_shape = {1, 4, 8, 5, 5};
  a.num_classes = 4;
  StageSpec res2;
  res2.name = "res2";
  res2.layers.push_back(bottleneck(16, {1, 3, 3}, {1, 1, 1}, shift_fraction));
  res2.layers.push_back(bottleneck(16, {1, 3, 3}, {1, 1, 1}, shift_fraction));
  a.stages.push_back(std::move(res2));
  a.stages.push_back({"global-pool", {global_pool()}});
  a.stages.push_back({"fc", {fully_connected(a.num_classes)}});
  return a;
}

ArchSpec build_micro_linear() {
  ArchSpec a;
  a.name = "micro-linear";
  a.input_shape = {1, 3, 4, 6, 6};
  a.num_classes = 6;
  a.stages.push_back(
      {"res2", {conv_layer(LayerKind::Conv2D, {1, 1, 1}, {1, 1, 1}, {0, 0, 0}, 6)}});
  a.stages.push_back({"global-pool", {global_pool()}});
  a.stages.push_back({"fc", {fully_connected(a.num_classes)}});
  return a;
}

// ---------------------------------------------------------------------------
// Expansion

namespace {

PrimOp as_primop(const LayerSpec& layer) {
  PrimOp op;
  op.kind = layer.kind;
  op.kernel = layer.kernel;
  op.stride = layer.stride;
  op.padding = layer.padding;
  op.channels_out = layer.channels_out;
  op.shift_fraction = layer.shift_fraction;
  return op;
}

PrimOp point_conv(std::int64_t channels_out, std::array<int, 3> stride, int temporal_kernel,
                  bool relu_after) {
  PrimOp op;
  op.kernel = {temporal_kernel, 1, 1};
  op.stride = stride;
  op.padding = {temporal_kernel / 2, 0, 0};
  op.channels_out = channels_out;
  op.relu_after = relu_after;
  bool touches_time = temporal_kernel != 1 || stride[0] != 1;
  op.kind = touches_time ? LayerKind::Conv3D : LayerKind::Conv2D;
  return op;
}

}  // namespace

ResidualUnit expand_layer(const LayerSpec& layer, std::int64_t channels_in) {
  ResidualUnit unit;
  if (layer.kind != LayerKind::ResBlockBottleneck) {
    unit.main.push_back(as_primop(layer));
    return unit;
  }

  if (layer.channels_out <= 0 || layer.channels_out % 4 != 0) {
    throw ValidationError(fmt::format("bottleneck channels_out {} is not a positive multiple of 4",
                                      layer.channels_out));
  }
  std::int64_t width = layer.channels_out / 4;

  if (!layer.shift_fraction.is_zero()) {
    PrimOp shift;
    shift.kind = LayerKind::TemporalShift;
    shift.shift_fraction = layer.shift_fraction;
    unit.main.push_back(shift);
  }

  int first_kt = 1;
  if (layer.inflate && layer.inflate->target == InflationSpec::Target::First1x1) {
    first_kt = layer.inflate->temporal_kernel;
  }
  unit.main.push_back(point_conv(width, {1, 1, 1}, first_kt, /*relu_after=*/true));

  PrimOp mid;
  mid.kind = layer.kernel[0] != 1 || layer.stride[0] != 1 || layer.padding[0] != 0
                 ? LayerKind::Conv3D
                 : LayerKind::Conv2D;
  mid.kernel = layer.kernel;
  mid.stride = layer.stride;
  mid.padding = layer.padding;
  mid.channels_out = width;
  mid.relu_after = true;
  unit.main.push_back(mid);

  unit.main.push_back(point_conv(layer.channels_out, {1, 1, 1}, 1, /*relu_after=*/false));

  bool strided = layer.stride != std::array<int, 3>{1, 1, 1};
  if (strided || channels_in != layer.channels_out) {
    unit.projection = point_conv(layer.channels_out, layer.stride, 1, /*relu_after=*/false);
  }
  unit.residual = true;
  return unit;
}

std::vector<ExpandedStage> expand(const ArchSpec& arch) {
  std::vector<ExpandedStage> out;
  std::int64_t channels = arch.input_shape.c;
  for (const StageSpec& stage : arch.stages) {
    ExpandedStage es;
    es.name = stage.name;
    for (const LayerSpec& layer : stage.layers) {
      ResidualUnit unit = expand_layer(layer, channels);
      for (const PrimOp& op : unit.main) {
        if (op.channels_out > 0) channels = op.channels_out;
      }
      es.units.push_back(std::move(unit));
    }
    out.push_back(std::move(es));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shape propagation

namespace {

std::int64_t window_out(std::int64_t in, int kernel, int stride, int padding,
                        const char* what) {
  if (kernel < 1 || stride < 1 || padding < 0) {
    throw ValidationError(fmt::format("{}: bad kernel/stride/padding ({}, {}, {})", what, kernel,
                                      stride, padding));
  }
  std::int64_t padded = in + 2 * static_cast<std::int64_t>(padding);
  if (padded < kernel) {
    throw ValidationError(
        fmt::format("{}: window {} does not fit extent {} (padding {})", what, kernel, in,
                    padding));
  }
  return (padded - kernel) / stride + 1;
}

void require_frame_local(const PrimOp& op, const char* what) {
  if (op.kernel[0] != 1 || op.stride[0] != 1 || op.padding[0] != 0) {
    throw ValidationError(fmt::format(
        "{} must not touch the temporal axis (kt/st/pt = {}/{}/{})", what, op.kernel[0],
        op.stride[0], op.padding[0]));
  }
}

}  // namespace

Shape5D primop_output_shape(const PrimOp& op, const Shape5D& in) {
  if (!in.positive()) throw ValidationError("non-positive input shape");
  switch (op.kind) {
    case LayerKind::Conv2D:
      require_frame_local(op, "conv2d");
      [[fallthrough]];
    case LayerKind::Conv3D: {
      if (op.channels_out < 1) throw ValidationError("conv needs channels_out >= 1");
      Shape5D out = in;
      out.t = window_out(in.t, op.kernel[0], op.stride[0], op.padding[0], "conv t");
      out.h = window_out(in.h, op.kernel[1], op.stride[1], op.padding[1], "conv h");
      out.w = window_out(in.w, op.kernel[2], op.stride[2], op.padding[2], "conv w");
      out.c = op.channels_out;
      return out;
    }
    case LayerKind::TemporalShift: {
      const Rational& f = op.shift_fraction;
      if (f.num < 0 || 2 * f.num > f.den) {
        throw ValidationError(
            fmt::format("shift fraction {} outside [0, 1/2]", to_string(f)));
      }
      if (!divides_evenly(f, in.c)) {
        throw ValidationError(fmt::format("shift fraction {} does not split {} channels evenly",
                                          to_string(f), in.c));
      }
      return in;
    }
    case LayerKind::MaxPoolSpatial: {
      require_frame_local(op, "max-pool-spatial");
      Shape5D out = in;
      out.h = window_out(in.h, op.kernel[1], op.stride[1], op.padding[1], "pool h");
      out.w = window_out(in.w, op.kernel[2], op.stride[2], op.padding[2], "pool w");
      return out;
    }
    case LayerKind::MaxPoolTemporal: {
      if (op.kernel[1] != 1 || op.kernel[2] != 1 || op.stride[1] != 1 || op.stride[2] != 1 ||
          op.padding[1] != 0 || op.padding[2] != 0) {
        throw ValidationError("max-pool-temporal must not touch the spatial axes");
      }
      Shape5D out = in;
      out.t = window_out(in.t, op.kernel[0], op.stride[0], op.padding[0], "pool t");
      return out;
    }
    case LayerKind::AvgPoolGlobal: {
      Shape5D out = in;
      out.t = out.h = out.w = 1;
      return out;
    }
    case LayerKind::FullyConnected: {
      if (in.t != 1 || in.h != 1 || in.w != 1) {
        throw ValidationError(
            fmt::format("fully-connected input must be [N][1][C][1][1], got t={} h={} w={}", in.t,
                        in.h, in.w));
      }
      if (op.channels_out < 1) throw ValidationError("fully-connected needs channels_out >= 1");
      Shape5D out = in;
      out.c = op.channels_out;
      return out;
    }
    case LayerKind::ResBlockBottleneck:
      break;
  }
  throw ValidationError("res-block-bottleneck is not a primitive op");
}

Shape5D unit_output_shape(const ResidualUnit& unit, const Shape5D& in) {
  Shape5D cur = in;
  for (const PrimOp& op : unit.main) cur = primop_output_shape(op, cur);
  if (unit.projection) {
    Shape5D skip = primop_output_shape(*unit.projection, in);
    if (skip != cur) {
      throw ValidationError(
          fmt::format("projection shape ({},{},{},{},{}) does not match main path "
                      "({},{},{},{},{})",
                      skip.n, skip.t, skip.c, skip.h, skip.w, cur.n, cur.t, cur.c, cur.h, cur.w));
    }
  } else if (unit.residual && cur != in) {
    throw ValidationError("identity skip with mismatched main path shape");
  }
  return cur;
}

std::vector<std::pair<std::string, Shape5D>> propagate_shapes(const ArchSpec& arch,
                                                              const Shape5D& clip) {
  if (!clip.positive()) throw ValidationError("non-positive clip shape");
  const Shape5D& want = arch.input_shape;
  if (clip.t != want.t || clip.c != want.c || clip.h != want.h || clip.w != want.w) {
    throw ValidationError(
        fmt::format("clip shape t={} c={} h={} w={} does not match config t={} c={} h={} w={}",
                    clip.t, clip.c, clip.h, clip.w, want.t, want.c, want.h, want.w));
  }
  std::vector<std::pair<std::string, Shape5D>> out;
  Shape5D cur = clip;
  for (const ExpandedStage& stage : expand(arch)) {
    for (const ResidualUnit& unit : stage.units) cur = unit_output_shape(unit, cur);
    out.emplace_back(stage.name, cur);
  }
  return out;
}

std::vector<std::int64_t> temporal_profile(const ArchSpec& arch) {
  std::vector<std::int64_t> out;
  for (const auto& [name, shape] : propagate_shapes(arch, arch.input_shape)) {
    out.push_back(shape.t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

bool triple_is(const std::array<int, 3>& a, int v) { return a[0] == v && a[1] == v && a[2] == v; }

void check_layer(const StageSpec& stage, int index, const LayerSpec& layer, int block_ordinal,
                 std::vector<std::string>& out) {
  auto where = fmt::format("{}[{}]", stage.name, index);
  auto bad = [&](const std::string& msg) { out.push_back(fmt::format("{}: {}", where, msg)); };

  for (int d = 0; d < 3; ++d) {
    if (layer.kernel[d] < 1) bad(fmt::format("kernel[{}] must be >= 1", d));
    if (layer.stride[d] < 1) bad(fmt::format("stride[{}] must be >= 1", d));
    if (layer.padding[d] < 0) bad(fmt::format("padding[{}] must be >= 0", d));
    if (layer.kernel[d] >= 1 && layer.padding[d] >= layer.kernel[d]) {
      bad(fmt::format("padding[{}] must be smaller than the kernel", d));
    }
  }

  bool wants_channels = layer.kind == LayerKind::Conv2D || layer.kind == LayerKind::Conv3D ||
                        layer.kind == LayerKind::FullyConnected ||
                        layer.kind == LayerKind::ResBlockBottleneck;
  if (wants_channels && layer.channels_out < 1) bad("channels_out must be >= 1");
  if (!wants_channels && layer.channels_out != 0) bad("channels_out must be 0 for this kind");

  bool wants_shift =
      layer.kind == LayerKind::TemporalShift || layer.kind == LayerKind::ResBlockBottleneck;
  if (!wants_shift && !layer.shift_fraction.is_zero()) {
    bad("shift_fraction only applies to temporal-shift and res-block-bottleneck");
  }
  if (layer.shift_fraction.num < 0 || 2 * layer.shift_fraction.num > layer.shift_fraction.den) {
    bad(fmt::format("shift_fraction {} outside [0, 1/2]", to_string(layer.shift_fraction)));
  }

  if (layer.inflate && layer.kind != LayerKind::ResBlockBottleneck) {
    bad("inflate only applies to res-block-bottleneck");
  }

  switch (layer.kind) {
    case LayerKind::Conv2D:
      if (layer.kernel[0] != 1 || layer.stride[0] != 1 || layer.padding[0] != 0) {
        bad("conv2d must not touch the temporal axis");
      }
      break;
    case LayerKind::Conv3D:
      break;
    case LayerKind::TemporalShift:
      if (!triple_is(layer.kernel, 1) || !triple_is(layer.stride, 1) ||
          !triple_is(layer.padding, 0)) {
        bad("temporal-shift carries no geometry");
      }
      break;
    case LayerKind::MaxPoolSpatial:
      if (layer.kernel[0] != 1 || layer.stride[0] != 1 || layer.padding[0] != 0) {
        bad("max-pool-spatial must not touch the temporal axis");
      }
      break;
    case LayerKind::MaxPoolTemporal:
      if (layer.kernel[1] != 1 || layer.kernel[2] != 1 || layer.stride[1] != 1 ||
          layer.stride[2] != 1 || layer.padding[1] != 0 || layer.padding[2] != 0) {
        bad("max-pool-temporal must not touch the spatial axes");
      }
      break;
    case LayerKind::AvgPoolGlobal:
      if (!triple_is(layer.kernel, 1) || !triple_is(layer.stride, 1) ||
          !triple_is(layer.padding, 0)) {
        bad("avg-pool-global carries no geometry");
      }
      break;
    case LayerKind::FullyConnected:
      if (!triple_is(layer.kernel, 1) || !triple_is(layer.stride, 1) ||
          !triple_is(layer.padding, 0)) {
        bad("fully-connected carries no geometry");
      }
      break;
    case LayerKind::ResBlockBottleneck: {
      if (layer.channels_out % 4 != 0) bad("bottleneck channels_out must be a multiple of 4");
      if (layer.kernel[0] % 2 == 0) bad("bottleneck temporal kernel must be odd");
      if (layer.inflate) {
        const InflationSpec& inf = *layer.inflate;
        if (inf.temporal_kernel < 1 || inf.temporal_kernel % 2 == 0) {
          bad("inflation temporal_kernel must be odd and >= 1");
        }
        if (inf.target == InflationSpec::Target::Conv1Stem) {
          bad("conv1-stem inflation cannot be attached to a block");
        }
        if (inf.target == InflationSpec::Target::All3x3 &&
            layer.kernel[0] != inf.temporal_kernel) {
          bad(fmt::format("all-3x3 inflation says kt={} but the block kernel has kt={}",
                          inf.temporal_kernel, layer.kernel[0]));
        }
        if (inf.apply_to == InflationSpec::ApplyTo::EveryOtherBlock && block_ordinal % 2 != 0) {
          bad("every-other-block inflation must sit on even block positions");
        }
      }
      break;
    }
  }
}

}  // namespace

std::vector<std::string> validate(const ArchSpec& arch) {
  std::vector<std::string> out;
  if (arch.name.empty()) out.push_back("name must not be empty");
  if (arch.input_shape.n != 1) out.push_back("input shape describes one clip, n must be 1");
  if (arch.input_shape.t < 1 || arch.input_shape.c < 1 || arch.input_shape.h < 1 ||
      arch.input_shape.w < 1) {
    out.push_back("input t/c/h/w must all be >= 1");
  }
  if (arch.num_classes < 1) out.push_back("num_classes must be >= 1");
  if (arch.stages.empty()) out.push_back("at least one stage required");

  const auto& canon = canonical_stage_names();
  std::size_t cursor = 0;
  for (const StageSpec& stage : arch.stages) {
    auto it = std::find(canon.begin() + cursor, canon.end(), stage.name);
    if (it == canon.end()) {
      bool known = std::find(canon.begin(), canon.end(), stage.name) != canon.end();
      out.push_back(known ? fmt::format("stage '{}' out of order", stage.name)
                          : fmt::format("unknown stage '{}'", stage.name));
    } else {
      cursor = static_cast<std::size_t>(it - canon.begin()) + 1;
    }
    if (stage.layers.empty()) out.push_back(fmt::format("stage '{}' has no layers", stage.name));
  }

  for (const StageSpec& stage : arch.stages) {
    int block_ordinal = 0;
    for (int i = 0; i < static_cast<int>(stage.layers.size()); ++i) {
      const LayerSpec& layer = stage.layers[i];
      check_layer(stage, i, layer, block_ordinal, out);
      if (layer.kind == LayerKind::ResBlockBottleneck) ++block_ordinal;
      if (layer.kind == LayerKind::FullyConnected) {
        if (layer.channels_out != arch.num_classes) {
          out.push_back(fmt::format("fc channels_out {} != num_classes {}", layer.channels_out,
                                    arch.num_classes));
        }
        bool is_last = &stage == &arch.stages.back() && i + 1 == static_cast<int>(stage.layers.size());
        if (!is_last) out.push_back("fully-connected must be the final layer");
      }
    }
  }

  if (out.empty()) {
    try {
      propagate_shapes(arch, arch.input_shape);
    } catch (const ValidationError& e) {
      out.push_back(e.what());
    }
  }
  return out;
}

void validate_or_throw(const ArchSpec& arch) {
  auto violations = validate(arch);
  if (violations.empty()) return;
  std::string msg = fmt::format("invalid architecture '{}':", arch.name);
  for (const auto& v : violations) msg += "\n  - " + v;
  throw ValidationError(msg);
}

}  // namespace vidperf

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vidperf/errors.hpp"
#include "vidperf/rational.hpp"

namespace vidperf {

// All tensors are [N][T][C][H][W]. N is the batch axis; architecture configs
// describe a single clip, so their input shape carries n = 1.
struct Shape5D {
  std::int64_t n = 1;
  std::int64_t t = 1;
  std::int64_t c = 1;
  std::int64_t h = 1;
  std::int64_t w = 1;

  std::int64_t elems() const { return n * t * c * h * w; }
  std::int64_t clip_elems() const { return t * c * h * w; }
  bool positive() const { return n > 0 && t > 0 && c > 0 && h > 0 && w > 0; }

  friend bool operator==(const Shape5D&, const Shape5D&) = default;
};

enum class LayerKind {
  Conv2D,            // per-frame convolution, kt = 1, temporal stride 1
  Conv3D,
  TemporalShift,     // zero-FLOP channel shift along T
  MaxPoolSpatial,
  MaxPoolTemporal,
  AvgPoolGlobal,     // collapses T, H, W
  FullyConnected,
  ResBlockBottleneck,  // 1x1 reduce, kxk, 1x1 expand, optional projection skip
};

const char* to_string(LayerKind kind);
LayerKind layer_kind_from_string(const std::string& text);

// How a 2D layer is inflated along time. Attached to bottleneck blocks; the
// stem conv encodes its inflation directly in `kernel`.
struct InflationSpec {
  enum class Target { First1x1, All3x3, Conv1Stem };
  enum class ApplyTo { EveryBlock, EveryOtherBlock };

  Target target = Target::First1x1;
  int temporal_kernel = 3;
  ApplyTo apply_to = ApplyTo::EveryBlock;

  friend bool operator==(const InflationSpec&, const InflationSpec&) = default;
};

const char* to_string(InflationSpec::Target t);
const char* to_string(InflationSpec::ApplyTo a);

// kernel/stride/padding are (t, h, w) triples.
struct LayerSpec {
  LayerKind kind = LayerKind::Conv2D;
  std::array<int, 3> kernel{1, 1, 1};
  std::array<int, 3> stride{1, 1, 1};
  std::array<int, 3> padding{0, 0, 0};
  std::int64_t channels_out = 0;  // convs, blocks, fc; 0 elsewhere
  Rational shift_fraction{0, 1};  // per direction; blocks and shift layers
  std::optional<InflationSpec> inflate;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct StageSpec {
  std::string name;
  std::vector<LayerSpec> layers;

  friend bool operator==(const StageSpec&, const StageSpec&) = default;
};

struct ArchSpec {
  std::string name;
  Shape5D input_shape;  // n = 1
  int num_classes = 400;
  std::vector<StageSpec> stages;

  friend bool operator==(const ArchSpec&, const ArchSpec&) = default;
};

// Canonical stage order. A config's stages must be a subsequence of this
// list, in order; desk-scale nets for gradient checking omit the stem.
const std::vector<std::string>& canonical_stage_names();

// ---------------------------------------------------------------------------
// Presets

std::vector<std::string> preset_names();
bool is_preset(const std::string& name);
ArchSpec build_preset(const std::string& name);

ArchSpec build_tsm8f(Rational shift_fraction = Rational{1, 8});
ArchSpec build_i3d_3x3x3();
ArchSpec build_i3d_3x1x1();

// Tiny nets sized for finite-difference checks (< 10^4 scalars total).
ArchSpec build_micro_tsm(Rational shift_fraction = Rational{1, 8});
ArchSpec build_micro_linear();

// ---------------------------------------------------------------------------
// Expansion to primitive ops

// A block or standalone layer lowered to primitives. Bottleneck units apply
// ReLU after their first two convs and after the residual add; standalone
// layers are linear.
struct PrimOp {
  LayerKind kind = LayerKind::Conv2D;  // never ResBlockBottleneck
  std::array<int, 3> kernel{1, 1, 1};
  std::array<int, 3> stride{1, 1, 1};
  std::array<int, 3> padding{0, 0, 0};
  std::int64_t channels_out = 0;
  Rational shift_fraction{0, 1};
  bool relu_after = false;
};

struct ResidualUnit {
  std::vector<PrimOp> main;
  std::optional<PrimOp> projection;  // 1x1 conv on the skip path
  bool residual = false;
};

struct ExpandedStage {
  std::string name;
  // units[i] aligns with the stage's layers[i].
  std::vector<ResidualUnit> units;
};

ResidualUnit expand_layer(const LayerSpec& layer, std::int64_t channels_in);
std::vector<ExpandedStage> expand(const ArchSpec& arch);

// ---------------------------------------------------------------------------
// Shape propagation and validation

Shape5D primop_output_shape(const PrimOp& op, const Shape5D& in);
Shape5D unit_output_shape(const ResidualUnit& unit, const Shape5D& in);

// Output shape after each stage, in order. `clip` must match the config's
// declared t/c/h/w; its batch axis may be anything >= 1.
std::vector<std::pair<std::string, Shape5D>> propagate_shapes(const ArchSpec& arch,
                                                              const Shape5D& clip);

// Output T after each stage, stem through fc.
std::vector<std::int64_t> temporal_profile(const ArchSpec& arch);

// Empty means the config is valid. Messages name the offending stage/layer.
std::vector<std::string> validate(const ArchSpec& arch);
void validate_or_throw(const ArchSpec& arch);

// ---------------------------------------------------------------------------
// Config files. Strict schema: unknown keys are rejected.

std::string to_json(const ArchSpec& arch);
ArchSpec arch_from_json(const std::string& text);
ArchSpec load_arch(const std::string& path);
void save_arch(const ArchSpec& arch, const std::string& path);

// Resolves a preset name or a config file path.
ArchSpec resolve_arch(const std::string& name_or_path);

}  // namespace vidperf

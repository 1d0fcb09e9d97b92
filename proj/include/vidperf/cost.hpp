#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vidperf/arch.hpp"

namespace vidperf {

// One row per LayerSpec; a bottleneck block is reported as a single row with
// its internal convs (and projection) summed.
struct LayerCost {
  std::string stage;
  int index = 0;  // position within the stage
  LayerKind kind = LayerKind::Conv2D;
  std::int64_t flops = 0;   // multiply-accumulates, 1 MAC = 1 FLOP
  std::int64_t params = 0;  // weights + biases
  std::int64_t activation_elems = 0;  // output tensor, per clip
};

struct CostReport {
  std::string arch;
  Shape5D input_shape;          // per clip, n = 1
  std::int64_t total_flops = 0;
  std::int64_t total_params = 0;
  std::int64_t input_elems = 0;  // t * c * h * w
  std::int64_t input_bytes = 0;  // decoded uint8 frames, 1 byte per element
  double compute_io = 0.0;       // total_flops / input_elems
  std::vector<LayerCost> per_layer;
};

// Cost of a single primitive with the given input. Pools, shifts, and ReLU
// carry zero FLOPs and zero params by convention: their work is not
// multiply-accumulates and vanishes next to the convs.
LayerCost primop_cost(const PrimOp& op, const Shape5D& in);

// Cost of one LayerSpec (block costs aggregate the expansion).
LayerCost layer_cost(const LayerSpec& layer, const Shape5D& in);

// Validates, then walks the net. Throws ValidationError on a bad config.
CostReport analyze(const ArchSpec& arch);

double compute_io_ratio(const CostReport& report);

struct ComparisonRow {
  std::string arch;
  std::int64_t flops = 0;
  std::int64_t params = 0;
  std::int64_t input_elems = 0;
  double compute_io = 0.0;
  // Multipliers are normalized so the worst architecture in the set reads
  // 1.0x: lower-is-better columns report worst/value, compute_io reports
  // value/worst.
  double flops_mult = 1.0;
  double params_mult = 1.0;
  double input_mult = 1.0;
  double compute_io_mult = 1.0;
  // Measured columns, present when a measurement table was supplied.
  bool has_measured = false;
  double accuracy = 0.0;
  double throughput_vps = 0.0;
  double throughput_mult = 1.0;
};

std::vector<ComparisonRow> compare(const std::vector<CostReport>& reports);

// Measurement sidecar: CSV with header arch,acc,throughput_vps. Rows for
// architectures not in `rows` are ignored; missing rows leave the measured
// columns absent.
void attach_measurements(std::vector<ComparisonRow>& rows, const std::string& csv_path);

std::string cost_report_csv(const std::vector<CostReport>& reports);
std::string comparison_csv(const std::vector<ComparisonRow>& rows);
std::string per_layer_csv(const CostReport& report);

// Report serialization for piping `analyze` output into `compare`.
std::string report_to_json(const CostReport& report);
CostReport report_from_json(const std::string& text);
bool looks_like_report_json(const std::string& text);

}  // namespace vidperf

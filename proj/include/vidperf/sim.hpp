#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vidperf/cost.hpp"

namespace vidperf {

struct ClusterProfile {
  std::int64_t nodes = 1;
  int gpus_per_node = 6;
  double peak_flops_per_gpu = 0.0;      // FLOP/s
  double utilization = 0.0;             // sustained fraction of peak, (0, 1]
  double disk_bandwidth_per_node = 0.0; // bytes/s
  double net_latency = 0.0;             // seconds per message
  double net_bandwidth = 0.0;           // bytes/s per link
  double bytes_per_param = 4.0;
};

void validate_profile(const ClusterProfile& profile);

// Strict JSON, same spelling as the struct fields. nodes, gpus_per_node and
// bytes_per_param are optional (1, 6 and 4).
ClusterProfile profile_from_json(const std::string& text);
ClusterProfile load_profile(const std::string& path);
std::string profile_to_json(const ClusterProfile& profile);

struct TrainConfig {
  int per_gpu_batch = 8;
  std::int64_t total_gpus = 6;
  double base_lr_per_8 = 0.00125;
  int epochs = 100;
  int warmup_epochs = 5;
  std::int64_t dataset_clips = 240000;
  // Forward plus backward work per clip, as a multiple of forward FLOPs.
  double train_flop_multiplier = 3.0;
};

enum class CommMode { Simple, Ring };
CommMode comm_mode_from_string(const std::string& text);

enum class Bottleneck { Compute, Io };

struct StepTime {
  double t_compute = 0.0;
  double t_io = 0.0;
  double t_comm = 0.0;
  double t_step = 0.0;
  Bottleneck bottleneck = Bottleneck::Compute;
};

// One optimizer step of n clips per GPU on one GPU's share of the model.
double compute_time(const CostReport& cost, const ClusterProfile& profile, int per_gpu_clips,
                    double train_flop_multiplier = 3.0);
// Reading one step's clips for the node from local disk, decoded uint8.
double io_time(const CostReport& cost, const ClusterProfile& profile,
               std::int64_t clips_per_node);
// Gradient allreduce across p = nodes participants. Simple: latency +
// size/bandwidth. Ring: 2(p-1) latency hops and 2(p-1)/p of the model over
// the wire.
double comm_time(std::int64_t params, const ClusterProfile& profile, CommMode mode);

// Compute and IO overlap; communication does not. IO is the bottleneck only
// when it strictly exceeds compute.
StepTime step_time(const CostReport& cost, const ClusterProfile& profile,
                   const TrainConfig& cfg, CommMode mode);

struct SweepRow {
  std::int64_t nodes = 0;
  std::int64_t gpus = 0;
  std::int64_t batch = 0;   // global clips per step
  std::int64_t frames = 0;  // global frames per step
  StepTime step;
  double throughput_vps = 0.0;  // clips (videos) per second
  double scalability = 0.0;     // throughput / (nodes * single-node throughput)
  double train_time_s = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double single_node_throughput = 0.0;
};

SweepResult sweep(const CostReport& cost, ClusterProfile profile,
                  const std::vector<std::int64_t>& node_counts, const TrainConfig& cfg,
                  CommMode mode = CommMode::Ring);

double training_time(double throughput_vps, const TrainConfig& cfg);

std::string sweep_csv(const SweepResult& result);

// Observed scalability from wall-clock timings: baseline / (p * time(p)).
// Input must contain p = 1.
std::vector<std::pair<std::int64_t, double>> observed_scalability(
    const std::vector<std::pair<std::int64_t, double>>& timings);

// CSV with header nodes,wall_seconds.
std::vector<std::pair<std::int64_t, double>> load_timings_csv(const std::string& path);

// Linear-scaling schedule: peak = base_lr_per_8 * (total_gpus *
// per_gpu_batch / 8), linear warmup from zero, cosine decay to zero at
// `epochs`. `epoch` may be fractional.
double peak_lr(const TrainConfig& cfg);
double lr_at(double epoch, const TrainConfig& cfg);
std::string lr_curve_csv(const TrainConfig& cfg, int samples_per_epoch = 1);

}  // namespace vidperf

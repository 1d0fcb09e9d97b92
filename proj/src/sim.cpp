#include "vidperf/sim.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"

namespace vidperf {

void validate_profile(const ClusterProfile& p) {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0)) throw ValidationError(fmt::format("profile {} must be > 0", what));
  };
  if (p.nodes < 1) throw ValidationError("profile nodes must be >= 1");
  if (p.gpus_per_node < 1) throw ValidationError("profile gpus_per_node must be >= 1");
  positive(p.peak_flops_per_gpu, "peak_flops_per_gpu");
  if (!(p.utilization > 0.0) || p.utilization > 1.0) {
    throw ValidationError("profile utilization must be in (0, 1]");
  }
  positive(p.disk_bandwidth_per_node, "disk_bandwidth_per_node");
  if (p.net_latency < 0.0) throw ValidationError("profile net_latency must be >= 0");
  positive(p.net_bandwidth, "net_bandwidth");
  positive(p.bytes_per_param, "bytes_per_param");
}

namespace {
using json = nlohmann::ordered_json;
}

ClusterProfile profile_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(fmt::format("profile is not valid JSON: {}", e.what()));
  }
  if (!j.is_object()) throw ValidationError("profile root must be an object");
  const std::set<std::string> allowed = {
      "nodes",       "gpus_per_node",           "peak_flops_per_gpu", "utilization",
      "disk_bandwidth_per_node", "net_latency", "net_bandwidth",      "bytes_per_param"};
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw ValidationError(fmt::format("unknown key '{}' in profile", item.key()));
    }
  }
  ClusterProfile p;
  auto number = [&](const char* key, bool required, double fallback) {
    if (!j.contains(key)) {
      if (required) throw ValidationError(fmt::format("profile missing key '{}'", key));
      return fallback;
    }
    if (!j[key].is_number()) throw ValidationError(fmt::format("profile {} must be a number", key));
    return j[key].get<double>();
  };
  p.nodes = static_cast<std::int64_t>(number("nodes", false, 1));
  p.gpus_per_node = static_cast<int>(number("gpus_per_node", false, 6));
  p.peak_flops_per_gpu = number("peak_flops_per_gpu", true, 0);
  p.utilization = number("utilization", true, 0);
  p.disk_bandwidth_per_node = number("disk_bandwidth_per_node", true, 0);
  p.net_latency = number("net_latency", true, 0);
  p.net_bandwidth = number("net_bandwidth", true, 0);
  p.bytes_per_param = number("bytes_per_param", false, 4.0);
  validate_profile(p);
  return p;
}

ClusterProfile load_profile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(fmt::format("cannot open profile '{}'", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return profile_from_json(buf.str());
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("{}: {}", path, e.what()));
  }
}

std::string profile_to_json(const ClusterProfile& p) {
  json j;
  j["nodes"] = p.nodes;
  j["gpus_per_node"] = p.gpus_per_node;
  j["peak_flops_per_gpu"] = p.peak_flops_per_gpu;
  j["utilization"] = p.utilization;
  j["disk_bandwidth_per_node"] = p.disk_bandwidth_per_node;
  j["net_latency"] = p.net_latency;
  j["net_bandwidth"] = p.net_bandwidth;
  j["bytes_per_param"] = p.bytes_per_param;
  return j.dump(2) + "\n";
}

CommMode comm_mode_from_string(const std::string& text) {
  if (text == "simple") return CommMode::Simple;
  if (text == "ring") return CommMode::Ring;
  throw ValidationError(fmt::format("unknown comm mode '{}' (want simple or ring)", text));
}

double compute_time(const CostReport& cost, const ClusterProfile& profile, int per_gpu_clips,
                    double train_flop_multiplier) {
  if (per_gpu_clips < 1) throw ValidationError("per-GPU batch must be >= 1");
  if (train_flop_multiplier <= 0.0) throw ValidationError("flop multiplier must be > 0");
  double work = static_cast<double>(per_gpu_clips) * static_cast<double>(cost.total_flops) *
                train_flop_multiplier;
  return work / (profile.peak_flops_per_gpu * profile.utilization);
}

double io_time(const CostReport& cost, const ClusterProfile& profile,
               std::int64_t clips_per_node) {
  if (clips_per_node < 0) throw ValidationError("clips per node must be >= 0");
  double bytes = static_cast<double>(clips_per_node) * static_cast<double>(cost.input_bytes);
  return bytes / profile.disk_bandwidth_per_node;
}

double comm_time(std::int64_t params, const ClusterProfile& profile, CommMode mode) {
  if (params < 0) throw ValidationError("params must be >= 0");
  double p = static_cast<double>(profile.nodes);
  if (profile.nodes == 1) return 0.0;
  double size = static_cast<double>(params) * profile.bytes_per_param;
  if (mode == CommMode::Simple) {
    return profile.net_latency + size / profile.net_bandwidth;
  }
  return 2.0 * (p - 1.0) * profile.net_latency +
         (2.0 * (p - 1.0) / p) * size / profile.net_bandwidth;
}

StepTime step_time(const CostReport& cost, const ClusterProfile& profile,
                   const TrainConfig& cfg, CommMode mode) {
  validate_profile(profile);
  StepTime st;
  st.t_compute = compute_time(cost, profile, cfg.per_gpu_batch, cfg.train_flop_multiplier);
  std::int64_t clips_per_node =
      static_cast<std::int64_t>(cfg.per_gpu_batch) * profile.gpus_per_node;
  st.t_io = io_time(cost, profile, clips_per_node);
  st.t_comm = comm_time(cost.total_params, profile, mode);
  st.t_step = std::max(st.t_compute, st.t_io) + st.t_comm;
  st.bottleneck = st.t_io > st.t_compute ? Bottleneck::Io : Bottleneck::Compute;
  return st;
}

SweepResult sweep(const CostReport& cost, ClusterProfile profile,
                  const std::vector<std::int64_t>& node_counts, const TrainConfig& cfg,
                  CommMode mode) {
  if (node_counts.empty()) throw ValidationError("sweep needs at least one node count");

  ClusterProfile single = profile;
  single.nodes = 1;
  StepTime base = step_time(cost, single, cfg, mode);
  std::int64_t clips_per_node =
      static_cast<std::int64_t>(cfg.per_gpu_batch) * profile.gpus_per_node;
  SweepResult result;
  result.single_node_throughput = static_cast<double>(clips_per_node) / base.t_step;

  for (std::int64_t nodes : node_counts) {
    if (nodes < 1) throw ValidationError("node counts must be >= 1");
    profile.nodes = nodes;
    SweepRow row;
    row.nodes = nodes;
    row.gpus = nodes * profile.gpus_per_node;
    row.batch = nodes * clips_per_node;
    row.frames = row.batch * cost.input_shape.t;
    row.step = step_time(cost, profile, cfg, mode);
    row.throughput_vps = static_cast<double>(row.batch) / row.step.t_step;
    row.scalability =
        row.throughput_vps / (static_cast<double>(nodes) * result.single_node_throughput);
    row.train_time_s = training_time(row.throughput_vps, cfg);
    result.rows.push_back(row);
  }
  return result;
}

double training_time(double throughput_vps, const TrainConfig& cfg) {
  if (!(throughput_vps > 0.0)) throw ValidationError("throughput must be > 0");
  double total_clips = static_cast<double>(cfg.epochs) * static_cast<double>(cfg.dataset_clips);
  return total_clips / throughput_vps;
}

std::string sweep_csv(const SweepResult& result) {
  std::string out =
      "nodes,gpus,batch,frames,t_compute_s,t_io_s,t_comm_s,t_step_s,throughput_vps,"
      "scalability,train_time_s\n";
  for (const SweepRow& r : result.rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r.nodes, r.gpus, r.batch, r.frames,
                       r.step.t_compute, r.step.t_io, r.step.t_comm, r.step.t_step,
                       r.throughput_vps, r.scalability, r.train_time_s);
  }
  return out;
}

std::vector<std::pair<std::int64_t, double>> observed_scalability(
    const std::vector<std::pair<std::int64_t, double>>& timings) {
  double baseline = 0.0;
  bool have_baseline = false;
  for (const auto& [nodes, seconds] : timings) {
    if (nodes < 1) throw ValidationError("node counts must be >= 1");
    if (!(seconds > 0.0)) throw ValidationError("wall times must be > 0");
    if (nodes == 1) {
      baseline = seconds;
      have_baseline = true;
    }
  }
  if (!have_baseline) {
    throw ValidationError("timings need a 1-node row to define the scalability baseline");
  }
  std::vector<std::pair<std::int64_t, double>> out;
  for (const auto& [nodes, seconds] : timings) {
    out.emplace_back(nodes, baseline / (static_cast<double>(nodes) * seconds));
  }
  return out;
}

std::vector<std::pair<std::int64_t, double>> load_timings_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open timings '{}'", path));
  std::string line;
  if (!std::getline(in, line) || line != "nodes,wall_seconds") {
    throw ValidationError(
        fmt::format("timings '{}' must start with header nodes,wall_seconds", path));
  }
  std::vector<std::pair<std::int64_t, double>> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string nodes, seconds;
    if (!std::getline(ss, nodes, ',') || !std::getline(ss, seconds)) {
      throw ValidationError(fmt::format("bad timings row '{}'", line));
    }
    try {
      out.emplace_back(std::stoll(nodes), std::stod(seconds));
    } catch (const std::exception&) {
      throw ValidationError(fmt::format("bad timings row '{}'", line));
    }
  }
  if (out.empty()) throw ValidationError(fmt::format("timings '{}' has no rows", path));
  return out;
}

double peak_lr(const TrainConfig& cfg) {
  if (cfg.per_gpu_batch < 1 || cfg.total_gpus < 1) {
    throw ValidationError("lr schedule needs per_gpu_batch and total_gpus >= 1");
  }
  double global_batch = static_cast<double>(cfg.total_gpus) * cfg.per_gpu_batch;
  return cfg.base_lr_per_8 * (global_batch / 8.0);
}

double lr_at(double epoch, const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw ValidationError("epochs must be >= 1");
  if (cfg.warmup_epochs < 0 || cfg.warmup_epochs >= cfg.epochs) {
    throw ValidationError("warmup_epochs must be in [0, epochs)");
  }
  if (epoch < 0.0 || epoch > static_cast<double>(cfg.epochs)) {
    throw ValidationError(fmt::format("epoch {} outside [0, {}]", epoch, cfg.epochs));
  }
  double peak = peak_lr(cfg);
  double warmup = static_cast<double>(cfg.warmup_epochs);
  if (epoch < warmup) return peak * (epoch / warmup);
  double span = static_cast<double>(cfg.epochs) - warmup;
  double progress = (epoch - warmup) / span;
  return 0.5 * peak * (1.0 + std::cos(std::numbers::pi * progress));
}

std::string lr_curve_csv(const TrainConfig& cfg, int samples_per_epoch) {
  if (samples_per_epoch < 1) throw ValidationError("samples_per_epoch must be >= 1");
  std::string out = "epoch,lr\n";
  std::int64_t steps = static_cast<std::int64_t>(cfg.epochs) * samples_per_epoch;
  for (std::int64_t i = 0; i <= steps; ++i) {
    double epoch = static_cast<double>(i) / samples_per_epoch;
    out += fmt::format("{},{}\n", epoch, lr_at(epoch, cfg));
  }
  return out;
}

}  // namespace vidperf

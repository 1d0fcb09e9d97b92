#include "vidperf/cost.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace vidperf {

namespace {

std::int64_t kernel_volume(const PrimOp& op) {
  return static_cast<std::int64_t>(op.kernel[0]) * op.kernel[1] * op.kernel[2];
}

}  // namespace

LayerCost primop_cost(const PrimOp& op, const Shape5D& in) {
  Shape5D clip = in;
  clip.n = 1;
  Shape5D out = primop_output_shape(op, clip);
  LayerCost cost;
  cost.kind = op.kind;
  cost.activation_elems = out.clip_elems();
  switch (op.kind) {
    case LayerKind::Conv2D:
    case LayerKind::Conv3D:
      cost.flops = out.clip_elems() * kernel_volume(op) * clip.c;
      cost.params = kernel_volume(op) * clip.c * op.channels_out + op.channels_out;
      break;
    case LayerKind::FullyConnected:
      cost.flops = out.clip_elems() * clip.c;
      cost.params = clip.c * op.channels_out + op.channels_out;
      break;
    default:
      // Shifts, pools and ReLU are data movement and comparisons, not
      // multiply-accumulates.
      break;
  }
  return cost;
}

LayerCost layer_cost(const LayerSpec& layer, const Shape5D& in) {
  Shape5D clip = in;
  clip.n = 1;
  ResidualUnit unit = expand_layer(layer, clip.c);
  LayerCost total;
  total.kind = layer.kind;
  Shape5D cur = clip;
  for (const PrimOp& op : unit.main) {
    LayerCost piece = primop_cost(op, cur);
    total.flops += piece.flops;
    total.params += piece.params;
    cur = primop_output_shape(op, cur);
  }
  if (unit.projection) {
    LayerCost piece = primop_cost(*unit.projection, clip);
    total.flops += piece.flops;
    total.params += piece.params;
  }
  total.activation_elems = cur.clip_elems();
  return total;
}

CostReport analyze(const ArchSpec& arch) {
  validate_or_throw(arch);
  CostReport report;
  report.arch = arch.name;
  report.input_shape = arch.input_shape;
  report.input_shape.n = 1;
  report.input_elems = report.input_shape.clip_elems();
  report.input_bytes = report.input_elems;  // decoded uint8 frames

  Shape5D cur = report.input_shape;
  for (const StageSpec& stage : arch.stages) {
    for (int i = 0; i < static_cast<int>(stage.layers.size()); ++i) {
      const LayerSpec& layer = stage.layers[i];
      LayerCost cost = layer_cost(layer, cur);
      cost.stage = stage.name;
      cost.index = i;
      report.total_flops += cost.flops;
      report.total_params += cost.params;
      cur = unit_output_shape(expand_layer(layer, cur.c), cur);
      report.per_layer.push_back(std::move(cost));
    }
  }
  report.compute_io = compute_io_ratio(report);
  return report;
}

double compute_io_ratio(const CostReport& report) {
  return static_cast<double>(report.total_flops) / static_cast<double>(report.input_elems);
}

std::vector<ComparisonRow> compare(const std::vector<CostReport>& reports) {
  if (reports.empty()) throw ValidationError("nothing to compare");
  std::vector<ComparisonRow> rows;
  for (const CostReport& r : reports) {
    ComparisonRow row;
    row.arch = r.arch;
    row.flops = r.total_flops;
    row.params = r.total_params;
    row.input_elems = r.input_elems;
    row.compute_io = r.compute_io;
    rows.push_back(row);
  }
  auto max_of = [&](auto get) {
    auto it = std::max_element(rows.begin(), rows.end(),
                               [&](const auto& a, const auto& b) { return get(a) < get(b); });
    return get(*it);
  };
  auto min_of = [&](auto get) {
    auto it = std::min_element(rows.begin(), rows.end(),
                               [&](const auto& a, const auto& b) { return get(a) < get(b); });
    return get(*it);
  };
  // Normalize so the least scalable architecture in the set reads 1.0x.
  double worst_flops = max_of([](const ComparisonRow& r) { return double(r.flops); });
  double worst_params = max_of([](const ComparisonRow& r) { return double(r.params); });
  double worst_input = max_of([](const ComparisonRow& r) { return double(r.input_elems); });
  double worst_cio = min_of([](const ComparisonRow& r) { return r.compute_io; });
  for (ComparisonRow& row : rows) {
    row.flops_mult = worst_flops / static_cast<double>(row.flops);
    row.params_mult = worst_params / static_cast<double>(row.params);
    row.input_mult = worst_input / static_cast<double>(row.input_elems);
    row.compute_io_mult = row.compute_io / worst_cio;
  }
  return rows;
}

void attach_measurements(std::vector<ComparisonRow>& rows, const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw ValidationError(fmt::format("cannot open measurements '{}'", csv_path));
  std::string line;
  if (!std::getline(in, line) || line != "arch,acc,throughput_vps") {
    throw ValidationError(
        fmt::format("measurements '{}' must start with header arch,acc,throughput_vps", csv_path));
  }
  std::map<std::string, std::pair<double, double>> measured;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string arch, acc, tput;
    if (!std::getline(ss, arch, ',') || !std::getline(ss, acc, ',') || !std::getline(ss, tput)) {
      throw ValidationError(fmt::format("bad measurements row '{}'", line));
    }
    try {
      measured[arch] = {std::stod(acc), std::stod(tput)};
    } catch (const std::exception&) {
      throw ValidationError(fmt::format("bad measurements row '{}'", line));
    }
  }
  double worst_tput = 0.0;
  bool any = false;
  for (ComparisonRow& row : rows) {
    auto it = measured.find(row.arch);
    if (it == measured.end()) continue;
    row.has_measured = true;
    row.accuracy = it->second.first;
    row.throughput_vps = it->second.second;
    worst_tput = any ? std::min(worst_tput, row.throughput_vps) : row.throughput_vps;
    any = true;
  }
  if (!any) return;
  for (ComparisonRow& row : rows) {
    if (row.has_measured) row.throughput_mult = row.throughput_vps / worst_tput;
  }
}

std::string cost_report_csv(const std::vector<CostReport>& reports) {
  std::string out = "arch,flops,params,input_elems,compute_io\n";
  for (const CostReport& r : reports) {
    out += fmt::format("{},{},{},{},{}\n", r.arch, r.total_flops, r.total_params, r.input_elems,
                       r.compute_io);
  }
  return out;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  bool measured = std::any_of(rows.begin(), rows.end(),
                              [](const ComparisonRow& r) { return r.has_measured; });
  std::string out = "arch,flops,params,input_elems,compute_io,flops_mult,params_mult,"
                    "input_mult,compute_io_mult";
  if (measured) out += ",acc,throughput_vps,throughput_mult";
  out += "\n";
  for (const ComparisonRow& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}", r.arch, r.flops, r.params, r.input_elems,
                       r.compute_io, r.flops_mult, r.params_mult, r.input_mult, r.compute_io_mult);
    if (measured) {
      if (r.has_measured) {
        out += fmt::format(",{},{},{}", r.accuracy, r.throughput_vps, r.throughput_mult);
      } else {
        out += ",,,";
      }
    }
    out += "\n";
  }
  return out;
}

std::string per_layer_csv(const CostReport& report) {
  std::string out = "stage,index,kind,flops,params,activation_elems\n";
  for (const LayerCost& c : report.per_layer) {
    out += fmt::format("{},{},{},{},{},{}\n", c.stage, c.index, to_string(c.kind), c.flops,
                       c.params, c.activation_elems);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report JSON

namespace {
using json = nlohmann::ordered_json;
}

std::string report_to_json(const CostReport& report) {
  json j;
  j["arch"] = report.arch;
  j["input"] = {{"t", report.input_shape.t},
                {"c", report.input_shape.c},
                {"h", report.input_shape.h},
                {"w", report.input_shape.w}};
  j["flops"] = report.total_flops;
  j["params"] = report.total_params;
  j["input_elems"] = report.input_elems;
  j["input_bytes"] = report.input_bytes;
  j["compute_io"] = report.compute_io;
  j["per_layer"] = json::array();
  for (const LayerCost& c : report.per_layer) {
    j["per_layer"].push_back({{"stage", c.stage},
                              {"index", c.index},
                              {"kind", to_string(c.kind)},
                              {"flops", c.flops},
                              {"params", c.params},
                              {"activation_elems", c.activation_elems}});
  }
  return j.dump(2) + "\n";
}

CostReport report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(fmt::format("report is not valid JSON: {}", e.what()));
  }
  if (!j.is_object()) throw ValidationError("report root must be an object");
  for (const char* key : {"arch", "input", "flops", "params", "input_elems", "compute_io"}) {
    if (!j.contains(key)) throw ValidationError(fmt::format("report missing key '{}'", key));
  }
  CostReport r;
  try {
    r.arch = j["arch"].get<std::string>();
    const json& input = j["input"];
    r.input_shape = {1, input.at("t").get<std::int64_t>(), input.at("c").get<std::int64_t>(),
                     input.at("h").get<std::int64_t>(), input.at("w").get<std::int64_t>()};
    r.total_flops = j["flops"].get<std::int64_t>();
    r.total_params = j["params"].get<std::int64_t>();
    r.input_elems = j["input_elems"].get<std::int64_t>();
    r.input_bytes =
        j.contains("input_bytes") ? j["input_bytes"].get<std::int64_t>() : r.input_elems;
    r.compute_io = j["compute_io"].get<double>();
    if (j.contains("per_layer")) {
      for (const json& c : j["per_layer"]) {
        LayerCost cost;
        cost.stage = c.at("stage").get<std::string>();
        cost.index = c.at("index").get<int>();
        cost.kind = layer_kind_from_string(c.at("kind").get<std::string>());
        cost.flops = c.at("flops").get<std::int64_t>();
        cost.params = c.at("params").get<std::int64_t>();
        cost.activation_elems = c.at("activation_elems").get<std::int64_t>();
        r.per_layer.push_back(std::move(cost));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(fmt::format("malformed report: {}", e.what()));
  }
  return r;
}

bool looks_like_report_json(const std::string& text) {
  auto j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  return j.is_object() && j.contains("flops");
}

}  // namespace vidperf

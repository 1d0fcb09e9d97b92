#include <fmt/format.h>

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "vidperf/arch.hpp"

namespace vidperf {

namespace {

using json = nlohmann::ordered_json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      throw ValidationError(fmt::format("unknown key '{}' in {}", item.key(), where));
    }
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ValidationError(fmt::format("missing key '{}' in {}", key, where));
  }
  return *it;
}

std::int64_t as_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) {
    throw ValidationError(fmt::format("{} must be an integer", where));
  }
  return v.get<std::int64_t>();
}

std::array<int, 3> as_triple(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) {
    throw ValidationError(fmt::format("{} must be a 3-element array", where));
  }
  std::array<int, 3> out{};
  for (int i = 0; i < 3; ++i) out[i] = static_cast<int>(as_int(v[i], where));
  return out;
}

InflationSpec::Target target_from_string(const std::string& s) {
  if (s == "first-1x1") return InflationSpec::Target::First1x1;
  if (s == "all-3x3") return InflationSpec::Target::All3x3;
  if (s == "conv1-stem") return InflationSpec::Target::Conv1Stem;
  throw ValidationError(fmt::format("unknown inflation target '{}'", s));
}

InflationSpec::ApplyTo apply_to_from_string(const std::string& s) {
  if (s == "every-block") return InflationSpec::ApplyTo::EveryBlock;
  if (s == "every-other-block") return InflationSpec::ApplyTo::EveryOtherBlock;
  throw ValidationError(fmt::format("unknown inflation apply_to '{}'", s));
}

LayerSpec layer_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(fmt::format("{} must be an object", where));
  reject_unknown_keys(
      j, {"kind", "kernel", "stride", "padding", "channels_out", "shift_fraction", "inflate"},
      where);
  LayerSpec l;
  const json& kind = require(j, "kind", where);
  if (!kind.is_string()) throw ValidationError(fmt::format("{}.kind must be a string", where));
  l.kind = layer_kind_from_string(kind.get<std::string>());
  if (j.contains("kernel")) l.kernel = as_triple(j["kernel"], where + ".kernel");
  if (j.contains("stride")) l.stride = as_triple(j["stride"], where + ".stride");
  if (j.contains("padding")) l.padding = as_triple(j["padding"], where + ".padding");
  if (j.contains("channels_out")) {
    l.channels_out = as_int(j["channels_out"], where + ".channels_out");
  }
  if (j.contains("shift_fraction")) {
    const json& f = j["shift_fraction"];
    if (!f.is_string()) {
      throw ValidationError(fmt::format("{}.shift_fraction must be a string like \"1/8\"", where));
    }
    l.shift_fraction = parse_rational(f.get<std::string>());
  }
  if (j.contains("inflate") && !j["inflate"].is_null()) {
    const json& inf = j["inflate"];
    std::string iw = where + ".inflate";
    if (!inf.is_object()) throw ValidationError(fmt::format("{} must be an object", iw));
    reject_unknown_keys(inf, {"target", "temporal_kernel", "apply_to"}, iw);
    InflationSpec spec;
    const json& target = require(inf, "target", iw);
    if (!target.is_string()) throw ValidationError(fmt::format("{}.target must be a string", iw));
    spec.target = target_from_string(target.get<std::string>());
    if (inf.contains("temporal_kernel")) {
      spec.temporal_kernel = static_cast<int>(as_int(inf["temporal_kernel"], iw + ".temporal_kernel"));
    }
    if (inf.contains("apply_to")) {
      const json& a = inf["apply_to"];
      if (!a.is_string()) throw ValidationError(fmt::format("{}.apply_to must be a string", iw));
      spec.apply_to = apply_to_from_string(a.get<std::string>());
    }
    l.inflate = spec;
  }
  return l;
}

json layer_to_json(const LayerSpec& l) {
  json j;
  j["kind"] = to_string(l.kind);
  j["kernel"] = l.kernel;
  j["stride"] = l.stride;
  j["padding"] = l.padding;
  j["channels_out"] = l.channels_out;
  j["shift_fraction"] = to_string(l.shift_fraction);
  if (l.inflate) {
    json inf;
    inf["target"] = to_string(l.inflate->target);
    inf["temporal_kernel"] = l.inflate->temporal_kernel;
    inf["apply_to"] = to_string(l.inflate->apply_to);
    j["inflate"] = inf;
  } else {
    j["inflate"] = nullptr;
  }
  return j;
}

}  // namespace

ArchSpec arch_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(fmt::format("config is not valid JSON: {}", e.what()));
  }
  if (!j.is_object()) throw ValidationError("config root must be an object");
  reject_unknown_keys(j, {"name", "num_classes", "input", "stages"}, "config");

  ArchSpec arch;
  const json& name = require(j, "name", "config");
  if (!name.is_string()) throw ValidationError("config.name must be a string");
  arch.name = name.get<std::string>();
  arch.num_classes = static_cast<int>(as_int(require(j, "num_classes", "config"),
                                             "config.num_classes"));

  const json& input = require(j, "input", "config");
  if (!input.is_object()) throw ValidationError("config.input must be an object");
  reject_unknown_keys(input, {"t", "c", "h", "w"}, "config.input");
  arch.input_shape.n = 1;
  arch.input_shape.t = as_int(require(input, "t", "config.input"), "config.input.t");
  arch.input_shape.c = as_int(require(input, "c", "config.input"), "config.input.c");
  arch.input_shape.h = as_int(require(input, "h", "config.input"), "config.input.h");
  arch.input_shape.w = as_int(require(input, "w", "config.input"), "config.input.w");

  const json& stages = require(j, "stages", "config");
  if (!stages.is_array()) throw ValidationError("config.stages must be an array");
  for (std::size_t si = 0; si < stages.size(); ++si) {
    const json& js = stages[si];
    std::string sw = fmt::format("stages[{}]", si);
    if (!js.is_object()) throw ValidationError(fmt::format("{} must be an object", sw));
    reject_unknown_keys(js, {"name", "layers"}, sw);
    StageSpec stage;
    const json& sname = require(js, "name", sw);
    if (!sname.is_string()) throw ValidationError(fmt::format("{}.name must be a string", sw));
    stage.name = sname.get<std::string>();
    const json& layers = require(js, "layers", sw);
    if (!layers.is_array()) throw ValidationError(fmt::format("{}.layers must be an array", sw));
    for (std::size_t li = 0; li < layers.size(); ++li) {
      stage.layers.push_back(
          layer_from_json(layers[li], fmt::format("{}.layers[{}]", sw, li)));
    }
    arch.stages.push_back(std::move(stage));
  }
  return arch;
}

std::string to_json(const ArchSpec& arch) {
  json j;
  j["name"] = arch.name;
  j["num_classes"] = arch.num_classes;
  j["input"] = {{"t", arch.input_shape.t},
                {"c", arch.input_shape.c},
                {"h", arch.input_shape.h},
                {"w", arch.input_shape.w}};
  j["stages"] = json::array();
  for (const StageSpec& stage : arch.stages) {
    json js;
    js["name"] = stage.name;
    js["layers"] = json::array();
    for (const LayerSpec& layer : stage.layers) js["layers"].push_back(layer_to_json(layer));
    j["stages"].push_back(js);
  }
  return j.dump(2) + "\n";
}

ArchSpec load_arch(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(fmt::format("cannot open config '{}'", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return arch_from_json(buf.str());
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("{}: {}", path, e.what()));
  }
}

void save_arch(const ArchSpec& arch, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError(fmt::format("cannot write '{}'", path));
  out << to_json(arch);
}

ArchSpec resolve_arch(const std::string& name_or_path) {
  if (is_preset(name_or_path)) return build_preset(name_or_path);
  return load_arch(name_or_path);
}

}  // namespace vidperf

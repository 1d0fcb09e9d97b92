#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vidperf/cost.hpp"
#include "vidperf/net.hpp"
#include "vidperf/ref_kernels.hpp"
#include "vidperf/sim.hpp"
#include "vidperf/tensor.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace vidperf;

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw ValidationError(fmt::format("cannot write '{}'", out_path));
  out << text;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(fmt::format("cannot open '{}'", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Accepts a preset name, an architecture config, or a saved analyze report.
CostReport resolve_report(const std::string& item) {
  if (is_preset(item)) return analyze(build_preset(item));
  std::string text = slurp(item);
  if (looks_like_report_json(text)) {
    try {
      return report_from_json(text);
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("{}: {}", item, e.what()));
    }
  }
  return analyze(arch_from_json(text));
}

json report_json_obj(const CostReport& r) { return json::parse(report_to_json(r)); }

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
  std::vector<std::string> archs;
  std::string format = "csv";
  std::string out;
};

int run_analyze(const AnalyzeArgs& args) {
  std::vector<CostReport> reports;
  for (const std::string& item : args.archs) reports.push_back(resolve_report(item));
  if (args.format == "csv") {
    emit(cost_report_csv(reports), args.out);
  } else if (args.format == "json") {
    if (reports.size() == 1) {
      emit(report_to_json(reports[0]), args.out);
    } else {
      json arr = json::array();
      for (const CostReport& r : reports) arr.push_back(report_json_obj(r));
      emit(arr.dump(2) + "\n", args.out);
    }
  } else if (args.format == "layers") {
    std::string text;
    for (const CostReport& r : reports) text += per_layer_csv(r);
    emit(text, args.out);
  } else {
    throw ValidationError(fmt::format("unknown format '{}'", args.format));
  }
  return 0;
}

struct CompareArgs {
  std::vector<std::string> archs;
  std::string measured;
  std::string format = "csv";
  std::string out;
};

int run_compare(const CompareArgs& args) {
  std::vector<CostReport> reports;
  for (const std::string& item : args.archs) reports.push_back(resolve_report(item));
  std::vector<ComparisonRow> rows = compare(reports);
  if (!args.measured.empty()) attach_measurements(rows, args.measured);
  if (args.format == "csv") {
    emit(comparison_csv(rows), args.out);
  } else if (args.format == "json") {
    json arr = json::array();
    for (const ComparisonRow& r : rows) {
      json obj = {{"arch", r.arch},
                  {"flops", r.flops},
                  {"params", r.params},
                  {"input_elems", r.input_elems},
                  {"compute_io", r.compute_io},
                  {"flops_mult", r.flops_mult},
                  {"params_mult", r.params_mult},
                  {"input_mult", r.input_mult},
                  {"compute_io_mult", r.compute_io_mult}};
      if (r.has_measured) {
        obj["acc"] = r.accuracy;
        obj["throughput_vps"] = r.throughput_vps;
        obj["throughput_mult"] = r.throughput_mult;
      }
      arr.push_back(obj);
    }
    emit(arr.dump(2) + "\n", args.out);
  } else {
    throw ValidationError(fmt::format("unknown format '{}'", args.format));
  }
  return 0;
}

struct ShapesArgs {
  std::string arch;
  std::string format = "csv";
  std::string out;
};

int run_shapes(const ShapesArgs& args) {
  ArchSpec arch = resolve_arch(args.arch);
  validate_or_throw(arch);
  auto shapes = propagate_shapes(arch, arch.input_shape);
  if (args.format == "csv") {
    std::string text = "stage,t,c,h,w\n";
    for (const auto& [name, s] : shapes) {
      text += fmt::format("{},{},{},{},{}\n", name, s.t, s.c, s.h, s.w);
    }
    emit(text, args.out);
  } else if (args.format == "json") {
    json arr = json::array();
    for (const auto& [name, s] : shapes) {
      arr.push_back({{"stage", name}, {"t", s.t}, {"c", s.c}, {"h", s.h}, {"w", s.w}});
    }
    emit(arr.dump(2) + "\n", args.out);
  } else {
    throw ValidationError(fmt::format("unknown format '{}'", args.format));
  }
  return 0;
}

struct SimulateArgs {
  std::string arch;
  std::string profile;
  std::int64_t nodes = 0;  // 0 = take the profile's node count
  int batch = 8;
  double mult = 3.0;
  std::string comm = "ring";
  std::string format = "text";
  std::string out;
};

int run_simulate(const SimulateArgs& args) {
  CostReport cost = resolve_report(args.arch);
  ClusterProfile profile = load_profile(args.profile);
  if (args.nodes > 0) profile.nodes = args.nodes;
  TrainConfig cfg;
  cfg.per_gpu_batch = args.batch;
  cfg.total_gpus = profile.nodes * profile.gpus_per_node;
  cfg.train_flop_multiplier = args.mult;
  CommMode mode = comm_mode_from_string(args.comm);

  SweepResult result = sweep(cost, profile, {profile.nodes}, cfg, mode);
  const SweepRow& row = result.rows[0];
  if (args.format == "csv") {
    emit(sweep_csv(result), args.out);
  } else if (args.format == "json") {
    json obj = {{"arch", cost.arch},
                {"nodes", row.nodes},
                {"gpus", row.gpus},
                {"batch", row.batch},
                {"frames", row.frames},
                {"t_compute_s", row.step.t_compute},
                {"t_io_s", row.step.t_io},
                {"t_comm_s", row.step.t_comm},
                {"t_step_s", row.step.t_step},
                {"bottleneck", row.step.bottleneck == Bottleneck::Io ? "io" : "compute"},
                {"throughput_vps", row.throughput_vps},
                {"scalability", row.scalability},
                {"train_time_s", row.train_time_s}};
    emit(obj.dump(2) + "\n", args.out);
  } else if (args.format == "text") {
    std::string text;
    text += fmt::format("arch            {}\n", cost.arch);
    text += fmt::format("nodes           {}\n", row.nodes);
    text += fmt::format("gpus            {}\n", row.gpus);
    text += fmt::format("global batch    {}\n", row.batch);
    text += fmt::format("t_compute_s     {}\n", row.step.t_compute);
    text += fmt::format("t_io_s          {}\n", row.step.t_io);
    text += fmt::format("t_comm_s        {}\n", row.step.t_comm);
    text += fmt::format("t_step_s        {}\n", row.step.t_step);
    text += fmt::format("bottleneck      {}\n",
                        row.step.bottleneck == Bottleneck::Io ? "io" : "compute");
    text += fmt::format("throughput_vps  {}\n", row.throughput_vps);
    text += fmt::format("scalability     {}\n", row.scalability);
    text += fmt::format("train_time_s    {}\n", row.train_time_s);
    emit(text, args.out);
  } else {
    throw ValidationError(fmt::format("unknown format '{}'", args.format));
  }
  return 0;
}

struct ScalabilityArgs {
  std::string arch;
  std::string profile;
  std::string timings;
  std::vector<std::int64_t> nodes = {1, 8, 16, 32, 64, 128, 256};
  int batch = 8;
  double mult = 3.0;
  std::string comm = "ring";
  std::string out;
};

int run_scalability(const ScalabilityArgs& args) {
  if (!args.timings.empty()) {
    auto observed = observed_scalability(load_timings_csv(args.timings));
    std::string text = "nodes,scalability\n";
    for (const auto& [nodes, s] : observed) text += fmt::format("{},{}\n", nodes, s);
    emit(text, args.out);
    return 0;
  }
  if (args.arch.empty() || args.profile.empty()) {
    throw ValidationError("scalability needs either --timings or both --arch and --profile");
  }
  CostReport cost = resolve_report(args.arch);
  ClusterProfile profile = load_profile(args.profile);
  TrainConfig cfg;
  cfg.per_gpu_batch = args.batch;
  cfg.train_flop_multiplier = args.mult;
  SweepResult result =
      sweep(cost, profile, args.nodes, cfg, comm_mode_from_string(args.comm));
  emit(sweep_csv(result), args.out);
  return 0;
}

struct GradcheckArgs {
  std::string net = "micro-tsm";
  std::string fraction;
  double eps = 1e-5;
  double tol = 1e-5;
  std::uint64_t seed = 42;
  std::string out;
};

int run_gradcheck(const GradcheckArgs& args) {
  ArchSpec arch;
  if (!args.fraction.empty() && args.net != "micro-tsm") {
    throw ValidationError("--fraction only applies to the micro-tsm net");
  }
  if (args.net == "micro-tsm") {
    arch = args.fraction.empty() ? build_micro_tsm()
                                 : build_micro_tsm(parse_rational(args.fraction));
  } else {
    arch = resolve_arch(args.net);
  }
  Shape5D in = arch.input_shape;
  Tensor5D x = random_normal(in, args.seed + 1);
  GradcheckResult result = gradcheck(arch, x, args.eps, args.seed);
  std::string text;
  text += fmt::format("net            {}\n", arch.name);
  text += fmt::format("eps            {}\n", args.eps);
  text += fmt::format("seed           {}\n", args.seed);
  text += fmt::format("checked        {}\n", result.checked_scalars);
  text += fmt::format("max_rel_error  {}\n", result.max_rel_error);
  emit(text, args.out);
  if (result.max_rel_error > args.tol) {
    throw ValidationError(fmt::format("max relative error {} exceeds tolerance {}",
                                      result.max_rel_error, args.tol));
  }
  return 0;
}

struct ShiftDemoArgs {
  std::int64_t t = 4;
  std::int64_t c = 8;
  std::int64_t h = 1;
  std::int64_t w = 1;
  std::string fraction = "1/8";
  std::string in_path;
  std::string out_path;  // binary tensor
  std::string out;       // text
};

int run_shift_demo(const ShiftDemoArgs& args) {
  Tensor5D x;
  if (!args.in_path.empty()) {
    x = read_tensor(args.in_path);
  } else {
    // Structured fill so the shift pattern is obvious: value = 100t + c.
    x = Tensor5D(Shape5D{1, args.t, args.c, args.h, args.w});
    for (std::int64_t t = 0; t < args.t; ++t) {
      for (std::int64_t c = 0; c < args.c; ++c) {
        for (std::int64_t h = 0; h < args.h; ++h) {
          for (std::int64_t w = 0; w < args.w; ++w) {
            x.at(0, t, c, h, w) = static_cast<double>(100 * t + c);
          }
        }
      }
    }
  }
  ShiftConfig cfg = ShiftConfig::symmetric(parse_rational(args.fraction));
  Tensor5D y = temporal_shift(x, cfg);
  if (!args.out_path.empty()) write_tensor(y, args.out_path);

  const Shape5D& s = x.shape();
  std::string text = fmt::format("temporal shift, fraction {} each way, shape t={} c={}\n",
                                 to_string(cfg.fraction_fwd), s.t, s.c);
  auto grid = [&](const Tensor5D& v, const char* title) {
    std::string g = fmt::format("{} (h=0, w=0):\n", title);
    for (std::int64_t t = 0; t < s.t; ++t) {
      g += fmt::format("t{}:", t);
      for (std::int64_t c = 0; c < s.c; ++c) g += fmt::format(" {:>6}", v.at(0, t, c, 0, 0));
      g += "\n";
    }
    return g;
  };
  text += grid(x, "input");
  text += grid(y, "shifted");
  emit(text, args.out);
  return 0;
}

struct LrCurveArgs {
  std::int64_t gpus = 6;
  int batch = 8;
  double base_lr = 0.00125;
  int epochs = 100;
  int warmup = 5;
  int samples = 1;
  std::string out;
};

int run_lr_curve(const LrCurveArgs& args) {
  TrainConfig cfg;
  cfg.total_gpus = args.gpus;
  cfg.per_gpu_batch = args.batch;
  cfg.base_lr_per_8 = args.base_lr;
  cfg.epochs = args.epochs;
  cfg.warmup_epochs = args.warmup;
  emit(lr_curve_csv(cfg, args.samples), args.out);
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"performance toolkit for video CNNs"};
  app.require_subcommand(1);

  AnalyzeArgs analyze_args;
  CLI::App* analyze_cmd = app.add_subcommand("analyze", "FLOPs, params and compute/IO ratios");
  analyze_cmd->add_option("--arch", analyze_args.archs,
                          "preset name, config JSON or report JSON (repeatable)")
      ->required()
      ->delimiter(',');
  analyze_cmd->add_option("--format", analyze_args.format, "csv, json or layers");
  analyze_cmd->add_option("--out", analyze_args.out, "write here instead of stdout");

  CompareArgs compare_args;
  CLI::App* compare_cmd = app.add_subcommand("compare", "side-by-side with 1x = worst in set");
  compare_cmd->add_option("--archs", compare_args.archs, "comma-separated presets/configs/reports")
      ->required()
      ->delimiter(',');
  compare_cmd->add_option("--measured", compare_args.measured,
                          "CSV arch,acc,throughput_vps with measured numbers");
  compare_cmd->add_option("--format", compare_args.format, "csv or json");
  compare_cmd->add_option("--out", compare_args.out, "write here instead of stdout");

  ShapesArgs shapes_args;
  CLI::App* shapes_cmd = app.add_subcommand("shapes", "per-stage output shapes");
  shapes_cmd->add_option("--arch", shapes_args.arch, "preset name or config JSON")->required();
  shapes_cmd->add_option("--format", shapes_args.format, "csv or json");
  shapes_cmd->add_option("--out", shapes_args.out, "write here instead of stdout");

  SimulateArgs simulate_args;
  CLI::App* simulate_cmd = app.add_subcommand("simulate", "one training step on a cluster");
  simulate_cmd->add_option("--arch", simulate_args.arch, "preset name, config or report JSON")
      ->required();
  simulate_cmd->add_option("--profile", simulate_args.profile, "cluster profile JSON")->required();
  simulate_cmd->add_option("--nodes", simulate_args.nodes, "override the profile's node count");
  simulate_cmd->add_option("--batch", simulate_args.batch, "clips per GPU per step (default 8)");
  simulate_cmd->add_option("--mult", simulate_args.mult,
                           "training FLOPs as a multiple of forward (default 3)");
  simulate_cmd->add_option("--comm", simulate_args.comm, "simple or ring (default ring)");
  simulate_cmd->add_option("--format", simulate_args.format, "text, csv or json");
  simulate_cmd->add_option("--out", simulate_args.out, "write here instead of stdout");

  ScalabilityArgs scalability_args;
  CLI::App* scalability_cmd =
      app.add_subcommand("scalability", "sweep node counts, or score measured timings");
  scalability_cmd->add_option("--arch", scalability_args.arch, "preset name, config or report");
  scalability_cmd->add_option("--profile", scalability_args.profile, "cluster profile JSON");
  scalability_cmd->add_option("--timings", scalability_args.timings,
                              "CSV nodes,wall_seconds of measured runs");
  scalability_cmd->add_option("--nodes", scalability_args.nodes,
                              "node counts to sweep (default 1,8,...,256)")
      ->delimiter(',');
  scalability_cmd->add_option("--batch", scalability_args.batch, "clips per GPU per step");
  scalability_cmd->add_option("--mult", scalability_args.mult,
                              "training FLOPs as a multiple of forward");
  scalability_cmd->add_option("--comm", scalability_args.comm, "simple or ring");
  scalability_cmd->add_option("--out", scalability_args.out, "write here instead of stdout");

  GradcheckArgs gradcheck_args;
  CLI::App* gradcheck_cmd =
      app.add_subcommand("gradcheck", "finite-difference check of the desk-scale executor");
  gradcheck_cmd->add_option("--net", gradcheck_args.net,
                            "micro-tsm, micro-linear or a config JSON (default micro-tsm)");
  gradcheck_cmd->add_option("--fraction", gradcheck_args.fraction,
                            "shift fraction for micro-tsm, e.g. 1/8 or 0");
  gradcheck_cmd->add_option("--eps", gradcheck_args.eps, "finite-difference step (default 1e-5)");
  gradcheck_cmd->add_option("--tol", gradcheck_args.tol,
                            "fail when max relative error exceeds this (default 1e-5)");
  gradcheck_cmd->add_option("--seed", gradcheck_args.seed, "RNG seed (default 42)");
  gradcheck_cmd->add_option("--out", gradcheck_args.out, "write here instead of stdout");

  ShiftDemoArgs shift_args;
  CLI::App* shift_cmd = app.add_subcommand("shift-demo", "show the temporal shift on a grid");
  shift_cmd->add_option("--frames", shift_args.t, "frames (default 4)");
  shift_cmd->add_option("--channels", shift_args.c, "channels (default 8)");
  shift_cmd->add_option("--height", shift_args.h, "height (default 1)");
  shift_cmd->add_option("--width", shift_args.w, "width (default 1)");
  shift_cmd->add_option("--fraction", shift_args.fraction, "per-direction fraction (default 1/8)");
  shift_cmd->add_option("--in", shift_args.in_path, "binary tensor to shift instead of the demo grid");
  shift_cmd->add_option("--save", shift_args.out_path, "write the shifted tensor here (binary)");
  shift_cmd->add_option("--out", shift_args.out, "write the text report here instead of stdout");

  LrCurveArgs lr_args;
  CLI::App* lr_cmd = app.add_subcommand("lr-curve", "linear-scaling warmup+cosine schedule");
  lr_cmd->add_option("--gpus", lr_args.gpus, "total GPUs k (default 6)");
  lr_cmd->add_option("--batch", lr_args.batch, "clips per GPU n (default 8)");
  lr_cmd->add_option("--base-lr", lr_args.base_lr, "LR per 8 clips (default 0.00125)");
  lr_cmd->add_option("--epochs", lr_args.epochs, "total epochs (default 100)");
  lr_cmd->add_option("--warmup", lr_args.warmup, "warmup epochs (default 5)");
  lr_cmd->add_option("--samples", lr_args.samples, "rows per epoch (default 1)");
  lr_cmd->add_option("--out", lr_args.out, "write here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ||
        e.get_name() == "CallForVersion") {
      return app.exit(e);
    }
    app.exit(e);
    return 1;
  }

  if (app.got_subcommand(analyze_cmd)) return run_analyze(analyze_args);
  if (app.got_subcommand(compare_cmd)) return run_compare(compare_args);
  if (app.got_subcommand(shapes_cmd)) return run_shapes(shapes_args);
  if (app.got_subcommand(simulate_cmd)) return run_simulate(simulate_args);
  if (app.got_subcommand(scalability_cmd)) return run_scalability(scalability_args);
  if (app.got_subcommand(gradcheck_cmd)) return run_gradcheck(gradcheck_args);
  if (app.got_subcommand(shift_cmd)) return run_shift_demo(shift_args);
  if (app.got_subcommand(lr_cmd)) return run_lr_curve(lr_args);
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const vidperf::ValidationError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "internal error: {}\n", e.what());
    return 2;
  }
}

#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

#include "pgig/attribution.hpp"
#include "pgig/csv.hpp"
#include "pgig/degradation.hpp"
#include "pgig/error.hpp"
#include "pgig/heatmap.hpp"
#include "pgig/network.hpp"
#include "pgig/patterns.hpp"
#include "pgig/random.hpp"
#include "pgig/stress_lab.hpp"
#include "pgig/trainer.hpp"

#ifndef PGIG_VERSION
#define PGIG_VERSION "dev"
#endif

namespace pgig::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kCommands[] = {"stress", "train", "patterns", "explain", "degrade", "render"};

bool is_command(std::string_view name) {
  return std::find(std::begin(kCommands), std::end(kCommands), name) != std::end(kCommands);
}

void add_method_defaults(Config& c) {
  c.set("method.steps", "25");
  c.set("method.samples", "25");
  c.set("method.noise_mu", "0");
  c.set("method.noise_variance", "0.15");
  c.set("method.baseline_draws", "49");
  c.set("method.seed", "0");
  c.set("method.pgig_seed", "unit");
  c.set("method.explain_logits", "false");
}

MethodConfig method_config(const Config& c) {
  MethodConfig mc;
  mc.steps = c.get_size("method.steps", mc.steps);
  mc.samples = c.get_size("method.samples", mc.samples);
  mc.noise_mu = c.get_double("method.noise_mu", mc.noise_mu);
  const double variance = c.get_double("method.noise_variance", 0.15);
  if (variance < 0.0) throw ConfigError("method.noise_variance must be >= 0");
  mc.noise_sigma = std::sqrt(variance);
  mc.baseline_draws = c.get_size("method.baseline_draws", mc.baseline_draws);
  mc.random_seed = c.get_u64("method.seed", mc.random_seed);
  const std::string seed = c.get_string("method.pgig_seed", "unit");
  if (seed == "unit") {
    mc.pgig_seed = PathSeed::Unit;
  } else if (seed == "output") {
    mc.pgig_seed = PathSeed::Output;
  } else {
    throw ParseError(c.source(), 0, "method.pgig_seed must be 'unit' or 'output', got '" + seed + "'");
  }
  mc.explain_logits = c.get_bool("method.explain_logits", false);
  return mc;
}

std::string required(const Config& c, std::string_view key) {
  std::string v = c.get_string(key, "");
  if (v.empty()) throw ConfigError(std::string(key) + " is required");
  return v;
}

Method method_from(const std::string& name) {
  const auto m = parse_method(name);
  if (!m) throw ParseError("method", 0, "unknown method '" + name + "'; valid methods: " + method_names());
  return *m;
}

void write_lines(const fs::path& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
    out << '\n';
  }
}

void write_map_csv(const fs::path& path, const Tensor& values) {
  CsvTable t{{"feature", "value"}, {}};
  for (std::size_t i = 0; i < values.size(); ++i) t.rows.push_back({static_cast<double>(i), values[i]});
  write_csv(path, t);
}

std::size_t square_side(std::size_t n) {
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  return side * side == n ? side : 0;
}

// ---------------------------------------------------------------------------

void cmd_stress(const Config& c, const fs::path& out, std::ostream& log) {
  stress::StressConfig sc;
  sc.z_start = c.get_double("stress.z_start", sc.z_start);
  sc.z_end = c.get_double("stress.z_end", sc.z_end);
  sc.z_step = c.get_double("stress.z_step", sc.z_step);
  sc.noise_mu = c.get_double("stress.noise_mu", sc.noise_mu);
  sc.noise_sigma = c.get_double("stress.noise_sigma", sc.noise_sigma);
  sc.random_seed = c.get_u64("stress.seed", sc.random_seed);
  sc.steps = c.get_size("stress.steps", sc.steps);

  const auto cmp = stress::run_stress_comparison(sc);
  const auto files = stress::write_panels(cmp, out);
  const auto checks = stress::check_properties(cmp);
  stress::write_report(checks, out / "report.csv");
  log << "wrote " << files.size() << " panel files for " << cmp.rows.size() << " points\n";
  for (const auto& chk : checks) log << (chk.pass ? "  pass  " : "  FAIL  ") << chk.name << '\n';
}

void cmd_train(const Config& c, const fs::path& out, std::ostream& log) {
  train::TaskConfig tc;
  tc.side = c.get_size("task.side", tc.side);
  tc.train_size = c.get_size("task.train_size", tc.train_size);
  tc.val_size = c.get_size("task.val_size", tc.val_size);
  tc.test_size = c.get_size("task.test_size", tc.test_size);
  tc.min_amplitude = c.get_double("task.min_amplitude", tc.min_amplitude);
  tc.shared_noise_sigma = c.get_double("task.shared_noise_sigma", tc.shared_noise_sigma);
  tc.pixel_noise_sigma = c.get_double("task.pixel_noise_sigma", tc.pixel_noise_sigma);
  tc.seed = c.get_u64("task.seed", tc.seed);

  train::TrainConfig trc;
  trc.hidden = c.get_size_list("train.hidden", trc.hidden);
  trc.learning_rate = c.get_double("train.learning_rate", trc.learning_rate);
  trc.epochs = c.get_size("train.epochs", trc.epochs);
  trc.batch_size = c.get_size("train.batch_size", trc.batch_size);
  trc.seed = c.get_u64("train.seed", trc.seed);

  RandomSource rng(tc.seed);
  const auto task = train::generate_task(tc, rng);
  const auto result = train::train(task, trc);

  save_network(out / "network.txt", result.network);
  train::write_split(out / "train.csv", task.train);
  train::write_split(out / "val.csv", task.val);
  train::write_split(out / "test.csv", task.test);
  CsvTable hist{{"epoch", "mean_loss", "val_accuracy"}, {}};
  for (const auto& h : result.history) hist.rows.push_back({double(h.epoch), h.mean_loss, h.val_accuracy});
  write_csv(out / "training.csv", hist);
  log << "best validation accuracy " << result.best_val_accuracy << " at epoch " << result.best_epoch << '\n';
}

void cmd_patterns(const Config& c, const fs::path& out, std::ostream& log) {
  const Network net = load_network(fs::path(required(c, "io.network")));
  const auto split = train::read_split(fs::path(required(c, "io.data")));

  PatternOptions opts;
  const std::string scope = c.get_string("patterns.output_mean", "positive");
  if (scope == "positive") {
    opts.output_mean = OutputMeanScope::PositiveRegime;
  } else if (scope == "full") {
    opts.output_mean = OutputMeanScope::FullBatch;
  } else {
    throw ParseError(c.source(), 0, "patterns.output_mean must be 'positive' or 'full', got '" + scope + "'");
  }
  opts.gate_linear_layers = c.get_bool("patterns.gate_linear", false);

  const auto fit = train::fit_patterns(net.without_patterns(), split.images, opts);
  save_network(out / "network_patterns.txt", fit.network);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < fit.patterns.layers.size(); ++k) {
    const auto& l = fit.patterns.layers[k];
    for (std::size_t j = 0; j < l.valid.size(); ++j) {
      rows.push_back({std::to_string(k), std::to_string(j), l.valid[j] ? "1" : "0", std::to_string(l.regime_count[j])});
    }
  }
  write_lines(out / "patterns.csv", {"layer", "neuron", "valid", "regime_count"}, rows);
  log << "patterns for " << fit.patterns.neuron_count() << " neurons, " << fit.invalid_neurons << " invalid\n";
}

void cmd_explain(const Config& c, const fs::path& out, std::ostream& log) {
  const Method method = method_from(required(c, "explain.method"));
  const Network net = load_network(fs::path(required(c, "io.network")));

  Tensor x;
  const std::string input = c.get_string("io.input", "");
  const std::string data = c.get_string("io.data", "");
  if (!input.empty()) {
    x = Tensor::vector(read_csv_row(input));
  } else if (!data.empty()) {
    const auto split = train::read_split(data);
    const std::size_t index = c.get_size("io.index", 0);
    if (index >= split.size()) {
      throw ArgumentError("io.index " + std::to_string(index) + " out of range for " + std::to_string(split.size()) + " images");
    }
    x = split.images[index];
  } else {
    throw ConfigError("explain needs io.input or io.data");
  }

  MethodConfig mc = method_config(c);
  train::Split reference;
  const std::string ref_path = c.get_string("io.reference", "");
  if (!ref_path.empty()) {
    reference = train::read_split(ref_path);
    mc.reference = reference.images;
  }

  std::optional<std::size_t> target;
  const std::string target_s = c.get_string("explain.target", "");
  if (!target_s.empty()) {
    target = c.get_size("explain.target", 0);
  } else if (net.output_dim() > 1) {
    target = argmax(predict(net, x));
  }

  const AttributionMap map = attribute(method, net, x, target, mc);
  write_map_csv(out / "attribution.csv", map.values);
  log << method_name(method) << " over " << map.values.size() << " features";
  if (target) log << ", class " << *target;
  log << '\n';

  if (c.get_bool("explain.image", true)) {
    const std::size_t side = square_side(map.values.size());
    if (side) {
      write_ppm(out / "heatmap.ppm", render_heatmap(map.values, side, side, c.get_size("explain.scale", 8)));
    } else {
      log << "map of " << map.values.size() << " values is not square; no image written\n";
    }
  }
}

void cmd_degrade(const Config& c, const fs::path& out, std::ostream& log) {
  const Network net = load_network(fs::path(required(c, "io.network")));
  const auto data = train::read_split(fs::path(required(c, "io.data")));
  const std::string ref_path = c.get_string("io.reference", "");
  const auto reference = ref_path.empty() ? data : train::read_split(ref_path);

  degrade::DegradationConfig dc;
  dc.image_side = square_side(net.input_dim());
  if (dc.image_side == 0) throw ConfigError("network input is not a square image");
  dc.patch_side = c.get_size("degrade.patch_side", dc.patch_side);
  if (const std::size_t mp = c.get_size("degrade.max_patches", 0); mp > 0) dc.max_patches = mp;
  const std::string agg = c.get_string("degrade.aggregation", "signed");
  if (agg == "signed") {
    dc.aggregation = degrade::Aggregation::SumSigned;
  } else if (agg == "absolute") {
    dc.aggregation = degrade::Aggregation::SumAbsolute;
  } else {
    throw ParseError(c.source(), 0, "degrade.aggregation must be 'signed' or 'absolute', got '" + agg + "'");
  }
  const std::string explained = c.get_string("degrade.explained", "predicted");
  if (explained == "predicted") {
    dc.explained = degrade::ExplainedClass::Predicted;
  } else if (explained == "label") {
    dc.explained = degrade::ExplainedClass::TrueLabel;
  } else {
    throw ParseError(c.source(), 0, "degrade.explained must be 'predicted' or 'label', got '" + explained + "'");
  }
  const std::string methods = c.get_string("degrade.methods", "all");
  if (methods != "all") {
    dc.methods.clear();
    for (auto name : split_fields(methods)) dc.methods.push_back(method_from(std::string(name)));
  }
  dc.method_config = method_config(c);
  dc.method_config.reference = reference.images;

  std::size_t count = data.size();
  if (const std::size_t limit = c.get_size("degrade.limit", 0); limit > 0) count = std::min(count, limit);
  const auto curves = degrade::run_benchmark(net, std::span(data.images).first(count),
                                             std::span(data.labels).first(count), dc);
  degrade::write_curves(out / "curves.csv", curves);
  degrade::write_auc(out / "auc.csv", curves);
  log << count << " images, " << dc.grid_size() << " patches\n";
  for (const auto& curve : curves) log << "  " << method_name(curve.method) << " auc " << curve.auc << '\n';
}

void cmd_render(const Config& c, const fs::path& out, std::ostream& log) {
  const fs::path map_path = required(c, "io.map");
  const CsvTable t = read_csv(map_path);
  const auto col = t.column("value");
  if (!col) throw ParseError(map_path.string(), 1, "attribution CSV needs a 'value' column");
  std::vector<double> values;
  for (const auto& row : t.rows) values.push_back(row[*col]);
  const std::size_t side = square_side(values.size());
  if (side == 0) throw ConfigError("attribution map of " + std::to_string(values.size()) + " values is not square");
  const auto img = render_heatmap(Tensor::vector(std::move(values)), side, side, c.get_size("render.scale", 8));
  write_ppm(out / "heatmap.ppm", img);
  log << "rendered " << side << "x" << side << " map, bound " << img.bound << '\n';
}

// Absolute paths keep manifests replayable from any working directory.
Config absolutize(Config c) {
  for (const auto& key : c.keys_in("io")) {
    const std::string full = "io." + key;
    const std::string v = c.get_string(full, "");
    if (!v.empty() && key != "index") c.set(full, fs::absolute(v).lexically_normal().string());
  }
  return c;
}

// Defaults, then the config file, then flag overrides. Unknown keys are errors.
Config resolve(std::string_view command, const Config& file, const Config& overrides) {
  Config resolved = command_defaults(command);
  const auto allowed = resolved.keys();
  const std::set<std::string> known(allowed.begin(), allowed.end());
  for (const Config* src : {&file, &overrides}) {
    for (const auto& key : src->keys()) {
      if (!known.count(key)) {
        throw ParseError(src->source().empty() ? "<override>" : src->source(), 0,
                         "unknown key '" + key + "' for command " + std::string(command));
      }
    }
  }
  resolved.merge(file);
  resolved.merge(overrides);
  return absolutize(resolved);
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const pgig::ParseError*>(&e)) return kUsage;
  if (dynamic_cast<const NumericError*>(&e)) return kNumeric;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ArgumentError*>(&e) ||
      dynamic_cast<const DimensionError*>(&e)) {
    return kPrecondition;
  }
  return kFailure;
}

}  // namespace

Config command_defaults(std::string_view command) {
  Config c;
  if (command == "stress") {
    c.set("stress.z_start", "-2");
    c.set("stress.z_end", "2");
    c.set("stress.z_step", "0.01");
    c.set("stress.noise_mu", "0");
    c.set("stress.noise_sigma", "0.25");
    c.set("stress.seed", "42");
    c.set("stress.steps", "25");
  } else if (command == "train") {
    c.set("task.side", "16");
    c.set("task.train_size", "2000");
    c.set("task.val_size", "500");
    c.set("task.test_size", "500");
    c.set("task.min_amplitude", "0.5");
    c.set("task.shared_noise_sigma", "0.5");
    c.set("task.pixel_noise_sigma", "0.15");
    c.set("task.seed", "1");
    c.set("train.hidden", "64,32");
    c.set("train.learning_rate", "0.05");
    c.set("train.epochs", "20");
    c.set("train.batch_size", "32");
    c.set("train.seed", "7");
  } else if (command == "patterns") {
    c.set("io.network", "");
    c.set("io.data", "");
    c.set("patterns.output_mean", "positive");
    c.set("patterns.gate_linear", "false");
  } else if (command == "explain") {
    c.set("io.network", "");
    c.set("io.input", "");
    c.set("io.data", "");
    c.set("io.index", "0");
    c.set("io.reference", "");
    c.set("explain.method", "");
    c.set("explain.target", "");
    c.set("explain.image", "true");
    c.set("explain.scale", "8");
    add_method_defaults(c);
  } else if (command == "degrade") {
    c.set("io.network", "");
    c.set("io.data", "");
    c.set("io.reference", "");
    c.set("degrade.patch_side", "4");
    c.set("degrade.max_patches", "0");
    c.set("degrade.aggregation", "signed");
    c.set("degrade.methods", "all");
    c.set("degrade.explained", "predicted");
    c.set("degrade.limit", "0");
    add_method_defaults(c);
  } else if (command == "render") {
    c.set("io.map", "");
    c.set("render.scale", "8");
  } else {
    throw pgig::ParseError("command", 0, "unknown command '" + std::string(command) + "'");
  }
  return c;
}

void execute(std::string_view command, const Config& resolved, const fs::path& out_dir, std::ostream& log) {
  fs::create_directories(out_dir);
  const auto start = std::chrono::steady_clock::now();
  if (command == "stress") {
    cmd_stress(resolved, out_dir, log);
  } else if (command == "train") {
    cmd_train(resolved, out_dir, log);
  } else if (command == "patterns") {
    cmd_patterns(resolved, out_dir, log);
  } else if (command == "explain") {
    cmd_explain(resolved, out_dir, log);
  } else if (command == "degrade") {
    cmd_degrade(resolved, out_dir, log);
  } else if (command == "render") {
    cmd_render(resolved, out_dir, log);
  } else {
    throw pgig::ParseError("command", 0, "unknown command '" + std::string(command) + "'");
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  Config manifest = resolved;
  manifest.set("run.command", std::string(command));
  manifest.set("run.version", PGIG_VERSION);
  manifest.set("run.out", fs::absolute(out_dir).lexically_normal().string());
  manifest.set("run.rng", std::string(RandomSource::kAlgorithm));
  manifest.set("timing.wall_seconds", format_number(seconds));
  manifest.save(out_dir / "manifest.txt");
}

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gradient attribution toolkit: pattern-guided integrated gradients and friends", "pgig"};
  app.require_subcommand(1);
  app.set_version_flag("--version", PGIG_VERSION);

  struct Common {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    std::vector<std::string> sets;
  };
  std::map<std::string, Common> common;
  std::map<std::string, std::map<std::string, std::string>> flags;

  auto add_common = [&](CLI::App* sub) {
    Common& c = common[sub->get_name()];
    sub->add_option("--config", c.config, "key=value config file with [section] headers");
    sub->add_option("--out", c.out, "output directory")->capture_default_str();
    sub->add_option("--seed", c.seed, "seed override for the command's random source");
    sub->add_option("--set", c.sets, "override one key, e.g. --set method.steps=50");
  };
  auto add_flag = [&](CLI::App* sub, const std::string& name, const std::string& key, const std::string& help) {
    sub->add_option_function<std::string>(name, [&flags, sub, key](const std::string& v) {
      flags[sub->get_name()][key] = v;
    }, help);
  };

  auto* stress_cmd = app.add_subcommand("stress", "plateau + distractor stress test, writes panel CSVs");
  add_common(stress_cmd);

  auto* train_cmd = app.add_subcommand("train", "generate the synthetic image task and train a classifier");
  add_common(train_cmd);

  auto* patterns_cmd = app.add_subcommand("patterns", "estimate and attach per-layer patterns");
  add_common(patterns_cmd);
  add_flag(patterns_cmd, "--network", "io.network", "network file");
  add_flag(patterns_cmd, "--data", "io.data", "dataset CSV (label,p0,...) to estimate over");

  auto* explain_cmd = app.add_subcommand("explain", "attribution map for one input");
  add_common(explain_cmd);
  add_flag(explain_cmd, "--network", "io.network", "network file");
  add_flag(explain_cmd, "--method", "explain.method", "one of: " + method_names());
  add_flag(explain_cmd, "--input", "io.input", "CSV file holding one input row");
  add_flag(explain_cmd, "--data", "io.data", "dataset CSV to take the input from");
  add_flag(explain_cmd, "--index", "io.index", "row of --data to explain");
  add_flag(explain_cmd, "--target", "explain.target", "class to explain (default: predicted)");
  add_flag(explain_cmd, "--reference", "io.reference", "dataset CSV for expected_gradients baselines");

  auto* degrade_cmd = app.add_subcommand("degrade", "patch degradation benchmark over a dataset");
  add_common(degrade_cmd);
  add_flag(degrade_cmd, "--network", "io.network", "network file with patterns");
  add_flag(degrade_cmd, "--data", "io.data", "dataset CSV to degrade");
  add_flag(degrade_cmd, "--reference", "io.reference", "dataset CSV for expected_gradients baselines");
  add_flag(degrade_cmd, "--method", "degrade.methods", "comma-separated methods (default: all)");
  add_flag(degrade_cmd, "--limit", "degrade.limit", "use only the first N images");

  auto* render_cmd = app.add_subcommand("render", "render an attribution CSV as a PPM heatmap");
  add_common(render_cmd);
  add_flag(render_cmd, "--map", "io.map", "attribution CSV (feature,value)");

  auto* replay_cmd = app.add_subcommand("replay", "re-run a command from its manifest.txt");
  std::string manifest_path;
  std::string replay_out;
  replay_cmd->add_option("manifest", manifest_path, "manifest.txt of an earlier run")->required();
  replay_cmd->add_option("--out", replay_out, "output directory (default: the recorded one)");

  std::vector<std::string> args(argv.rbegin(), argv.rend());
  if (!args.empty()) args.pop_back();
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    if (replay_cmd->parsed()) {
      const Config manifest = Config::load(manifest_path);
      const std::string command = manifest.get_string("run.command", "");
      if (!is_command(command)) throw pgig::ParseError(manifest_path, 0, "manifest has no valid run.command");
      Config recorded;
      for (const auto& key : manifest.keys()) {
        if (key.rfind("run.", 0) == 0 || key.rfind("timing.", 0) == 0) continue;
        recorded.set(key, *manifest.get(key));
      }
      const fs::path dir = replay_out.empty() ? fs::path(manifest.get_string("run.out", "out")) : fs::path(replay_out);
      execute(command, resolve(command, recorded, Config()), dir, out);
      return kSuccess;
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();
    const Common& c = common[command];
    const Config file = c.config.empty() ? Config() : Config::load(c.config);
    Config overrides;
    for (const auto& [key, value] : flags[command]) overrides.set(key, value);
    if (c.seed) {
      const std::string s = std::to_string(*c.seed);
      if (command == "stress") overrides.set("stress.seed", s);
      if (command == "train") {
        overrides.set("task.seed", s);
        overrides.set("train.seed", s);
      }
      if (command == "explain" || command == "degrade") overrides.set("method.seed", s);
    }
    for (const auto& a : c.sets) overrides.set_assignment(a);
    execute(command, resolve(command, file, overrides), c.out, out);
    return kSuccess;
  } catch (const std::exception& e) {
    err << "pgig: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace pgig::cli

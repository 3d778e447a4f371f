#include "vattr/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>

#include "vattr/baselines.hpp"
#include "vattr/error.hpp"
#include "vattr/experiments.hpp"
#include "vattr/io.hpp"
#include "vattr/metrics.hpp"
#include "vattr/step.hpp"
#include "vattr/synth.hpp"
#include "vattr/toy_model.hpp"

namespace vattr {

std::map<std::string, std::string> parse_run_config(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParameterError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty() || key.front() == '-') throw ParameterError("config line " + std::to_string(lineno) + ": bad key");
    if (key == "config") throw ParameterError("config files cannot include other config files");
    if (!out.emplace(key, trim(line.substr(eq + 1))).second) {
      throw ParameterError("config key '" + key + "' given twice");
    }
  }
  return out;
}

namespace {

// Command-line flags win over config entries; every config key must name a
// flag of the subcommand, which the parser then enforces.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) path = args[k + 1];
    if (args[k].rfind("--config=", 0) == 0) path = args[k].substr(9);
  }
  if (!path) return args;
  std::string text;
  try {
    text = read_text(*path);
  } catch (const Error& e) {
    throw ParameterError(e.what());
  }
  for (const auto& [key, value] : parse_run_config(text)) {
    const std::string flag = "--" + key;
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (!given) args.push_back(flag + "=" + value);
  }
  return args;
}

struct Common {
  std::uint64_t seed = 0;
  std::string config;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Random seed");
  sub->add_option("--config", c.config, "key=value file mirroring the flags");
}

struct ScorerChoice {
  std::string model;
  bool oracle = false;
  std::optional<double> constant;

  void add(CLI::App* sub, bool allow_constant) {
    auto* m = sub->add_option("--model", model, "Toy model file");
    auto* o = sub->add_flag("--oracle", oracle, "Use each sample's oracle tube scorer");
    m->excludes(o);
    if (allow_constant) {
      auto* c = sub->add_option("--constant", constant, "Constant-output scorer stub")->check(CLI::Range(0.0, 1.0));
      c->excludes(m)->excludes(o);
    }
  }
  bool any() const { return !model.empty() || oracle || constant; }
};

// One scorer per sample (oracles differ per sample) and the class to explain.
struct ScorerSet {
  std::unique_ptr<Scorer> shared;
  bool oracle = false;

  static ScorerSet make(const ScorerChoice& choice, const std::vector<SynthSample>& data) {
    ScorerSet s;
    if (choice.oracle) {
      s.oracle = true;
    } else if (choice.constant) {
      std::size_t classes = 2;
      for (const auto& d : data) classes = std::max(classes, d.label + 1);
      std::vector<double> probs(classes, (1.0 - *choice.constant) / static_cast<double>(classes - 1));
      probs[0] = *choice.constant;
      const auto& v = data.front().video;
      s.shared = std::make_unique<ConstantScorer>(v.frame_shape(), v.channels(), probs);
    } else {
      s.shared = std::make_unique<ToyConv3dScorer>(read_model(choice.model));
    }
    return s;
  }
  // Keeps the per-sample oracle alive in `hold`.
  const Scorer& get(const SynthSample& d, std::unique_ptr<Scorer>& hold) const {
    if (!oracle) return *shared;
    hold = std::make_unique<OracleTubeScorer>(oracle_for(d));
    return *hold;
  }
  std::size_t target(const SynthSample& d) const {
    if (oracle) return kOracleClass;
    return d.label < shared->num_classes() ? d.label : 0;
  }
};

struct MethodFlags {
  std::size_t ig_steps = 50, sg_samples = 50, big_steps = 50;
  double sg_sigma = 0.15, big_sigma = 50.0;
  std::string reduce = "mean-abs";
  std::vector<double> areas{0.05, 0.10, 0.15, 0.20};
  std::size_t iterations = 400;
  double lambda1 = 10.0, lambda2 = 1.0, lr = 0.02;
  std::size_t kernel_frames = 8;
  std::string beta = "full";

  void add(CLI::App* sub) {
    sub->add_option("--ig-steps", ig_steps)->check(CLI::PositiveNumber);
    sub->add_option("--sg-samples", sg_samples)->check(CLI::PositiveNumber);
    sub->add_option("--sg-sigma", sg_sigma, "SmoothGrad noise as a fraction of the value range")
        ->check(CLI::PositiveNumber);
    sub->add_option("--big-steps", big_steps)->check(CLI::PositiveNumber);
    sub->add_option("--big-sigma", big_sigma)->check(CLI::PositiveNumber);
    sub->add_option("--reduce", reduce, "Channel reduction")->check(CLI::IsMember({"mean-abs", "max-abs"}));
    sub->add_option("--areas", areas, "Preserved-area ratios for step")->delimiter(',');
    sub->add_option("--iterations", iterations)->check(CLI::PositiveNumber);
    sub->add_option("--lambda1", lambda1)->check(CLI::NonNegativeNumber);
    sub->add_option("--lambda2", lambda2)->check(CLI::NonNegativeNumber);
    sub->add_option("--lr", lr)->check(CLI::PositiveNumber);
    sub->add_option("--kernel-frames", kernel_frames, "Temporal kernel size; 0 disables smoothing");
    sub->add_option("--beta", beta, "Smoothness template rule")->check(CLI::IsMember({"full", "strided"}));
  }

  MethodSettings settings(std::uint64_t seed) const {
    MethodSettings s;
    s.baseline.ig_steps = ig_steps;
    s.baseline.sg_samples = sg_samples;
    s.baseline.sg_sigma = sg_sigma;
    s.baseline.big_steps = big_steps;
    s.baseline.big_sigma_max = big_sigma;
    s.baseline.channel_reduce = reduce == "max-abs" ? ChannelReduce::max_abs : ChannelReduce::mean_abs;
    s.baseline.seed = seed;
    s.baseline.validate();
    s.step.areas = areas;
    s.step.iterations = iterations;
    s.step.lambda1 = lambda1;
    s.step.lambda2_final = lambda2;
    s.step.lr = lr;
    s.step.kernel.t = kernel_frames;
    s.step.beta_rule = beta == "strided" ? SmoothBeta::strided_output : SmoothBeta::full_convolution;
    s.step.validate();
    return s;
  }
};

std::vector<SynthSample> load(const std::string& dir) {
  auto data = read_dataset(dir);
  if (data.empty()) throw ParameterError("dataset '" + dir + "' has no samples");
  return data;
}

std::vector<std::size_t> select(const std::vector<std::size_t>& indices, std::size_t limit, std::size_t n) {
  std::vector<std::size_t> out = indices;
  if (out.empty()) {
    out.resize(std::min(limit ? limit : n, n));
    std::iota(out.begin(), out.end(), std::size_t{0});
  }
  for (auto k : out)
    if (k >= n) throw ParameterError("sample index " + std::to_string(k) + " out of range");
  return out;
}

std::string map_name(std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "map_%04zu.vatt", n);
  return buf;
}

struct MapEntry {
  std::size_t index;
  std::string method;
  std::size_t target;
};

std::vector<MapEntry> read_map_index(const fs::path& dir) {
  std::istringstream in(read_text(dir / "maps.csv"));
  std::string line;
  if (!std::getline(in, line) || line != "index,method,class") throw FormatError("maps.csv", "missing header");
  std::vector<MapEntry> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, b, c;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c)) {
      throw FormatError("maps.csv", "expected 3 columns");
    }
    try {
      out.push_back({std::stoul(a), b, std::stoul(c)});
    } catch (const std::exception&) {
      throw FormatError("maps.csv", "bad row '" + line + "'");
    }
  }
  return out;
}

AucConfig metric_from(const std::string& op, const std::string& order, const std::string& unit) {
  AucConfig cfg;
  cfg.operation = op == "insertion" ? Operation::insertion : Operation::deletion;
  cfg.order = order == "morf" ? Order::morf : Order::lerf;
  cfg.unit = UnitSpec::parse(unit);
  return cfg;
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<Method> out;
  for (const auto& n : names) out.push_back(parse_method(n));
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args) {
  CLI::App app{"Video attribution lab: attribution methods, metrics and synthetic benchmarks"};
  app.require_subcommand(1);
  app.name("vattr");

  // synth
  Common synth_c;
  SynthSpec spec;
  std::string synth_out, trajectory = "linear";
  auto* synth = app.add_subcommand("synth", "Generate a synthetic video dataset");
  add_common(synth, synth_c);
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--classes", spec.num_classes)->check(CLI::Range(1, 4));
  synth->add_option("--per-class", spec.videos_per_class)->check(CLI::PositiveNumber);
  synth->add_option("--frames", spec.frames)->check(CLI::PositiveNumber);
  synth->add_option("--size", spec.size)->check(CLI::PositiveNumber);
  synth->add_option("--shape-scale", spec.shape_scale)->check(CLI::PositiveNumber);
  synth->add_option("--trajectory", trajectory)->check(CLI::IsMember({"linear", "sinusoidal"}));
  synth->add_option("--noise", spec.noise_sigma)->check(CLI::NonNegativeNumber);
  synth->add_option("--channels", spec.channels)->check(CLI::IsMember({1, 3}));

  // train
  Common train_c;
  std::string train_data, train_out, optimizer = "adam";
  ToyTrainConfig tcfg;
  ToyArch arch;
  auto* train = app.add_subcommand("train", "Train the toy 3D CNN on a dataset");
  add_common(train, train_c);
  train->add_option("--data", train_data)->required();
  train->add_option("--out", train_out, "Model file")->required();
  train->add_option("--epochs", tcfg.epochs)->check(CLI::NonNegativeNumber);
  train->add_option("--lr", tcfg.lr)->check(CLI::PositiveNumber);
  train->add_option("--momentum", tcfg.momentum)->check(CLI::Range(0.0, 0.999999));
  train->add_option("--batch", tcfg.batch_size)->check(CLI::PositiveNumber);
  train->add_option("--optimizer", optimizer)->check(CLI::IsMember({"adam", "sgd"}));
  train->add_option("--conv1", arch.conv1)->check(CLI::PositiveNumber);
  train->add_option("--conv2", arch.conv2)->check(CLI::PositiveNumber);

  // attribute
  Common attr_c;
  std::string attr_data, attr_out, attr_method;
  std::vector<std::size_t> attr_indices;
  std::size_t attr_limit = 0;
  ScorerChoice attr_scorer;
  MethodFlags attr_flags;
  auto* attribute_cmd = app.add_subcommand("attribute", "Compute attribution maps");
  add_common(attribute_cmd, attr_c);
  attribute_cmd->add_option("--data", attr_data)->required();
  attribute_cmd->add_option("--out", attr_out, "Output directory for maps")->required();
  attribute_cmd->add_option("--method", attr_method)
      ->required()
      ->check(CLI::IsMember({"step", "grad", "gxi", "ig", "sg", "sg2", "big", "gradcam", "random"}));
  attribute_cmd->add_option("--indices", attr_indices, "Sample indices (default all)")->delimiter(',');
  attribute_cmd->add_option("--limit", attr_limit, "Only the first N samples");
  attr_scorer.add(attribute_cmd, false);
  attr_flags.add(attribute_cmd);

  // evaluate
  Common eval_c;
  std::string eval_data, eval_maps, eval_out, eval_op = "insertion", eval_order = "morf", eval_unit = "patch:7";
  std::string eval_reference;
  ScorerChoice eval_scorer;
  auto* evaluate = app.add_subcommand("evaluate", "AUC of saved maps under one metric");
  add_common(evaluate, eval_c);
  evaluate->add_option("--data", eval_data)->required();
  evaluate->add_option("--maps", eval_maps, "Directory written by attribute")->required();
  evaluate->add_option("--out", eval_out, "Result CSV")->required();
  evaluate->add_option("--operation", eval_op)->check(CLI::IsMember({"insertion", "deletion"}));
  evaluate->add_option("--order", eval_order)->check(CLI::IsMember({"morf", "lerf"}));
  evaluate->add_option("--unit", eval_unit, "patch:N or supervoxel:N");
  evaluate->add_option("--reference", eval_reference, "Dataset whose mean is the reference input (default --data)");
  eval_scorer.add(evaluate, true);

  // reliability
  Common rel_c;
  std::string rel_data, rel_model, rel_out, rel_summary;
  std::vector<std::string> rel_methods{"grad", "ig", "sg", "sg2", "gradcam"};
  std::size_t rel_limit = 0;
  MethodFlags rel_flags;
  auto* rel = app.add_subcommand("reliability", "Reliability alpha of the MoRF insertion/deletion metrics");
  add_common(rel, rel_c);
  rel->add_option("--data", rel_data)->required();
  rel->add_option("--model", rel_model)->required();
  rel->add_option("--methods", rel_methods)->delimiter(',');
  rel->add_option("--limit", rel_limit, "Only the first N samples");
  rel->add_option("--out", rel_out, "Per-sample AUC CSV")->required();
  rel->add_option("--summary", rel_summary, "Alpha CSV (default: stdout only)");
  rel_flags.add(rel);

  // kar
  Common kar_c;
  std::string kar_train, kar_test, kar_maps = "gt", kar_model, kar_out, kar_optimizer = "adam";
  std::vector<double> kar_ratios{0.05, 0.1, 0.3, 0.5, 0.7, 0.9};
  ToyTrainConfig kar_cfg;
  MethodFlags kar_flags;
  auto* kar = app.add_subcommand("kar", "Keep-and-retrain accuracy per keep ratio");
  add_common(kar, kar_c);
  kar->add_option("--train-data", kar_train)->required();
  kar->add_option("--test-data", kar_test)->required();
  kar->add_option("--maps", kar_maps, "gt, random, or an attribution method (needs --model)");
  kar->add_option("--model", kar_model, "Model used to compute method maps");
  kar->add_option("--ratios", kar_ratios)->delimiter(',')->check(CLI::Range(0.0, 1.0));
  kar->add_option("--epochs", kar_cfg.epochs)->check(CLI::NonNegativeNumber);
  kar->add_option("--train-lr", kar_cfg.lr)->check(CLI::PositiveNumber);
  kar->add_option("--batch", kar_cfg.batch_size)->check(CLI::PositiveNumber);
  kar->add_option("--optimizer", kar_optimizer)->check(CLI::IsMember({"adam", "sgd"}));
  kar->add_option("--out", kar_out, "Result CSV")->required();
  kar_flags.add(kar);

  // export-frames
  Common exp_c;
  std::string exp_map, exp_out, exp_stem = "frame";
  auto* exportf = app.add_subcommand("export-frames", "Write a map as 8-bit graymap frames");
  add_common(exportf, exp_c);
  exportf->add_option("--map", exp_map)->required();
  exportf->add_option("--out", exp_out)->required();
  exportf->add_option("--stem", exp_stem);

  // ablation
  Common abl_c;
  std::string abl_data, abl_out;
  std::vector<std::size_t> abl_depths{0, 5, 8, 11, 14};
  std::size_t abl_limit = 8;
  MethodFlags abl_flags;
  auto* ablation = app.add_subcommand("ablation", "Sweep the temporal kernel size of step on oracle tubes");
  add_common(ablation, abl_c);
  ablation->add_option("--data", abl_data)->required();
  ablation->add_option("--tk", abl_depths, "Temporal kernel sizes")->delimiter(',');
  ablation->add_option("--limit", abl_limit, "Only the first N samples")->check(CLI::PositiveNumber);
  ablation->add_option("--out", abl_out)->required();
  abl_flags.add(ablation);

  std::vector<std::string> args;
  try {
    args = merge_config(raw_args);
  } catch (const ParameterError& e) {
    std::cerr << "vattr: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (synth->parsed()) {
      spec.trajectory = parse_trajectory(trajectory);
      spec.seed = synth_c.seed;
      write_dataset(synth_out, generate(spec));
      return kExitOk;
    }

    if (train->parsed()) {
      const auto data = load(train_data);
      arch.input = data.front().video.frame_shape();
      arch.channels = data.front().video.channels();
      arch.classes = 2;
      for (const auto& d : data) arch.classes = std::max(arch.classes, d.label + 1);
      tcfg.seed = train_c.seed;
      tcfg.optimizer = optimizer == "sgd" ? ToyOptimizer::sgd : ToyOptimizer::adam;
      std::vector<LabeledVideo> set;
      for (const auto& d : data) set.push_back({&d.video, d.label});
      const ToyTrainResult r = train_toy(set, arch, tcfg);
      write_model(train_out, r.model);
      std::cout << "train_accuracy," << format_double(r.train_accuracy) << "\n";
      return kExitOk;
    }

    if (attribute_cmd->parsed()) {
      if (!attr_scorer.any()) throw ParameterError("attribute needs --model or --oracle");
      const auto data = load(attr_data);
      const MethodSettings settings = attr_flags.settings(attr_c.seed);
      const ScorerSet scorers = ScorerSet::make(attr_scorer, data);
      const Method method = parse_method(attr_method);
      fs::create_directories(attr_out);
      std::string index = "index,method,class\n";
      for (std::size_t n : select(attr_indices, attr_limit, data.size())) {
        std::unique_ptr<Scorer> hold;
        const Scorer& scorer = scorers.get(data[n], hold);
        const std::size_t c = scorers.target(data[n]);
        write_volume(fs::path(attr_out) / map_name(n), compute_map(method, data[n].video, scorer, c, settings, n));
        index += std::to_string(n) + ',' + attr_method + ',' + std::to_string(c) + '\n';
      }
      write_text(fs::path(attr_out) / "maps.csv", index);
      return kExitOk;
    }

    if (evaluate->parsed()) {
      if (!eval_scorer.any()) throw ParameterError("evaluate needs --model, --oracle or --constant");
      const auto data = load(eval_data);
      const AucConfig cfg = metric_from(eval_op, eval_order, eval_unit);
      const VideoTensor xbar = eval_reference.empty() ? dataset_mean(data) : dataset_mean(load(eval_reference));
      const ScorerSet scorers = ScorerSet::make(eval_scorer, data);
      std::string csv = "sample,method,metric,value\n";
      for (const MapEntry& e : read_map_index(eval_maps)) {
        if (e.index >= data.size()) throw FormatError("maps.csv", "index out of range");
        const SynthSample& s = data[e.index];
        std::unique_ptr<Scorer> hold;
        const Scorer& scorer = scorers.get(s, hold);
        const Volume map = read_volume(fs::path(eval_maps) / map_name(e.index));
        const AucResult r = auc(s.video, map, scorer, scorers.target(s), xbar, cfg);
        csv += std::to_string(e.index) + ',' + e.method + ',' + cfg.name() + ',' + format_double(r.auc) + '\n';
      }
      write_text(eval_out, csv);
      return kExitOk;
    }

    if (rel->parsed()) {
      auto data = load(rel_data);
      if (rel_limit && rel_limit < data.size()) data.resize(rel_limit);
      const ToyConv3dScorer model = read_model(rel_model);
      const auto methods = parse_methods(rel_methods);
      const auto metrics = morf_metrics();
      const MethodSettings settings = rel_flags.settings(rel_c.seed);
      const auto results = reliability_suite(data, model, methods, metrics, dataset_mean(data), settings);
      write_text(rel_out, matrix_csv(results, methods));
      std::string summary = "metric,alpha,mean_weight\n";
      for (const auto& r : results) {
        const double mw = std::accumulate(r.report.weights.begin(), r.report.weights.end(), 0.0) /
                          static_cast<double>(r.report.weights.size());
        summary += r.metric.name() + ',' + format_double(r.report.alpha) + ',' + format_double(mw) + '\n';
      }
      std::cout << summary;
      if (!rel_summary.empty()) write_text(rel_summary, summary);
      return kExitOk;
    }

    if (kar->parsed()) {
      const auto train_set = load(kar_train);
      const auto test_set = load(kar_test);
      const MethodSettings settings = kar_flags.settings(kar_c.seed);
      auto maps_for = [&](const std::vector<SynthSample>& set, std::uint64_t salt) {
        std::vector<Volume> maps;
        std::unique_ptr<ToyConv3dScorer> model;
        if (kar_maps != "gt" && kar_maps != "random") {
          if (kar_model.empty()) throw ParameterError("kar --maps " + kar_maps + " needs --model");
          model = std::make_unique<ToyConv3dScorer>(read_model(kar_model));
        }
        for (std::size_t n = 0; n < set.size(); ++n) {
          if (kar_maps == "gt") {
            maps.push_back(set[n].tube_mask);
          } else if (kar_maps == "random") {
            maps.push_back(attribute_random(set[n].video.frame_shape(), derive_seed(kar_c.seed ^ salt, n)));
          } else {
            maps.push_back(compute_map(parse_method(kar_maps), set[n].video, *model, set[n].label, settings, n));
          }
        }
        return maps;
      };
      ToyArch karch;
      karch.input = train_set.front().video.frame_shape();
      karch.channels = train_set.front().video.channels();
      karch.classes = 2;
      for (const auto& d : train_set) karch.classes = std::max(karch.classes, d.label + 1);
      kar_cfg.seed = kar_c.seed;
      kar_cfg.optimizer = kar_optimizer == "sgd" ? ToyOptimizer::sgd : ToyOptimizer::adam;
      const auto points = kar_harness(train_set, test_set, maps_for(train_set, 0), maps_for(test_set, 1),
                                      kar_ratios, karch, kar_cfg);
      std::string csv = "maps,ratio,train_accuracy,test_accuracy\n";
      for (const auto& p : points) {
        csv += kar_maps + ',' + format_double(p.ratio) + ',' + format_double(p.train_accuracy) + ',' +
               format_double(p.test_accuracy) + '\n';
      }
      write_text(kar_out, csv);
      std::cout << csv;
      return kExitOk;
    }

    if (exportf->parsed()) {
      const auto paths = export_frames(read_volume(exp_map), exp_out, exp_stem);
      std::cout << paths.size() << " frames\n";
      return kExitOk;
    }

    if (ablation->parsed()) {
      auto data = load(abl_data);
      if (abl_limit < data.size()) data.resize(abl_limit);
      const MethodSettings settings = abl_flags.settings(abl_c.seed);
      const auto rows = tk_ablation(data, abl_depths, settings.step);
      const std::string csv = ablation_csv(rows);
      write_text(abl_out, csv);
      std::cout << csv;
      return kExitOk;
    }
  } catch (const ParameterError& e) {
    std::cerr << "vattr: invalid parameter: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "vattr: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
  return run_cli(args);
}

}  // namespace vattr

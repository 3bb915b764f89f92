#include "actcomp/cli.hpp"
#include "actcomp/blockwise.hpp"
#include "actcomp/dataset.hpp"
#include "actcomp/dist.hpp"
#include "actcomp/gnn.hpp"
#include "actcomp/varopt.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#ifndef ACTCOMP_DEFAULT_TABLE
#define ACTCOMP_DEFAULT_TABLE "data/boundary_table.csv"
#endif

namespace actcomp::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr const char* kSynthName = "synth200";
constexpr std::uint64_t kSynthSeed = 42;

struct TrainFlags {
  std::string precision = "fp32";
  std::size_t d_over_r = 8;
  std::size_t g_over_r = 0;
  bool vm = false;
  std::uint64_t seed = 42;
  std::size_t epochs = 100;
  double lr = 0.2;
  std::size_t hidden = 128;
  std::size_t layers = 2;
  std::string aggregator = "gcn";
  std::string dataset = kSynthName;
  std::string table = ACTCOMP_DEFAULT_TABLE;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f, bool with_block_size) {
  cmd->add_option("--precision", f.precision, "Activation precision")
      ->check(CLI::IsMember({"fp32", "int8", "int4", "int2"}))
      ->capture_default_str();
  cmd->add_option("--d-over-r", f.d_over_r, "Input width over projected width (1 disables projection)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  if (with_block_size) {
    cmd->add_option("--g-over-r", f.g_over_r, "Block size as a multiple of the projected width (0 = per row)")
        ->capture_default_str();
  }
  cmd->add_flag("--vm", f.vm, "Use variance-minimized INT2 boundaries");
  cmd->add_option("--seed", f.seed, "Random seed")->capture_default_str();
  cmd->add_option("--epochs", f.epochs, "Training epochs")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--lr", f.lr, "Learning rate")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--hidden", f.hidden, "Hidden width")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--layers", f.layers, "Number of layers")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--aggregator", f.aggregator, "Propagation rule")
      ->check(CLI::IsMember({"gcn", "sage"}))
      ->capture_default_str();
  cmd->add_option("--dataset", f.dataset, "Dataset directory, or synth200")->capture_default_str();
  cmd->add_option("--table", f.table, "Boundary table CSV for --vm")->capture_default_str();
}

TrainConfig to_config(const TrainFlags& f) {
  TrainConfig c;
  c.precision = parse_precision(f.precision);
  c.d_over_r = f.d_over_r;
  c.g_over_r = f.g_over_r;
  c.variance_minimized = f.vm;
  c.seed = f.seed;
  c.epochs = f.epochs;
  c.lr = f.lr;
  c.hidden = f.hidden;
  c.layers = f.layers;
  c.aggregator = f.aggregator == "sage" ? Aggregator::kSageMean : Aggregator::kGcn;
  return c;
}

GraphDataset load_dataset(const std::string& name) {
  if (name == kSynthName) return make_two_community_graph({}, kSynthSeed);
  return load_graph_dir(name);
}

std::optional<BoundaryTable> load_table_if_present(const std::string& path) {
  if (path.empty() || !fs::exists(path)) return std::nullopt;
  return BoundaryTable::load(path);
}

void emit(const std::string& path, std::ostream& out, const std::function<void(std::ostream&)>& write) {
  if (path.empty()) {
    write(out);
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream file(p);
  if (!file) throw std::runtime_error("cannot write " + path);
  write(file);
  if (!file) throw std::runtime_error("write failed: " + path);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

json memory_json(const MemoryReport& m) {
  return {{"code_bits", m.code_bits},
          {"metadata_bits", m.metadata_bits},
          {"total_bits", m.total_bits},
          {"bytes", m.bytes},
          {"ratio_vs_fp32", m.ratio_vs_fp32}};
}

json train_report_json(const TrainReport& r, const TrainFlags& flags, const GraphDataset& data) {
  const auto& c = r.config;
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["command"] = "train";
  j["config"] = {{"precision", to_string(c.precision)},
                 {"d_over_r", c.d_over_r},
                 {"g_over_r", c.g_over_r},
                 {"vm", c.variance_minimized},
                 {"epochs", c.epochs},
                 {"lr", c.lr},
                 {"seed", c.seed},
                 {"hidden", c.hidden},
                 {"layers", c.layers},
                 {"aggregator", flags.aggregator},
                 {"dataset", flags.dataset}};
  j["dataset"] = {{"nodes", data.nodes()},
                  {"features", data.features.cols()},
                  {"classes", data.num_classes()},
                  {"directed_edges", data.adjacency.edges.size()}};
  j["epoch_loss"] = r.epoch_loss;
  j["val_loss"] = r.val_loss;
  j["best_val_epoch"] = r.best_val_epoch;
  j["accuracy"] = {{"train", r.train_accuracy}, {"val", r.val_accuracy}, {"test", r.test_accuracy}};

  json layers = json::array();
  std::size_t in_dim = data.features.cols();
  for (std::size_t l = 0; l < r.layer_activation_bits.size(); ++l) {
    const std::size_t r_dim = r.layer_projected_dims[l];
    std::optional<QuantScheme> scheme;
    if (c.precision != Precision::kFp32) {
      const int bits = precision_bits(c.precision);
      scheme = c.g_over_r == 0 ? QuantScheme::per_row(bits) : QuantScheme::block(bits, c.g_over_r * r_dim);
    }
    layers.push_back({{"layer", l},
                      {"input_dim", in_dim},
                      {"stored_dim", r_dim},
                      {"context_bits", r.layer_activation_bits[l]},
                      {"model", memory_json(memory_report(data.nodes(), r_dim, scheme))}});
    in_dim = c.hidden;
  }
  j["memory"] = {{"activation_bits", r.activation_bits},
                 {"fp32_activation_bits", r.fp32_activation_bits},
                 {"ratio_vs_fp32", r.memory_ratio},
                 {"layers", layers}};

  double total = 0.0;
  for (double s : r.epoch_seconds) total += s;
  const double mean = r.epoch_seconds.empty() ? 0.0 : total / static_cast<double>(r.epoch_seconds.size());
  j["timing"] = {{"seconds_per_epoch", r.epoch_seconds},
                 {"mean_seconds_per_epoch", mean},
                 {"epochs_per_second", mean > 0.0 ? 1.0 / mean : 0.0}};
  return j;
}

// ---------------------------------------------------------------------------
// Saved activations: one CSV per layer, "# layer=L epoch=E bits=B" first.

void write_activations(const fs::path& dir, const CapturedActivations& cap, int bits) {
  fs::create_directories(dir);
  for (std::size_t l = 0; l < cap.layers.size(); ++l) {
    std::ofstream f(dir / ("layer_" + std::to_string(l) + ".csv"));
    if (!f) throw std::runtime_error("cannot write activations to " + dir.string());
    f << "# layer=" << l << " epoch=" << cap.epoch << " bits=" << bits << "\n";
    const auto& m = cap.layers[l];
    char buf[32];
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const auto row = m.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(row[j]));
        f << (j ? "," : "") << buf;
      }
      f << "\n";
    }
  }
}

struct LayerDump {
  std::size_t layer = 0;
  int bits = 2;
  std::size_t cols = 0;
  std::vector<float> values;
};

LayerDump read_layer_dump(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  LayerDump d;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string tok;
      while (ss >> tok) {
        if (tok.rfind("layer=", 0) == 0) d.layer = std::stoul(tok.substr(6));
        if (tok.rfind("bits=", 0) == 0) d.bits = std::stoi(tok.substr(5));
      }
      continue;
    }
    std::size_t cols = 0;
    std::istringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      try {
        d.values.push_back(std::stof(field));
      } catch (const std::exception&) {
        throw std::invalid_argument(path.string() + ":" + std::to_string(no) + ": bad value '" + field + "'");
      }
      ++cols;
    }
    if (d.cols == 0) d.cols = cols;
    if (cols != d.cols) throw std::invalid_argument(path.string() + ":" + std::to_string(no) + ": ragged row");
  }
  if (d.values.empty()) throw std::invalid_argument("no activations in " + path.string());
  return d;
}

std::vector<fs::path> sorted_matches(const fs::path& dir, const std::string& prefix, bool want_dirs) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory() != want_dirs) continue;
    if (e.path().filename().string().rfind(prefix, 0) == 0) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// layer -> dumps from each run
std::map<std::size_t, std::vector<LayerDump>> read_activation_tree(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("activation directory not found: " + dir.string());
  auto runs = sorted_matches(dir, "run_", true);
  if (runs.empty()) runs.push_back(dir);
  std::map<std::size_t, std::vector<LayerDump>> layers;
  for (const auto& run : runs) {
    for (const auto& file : sorted_matches(run, "layer_", false)) {
      auto d = read_layer_dump(file);
      layers[d.layer].push_back(std::move(d));
    }
  }
  if (layers.empty()) throw std::runtime_error("no saved activations (layer_*.csv) under " + dir.string());
  return layers;
}

// ---------------------------------------------------------------------------
// Commands

int cmd_train(const TrainFlags& flags, const std::string& out_path, const std::string& save_dir, std::ostream& out) {
  const auto data = load_dataset(flags.dataset);
  const auto config = to_config(flags);
  const auto table = flags.vm ? load_table_if_present(flags.table) : std::nullopt;
  TrainOptions options;
  options.table = table ? &*table : nullptr;
  options.capture_activations = !save_dir.empty();
  const auto report = train(data, config, options);
  if (!save_dir.empty()) {
    const int bits = config.precision == Precision::kFp32 ? 2 : precision_bits(config.precision);
    write_activations(save_dir, *report.captured, bits);
  }
  const auto j = train_report_json(report, flags, data);
  emit(out_path, out, [&](std::ostream& o) { o << j.dump(2) << "\n"; });
  return 0;
}

int cmd_sweep(TrainFlags flags, const std::string& out_path, std::ostream& out) {
  const auto data = load_dataset(flags.dataset);
  const auto table = flags.vm ? load_table_if_present(flags.table) : std::nullopt;
  TrainOptions options;
  options.table = table ? &*table : nullptr;

  TrainConfig baseline = to_config(flags);
  baseline.precision = Precision::kFp32;
  baseline.variance_minimized = false;
  const auto fp32 = train(data, baseline, options);

  std::ostringstream csv;
  csv << "g_over_r,test_accuracy,accuracy_delta_vs_fp32,seconds_per_epoch,activation_bits,memory_ratio\n";
  for (std::size_t g : {2, 4, 8, 16, 32, 64}) {
    flags.g_over_r = g;
    const auto r = train(data, to_config(flags), options);
    double secs = 0.0;
    for (double s : r.epoch_seconds) secs += s;
    secs /= static_cast<double>(r.epoch_seconds.size());
    csv << g << "," << fmt(r.test_accuracy) << "," << fmt(r.test_accuracy - fp32.test_accuracy) << "," << fmt(secs)
        << "," << r.activation_bits << "," << fmt(r.memory_ratio) << "\n";
  }
  emit(out_path, out, [&](std::ostream& o) { o << csv.str(); });
  return 0;
}

struct FitDistFlags {
  std::string activations;
  std::uint32_t synthetic_d = 0;
  std::size_t samples = 2000;
  std::size_t bins = kFitHistogramBins;
  std::uint64_t seed = 42;
};

int cmd_fit_dist(const FitDistFlags& f, const std::string& out_path, std::ostream& out) {
  std::ostringstream csv;
  csv << "layer,R,jsd_uniform,jsd_clipped_normal\n";
  if (!f.activations.empty()) {
    for (const auto& [layer, dumps] : read_activation_tree(f.activations)) {
      std::vector<std::vector<float>> runs;
      for (const auto& d : dumps) {
        if (d.cols != dumps.front().cols || d.bits != dumps.front().bits) {
          throw std::invalid_argument("layer " + std::to_string(layer) + ": runs disagree on width or bits");
        }
        runs.push_back(d.values);
      }
      const auto fit = fit_distribution_pooled(runs, dumps.front().cols, dumps.front().bits, f.bins);
      csv << layer << "," << fit.r_dim << "," << fmt(fit.jsd_uniform) << "," << fmt(fit.jsd_clipped_normal) << "\n";
    }
  } else if (f.synthetic_d != 0) {
    const ClippedNormal cn(2, f.synthetic_d);
    SeededRng rng(f.seed);
    const auto xs = cn_sample(cn, f.samples * f.synthetic_d, rng);
    const std::vector<float> values(xs.begin(), xs.end());
    const auto fit = fit_distribution(values, f.synthetic_d, 2, f.bins);
    csv << 0 << "," << fit.r_dim << "," << fmt(fit.jsd_uniform) << "," << fmt(fit.jsd_clipped_normal) << "\n";
  } else {
    throw std::invalid_argument("fit-dist: no activations given (use --activations DIR or --synthetic-d D)");
  }
  emit(out_path, out, [&](std::ostream& o) { o << csv.str(); });
  return 0;
}

struct VarOptFlags {
  std::optional<double> d;
  bool build_table = false;
  std::optional<double> grid_d;
  double grid_step = 0.05;
  std::optional<std::uint32_t> reduction_d;
  std::size_t samples = 20000;
  std::size_t draws = 64;
  std::uint64_t seed = 42;
  std::string table = ACTCOMP_DEFAULT_TABLE;
};

void require_feasible(double d) {
  if (!(d >= 3.0)) throw std::invalid_argument("var-opt: D must be at least 3 (got " + fmt(d) + ")");
}

int cmd_var_opt(const VarOptFlags& f, const std::string& out_path, std::ostream& out) {
  const int modes = (f.d ? 1 : 0) + (f.build_table ? 1 : 0) + (f.grid_d ? 1 : 0) + (f.reduction_d ? 1 : 0);
  if (modes != 1) throw std::invalid_argument("var-opt: pass exactly one of --d, --build-table, --grid, --reduction");

  if (f.build_table) {
    const auto table = BoundaryTable::build();
    const std::string path = out_path.empty() ? f.table : out_path;
    emit(path, out, [&](std::ostream& o) { table.write_csv(o); });
    out << "wrote " << table.size() << " rows to " << path << "\n";
    return 0;
  }

  std::ostringstream csv;
  if (f.d) {
    require_feasible(*f.d);
    const auto opt = optimize_boundaries(ClippedNormal(2, *f.d));
    char line[160];
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g\n", *f.d, opt.alpha, opt.beta, opt.expected_variance);
    csv << "D,alpha,beta,expected_variance\n" << line;
  } else if (f.grid_d) {
    require_feasible(*f.grid_d);
    if (!(f.grid_step > 0.0 && f.grid_step < 1.5)) throw std::invalid_argument("var-opt: --step must be in (0, 1.5)");
    const ClippedNormal cn(2, *f.grid_d);
    csv << "alpha,beta,expected_variance\n";
    const auto n = static_cast<int>(std::floor(3.0 / f.grid_step - 1e-9));
    for (int i = 1; i <= n; ++i) {
      for (int j = i + 1; j <= n; ++j) {
        const double a = i * f.grid_step, b = j * f.grid_step;
        if (b >= 3.0) continue;
        csv << fmt(a) << "," << fmt(b) << "," << fmt(expected_variance(a, b, cn)) << "\n";
      }
    }
  } else {
    const std::uint32_t d = *f.reduction_d;
    require_feasible(d);
    auto table = load_table_if_present(f.table);
    if (!table) table = BoundaryTable::build();
    SeededRng rng(f.seed);
    const auto xs = cn_sample(ClippedNormal(2, d), f.samples, rng);
    const auto curve = reduction_curve(xs, *table, d / 4, 4 * d, rng.substream(1), f.draws);
    csv << "D,reduction\n";
    for (const auto& p : curve) csv << p.d << "," << fmt(p.reduction) << "\n";
  }
  emit(out_path, out, [&](std::ostream& o) { o << csv.str(); });
  return 0;
}

struct BenchFlags {
  std::size_t rows = 2048;
  std::size_t cols = 64;
  std::size_t repeats = 3;
  std::uint64_t seed = 42;
};

int cmd_bench_quant(const BenchFlags& f, const std::string& out_path, std::ostream& out) {
  SeededRng data_rng(f.seed);
  DenseMatrix h(f.rows, f.cols);
  for (auto& v : h.values()) v = static_cast<float>(data_rng.normal());
  const double elements = static_cast<double>(h.size());

  std::ostringstream csv;
  csv << "bits,grouping,block_size,quantize_elements_per_second,dequantize_elements_per_second\n";
  auto measure = [&](const QuantScheme& scheme) {
    double best_q = 1e300, best_d = 1e300;
    SeededRng rng(f.seed);
    for (std::size_t rep = 0; rep < f.repeats; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto packed = quantize(h, scheme, rng);
      const auto t1 = std::chrono::steady_clock::now();
      const auto back = dequantize(packed);
      const auto t2 = std::chrono::steady_clock::now();
      best_q = std::min(best_q, std::chrono::duration<double>(t1 - t0).count());
      best_d = std::min(best_d, std::chrono::duration<double>(t2 - t1).count());
    }
    csv << scheme.bits() << "," << (scheme.grouping() == Grouping::kPerRow ? "per_row" : "block") << ","
        << (scheme.grouping() == Grouping::kPerRow ? f.cols : scheme.block_size()) << ","
        << fmt(elements / std::max(best_q, 1e-12)) << "," << fmt(elements / std::max(best_d, 1e-12)) << "\n";
  };
  for (int bits : {2, 4, 8}) {
    measure(QuantScheme::per_row(bits));
    for (std::size_t g = 2; g <= 4096; g *= 2) measure(QuantScheme::block(bits, g));
  }
  emit(out_path, out, [&](std::ostream& o) { o << csv.str(); });
  return 0;
}

struct SynthFlags {
  std::string out;
  std::uint64_t seed = kSynthSeed;
  std::size_t nodes = 200;
  std::size_t features = 128;
};

int cmd_gen_synth(const SynthFlags& f, std::ostream& out) {
  SyntheticGraphConfig config;
  config.nodes = f.nodes;
  config.features = f.features;
  const auto data = make_two_community_graph(config, f.seed);
  save_graph_dir(data, f.out);
  out << "wrote " << data.nodes() << "-node graph to " << f.out << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Block-wise extreme activation compression experiments", "actcomp"};
  app.require_subcommand(1);

  TrainFlags train_flags;
  std::string train_out, save_dir;
  auto* train_cmd = app.add_subcommand("train", "Train the toy GNN and write a JSON report");
  add_train_flags(train_cmd, train_flags, true);
  train_cmd->add_option("--out", train_out, "Report path (default: stdout)");
  train_cmd->add_option("--save-activations", save_dir,
                        "Directory for normalized projected test activations from the best-validation epoch");

  TrainFlags sweep_flags;
  sweep_flags.precision = "int2";
  std::string sweep_out;
  auto* sweep_cmd = app.add_subcommand("sweep", "Train at G/R in {2,4,...,64} against an FP32 baseline");
  add_train_flags(sweep_cmd, sweep_flags, false);
  sweep_cmd->add_option("--out", sweep_out, "CSV path (default: stdout)");

  FitDistFlags fit_flags;
  std::string fit_out;
  auto* fit_cmd = app.add_subcommand("fit-dist", "Jensen-Shannon divergence of activations vs uniform and CN models");
  fit_cmd->add_option("--activations", fit_flags.activations, "Directory written by train --save-activations");
  fit_cmd->add_option("--synthetic-d", fit_flags.synthetic_d, "Use CN_[1/D] samples instead")
      ->check(CLI::Range(3u, 1u << 20));
  fit_cmd->add_option("--samples", fit_flags.samples, "Rows of synthetic data")->capture_default_str();
  fit_cmd->add_option("--bins", fit_flags.bins, "Histogram bins")->check(CLI::PositiveNumber)->capture_default_str();
  fit_cmd->add_option("--seed", fit_flags.seed, "Random seed")->capture_default_str();
  fit_cmd->add_option("--out", fit_out, "CSV path (default: stdout)");

  VarOptFlags vo_flags;
  std::string vo_out;
  auto* vo_cmd = app.add_subcommand("var-opt", "INT2 boundary optimization under the clipped normal");
  vo_cmd->add_option("--d", vo_flags.d, "Optimize boundaries for one D");
  vo_cmd->add_flag("--build-table", vo_flags.build_table, "Regenerate the D = 4..2048 table");
  vo_cmd->add_option("--grid", vo_flags.grid_d, "Expected variance over an (alpha, beta) grid for D");
  vo_cmd->add_option("--step", vo_flags.grid_step, "Grid spacing for --grid")->capture_default_str();
  vo_cmd->add_option("--reduction", vo_flags.reduction_d,
                     "Variance reduction on CN_[1/D] samples for every table entry in [D/4, 4D]");
  vo_cmd->add_option("--samples", vo_flags.samples, "Samples for --reduction")->capture_default_str();
  vo_cmd->add_option("--draws", vo_flags.draws, "SR draws per sample for --reduction")->capture_default_str();
  vo_cmd->add_option("--seed", vo_flags.seed, "Random seed")->capture_default_str();
  vo_cmd->add_option("--table", vo_flags.table, "Boundary table path")->capture_default_str();
  vo_cmd->add_option("--out", vo_out, "Output path (default: stdout; table default for --build-table)");

  BenchFlags bench_flags;
  std::string bench_out;
  auto* bench_cmd = app.add_subcommand("bench-quant", "Quantize/dequantize throughput, per-row vs block-wise");
  bench_cmd->add_option("--rows", bench_flags.rows, "Matrix rows")->check(CLI::PositiveNumber)->capture_default_str();
  bench_cmd->add_option("--cols", bench_flags.cols, "Matrix columns")->check(CLI::PositiveNumber)->capture_default_str();
  bench_cmd->add_option("--repeats", bench_flags.repeats, "Timed repetitions (best kept)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench_cmd->add_option("--seed", bench_flags.seed, "Random seed")->capture_default_str();
  bench_cmd->add_option("--out", bench_out, "CSV path (default: stdout)");

  SynthFlags synth_flags;
  auto* synth_cmd = app.add_subcommand("gen-synth", "Write the synthetic two-community graph as a dataset directory");
  synth_cmd->add_option("--out", synth_flags.out, "Output directory")->required();
  synth_cmd->add_option("--seed", synth_flags.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--nodes", synth_flags.nodes, "Node count")->capture_default_str();
  synth_cmd->add_option("--features", synth_flags.features, "Feature count")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*train_cmd) return cmd_train(train_flags, train_out, save_dir, out);
    if (*sweep_cmd) return cmd_sweep(sweep_flags, sweep_out, out);
    if (*fit_cmd) return cmd_fit_dist(fit_flags, fit_out, out);
    if (*vo_cmd) return cmd_var_opt(vo_flags, vo_out, out);
    if (*bench_cmd) return cmd_bench_quant(bench_flags, bench_out, out);
    if (*synth_cmd) return cmd_gen_synth(synth_flags, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace actcomp::cli

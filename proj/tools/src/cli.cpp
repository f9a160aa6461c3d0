// Copyright 2026 The helioprop Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "helioprop/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "helioprop/dataio.hpp"
#include "helioprop/errors.hpp"
#include "helioprop/hux.hpp"
#include "helioprop/metrics.hpp"
#include "helioprop/rollout.hpp"
#include "helioprop/training.hpp"

namespace helioprop::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Reads flag values from a JSON object. Top-level keys belong to the
// subcommand being run; nested objects map to further parents.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* root) : root_(root) {}

  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    json j = json::object();
    for (const CLI::Option* opt : app->get_options()) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const std::string& name = opt->get_lnames().front();
      if (opt->count() > 0) {
        const auto& res = opt->results();
        j[name] = res.size() == 1 ? json(res.front()) : json(res);
      } else if (default_also && !opt->get_default_str().empty()) {
        j[name] = opt->get_default_str();
      }
    }
    return j.dump(2);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      j = json::parse(input);
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    std::vector<std::string> parents;
    if (const auto subs = root_->get_subcommands(); !subs.empty()) parents.push_back(subs.front()->get_name());
    std::vector<CLI::ConfigItem> items;
    flatten(j, parents, items);
    return items;
  }

 private:
  const CLI::App* root_;

  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  static void flatten(const json& obj, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : obj.items()) {
      if (value.is_object()) {
        auto next = parents;
        next.push_back(key);
        flatten(value, next, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

// Raised for conditions that map to kExitUsage.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void ensure_readable(const fs::path& p, const std::string& what) {
  if (!fs::exists(p)) throw UsageError(what + " not found: " + p.string());
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

std::string format_g(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// gen

struct GenArgs {
  SynthConfig synth;
  std::string out_dir;
  double train_fraction = 0.8;
  bool no_accel = false;
};

void add_gen(CLI::App& app, GenArgs& a) {
  app.add_option("--n", a.synth.n_cubes, "Number of cubes")->capture_default_str();
  app.add_option("--seed", a.synth.seed, "Generator seed")->capture_default_str();
  app.add_option("--out-dir", a.out_dir, "Output directory")->required();
  app.add_option("--v-slow", a.synth.v_slow, "Slow-stream speed, km/s")->capture_default_str();
  app.add_option("--v-fast", a.synth.v_fast, "Fast-stream speed, km/s")->capture_default_str();
  app.add_option("--alpha", a.synth.hux.alpha, "Boundary acceleration amplitude")->capture_default_str();
  app.add_option("--r-h", a.synth.hux.r_h, "Acceleration scale length, R_sun")->capture_default_str();
  app.add_option("--omega", a.synth.hux.omega_rot, "Rotation rate, rad/s")->capture_default_str();
  app.add_flag("--no-accel", a.no_accel, "Skip the boundary acceleration");
  app.add_option("--stream-lmax", a.synth.stream_lmax, "Band limit of the boundary pattern")->capture_default_str();
  app.add_option("--sharpness", a.synth.interface_sharpness, "Stream interface steepness")->capture_default_str();
  app.add_option("--nr", a.synth.nr, "Radial nodes")->capture_default_str();
  app.add_option("--nlat", a.synth.nlat, "Latitude nodes")->capture_default_str();
  app.add_option("--nlon", a.synth.nlon, "Longitude nodes")->capture_default_str();
  app.add_option("--r-min", a.synth.r_min, "Inner radius, R_sun")->capture_default_str();
  app.add_option("--r-max", a.synth.r_max, "Outer radius, R_sun")->capture_default_str();
  app.add_option("--train-fraction", a.train_fraction, "Chronological train share")->capture_default_str();
}

int cmd_gen(GenArgs& a, std::ostream& out) {
  if (a.no_accel) a.synth.hux.apply_acceleration = false;
  a.synth.validate();
  const auto cubes = generate_dataset(a.synth);

  std::vector<std::string> labels(cubes.size(), "train");
  if (cubes.size() >= 2) {
    const auto split = split_dataset(cubes, ChronologicalFraction{a.train_fraction});
    for (std::size_t i : split.test) labels[i] = "test";
  }

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  Manifest manifest;
  manifest.generator = a.synth;
  std::size_t n_test = 0;
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "cube_%04zu.hwc", i);
    save_cube(dir / name, cubes[i]);
    manifest.cubes.push_back({name, labels[i]});
    n_test += labels[i] == "test";
  }
  write_manifest(dir / "manifest.json", manifest);
  out << "generated " << cubes.size() << " cubes (" << cubes.size() - n_test << " train, " << n_test << " test) in "
      << dir.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string manifest;
  std::string out;
  std::string loss_csv;
  TrainConfig train;
  std::size_t layers = 4;
  std::size_t channels = 64;
  std::optional<std::size_t> lmax;
  std::optional<std::size_t> mmax;
  double mlp_factor = 2.0;
  std::string activation = "gelu";
  std::string windows = "rollout_aligned";
  std::uint64_t model_seed = 0;
};

void add_train(CLI::App& app, TrainArgs& a) {
  app.add_option("--manifest", a.manifest, "Dataset manifest.json")->required();
  app.add_option("--out", a.out, "Checkpoint path (default: <manifest dir>/model.sfnp)");
  app.add_option("--loss-csv", a.loss_csv, "Loss history CSV (default: <checkpoint>.loss.csv)");
  app.add_option("--horizon", a.train.horizon, "Predictive horizon H")->capture_default_str();
  app.add_option("--layers", a.layers, "SFNO blocks")->capture_default_str();
  app.add_option("--channels", a.channels, "Hidden channels")->capture_default_str();
  app.add_option("--epochs", a.train.epochs, "Training epochs")->capture_default_str();
  app.add_option("--lr", a.train.learning_rate, "Adam learning rate")->capture_default_str();
  app.add_option("--batch", a.train.batch_size, "Batch size")->capture_default_str();
  app.add_option("--seed", a.train.seed, "Shuffle seed")->capture_default_str();
  app.add_option("--model-seed", a.model_seed, "Initialisation seed")->capture_default_str();
  app.add_option("--lmax", a.lmax, "Spectral degree limit (default: nlat - 1)");
  app.add_option("--mmax", a.mmax, "Spectral order limit (default: min(lmax, nlon / 2))");
  app.add_option("--mlp-factor", a.mlp_factor, "Block MLP width factor")->capture_default_str();
  app.add_option("--activation", a.activation, "gelu or relu")
      ->check(CLI::IsMember({"gelu", "relu"}))
      ->capture_default_str();
  app.add_option("--windows", a.windows, "rollout_aligned or every_index")
      ->check(CLI::IsMember({"rollout_aligned", "every_index"}))
      ->capture_default_str();
  app.add_option("--val-fraction", a.train.validation_fraction, "Trailing share held out for selection")
      ->capture_default_str();
}

std::vector<VelocityCube> load_split(const fs::path& manifest_path, const std::string& split) {
  ensure_readable(manifest_path, "manifest");
  const Manifest m = read_manifest(manifest_path);
  std::vector<VelocityCube> cubes;
  for (const auto& e : m.cubes) {
    if (e.split == split) cubes.push_back(load_cube(manifest_path.parent_path() / e.file));
  }
  if (cubes.empty()) throw UsageError("manifest lists no '" + split + "' cubes");
  return cubes;
}

int cmd_train(TrainArgs& a, std::ostream& out, std::ostream& err) {
  const fs::path manifest_path(a.manifest);
  const auto cubes = load_split(manifest_path, "train");
  const auto& grid = *cubes.front().grid;

  OperatorConfig oc;
  oc.n_layers = a.layers;
  oc.hidden_channels = a.channels;
  oc.nlat = grid.nlat();
  oc.nlon = grid.nlon();
  oc.lmax = a.lmax.value_or(grid.nlat() - 1);
  oc.mmax = a.mmax.value_or(std::min(oc.lmax, grid.nlon() / 2));
  oc.in_channels = 1;
  oc.out_channels = a.train.horizon;
  oc.mlp_hidden_factor = a.mlp_factor;
  oc.activation = a.activation == "relu" ? Activation::relu : Activation::gelu;
  oc.seed = a.model_seed;
  a.train.windows = a.windows == "every_index" ? WindowMode::every_index : WindowMode::rollout_aligned;

  const fs::path ckpt = a.out.empty() ? manifest_path.parent_path() / "model.sfnp" : fs::path(a.out);
  const fs::path loss = a.loss_csv.empty() ? fs::path(ckpt.string() + ".loss.csv") : fs::path(a.loss_csv);

  TrainResult res;
  try {
    res = train(cubes, a.train, oc);
  } catch (const DivergenceError& e) {
    err << "error: training diverged at epoch " << e.epoch() << ": " << e.what() << "\n";
    return kExitDiverged;
  }
  ensure_parent(ckpt);
  ensure_parent(loss);
  save_checkpoint(ckpt, checkpoint_from(res));
  write_loss_history_csv(loss, res.history);
  const auto& h = res.history;
  out << "trained on " << res.train_cubes << " cubes (" << res.val_cubes << " validation), " << h.size()
      << " epochs; train loss " << format_g(h.front().train_loss) << " -> " << format_g(h.back().train_loss)
      << "; best epoch " << res.best_epoch << " (val " << format_g(res.best_val_loss) << ")\n";
  out << "wrote " << ckpt.string() << " and " << loss.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// rollout

struct RolloutArgs {
  std::string checkpoint;
  std::string boundary;
  std::optional<std::size_t> horizon;
  std::string out;
};

void add_rollout(CLI::App& app, RolloutArgs& a) {
  app.add_option("--checkpoint", a.checkpoint, "Trained checkpoint")->required();
  app.add_option("--boundary", a.boundary, "Cube file whose slice 0 is the boundary")->required();
  app.add_option("--horizon", a.horizon, "Predictive horizon (default: the checkpoint's)");
  app.add_option("--out", a.out, "Predicted cube path")->required();
}

int cmd_rollout(RolloutArgs& a, std::ostream& out) {
  ensure_readable(a.checkpoint, "checkpoint");
  ensure_readable(a.boundary, "boundary cube");
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const VelocityCube src = load_cube(a.boundary);
  const std::size_t h = a.horizon.value_or(ck.params.config().out_channels);
  if (h != ck.params.config().out_channels) {
    throw UsageError("horizon " + std::to_string(h) + " does not match the checkpoint's " +
                     std::to_string(ck.params.config().out_channels) + " output channels");
  }
  const auto& g = *src.grid;
  if (g.nlat() != ck.params.config().nlat || g.nlon() != ck.params.config().nlon) {
    throw UsageError("boundary grid " + std::to_string(g.nlat()) + "x" + std::to_string(g.nlon()) +
                     " does not match the checkpoint grid " + std::to_string(ck.params.config().nlat) + "x" +
                     std::to_string(ck.params.config().nlon));
  }
  const RolloutResult r = rollout_detailed(ck.params, src.slices.front(), h, ck.bounds, src.rgrid);
  VelocityCube pred = r.cube;
  pred.meta = src.meta;
  const fs::path dst(a.out);
  ensure_parent(dst);
  save_cube(dst, pred);
  out << "rollout: " << r.plan.steps << " steps of " << h << ", " << pred.nr() << " slices, " << r.plan.discarded
      << " discarded; wrote " << dst.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string truth;
  std::string pred;
  bool hux = false;
  bool hux_accelerate = false;
  HuxConfig hux_cfg;
  double edge_threshold = 0.2;
  std::size_t uiqi_window = 0;
  std::string out_json;
  std::string out_csv;
  std::string name;
};

void add_eval(CLI::App& app, EvalArgs& a) {
  app.add_option("--truth", a.truth, "Ground-truth cube")->required();
  auto* pred = app.add_option("--pred", a.pred, "Predicted cube");
  auto* hux = app.add_flag("--hux", a.hux, "Evaluate the HUX-f baseline from the truth's slice 0");
  pred->excludes(hux);
  app.add_flag("--hux-accelerate", a.hux_accelerate, "Apply the boundary acceleration before marching");
  app.add_option("--alpha", a.hux_cfg.alpha, "HUX acceleration amplitude")->capture_default_str();
  app.add_option("--r-h", a.hux_cfg.r_h, "HUX acceleration scale length")->capture_default_str();
  app.add_option("--omega", a.hux_cfg.omega_rot, "HUX rotation rate, rad/s")->capture_default_str();
  app.add_option("--edge-threshold", a.edge_threshold, "Sobel mask threshold fraction")->capture_default_str();
  app.add_option("--uiqi-window", a.uiqi_window, "UIQI sliding window size (0: global)")->capture_default_str();
  app.add_option("--out-json", a.out_json, "Report JSON path")->required();
  app.add_option("--out-csv", a.out_csv, "Summary CSV path");
  app.add_option("--name", a.name, "Row label (default: predicted file stem)");
}

int cmd_eval(EvalArgs& a, std::ostream& out) {
  if (!a.hux && a.pred.empty()) throw UsageError("eval needs --pred or --hux");
  ensure_readable(a.truth, "truth cube");
  const VelocityCube truth = load_cube(a.truth);
  VelocityCube pred;
  std::map<std::string, std::string> meta{{"truth", a.truth}};
  if (a.hux) {
    HuxConfig cfg = a.hux_cfg;
    cfg.apply_acceleration = a.hux_accelerate;
    pred = hux_forward(truth.slices.front(), truth.rgrid, cfg);
    meta["model"] = "hux-f";
    meta["hux"] = to_json(cfg).dump();
  } else {
    ensure_readable(a.pred, "predicted cube");
    pred = load_cube(a.pred);
    meta["model"] = "file";
    meta["pred"] = a.pred;
  }
  if (pred.nr() != truth.nr() || !same_grid(*pred.grid, *truth.grid)) {
    throw UsageError("predicted and truth cubes are on different grids");
  }
  MetricsConfig mc;
  mc.edge.threshold_fraction = a.edge_threshold;
  mc.uiqi.sliding_window = a.uiqi_window > 0;
  if (a.uiqi_window > 0) mc.uiqi.window = a.uiqi_window;
  const MetricsReport rep = evaluate_cube(pred, truth, mc, meta);

  const fs::path json_path(a.out_json);
  ensure_parent(json_path);
  write_report_json(json_path, rep);
  if (!a.out_csv.empty()) {
    const fs::path csv(a.out_csv);
    ensure_parent(csv);
    std::ofstream f(csv, std::ios::trunc);
    const std::string name = !a.name.empty() ? a.name : a.hux ? "hux-f" : fs::path(a.pred).stem().string();
    f << report_csv_header() << "\n" << report_csv_row(name, rep) << "\n";
    if (!f) throw Error("write failed for " + csv.string());
  }
  out << "mse " << format_g(rep.mean_mse) << "  edge_mse "
      << (rep.mean_edge_mse ? format_g(*rep.mean_edge_mse) : std::string("undefined")) << "  emd "
      << format_g(rep.mean_emd) << "  uiqi " << format_g(rep.mean_uiqi) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// plot

struct PlotArgs {
  std::string cube;
  std::string report;
  std::vector<std::size_t> radii;
  std::string out_dir;
  std::size_t bins = 50;
};

void add_plot(CLI::App& app, PlotArgs& a) {
  app.add_option("--cube", a.cube, "Cube for heatmaps and histograms");
  app.add_option("--report", a.report, "Metrics report JSON for error-vs-radius curves");
  app.add_option("--radius", a.radii, "Radius indices to plot (default: 0 and the last)");
  app.add_option("--out-dir", a.out_dir, "Output directory")->required();
  app.add_option("--bins", a.bins, "Histogram bins")->capture_default_str()->check(CLI::PositiveNumber);
}

void write_pgm(const fs::path& path, const VelocityMap& map) {
  const auto& v = map.values;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double span = *hi - *lo;
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << "P5\n" << map.grid->nlon() << " " << map.grid->nlat() << "\n255\n";
  for (double x : v) {
    const double t = span > 0.0 ? (x - *lo) / span : 0.0;
    f.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * t))));
  }
  if (!f) throw Error("write failed for " + path.string());
}

void write_histogram(const fs::path& path, const VelocityMap& map, std::size_t bins) {
  const auto& v = map.values;
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double lo = *lo_it;
  const double hi = *hi_it > lo ? *hi_it : lo + 1.0;
  std::vector<std::size_t> counts(bins, 0);
  for (double x : v) {
    auto b = static_cast<std::size_t>((x - lo) / (hi - lo) * static_cast<double>(bins));
    counts[std::min(b, bins - 1)]++;
  }
  std::ofstream f(path, std::ios::trunc);
  f << "bin_lo,bin_hi,count,log10_count\n" << std::setprecision(10);
  for (std::size_t b = 0; b < bins; ++b) {
    const double a0 = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
    const double a1 = lo + (hi - lo) * static_cast<double>(b + 1) / static_cast<double>(bins);
    f << a0 << ',' << a1 << ',' << counts[b] << ',';
    if (counts[b] > 0) f << std::log10(static_cast<double>(counts[b]));
    f << '\n';
  }
  if (!f) throw Error("write failed for " + path.string());
}

void write_error_curve(const fs::path& path, const json& report) {
  const auto errs = validate_report_json(report);
  if (!errs.empty()) throw FormatError("report does not match the schema: " + errs.front());
  const auto& p = report["per_slice"];
  std::ofstream f(path, std::ios::trunc);
  f << "radius_index,radius,mse,edge_mse,emd,uiqi\n" << std::setprecision(17);
  for (std::size_t i = 0; i < p["mse"].size(); ++i) {
    f << p["radius_index"][i].get<std::size_t>() << ',' << p["radius"][i].get<double>() << ','
      << p["mse"][i].get<double>() << ',';
    if (!p["edge_mse"][i].is_null()) f << p["edge_mse"][i].get<double>();
    f << ',' << p["emd"][i].get<double>() << ',' << p["uiqi"][i].get<double>() << '\n';
  }
  if (!f) throw Error("write failed for " + path.string());
}

int cmd_plot(PlotArgs& a, std::ostream& out) {
  if (a.cube.empty() && a.report.empty()) throw UsageError("plot needs --cube and/or --report");
  const fs::path dir(a.out_dir);
  std::size_t files = 0;
  if (!a.cube.empty()) {
    ensure_readable(a.cube, "cube");
    const VelocityCube cube = load_cube(a.cube);
    std::vector<std::size_t> radii = a.radii;
    if (radii.empty()) radii = {0, cube.nr() - 1};
    for (std::size_t r : radii) {
      if (r >= cube.nr()) {
        throw UsageError("radius index " + std::to_string(r) + " out of range [0, " + std::to_string(cube.nr() - 1) +
                         "]");
      }
    }
    fs::create_directories(dir);
    for (std::size_t r : radii) {
      char stem[32];
      std::snprintf(stem, sizeof stem, "r%03zu", r);
      write_pgm(dir / (std::string("slice_") + stem + ".pgm"), cube.slices[r]);
      write_histogram(dir / (std::string("hist_") + stem + ".csv"), cube.slices[r], a.bins);
      files += 2;
    }
  }
  if (!a.report.empty()) {
    ensure_readable(a.report, "report");
    std::ifstream in(a.report);
    json rep;
    try {
      rep = json::parse(in);
    } catch (const json::exception& e) {
      throw FormatError(std::string("report is not valid JSON: ") + e.what());
    }
    fs::create_directories(dir);
    write_error_curve(dir / "error_vs_radius.csv", rep);
    ++files;
  }
  out << "wrote " << files << " files to " << dir.string() << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"helioprop: solar-wind radial velocity surrogate and HUX-f baseline"};
  app.config_formatter(std::make_shared<JsonConfig>(&app));
  app.set_config("--config", "", "JSON file with flag values for the subcommand");
  app.require_subcommand(1);

  GenArgs gen;
  TrainArgs trn;
  RolloutArgs rol;
  EvalArgs evl;
  PlotArgs plt;
  auto* s_gen = app.add_subcommand("gen", "Generate a synthetic HUX-f dataset");
  auto* s_trn = app.add_subcommand("train", "Train the spectral operator");
  auto* s_rol = app.add_subcommand("rollout", "Autoregressive prediction from a boundary slice");
  auto* s_evl = app.add_subcommand("eval", "Metrics report for a prediction or the HUX-f baseline");
  auto* s_plt = app.add_subcommand("plot", "Heatmaps, histograms and error curves as PGM/CSV");
  add_gen(*s_gen, gen);
  add_train(*s_trn, trn);
  add_rollout(*s_rol, rol);
  add_eval(*s_evl, evl);
  add_plot(*s_plt, plt);
  for (auto* s : {s_gen, s_trn, s_rol, s_evl, s_plt}) s->fallthrough();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (s_gen->parsed()) return cmd_gen(gen, out);
    if (s_trn->parsed()) return cmd_train(trn, out, err);
    if (s_rol->parsed()) return cmd_rollout(rol, out);
    if (s_evl->parsed()) return cmd_eval(evl, out);
    if (s_plt->parsed()) return cmd_plot(plt, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DivergenceError& e) {
    err << "error: diverged at epoch " << e.epoch() << ": " << e.what() << "\n";
    return kExitDiverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace helioprop::cli

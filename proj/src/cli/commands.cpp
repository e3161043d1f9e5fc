#include "t2motion/cli.hpp"

#include "t2motion/config.hpp"
#include "t2motion/metrics.hpp"
#include "t2motion/motion.hpp"
#include "t2motion/phantom.hpp"
#include "t2motion/recon.hpp"
#include "t2motion/sim.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

namespace t2motion::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Bad arguments or missing inputs; maps to the validation exit code.
class UsageError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
};

void add_common(CLI::App *cmd, Common &c) {
  cmd->add_option("--config", c.config, "JSON run configuration");
  cmd->add_option("--seed", c.seed, "Seed for all randomness (overrides the config)");
  cmd->add_option("--out", c.out, "Output directory");
}

RunConfig resolve(Common const &c) {
  RunConfig cfg = c.config.empty() ? parse_config(json::object()) : load_config(c.config);
  if (c.seed) {
    cfg.seed = *c.seed;
  }
  return cfg;
}

void require_file(std::string const &path, char const *what) {
  if (path.empty()) {
    throw UsageError(std::string("missing required ") + what);
  }
  if (!fs::exists(path)) {
    throw UsageError(std::string(what) + " '" + path + "' does not exist");
  }
}

json number_or_inf(double v) {
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  return v;
}

json optional_json(std::optional<double> const &v) { return v ? json(*v) : json(nullptr); }

json report_json(metrics::ClassReport const &r) {
  return json{{"accuracy", r.accuracy},
              {"nd_rate", optional_json(r.nd_rate)},
              {"wd_rate", optional_json(r.wd_rate)},
              {"counts",
               {{"clean_as_clean", r.counts.clean_as_clean},
                {"motion_as_motion", r.counts.motion_as_motion},
                {"motion_missed", r.counts.motion_missed},
                {"clean_flagged", r.counts.clean_flagged},
                {"total", r.counts.total()}}}};
}

std::string format_optional(std::optional<double> const &v) {
  if (!v) {
    return "";
  }
  std::ostringstream s;
  s << std::setprecision(10) << *v;
  return s.str();
}

motion::SyntheticCurveSpec curve_spec(RunConfig const &cfg) {
  motion::SyntheticCurveSpec spec;
  spec.samples = cfg.curves.samples;
  spec.dt_s = cfg.curves.dt_s;
  spec.target_mean_mm = cfg.curves.target_mean_mm;
  spec.radius_mm = cfg.sim.sphere_radius_mm;
  return spec;
}

// Seed streams for independent uses of the run seed.
enum Stream : std::size_t { kTrainCurves = 1000, kHeldoutCurves = 2000, kPhantoms = 3000, kAugment = 4000 };

std::vector<motion::MotionCurve> load_curves(std::vector<std::string> const &files) {
  std::vector<motion::MotionCurve> curves;
  for (auto const &f : files) {
    require_file(f, "curve file");
    curves.push_back(motion::read_curve(f));
  }
  return curves;
}

std::string dmin_tag(double d) {
  std::ostringstream s;
  s << "dmin_" << std::fixed << std::setprecision(2) << d;
  return s.str();
}

sim::DatasetIndex build_dataset(RunConfig const &cfg, std::vector<std::string> const &curve_files,
                                fs::path const &out_dir, std::ostream &out) {
  auto const &pd = cfg.phantom;
  auto const splits = sim::assign_splits(cfg.dataset.n_phantoms, cfg.dataset.train_fraction, cfg.dataset.val_fraction);
  std::vector<sim::PhantomEntry> phantoms;
  for (std::size_t i = 0; i < cfg.dataset.n_phantoms; ++i) {
    std::ostringstream id;
    id << "ph" << std::setw(3) << std::setfill('0') << i;
    phantoms.push_back({id.str(), phantom::make_phantom(pd, sim::state_seed(cfg.seed, kPhantoms + i)), splits[i]});
  }

  std::vector<motion::MotionCurve> training;
  std::vector<motion::MotionCurve> heldout;
  if (!curve_files.empty()) {
    heldout = load_curves(curve_files);
    training = heldout;
  } else {
    for (std::size_t i = 0; i < cfg.curves.n_training; ++i) {
      training.push_back(motion::make_synthetic_curve(curve_spec(cfg), sim::state_seed(cfg.seed, kTrainCurves + i)));
    }
    for (std::size_t i = 0; i < cfg.curves.n_heldout; ++i) {
      heldout.push_back(motion::make_synthetic_curve(curve_spec(cfg), sim::state_seed(cfg.seed, kHeldoutCurves + i)));
    }
  }

  sim::DatasetSpec spec;
  spec.curves_per_phantom = cfg.dataset.curves_per_phantom;
  spec.max_background_fraction = cfg.dataset.max_background_fraction;
  spec.norm_axes = cfg.dataset.normalization;
  if (cfg.dataset.augment && training.size() >= 2) {
    spec.curve_model = motion::fit_curve_model(training);
  }
  auto const scheme = cfg.scheme.build(pd.dims.lines, pd.dims.slices);
  auto index = sim::generate_dataset(phantoms, heldout, cfg.sim, scheme, spec, out_dir);
  out << "dataset: " << index.samples.size() << " samples, " << index.excluded.size()
      << " slices excluded, written to " << out_dir.string() << '\n';
  return index;
}

// --- commands ---------------------------------------------------------------

int cmd_phantom(Common const &c, std::ostream &out) {
  RunConfig const cfg = resolve(c);
  fs::create_directories(c.out);
  auto const vol = phantom::make_phantom(cfg.phantom, cfg.seed);
  write_volume(vol, fs::path(c.out) / "phantom.vol");
  write_resolved_config(cfg, c.out);
  out << "phantom: wrote " << (fs::path(c.out) / "phantom.vol").string() << '\n';
  return kExitOk;
}

int cmd_curve(Common const &c, std::optional<double> mean_disp, std::ostream &out) {
  RunConfig cfg = resolve(c);
  if (mean_disp) {
    cfg.curves.target_mean_mm = *mean_disp;
  }
  fs::create_directories(c.out);
  auto const curve = motion::make_synthetic_curve(curve_spec(cfg), cfg.seed);
  motion::write_curve(curve, fs::path(c.out) / "curve.csv");
  write_resolved_config(cfg, c.out);
  out << "curve: mean displacement " << curve.mean_displacement(cfg.sim.sphere_radius_mm) << " mm\n";
  return kExitOk;
}

int cmd_augment(Common const &c, std::vector<std::string> const &curve_files, std::optional<std::size_t> count,
                std::ostream &out) {
  RunConfig const cfg = resolve(c);
  std::vector<motion::MotionCurve> training = load_curves(curve_files);
  if (training.empty()) {
    for (std::size_t i = 0; i < cfg.curves.n_training; ++i) {
      training.push_back(motion::make_synthetic_curve(curve_spec(cfg), sim::state_seed(cfg.seed, kTrainCurves + i)));
    }
  }
  if (training.size() < 2) {
    throw UsageError("augment: need at least 2 training curves");
  }
  auto const model = motion::fit_curve_model(training);
  fs::create_directories(c.out);
  std::size_t const n = count.value_or(cfg.curves.augment_count);
  for (std::size_t i = 0; i < n; ++i) {
    auto const curve = motion::recenter_to_median(
        motion::sample_augmented_curve(model, sim::state_seed(cfg.seed, kAugment + i)), cfg.sim.sphere_radius_mm);
    std::ostringstream name;
    name << "aug_" << std::setw(3) << std::setfill('0') << i << ".csv";
    motion::write_curve(curve, fs::path(c.out) / name.str());
  }
  json summary{{"n_training", model.n_training},
               {"n_components", model.n_components},
               {"samples", model.t_s.size()},
               {"eigenvalues", std::vector<double>(model.eigenvalues.data(),
                                                   model.eigenvalues.data() + model.eigenvalues.size())}};
  std::ofstream(fs::path(c.out) / "model.json") << summary.dump(2) << '\n';
  write_resolved_config(cfg, c.out);
  out << "augment: " << n << " curves from " << training.size() << " training curves, " << model.n_components
      << " active modes\n";
  return kExitOk;
}

int cmd_simulate(Common const &c, std::string const &phantom_path, std::string const &curve_path,
                 std::optional<double> d_min, bool no_b0, std::ostream &out, std::ostream &err) {
  RunConfig cfg = resolve(c);
  if (d_min) {
    cfg.sim.d_min_mm = *d_min;
  }
  if (no_b0) {
    cfg.sim.enable_b0 = false;
  }
  if (!(cfg.sim.d_min_mm > 0.0)) {
    throw UsageError("simulate: --d-min must be positive");
  }
  require_file(phantom_path, "phantom volume");
  require_file(curve_path, "curve file");
  auto const image = read_volume(phantom_path);
  auto const curve = motion::read_curve(curve_path);
  auto const scheme = cfg.scheme.build(image.dims().lines, image.dims().slices);
  cfg.sim.seed = cfg.seed;
  auto const result = sim::simulate(image, curve, scheme, sim::B0Map::zeros(image), cfg.sim);
  for (auto const &w : result.warnings) {
    err << "warning: " << w << '\n';
  }
  fs::path const dir(c.out);
  fs::create_directories(dir);
  write_volume(result.kspace, dir / "kspace.vol");
  write_volume(ifft2_per_slice(result.kspace), dir / "corrupted.vol");
  labels::write_labels(result.labels, dir / "labels.csv", cfg.sim.d_min_mm);
  labels::write_matrix_csv(result.displacement_mm, image.dims().slices, image.dims().lines, dir / "displacement.csv",
                           "sphere-averaged displacement per PE line, mm; one row per slice");
  write_resolved_config(cfg, dir);
  std::size_t corrupted = 0;
  for (auto v : result.labels.values()) {
    corrupted += v == 0;
  }
  out << "simulate: " << corrupted << " of " << result.labels.size() << " lines motion-corrupted\n";
  return kExitOk;
}

int cmd_dataset(Common const &c, std::vector<std::string> const &curve_files, std::optional<double> d_min,
                std::ostream &out) {
  RunConfig cfg = resolve(c);
  if (d_min) {
    cfg.sim.d_min_mm = *d_min;
  }
  cfg.sim.seed = cfg.seed;
  build_dataset(cfg, curve_files, c.out, out);
  write_resolved_config(cfg, c.out);
  return kExitOk;
}

int cmd_recon(Common const &c, std::string const &kspace_path, std::string const &labels_path,
              std::string const &ref_path, std::optional<double> lambda, std::ostream &out) {
  RunConfig cfg = resolve(c);
  if (lambda) {
    cfg.recon.lambda = *lambda;
    try {
      cfg.recon.validate();
    } catch (std::invalid_argument const &e) {
      throw UsageError(e.what());
    }
  }
  require_file(kspace_path, "k-space volume");
  require_file(labels_path, "label file");
  auto const y = read_volume(kspace_path);
  auto const mask = labels::read_labels(labels_path);
  auto const result = recon::weighted_tv_recon(y, mask, cfg.recon);

  fs::path const dir(c.out);
  fs::create_directories(dir);
  write_volume(result.image, dir / "recon.vol");
  json traces = json::array();
  for (auto const &t : result.traces) {
    traces.push_back({{"slice", t.slice},
                      {"echo", t.echo},
                      {"iterations", t.iterations},
                      {"best_iteration", t.best_iteration},
                      {"scale", t.scale},
                      {"objective", t.objective}});
  }
  json report{{"lambda", cfg.recon.lambda}, {"traces", traces}};
  if (!ref_path.empty()) {
    require_file(ref_path, "reference volume");
    auto const ref = read_volume(ref_path);
    auto const q_recon = metrics::image_quality(result.image, ref);
    auto const q_input = metrics::image_quality(ifft2_per_slice(y), ref);
    report["quality"] = {{"recon", {{"psnr_db", number_or_inf(q_recon.psnr_db)}, {"ssim", q_recon.ssim}}},
                         {"input", {{"psnr_db", number_or_inf(q_input.psnr_db)}, {"ssim", q_input.ssim}}}};
    out << "recon: PSNR " << q_input.psnr_db << " -> " << q_recon.psnr_db << " dB, SSIM " << q_input.ssim << " -> "
        << q_recon.ssim << '\n';
  }
  std::ofstream(dir / "recon_metrics.json") << report.dump(2) << '\n';
  write_resolved_config(cfg, dir);
  return kExitOk;
}

int cmd_evaluate(std::string const &pred_path, std::string const &target_path, std::string const &image_path,
                 std::string const &ref_path, std::string const &csv_append, std::ostream &out) {
  json report;
  if (!pred_path.empty() || !target_path.empty()) {
    require_file(pred_path, "prediction file");
    require_file(target_path, "target file");
    auto const r = metrics::classification_report(labels::read_labels(pred_path), labels::read_labels(target_path));
    report["classification"] = report_json(r);
    if (!csv_append.empty()) {
      bool const fresh = !fs::exists(csv_append);
      std::ofstream csv(csv_append, std::ios::app);
      if (fresh) {
        csv << "pred,target,accuracy,nd_rate,wd_rate,lines\n";
      }
      csv << pred_path << ',' << target_path << ',' << std::setprecision(10) << r.accuracy << ','
          << format_optional(r.nd_rate) << ',' << format_optional(r.wd_rate) << ',' << r.counts.total() << '\n';
    }
  }
  if (!image_path.empty() || !ref_path.empty()) {
    require_file(image_path, "image volume");
    require_file(ref_path, "reference volume");
    auto const q = metrics::image_quality(read_volume(image_path), read_volume(ref_path));
    report["image"] = {{"psnr_db", number_or_inf(q.psnr_db)}, {"ssim", q.ssim}};
  }
  if (report.empty()) {
    throw UsageError("evaluate: give --pred/--target and/or --image/--ref");
  }
  out << report.dump(2) << '\n';
  return kExitOk;
}

int cmd_sweep(Common const &c, std::vector<double> thresholds, std::string const &pred_root, std::ostream &out) {
  RunConfig const base = resolve(c);
  if (thresholds.empty()) {
    throw UsageError("sweep: at least one --d-min required");
  }
  std::sort(thresholds.begin(), thresholds.end());
  fs::path const dir(c.out);
  fs::create_directories(dir);
  std::ostringstream table;
  table << "d_min_mm,accuracy,nd_rate,wd_rate,samples,lines\n";
  for (double d : thresholds) {
    if (!(d > 0.0)) {
      throw UsageError("sweep: thresholds must be positive");
    }
    RunConfig cfg = base;
    cfg.sim.d_min_mm = d;
    cfg.sim.seed = cfg.seed;
    fs::path const ds = dir / dmin_tag(d);
    if (!fs::exists(ds / "index.json")) {
      build_dataset(cfg, {}, ds, out);
      write_resolved_config(cfg, ds);
    }
    auto const index = sim::read_dataset_index(ds / "index.json");
    metrics::ClassCounts counts;
    std::size_t samples = 0;
    for (auto const &rec : index.samples) {
      if (rec.split != sim::Split::Test) {
        continue;
      }
      auto const target = labels::read_labels(ds / rec.labels_file);
      labels::LineLabelMask pred = target;
      if (!pred_root.empty()) {
        fs::path const p = fs::path(pred_root) / dmin_tag(d) / (rec.id + "_pred.csv");
        if (!fs::exists(p)) {
          throw std::runtime_error("sweep: missing prediction file '" + p.string() + "'");
        }
        pred = labels::read_labels(p);
      }
      counts += metrics::count_classes(pred, target);
      ++samples;
    }
    if (samples == 0) {
      throw std::runtime_error("sweep: no test samples for " + dmin_tag(d));
    }
    auto const r = metrics::report_from_counts(counts);
    table << std::setprecision(10) << d << ',' << r.accuracy << ',' << format_optional(r.nd_rate) << ','
          << format_optional(r.wd_rate) << ',' << samples << ',' << counts.total() << '\n';
  }
  std::ofstream(dir / "sweep.csv") << table.str();
  write_resolved_config(base, dir);
  out << table.str();
  return kExitOk;
}

} // namespace

int run(std::vector<std::string> const &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Motion-artifact simulation and motion-weighted reconstruction for multi-echo T2* MRI",
               "t2motion"};
  app.require_subcommand(1);

  Common common;
  std::optional<double> d_min;
  std::optional<double> lambda;
  std::optional<double> mean_disp;
  std::optional<std::size_t> count;
  std::vector<std::string> curve_files;
  std::vector<double> thresholds;
  std::string phantom_path;
  std::string curve_path;
  std::string kspace_path;
  std::string labels_path;
  std::string pred_path;
  std::string target_path;
  std::string ref_path;
  std::string image_path;
  std::string csv_append;
  std::string pred_root;
  bool no_b0 = false;

  auto *phantom_cmd = app.add_subcommand("phantom", "Generate a synthetic multi-echo phantom");
  add_common(phantom_cmd, common);

  auto *curve_cmd = app.add_subcommand("curve", "Generate a synthetic recorded-style motion curve");
  add_common(curve_cmd, common);
  curve_cmd->add_option("--mean-disp", mean_disp, "Target mean sphere displacement in mm");

  auto *augment_cmd = app.add_subcommand("augment", "Fit the PCA curve model and sample augmented curves");
  add_common(augment_cmd, common);
  augment_cmd->add_option("--curves", curve_files, "Training curve CSV files");
  augment_cmd->add_option("--count", count, "Number of augmented curves");

  auto *simulate_cmd = app.add_subcommand("simulate", "Simulate motion-corrupted k-space");
  add_common(simulate_cmd, common);
  simulate_cmd->add_option("--phantom", phantom_path, "Image-space volume")->required();
  simulate_cmd->add_option("--curve", curve_path, "Motion curve CSV")->required();
  simulate_cmd->add_option("--d-min", d_min, "Simulation threshold in mm");
  simulate_cmd->add_flag("--no-b0", no_b0, "Disable the B0 perturbation term");

  auto *dataset_cmd = app.add_subcommand("dataset", "Generate a training/validation/test dataset");
  add_common(dataset_cmd, common);
  dataset_cmd->add_option("--curves", curve_files, "Motion curve CSV files (default: synthetic)");
  dataset_cmd->add_option("--d-min", d_min, "Simulation threshold in mm");

  auto *recon_cmd = app.add_subcommand("recon", "Motion-weighted TV reconstruction");
  add_common(recon_cmd, common);
  recon_cmd->add_option("--kspace", kspace_path, "k-space volume")->required();
  recon_cmd->add_option("--labels,--pred", labels_path, "Line label CSV (targets or predictions)")->required();
  recon_cmd->add_option("--ref", ref_path, "Reference image for PSNR/SSIM");
  recon_cmd->add_option("--lambda", lambda, "TV weight");

  auto *evaluate_cmd = app.add_subcommand("evaluate", "Classification and image-quality metrics");
  evaluate_cmd->add_option("--pred", pred_path, "Predicted label CSV");
  evaluate_cmd->add_option("--target", target_path, "Target label CSV");
  evaluate_cmd->add_option("--image", image_path, "Image volume to score");
  evaluate_cmd->add_option("--ref", ref_path, "Reference image volume");
  evaluate_cmd->add_option("--csv-append", csv_append, "Append a summary row to this CSV");

  auto *sweep_cmd = app.add_subcommand("sweep", "Per-threshold classification metrics");
  add_common(sweep_cmd, common);
  sweep_cmd->add_option("--d-min", thresholds, "Simulation thresholds in mm")->delimiter(',');
  sweep_cmd->add_option("--pred-root", pred_root,
                        "Directory with dmin_<X>/<sample>_pred.csv predictions (default: oracle targets)");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (CLI::CallForHelp const &) {
    out << app.help();
    return kExitOk;
  } catch (CLI::ParseError const &e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    if (phantom_cmd->parsed()) {
      return cmd_phantom(common, out);
    }
    if (curve_cmd->parsed()) {
      return cmd_curve(common, mean_disp, out);
    }
    if (augment_cmd->parsed()) {
      return cmd_augment(common, curve_files, count, out);
    }
    if (simulate_cmd->parsed()) {
      return cmd_simulate(common, phantom_path, curve_path, d_min, no_b0, out, err);
    }
    if (dataset_cmd->parsed()) {
      return cmd_dataset(common, curve_files, d_min, out);
    }
    if (recon_cmd->parsed()) {
      return cmd_recon(common, kspace_path, labels_path, ref_path, lambda, out);
    }
    if (evaluate_cmd->parsed()) {
      return cmd_evaluate(pred_path, target_path, image_path, ref_path, csv_append, out);
    }
    if (sweep_cmd->parsed()) {
      return cmd_sweep(common, thresholds, pred_root, out);
    }
  } catch (ConfigError const &e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (std::exception const &e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}

} // namespace t2motion::cli

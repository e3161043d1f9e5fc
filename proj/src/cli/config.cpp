#include "t2motion/config.hpp"

#include <fstream>
#include <set>

namespace t2motion::cli {

using nlohmann::json;

namespace {

// Reads fields from one JSON object and rejects keys nobody asked for.
class Section {
public:
  Section(json const &obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) {
      throw ConfigError("config: '" + path_ + "' must be an object");
    }
  }

  template <typename T> void get(char const *key, T &out) {
    seen_.insert(key);
    if (!obj_.contains(key)) {
      return;
    }
    try {
      out = obj_.at(key).get<T>();
    } catch (json::exception const &e) {
      throw ConfigError("config: bad value for '" + path_ + "." + key + "': " + e.what());
    }
  }

  json const *sub(char const *key) {
    seen_.insert(key);
    return obj_.contains(key) ? &obj_.at(key) : nullptr;
  }

  void finish() const {
    for (auto const &[key, value] : obj_.items()) {
      if (!seen_.contains(key)) {
        throw ConfigError("config: unknown key '" + (path_.empty() ? key : path_ + "." + key) + "'");
      }
    }
  }

private:
  json const &obj_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<std::size_t> center_out_order(std::size_t n) {
  std::vector<std::size_t> order;
  order.reserve(n);
  auto const centre = static_cast<long>(n / 2);
  for (long k = 0; order.size() < n; ++k) {
    for (long sign : {-1L, 1L}) {
      long const line = centre + (sign < 0 ? -k : k);
      if ((k == 0 && sign > 0) || line < 0 || line >= static_cast<long>(n)) {
        continue;
      }
      order.push_back(static_cast<std::size_t>(line));
    }
  }
  return order;
}

std::string norm_name(labels::NormAxes a) { return a == labels::NormAxes::EchoReadout ? "echo_readout" : "echo_pe"; }

} // namespace

sim::AcquisitionScheme SchemeConfig::build(std::size_t n_pe, std::size_t n_slices) const {
  std::vector<std::size_t> order;
  if (auto const *name = std::get_if<std::string>(&pe_order)) {
    if (*name == "linear") {
      order.resize(n_pe);
      for (std::size_t i = 0; i < n_pe; ++i) {
        order[i] = i;
      }
    } else if (*name == "center_out") {
      order = center_out_order(n_pe);
    } else {
      throw ConfigError("config: unknown scheme.pe_order '" + *name + "'");
    }
  } else {
    order = std::get<std::vector<std::size_t>>(pe_order);
  }
  std::vector<double> offsets;
  if (auto const *name = std::get_if<std::string>(&slice_offsets_s)) {
    if (*name == "interleaved") {
      offsets = sim::AcquisitionScheme::interleaved_offsets(n_slices, tr_s);
    } else if (*name == "sequential") {
      offsets.resize(n_slices);
      for (std::size_t s = 0; s < n_slices; ++s) {
        offsets[s] = static_cast<double>(s) * tr_s / static_cast<double>(n_slices);
      }
    } else {
      throw ConfigError("config: unknown scheme.slice_offsets_s '" + *name + "'");
    }
  } else {
    offsets = std::get<std::vector<double>>(slice_offsets_s);
  }
  try {
    return sim::AcquisitionScheme(n_pe, n_slices, tr_s, std::move(order), std::move(offsets));
  } catch (std::invalid_argument const &e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig parse_config(json const &doc) {
  RunConfig cfg;
  Section root(doc, "");
  root.get("seed", cfg.seed);

  if (auto const *p = root.sub("phantom")) {
    Section s(*p, "phantom");
    std::vector<std::size_t> dims{cfg.phantom.dims.echoes, cfg.phantom.dims.slices, cfg.phantom.dims.lines,
                                  cfg.phantom.dims.readout};
    s.get("dims", dims);
    if (dims.size() != 4) {
      throw ConfigError("config: phantom.dims needs 4 entries [E,S,P,R]");
    }
    cfg.phantom.dims = Dims{dims[0], dims[1], dims[2], dims[3]};
    s.get("voxel_size_mm", cfg.phantom.voxel_size_mm);
    bool const te_given = p->contains("te_ms");
    s.get("te_ms", cfg.phantom.te_ms);
    if (!te_given) {
      cfg.phantom.te_ms = phantom::PhantomSpec::default_echo_times(cfg.phantom.dims.echoes);
    }
    if (auto const *t = s.sub("tissues")) {
      if (!t->is_array()) {
        throw ConfigError("config: phantom.tissues must be an array");
      }
      cfg.phantom.tissues.clear();
      for (auto const &item : *t) {
        Section ts(item, "phantom.tissues[]");
        phantom::TissueSpec tissue;
        ts.get("label", tissue.label);
        ts.get("s0", tissue.s0);
        ts.get("t2star_ms", tissue.t2star_ms);
        ts.get("phase0_rad", tissue.phase0_rad);
        ts.finish();
        cfg.phantom.tissues.push_back(tissue);
      }
    }
    s.finish();
  }

  if (auto const *p = root.sub("scheme")) {
    Section s(*p, "scheme");
    s.get("tr_s", cfg.scheme.tr_s);
    if (auto const *o = s.sub("pe_order")) {
      if (o->is_string()) {
        cfg.scheme.pe_order = o->get<std::string>();
      } else {
        std::vector<std::size_t> v;
        Section(json{{"v", *o}}, "scheme").get("v", v);
        cfg.scheme.pe_order = v;
      }
    }
    if (auto const *o = s.sub("slice_offsets_s")) {
      if (o->is_string()) {
        cfg.scheme.slice_offsets_s = o->get<std::string>();
      } else {
        std::vector<double> v;
        Section(json{{"v", *o}}, "scheme").get("v", v);
        cfg.scheme.slice_offsets_s = v;
      }
    }
    s.finish();
  }

  if (auto const *p = root.sub("sim")) {
    Section s(*p, "sim");
    s.get("d_min_mm", cfg.sim.d_min_mm);
    s.get("b0_threshold_mm", cfg.sim.b0_threshold_mm);
    s.get("b0_max_dev_hz", cfg.sim.b0_max_dev_hz);
    s.get("sphere_radius_mm", cfg.sim.sphere_radius_mm);
    s.get("enable_b0", cfg.sim.enable_b0);
    s.get("require_recentered", cfg.sim.require_recentered);
    s.finish();
  }

  if (auto const *p = root.sub("curves")) {
    Section s(*p, "curves");
    s.get("samples", cfg.curves.samples);
    s.get("dt_s", cfg.curves.dt_s);
    s.get("target_mean_mm", cfg.curves.target_mean_mm);
    s.get("n_training", cfg.curves.n_training);
    s.get("n_heldout", cfg.curves.n_heldout);
    s.get("augment_count", cfg.curves.augment_count);
    s.finish();
  }

  if (auto const *p = root.sub("recon")) {
    Section s(*p, "recon");
    s.get("lambda", cfg.recon.lambda);
    s.get("max_iter", cfg.recon.max_iter);
    s.get("step", cfg.recon.step);
    s.get("tv_inner_iter", cfg.recon.tv_inner_iter);
    s.get("tol", cfg.recon.tol);
    s.get("motion_weight", cfg.recon.motion_weight);
    s.get("clean_weight", cfg.recon.clean_weight);
    s.get("scale_target", cfg.recon.scale_target);
    s.finish();
  }

  if (auto const *p = root.sub("dataset")) {
    Section s(*p, "dataset");
    s.get("n_phantoms", cfg.dataset.n_phantoms);
    s.get("curves_per_phantom", cfg.dataset.curves_per_phantom);
    s.get("train_fraction", cfg.dataset.train_fraction);
    s.get("val_fraction", cfg.dataset.val_fraction);
    s.get("max_background_fraction", cfg.dataset.max_background_fraction);
    s.get("augment", cfg.dataset.augment);
    std::string norm = norm_name(cfg.dataset.normalization);
    s.get("normalization", norm);
    if (norm == "echo_readout") {
      cfg.dataset.normalization = labels::NormAxes::EchoReadout;
    } else if (norm == "echo_pe") {
      cfg.dataset.normalization = labels::NormAxes::EchoPe;
    } else {
      throw ConfigError("config: dataset.normalization must be 'echo_readout' or 'echo_pe'");
    }
    s.finish();
  }
  root.finish();

  if (cfg.phantom.te_ms.size() != cfg.phantom.dims.echoes) {
    throw ConfigError("config: phantom.te_ms must have one entry per echo");
  }
  if (!(cfg.sim.d_min_mm > 0.0)) {
    throw ConfigError("config: sim.d_min_mm must be positive");
  }
  if (!(cfg.sim.b0_max_dev_hz > 0.0) || !(cfg.sim.sphere_radius_mm > 0.0)) {
    throw ConfigError("config: sim.b0_max_dev_hz and sim.sphere_radius_mm must be positive");
  }
  try {
    cfg.recon.validate();
  } catch (std::invalid_argument const &e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_config(std::filesystem::path const &path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config '" + path.string() + "'");
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (json::exception const &e) {
    throw ConfigError("config: invalid JSON: " + std::string(e.what()));
  }
  return parse_config(doc);
}

json to_json(RunConfig const &cfg) {
  json tissues = json::array();
  for (auto const &t : cfg.phantom.tissues) {
    tissues.push_back({{"label", t.label}, {"s0", t.s0}, {"t2star_ms", t.t2star_ms}, {"phase0_rad", t.phase0_rad}});
  }
  auto const &d = cfg.phantom.dims;
  json scheme{{"tr_s", cfg.scheme.tr_s}};
  std::visit([&](auto const &v) { scheme["pe_order"] = v; }, cfg.scheme.pe_order);
  std::visit([&](auto const &v) { scheme["slice_offsets_s"] = v; }, cfg.scheme.slice_offsets_s);
  return json{
      {"seed", cfg.seed},
      {"phantom",
       {{"dims", {d.echoes, d.slices, d.lines, d.readout}},
        {"voxel_size_mm", cfg.phantom.voxel_size_mm},
        {"te_ms", cfg.phantom.te_ms},
        {"tissues", tissues}}},
      {"scheme", scheme},
      {"sim",
       {{"d_min_mm", cfg.sim.d_min_mm},
        {"b0_threshold_mm", cfg.sim.b0_threshold_mm},
        {"b0_max_dev_hz", cfg.sim.b0_max_dev_hz},
        {"sphere_radius_mm", cfg.sim.sphere_radius_mm},
        {"enable_b0", cfg.sim.enable_b0},
        {"require_recentered", cfg.sim.require_recentered}}},
      {"curves",
       {{"samples", cfg.curves.samples},
        {"dt_s", cfg.curves.dt_s},
        {"target_mean_mm", cfg.curves.target_mean_mm},
        {"n_training", cfg.curves.n_training},
        {"n_heldout", cfg.curves.n_heldout},
        {"augment_count", cfg.curves.augment_count}}},
      {"recon",
       {{"lambda", cfg.recon.lambda},
        {"max_iter", cfg.recon.max_iter},
        {"step", cfg.recon.step},
        {"tv_inner_iter", cfg.recon.tv_inner_iter},
        {"tol", cfg.recon.tol},
        {"motion_weight", cfg.recon.motion_weight},
        {"clean_weight", cfg.recon.clean_weight},
        {"scale_target", cfg.recon.scale_target}}},
      {"dataset",
       {{"n_phantoms", cfg.dataset.n_phantoms},
        {"curves_per_phantom", cfg.dataset.curves_per_phantom},
        {"train_fraction", cfg.dataset.train_fraction},
        {"val_fraction", cfg.dataset.val_fraction},
        {"max_background_fraction", cfg.dataset.max_background_fraction},
        {"augment", cfg.dataset.augment},
        {"normalization", norm_name(cfg.dataset.normalization)}}},
  };
}

void write_resolved_config(RunConfig const &cfg, std::filesystem::path const &dir) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "resolved_config.json");
  if (!out) {
    throw std::runtime_error("cannot write resolved config in '" + dir.string() + "'");
  }
  out << to_json(cfg).dump(2) << '\n';
}

} // namespace t2motion::cli

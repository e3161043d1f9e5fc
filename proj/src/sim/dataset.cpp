#include "t2motion/phantom.hpp"
#include "t2motion/sim.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace t2motion::sim {

using nlohmann::json;

std::string to_string(Split split) {
  switch (split) {
  case Split::Train:
    return "train";
  case Split::Val:
    return "val";
  case Split::Test:
    return "test";
  }
  return "train";
}

Split split_from_string(std::string const &name) {
  if (name == "train") {
    return Split::Train;
  }
  if (name == "val") {
    return Split::Val;
  }
  if (name == "test") {
    return Split::Test;
  }
  throw std::invalid_argument("unknown split '" + name + "'");
}

std::vector<Split> assign_splits(std::size_t n, double train_fraction, double val_fraction) {
  if (train_fraction < 0.0 || val_fraction < 0.0 || train_fraction + val_fraction > 1.0 + 1e-12) {
    throw std::invalid_argument("assign_splits: fractions must be non-negative and sum to at most 1");
  }
  auto const n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  auto const n_val = std::min(n - std::min(n, n_train),
                              static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n))));
  std::vector<Split> out(n, Split::Test);
  for (std::size_t i = 0; i < n; ++i) {
    if (i < n_train) {
      out[i] = Split::Train;
    } else if (i < n_train + n_val) {
      out[i] = Split::Val;
    }
  }
  return out;
}

namespace {

std::string sample_id(std::string const &phantom, std::string const &curve, std::size_t slice) {
  std::ostringstream id;
  id << phantom << '_' << curve << "_s" << std::setw(3) << std::setfill('0') << slice;
  return id.str();
}

json to_json(SampleRecord const &r) {
  return json{{"id", r.id},
              {"phantom_id", r.phantom_id},
              {"curve_id", r.curve_id},
              {"slice", r.slice},
              {"split", to_string(r.split)},
              {"kspace", r.kspace_file},
              {"labels", r.labels_file},
              {"displacement", r.displacement_file},
              {"d_min_mm", r.d_min_mm},
              {"seed", r.seed}};
}

} // namespace

DatasetIndex generate_dataset(std::vector<PhantomEntry> const &phantoms,
                              std::vector<motion::MotionCurve> const &curves, SimConfig const &cfg,
                              AcquisitionScheme const &scheme, DatasetSpec const &spec,
                              std::filesystem::path const &out_dir) {
  if (phantoms.empty()) {
    throw std::invalid_argument("generate_dataset: no phantoms");
  }
  bool const needs_curves = !spec.curve_model ||
                            std::any_of(phantoms.begin(), phantoms.end(),
                                        [](PhantomEntry const &p) { return p.split != Split::Train; });
  if (needs_curves && curves.empty()) {
    throw std::invalid_argument("generate_dataset: motion curves required");
  }
  std::filesystem::create_directories(out_dir / "samples");
  std::filesystem::create_directories(out_dir / "curves");

  DatasetIndex index;
  std::size_t pair = 0;
  for (std::size_t pi = 0; pi < phantoms.size(); ++pi) {
    auto const &entry = phantoms[pi];
    auto const &image = entry.image;
    auto const &d = image.dims();

    std::vector<std::size_t> kept;
    for (std::size_t s = 0; s < d.slices; ++s) {
      if (phantom::background_fraction(image, s) > spec.max_background_fraction) {
        index.excluded.push_back(entry.id + ":" + std::to_string(s));
      } else {
        kept.push_back(s);
      }
    }
    if (kept.empty()) {
      pair += spec.curves_per_phantom;
      continue;
    }
    B0Map const base = B0Map::zeros(image);

    for (std::size_t j = 0; j < spec.curves_per_phantom; ++j, ++pair) {
      std::uint64_t const pair_seed = state_seed(cfg.seed, pair);
      std::string curve_id;
      std::optional<motion::MotionCurve> curve;
      if (entry.split == Split::Train && spec.curve_model) {
        curve = motion::recenter_to_median(motion::sample_augmented_curve(*spec.curve_model, pair_seed),
                                           cfg.sphere_radius_mm);
        curve_id = "aug" + std::to_string(pair);
      } else {
        std::size_t const ci = (pi * spec.curves_per_phantom + j) % curves.size();
        curve = curves[ci];
        curve_id = "curve" + std::to_string(ci);
      }
      motion::write_curve(*curve, out_dir / "curves" / (curve_id + ".csv"));

      SimConfig pair_cfg = cfg;
      pair_cfg.seed = pair_seed;
      SimResult const sim = simulate(image, *curve, scheme, base, pair_cfg);

      for (std::size_t s : kept) {
        SampleRecord rec;
        rec.id = sample_id(entry.id, curve_id, s);
        rec.phantom_id = entry.id;
        rec.curve_id = curve_id;
        rec.slice = s;
        rec.split = entry.split;
        rec.d_min_mm = cfg.d_min_mm;
        rec.seed = pair_seed;
        rec.kspace_file = "samples/" + rec.id + "_kspace.vol";
        rec.labels_file = "samples/" + rec.id + "_labels.csv";
        rec.displacement_file = "samples/" + rec.id + "_disp.csv";

        auto const normalized = labels::normalize_lines(sim.kspace.extract_slice(s), spec.norm_axes);
        write_volume(normalized.kspace, out_dir / rec.kspace_file);

        std::vector<std::uint8_t> row(sim.labels.row(s).begin(), sim.labels.row(s).end());
        labels::write_labels(labels::LineLabelMask(1, d.lines, std::move(row)), out_dir / rec.labels_file,
                             cfg.d_min_mm);
        labels::write_matrix_csv(std::span<double const>(sim.displacement_mm).subspan(s * d.lines, d.lines), 1,
                                 d.lines, out_dir / rec.displacement_file,
                                 "sphere-averaged displacement per PE line, mm");
        index.samples.push_back(std::move(rec));
      }
    }
  }
  if (index.samples.empty()) {
    throw std::runtime_error("generate_dataset: empty dataset after background exclusion");
  }

  json doc;
  doc["version"] = 1;
  doc["d_min_mm"] = cfg.d_min_mm;
  doc["normalization"] = spec.norm_axes == labels::NormAxes::EchoReadout ? "echo_readout" : "echo_pe";
  doc["excluded_slices"] = index.excluded;
  doc["samples"] = json::array();
  for (auto const &r : index.samples) {
    doc["samples"].push_back(to_json(r));
  }
  std::ofstream out(out_dir / "index.json");
  if (!out) {
    throw std::runtime_error("cannot write dataset index in '" + out_dir.string() + "'");
  }
  out << doc.dump(2) << '\n';
  return index;
}

DatasetIndex read_dataset_index(std::filesystem::path const &index_json) {
  std::ifstream in(index_json);
  if (!in) {
    throw std::runtime_error("cannot open '" + index_json.string() + "'");
  }
  json const doc = json::parse(in);
  DatasetIndex index;
  for (auto const &s : doc.at("samples")) {
    SampleRecord r;
    r.id = s.at("id").get<std::string>();
    r.phantom_id = s.at("phantom_id").get<std::string>();
    r.curve_id = s.at("curve_id").get<std::string>();
    r.slice = s.at("slice").get<std::size_t>();
    r.split = split_from_string(s.at("split").get<std::string>());
    r.kspace_file = s.at("kspace").get<std::string>();
    r.labels_file = s.at("labels").get<std::string>();
    r.displacement_file = s.at("displacement").get<std::string>();
    r.d_min_mm = s.at("d_min_mm").get<double>();
    r.seed = s.at("seed").get<std::uint64_t>();
    index.samples.push_back(std::move(r));
  }
  if (doc.contains("excluded_slices")) {
    index.excluded = doc.at("excluded_slices").get<std::vector<std::string>>();
  }
  return index;
}

} // namespace t2motion::sim

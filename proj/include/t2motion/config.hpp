#pragma once

#include "t2motion/phantom.hpp"
#include "t2motion/recon.hpp"
#include "t2motion/sim.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace t2motion::cli {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct SchemeConfig {
  double tr_s = 2.1;
  /// "linear", "center_out", or an explicit permutation.
  std::variant<std::string, std::vector<std::size_t>> pe_order = std::string("linear");
  /// "interleaved", "sequential", or explicit offsets in seconds.
  std::variant<std::string, std::vector<double>> slice_offsets_s = std::string("interleaved");

  sim::AcquisitionScheme build(std::size_t n_pe, std::size_t n_slices) const;
};

struct CurveConfig {
  std::size_t samples = 236;
  double dt_s = 1.0;
  double target_mean_mm = 0.89;
  std::size_t n_training = 10;
  std::size_t n_heldout = 4;
  std::size_t augment_count = 6;
};

struct DatasetConfig {
  std::size_t n_phantoms = 4;
  std::size_t curves_per_phantom = 6;
  double train_fraction = 0.5;
  double val_fraction = 0.25;
  double max_background_fraction = 0.30;
  bool augment = true;
  labels::NormAxes normalization = labels::NormAxes::EchoReadout;
};

/// Everything a run needs; parsed strictly (unknown keys rejected) and
/// re-emitted fully resolved next to the outputs.
struct RunConfig {
  std::uint64_t seed = 0;
  phantom::PhantomSpec phantom;
  SchemeConfig scheme;
  sim::SimConfig sim;
  CurveConfig curves;
  recon::ReconConfig recon;
  DatasetConfig dataset;
};

RunConfig parse_config(nlohmann::json const &doc);
RunConfig load_config(std::filesystem::path const &path);
nlohmann::json to_json(RunConfig const &cfg);
void write_resolved_config(RunConfig const &cfg, std::filesystem::path const &dir);

} // namespace t2motion::cli

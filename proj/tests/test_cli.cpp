#include "t2motion/cli.hpp"
#include "t2motion/labels.hpp"
#include "t2motion/motion.hpp"
#include "t2motion/sim.hpp"
#include "t2motion/volume.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

using namespace t2motion;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(std::string const &name) {
  auto dir = fs::temp_directory_path() / "t2motion_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path small_config(fs::path const &dir) {
  json cfg = {
      {"seed", 11},
      {"phantom", {{"dims", {3, 8, 32, 28}}}},
      {"curves", {{"samples", 80}, {"n_training", 3}, {"n_heldout", 2}, {"augment_count", 2}}},
      {"dataset", {{"n_phantoms", 2}, {"curves_per_phantom", 6}, {"train_fraction", 0.5}, {"val_fraction", 0.0}}},
      {"recon", {{"max_iter", 10}}},
  };
  auto const path = dir / "config.json";
  std::ofstream(path) << cfg.dump(2);
  return path;
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> const &args) {
  std::ostringstream out;
  std::ostringstream err;
  int const code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(fs::path const &p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> lines_of(std::string const &text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) {
      out.push_back(line);
    }
  }
  return out;
}

} // namespace

TEST_CASE("exit codes of the installed binary") {
  auto const dir = fresh_dir("exit");
  std::string const bin = T2MOTION_CLI_PATH;
  auto const sh = [&](std::string const &args) {
    int const status = std::system((bin + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  auto const cfg = small_config(dir);
  CHECK(sh("phantom --config " + cfg.string() + " --out " + (dir / "ok").string()) == 0);
  CHECK(fs::exists(dir / "ok" / "phantom.vol"));
  CHECK(sh("no-such-command") == 1);
  CHECK(sh("phantom --bogus-flag") == 1);
  std::ofstream(dir / "bad.json") << R"({"sim": {"d_min_mm": 0.5, "dmin": 1}})";
  CHECK(sh("phantom --config " + (dir / "bad.json").string() + " --out " + dir.string()) == 1);
  // Missing inputs fail validation; unreadable ones fail at run time.
  CHECK(sh("simulate --phantom " + (dir / "missing.vol").string() + " --curve " + (dir / "missing.csv").string() +
           " --out " + dir.string()) == 1);
  std::ofstream(dir / "garbage.vol") << "not a volume";
  std::ofstream(dir / "still.csv") << "garbage\n";
  CHECK(sh("simulate --phantom " + (dir / "garbage.vol").string() + " --curve " + (dir / "still.csv").string() +
           " --out " + dir.string()) == 2);
}

TEST_CASE("config validation errors are reported as such") {
  auto const dir = fresh_dir("config");
  std::ofstream(dir / "unknown.json") << R"({"recon": {"lambda": 1.0, "lamda": 2.0}})";
  auto const r = run({"phantom", "--config", (dir / "unknown.json").string(), "--out", dir.string()});
  CHECK(r.code == cli::kExitValidation);
  CHECK(r.err.find("recon.lamda") != std::string::npos);
  std::ofstream(dir / "neg.json") << R"({"sim": {"d_min_mm": -1}})";
  CHECK(run({"phantom", "--config", (dir / "neg.json").string(), "--out", dir.string()}).code ==
        cli::kExitValidation);
  std::ofstream(dir / "broken.json") << "{not json";
  CHECK(run({"phantom", "--config", (dir / "broken.json").string(), "--out", dir.string()}).code ==
        cli::kExitValidation);
}

TEST_CASE("simulate with a zero-motion curve reproduces the phantom's k-space") {
  auto const dir = fresh_dir("simulate");
  auto const cfg = small_config(dir);
  REQUIRE(run({"phantom", "--config", cfg.string(), "--out", dir.string()}).code == 0);
  std::vector<double> t(80);
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<double>(i);
  }
  motion::write_curve(motion::MotionCurve(t, std::vector<motion::RigidTransform>(80)), dir / "still.csv");
  auto const out = dir / "sim";
  auto const r = run({"simulate", "--config", cfg.string(), "--phantom", (dir / "phantom.vol").string(), "--curve",
                      (dir / "still.csv").string(), "--out", out.string()});
  REQUIRE(r.code == 0);
  auto const k = read_volume(out / "kspace.vol");
  auto const expected = fft2_per_slice(read_volume(dir / "phantom.vol"));
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < k.data().size(); ++i) {
    num += std::norm(cdouble(k.data()[i]) - cdouble(expected.data()[i]));
    den += std::norm(cdouble(expected.data()[i]));
  }
  CHECK(std::sqrt(num / den) <= 1e-6);
  auto const l = labels::read_labels(out / "labels.csv");
  CHECK(l.slices() == 8);
  CHECK(l.lines() == 32);
  CHECK(l.all_clean());
  CHECK(fs::exists(out / "resolved_config.json"));
  CHECK(fs::exists(out / "corrupted.vol"));
  CHECK(fs::exists(out / "displacement.csv"));

  // The resolved config is a valid config that reproduces the run.
  auto const again = dir / "sim_again";
  REQUIRE(run({"simulate", "--config", (out / "resolved_config.json").string(), "--phantom",
               (dir / "phantom.vol").string(), "--curve", (dir / "still.csv").string(), "--out", again.string()})
              .code == 0);
  CHECK(slurp(out / "kspace.vol") == slurp(again / "kspace.vol"));
}

TEST_CASE("--seed overrides the configured seed") {
  auto const dir = fresh_dir("seed");
  auto const cfg = small_config(dir);
  REQUIRE(run({"phantom", "--config", cfg.string(), "--out", (dir / "a").string()}).code == 0);
  REQUIRE(run({"phantom", "--config", cfg.string(), "--seed", "12", "--out", (dir / "b").string()}).code == 0);
  REQUIRE(run({"phantom", "--config", cfg.string(), "--seed", "11", "--out", (dir / "c").string()}).code == 0);
  CHECK(slurp(dir / "a" / "phantom.vol") != slurp(dir / "b" / "phantom.vol"));
  CHECK(slurp(dir / "a" / "phantom.vol") == slurp(dir / "c" / "phantom.vol"));
  auto const resolved = json::parse(slurp(dir / "b" / "resolved_config.json"));
  CHECK(resolved.at("seed").get<int>() == 12);
}

TEST_CASE("curve and augment commands") {
  auto const dir = fresh_dir("augment");
  auto const cfg = small_config(dir);
  REQUIRE(run({"curve", "--config", cfg.string(), "--mean-disp", "0.7", "--out", dir.string()}).code == 0);
  auto const c = motion::read_curve(dir / "curve.csv");
  CHECK(c.size() == 80);
  auto const r = run({"augment", "--config", cfg.string(), "--count", "3", "--out", dir.string()});
  REQUIRE(r.code == 0);
  for (char const *name : {"aug_000.csv", "aug_001.csv", "aug_002.csv", "model.json"}) {
    CHECK(fs::exists(dir / name));
  }
}

TEST_CASE("dataset: two phantoms, six curves each, phantom-disjoint splits") {
  auto const dir = fresh_dir("dataset");
  auto const cfg = small_config(dir);
  auto const r = run({"dataset", "--config", cfg.string(), "--out", (dir / "ds").string()});
  REQUIRE(r.code == 0);
  auto const index = sim::read_dataset_index(dir / "ds" / "index.json");
  std::set<std::string> train;
  std::set<std::string> test;
  std::set<std::string> phantoms;
  for (auto const &rec : index.samples) {
    phantoms.insert(rec.phantom_id);
    (rec.split == sim::Split::Train ? train : test).insert(rec.phantom_id);
  }
  CHECK(phantoms.size() == 2);
  CHECK(train.size() == 1);
  CHECK(test.size() == 1);
  CHECK(*train.begin() != *test.begin());
  // Six curves per phantom: every kept slice appears once per curve.
  std::size_t const kept_slices = 8 - index.excluded.size() / 2;
  CHECK(index.excluded.size() % 2 == 0);
  CHECK(index.samples.size() == 2 * 6 * kept_slices);
  CHECK(fs::exists(dir / "ds" / "resolved_config.json"));
}

TEST_CASE("evaluate: self-comparison and CSV summary") {
  auto const dir = fresh_dir("evaluate");
  labels::write_labels(labels::LineLabelMask(2, 5, {1, 0, 1, 1, 0, 0, 1, 1, 1, 1}), dir / "a.csv");
  auto const r = run({"evaluate", "--pred", (dir / "a.csv").string(), "--target", (dir / "a.csv").string(),
                      "--csv-append", (dir / "summary.csv").string()});
  REQUIRE(r.code == 0);
  auto const report = json::parse(r.out);
  CHECK(report.at("classification").at("accuracy").get<double>() == 1.0);
  auto const rows = lines_of(slurp(dir / "summary.csv"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == "pred,target,accuracy,nd_rate,wd_rate,lines");
  CHECK(run({"evaluate"}).code == cli::kExitValidation);
  CHECK(run({"evaluate", "--pred", (dir / "a.csv").string(), "--target", (dir / "nope.csv").string()}).code ==
        cli::kExitValidation);
  labels::write_labels(labels::LineLabelMask(2, 4), dir / "short.csv");
  CHECK(run({"evaluate", "--pred", (dir / "a.csv").string(), "--target", (dir / "short.csv").string()}).code ==
        cli::kExitRuntime);
}

TEST_CASE("recon writes the image and its traces") {
  auto const dir = fresh_dir("recon");
  auto const cfg = small_config(dir);
  REQUIRE(run({"phantom", "--config", cfg.string(), "--out", dir.string()}).code == 0);
  auto const k = fft2_per_slice(read_volume(dir / "phantom.vol"));
  write_volume(k, dir / "k.vol");
  labels::write_labels(labels::LineLabelMask(8, 32), dir / "ones.csv");
  auto const r = run({"recon", "--config", cfg.string(), "--kspace", (dir / "k.vol").string(), "--labels",
                      (dir / "ones.csv").string(), "--ref", (dir / "phantom.vol").string(), "--lambda", "0.5",
                      "--out", (dir / "out").string()});
  REQUIRE(r.code == 0);
  auto const img = read_volume(dir / "out" / "recon.vol");
  CHECK(img.space() == Space::Image);
  CHECK(img.dims() == k.dims());
  auto const m = json::parse(slurp(dir / "out" / "recon_metrics.json"));
  CHECK(m.at("lambda").get<double>() == 0.5);
  CHECK(m.at("traces").size() == 3 * 8);
  CHECK(m.at("quality").contains("recon"));
  labels::write_labels(labels::LineLabelMask(8, 31), dir / "wrong.csv");
  CHECK(run({"recon", "--kspace", (dir / "k.vol").string(), "--labels", (dir / "wrong.csv").string(), "--out",
             (dir / "out2").string()})
            .code == cli::kExitRuntime);
}

TEST_CASE("sweep: ordered oracle rows and pluggable predictions") {
  auto const dir = fresh_dir("sweep");
  auto const cfg = small_config(dir);
  auto const out = dir / "sweep";
  auto const r = run({"sweep", "--config", cfg.string(), "--d-min", "1.0,0.25,0.5", "--out", out.string()});
  REQUIRE(r.code == 0);
  auto const rows = lines_of(slurp(out / "sweep.csv"));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "d_min_mm,accuracy,nd_rate,wd_rate,samples,lines");
  CHECK(rows[1].rfind("0.25,1,", 0) == 0);
  CHECK(rows[2].rfind("0.5,1,", 0) == 0);
  CHECK(rows[3].rfind("1,1,", 0) == 0);

  // External predictions: all-clean guesses for the 0.5 mm test samples.
  auto const index = sim::read_dataset_index(out / "dmin_0.50" / "index.json");
  fs::create_directories(dir / "pred" / "dmin_0.50");
  for (auto const &rec : index.samples) {
    if (rec.split == sim::Split::Test) {
      labels::write_labels(labels::LineLabelMask(1, 32), dir / "pred" / "dmin_0.50" / (rec.id + "_pred.csv"));
    }
  }
  auto const p = run({"sweep", "--config", cfg.string(), "--d-min", "0.5", "--pred-root", (dir / "pred").string(),
                      "--out", out.string()});
  REQUIRE(p.code == 0);
  auto const prow = lines_of(slurp(out / "sweep.csv"));
  REQUIRE(prow.size() == 2);
  CHECK(prow[1].rfind("0.5,", 0) == 0);
  // Missing prediction files are a runtime error.
  CHECK(run({"sweep", "--config", cfg.string(), "--d-min", "0.25", "--pred-root", (dir / "pred").string(), "--out",
             out.string()})
            .code == cli::kExitRuntime);
}

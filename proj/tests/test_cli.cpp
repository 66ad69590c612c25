#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "evball/cli/pipeline.hpp"
#include "evball/core/config.hpp"
#include "evball/core/errors.hpp"
#include "evball/core/io.hpp"

using namespace evball;
namespace fs = std::filesystem;

namespace {

core::Config fast_config() {
  core::Config cfg;
  cfg.set("scene.duration", "0.2");
  cfg.set("scene.seed", "11");
  cfg.set("scene.ball_p0", "0.4,3.0,-0.05");
  cfg.set("scene.ball_v0", "-1.3,-5.0,0.7");
  cfg.set("scene.static_edges", "0");
  return cfg;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const char* name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("empty stage list writes the manifest only") {
  TempDir dir("evball_cli_manifest");
  cli::PipelineOptions opt;
  opt.out_dir = dir.path.string();
  cli::run_pipeline(fast_config(), {}, opt);
  CHECK(fs::exists(dir.path / "manifest.txt"));
  CHECK(fs::exists(dir.path / "config_snapshot.cfg"));
  CHECK_FALSE(fs::exists(dir.path / "events.csv"));
}

TEST_CASE("unknown stages are rejected before anything runs") {
  TempDir dir("evball_cli_badstage");
  cli::PipelineOptions opt;
  opt.out_dir = dir.path.string();
  CHECK_THROWS_AS(cli::run_pipeline(fast_config(), {"simulate", "fry"}, opt),
                  core::UsageError);
  CHECK_FALSE(fs::exists(dir.path / "events.csv"));
}

TEST_CASE("stages run in dependency order regardless of request order") {
  TempDir dir("evball_cli_order");
  cli::PipelineOptions opt;
  opt.out_dir = dir.path.string();
  cli::run_pipeline(fast_config(), {"measure", "detect", "simulate"}, opt);
  CHECK(fs::exists(dir.path / "events.csv"));
  CHECK(fs::exists(dir.path / "detections.csv"));
  CHECK(fs::exists(dir.path / "measurements.csv"));
}

TEST_CASE("full pipeline produces the report set and is deterministic") {
  TempDir dir_a("evball_cli_full_a");
  TempDir dir_b("evball_cli_full_b");
  const std::vector<std::string> stages = {"simulate", "detect", "measure",
                                           "predict", "eval"};
  cli::PipelineOptions opt_a;
  opt_a.out_dir = dir_a.path.string();
  cli::run_pipeline(fast_config(), stages, opt_a);
  cli::PipelineOptions opt_b;
  opt_b.out_dir = dir_b.path.string();
  opt_b.threads = 4;  // parallel detection must not change the artifacts
  cli::run_pipeline(fast_config(), stages, opt_b);

  for (const char* name :
       {"events.csv", "measurements.csv", "prediction.csv", "impact.txt",
        "detection_report.csv", "ball_events.csv"}) {
    CAPTURE(name);
    CHECK(core::file_checksum((dir_a.path / name).string()) ==
          core::file_checksum((dir_b.path / name).string()));
  }
  CHECK(fs::exists(dir_a.path / "sensing_latency_grid.csv"));
  CHECK(fs::exists(dir_a.path / "impact_report.csv"));

  // detections.csv carries wall-clock timings, so compare the stable
  // columns only.
  auto stable_columns = [](const fs::path& p) {
    std::ifstream in(p);
    std::string line, acc;
    while (std::getline(in, line)) {
      const auto f = core::split_csv_line(line);
      for (std::size_t i = 0; i < 6 && i < f.size(); ++i) acc += f[i] + "|";
      acc += "\n";
    }
    return acc;
  };
  CHECK(stable_columns(dir_a.path / "detections.csv") ==
        stable_columns(dir_b.path / "detections.csv"));
}

TEST_CASE("config with unknown keys aborts the pipeline with their names") {
  TempDir dir("evball_cli_badcfg");
  const auto cfg_path = dir.path;
  fs::create_directories(cfg_path);
  const auto file = (cfg_path / "bad.cfg").string();
  {
    std::ofstream out(file);
    out << "scene.duration = 0.1\nmystery.knob = 3\n";
  }
  CHECK_THROWS_WITH_AS(core::Config::load(file),
                       doctest::Contains("mystery.knob"), core::DataError);
}

TEST_CASE("parallel_for covers every index exactly once") {
  std::vector<int> hits(1000, 0);
  cli::parallel_for(hits.size(), 8,
                    [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
}

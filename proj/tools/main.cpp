#include <CLI11.hpp>
#include <iostream>

#include "evball/cli/pipeline.hpp"
#include "evball/core/errors.hpp"

namespace {

struct GlobalArgs {
  std::string config_path;
  std::int64_t seed = -1;
  evball::cli::PipelineOptions opt;
};

evball::core::Config build_config(const GlobalArgs& args) {
  evball::core::Config cfg = args.config_path.empty()
                                 ? evball::core::Config()
                                 : evball::core::Config::load(args.config_path);
  if (args.seed >= 0) cfg.set("scene.seed", std::to_string(args.seed));
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Egocentric event-camera ball tracking and trajectory prediction"};
  app.require_subcommand(1);

  GlobalArgs args;
  app.add_option("--config", args.config_path, "Key-value config file");
  app.add_option("--seed", args.seed, "Override scene.seed");
  app.add_option("--out-dir", args.opt.out_dir, "Artifact directory");
  app.add_option("--threads", args.opt.threads, "Worker thread cap");

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic scene");

  auto* det = app.add_subcommand("detect", "Run ball detection over windows");
  det->add_option("--events", args.opt.events_path, "Event stream (.csv/.bin)");
  det->add_option("--gaze", args.opt.gaze_path, "Gaze CSV");
  det->add_option("--imu", args.opt.imu_path, "IMU CSV");

  auto* mea = app.add_subcommand("measure", "Fit circles and recover depth");

  auto* pre = app.add_subcommand("predict", "Forecast the trajectory");
  pre->add_option("--measurements", args.opt.measurements_path,
                  "measurements.csv");
  pre->add_option("--poses", args.opt.poses_path, "Relative pose CSV");

  auto* eva = app.add_subcommand("eval", "Score detections and impact");
  auto* ben = app.add_subcommand("bench", "Latency and bandwidth benchmark");

  auto* seg = app.add_subcommand("segment", "Audio rally segmentation");
  seg->add_option("--audio", args.opt.audio_path, "Input WAV");
  seg->add_option("--reference-peak", args.opt.reference_peak,
                  "Anchor time of the reference bounce, seconds");

  auto* rep = app.add_subcommand("report", "Summarize run artifacts");

  std::vector<std::string> stages;
  auto* run = app.add_subcommand("run", "Run a stage list in order");
  run->add_option("stages", stages,
                  "Stages: simulate detect measure predict eval bench "
                  "segment report");

  CLI11_PARSE(app, argc, argv);

  try {
    const evball::core::Config cfg = build_config(args);
    if (sim->parsed()) stages = {"simulate"};
    if (det->parsed()) stages = {"detect"};
    if (mea->parsed()) stages = {"measure"};
    if (pre->parsed()) stages = {"predict"};
    if (eva->parsed()) stages = {"eval"};
    if (ben->parsed()) stages = {"bench"};
    if (seg->parsed()) stages = {"segment"};
    if (rep->parsed()) stages = {"report"};
    evball::cli::run_pipeline(cfg, stages, args.opt);
  } catch (const evball::core::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const evball::core::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const evball::core::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

#include "evball/cli/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include "evball/core/errors.hpp"
#include "evball/core/geometry.hpp"
#include "evball/core/io.hpp"
#include "evball/evalh/metrics.hpp"
#include "evball/evalh/sensing.hpp"
#include "evball/measure/measure.hpp"
#include "evball/predict/forecast.hpp"
#include "evball/segment/filter.hpp"
#include "evball/segment/peaks.hpp"
#include "evball/synth/scene.hpp"

namespace evball::cli {

namespace fs = std::filesystem;

namespace {

std::string pick(const std::string& override_path, const std::string& out_dir,
                 const char* name) {
  return override_path.empty() ? out_dir + "/" + name : override_path;
}

std::vector<core::Event> load_events(const std::string& path) {
  if (path.size() > 4 && path.substr(path.size() - 4) == ".bin") {
    return core::read_events_bin(path);
  }
  return core::read_events_csv(path);
}

synth::GroundTruth load_ground_truth(const std::string& dir) {
  synth::GroundTruth gt;
  const auto traj = core::read_trajectory_csv(dir + "/gt_trajectory.csv");
  gt.states.reserve(traj.size());
  for (const auto& s : traj) {
    core::BallState b;
    b.t = static_cast<double>(s.t_us) * 1e-6;
    b.p = s.p;
    gt.states.push_back(b);
  }
  const auto meta = core::KeyValueRecord::load(dir + "/gt_meta.txt");
  gt.has_impact = meta.get("has_impact") == "1";
  if (gt.has_impact) {
    gt.impact_point = meta.get_vec3("impact_point");
    gt.impact_time = meta.get_double("impact_time");
  }
  return gt;
}

struct WindowedBallEvents {
  std::int64_t t_start_us = 0;
  std::vector<core::Event> events;
};

void write_ball_events_csv(const std::string& path,
                           const std::vector<detect::DetectionResult>& results) {
  std::ofstream out(path);
  if (!out) throw core::DataError("cannot write " + path);
  out << "window_t_start_us,t_us,x,y,p\n";
  for (const auto& r : results) {
    if (!r.found) continue;
    for (const core::Event& e : r.ball_events) {
      out << r.t_start_us << ',' << e.t_us << ',' << e.x << ',' << e.y << ','
          << static_cast<int>(e.p) << '\n';
    }
  }
}

std::vector<WindowedBallEvents> read_ball_events_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw core::DataError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw core::DataError("empty file: " + path);
  std::vector<WindowedBallEvents> groups;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = core::split_csv_line(line);
    if (f.size() != 5) throw core::DataError("bad ball-event row in " + path);
    const std::int64_t win = std::stoll(f[0]);
    if (groups.empty() || groups.back().t_start_us != win) {
      groups.push_back({win, {}});
    }
    core::Event e;
    e.t_us = std::stoll(f[1]);
    e.x = static_cast<std::uint16_t>(std::stoi(f[2]));
    e.y = static_cast<std::uint16_t>(std::stoi(f[3]));
    e.p = static_cast<std::int8_t>(std::stoi(f[4]));
    groups.back().events.push_back(e);
  }
  return groups;
}

std::vector<detect::DetectionResult> run_detection(
    const core::Config& cfg, const PipelineOptions& opt, bool use_roi,
    int threads) {
  const auto events = load_events(pick(opt.events_path, opt.out_dir, "events.csv"));
  const auto gaze = core::read_gaze_csv(pick(opt.gaze_path, opt.out_dir, "gaze.csv"));
  const auto imu = core::read_imu_csv(pick(opt.imu_path, opt.out_dir, "imu.csv"));
  const auto cam = cfg.camera();
  auto params = detect::DetectionParams::from_config(cfg, cam, cfg.physics());
  params.use_roi = use_roi;

  const auto t_end =
      static_cast<std::int64_t>(std::llround(cfg.get_double("scene.duration") * 1e6));
  const auto windows =
      detect::slice_windows(events, params.window_dt, 0, t_end);
  std::vector<detect::DetectionResult> results(windows.size());
  parallel_for(windows.size(), threads, [&](std::size_t i) {
    results[i] = detect::detect(windows[i], gaze, imu, cam, params);
  });
  return results;
}

}  // namespace

void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& body) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  const int workers = std::min<int>(threads, static_cast<int>(n));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        body(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

void stage_simulate(const core::Config& cfg, const PipelineOptions& opt) {
  const auto scfg = synth::SceneConfig::from_config(cfg);
  const synth::SceneData scene = synth::render_scene(scfg);
  synth::write_scene(scene, scfg, opt.out_dir);

  // Camera poses at 1 kHz: rotation taking the camera frame at t back to
  // the frame at t = 0 (the anchor every window-level measurement joins).
  predict::PoseTrack poses;
  const core::Mat3 r_cw0 =
      synth::camera_orientation_cw(scfg.rotation_profile, 0.0);
  for (const auto& s : scene.gt.states) {
    const core::Mat3 rel =
        r_cw0 *
        synth::camera_orientation_cw(scfg.rotation_profile, s.t).transpose();
    poses.t_us.push_back(static_cast<std::int64_t>(std::llround(s.t * 1e6)));
    poses.rotvec.push_back(core::log_rotation(rel));
  }
  predict::write_poses_csv(opt.out_dir + "/poses.csv", poses);

  if (!scene.fully_visible) {
    std::cerr << "simulate: ball only visible until "
              << core::format_double(scene.visible_until) << " s of "
              << core::format_double(scfg.duration) << " s\n";
  }
}

std::vector<detect::DetectionResult> stage_detect(const core::Config& cfg,
                                                  const PipelineOptions& opt) {
  auto results = run_detection(cfg, opt, cfg.get_bool("detect.use_roi"),
                               opt.threads);
  detect::write_detections_csv(opt.out_dir + "/detections.csv", results);
  write_ball_events_csv(opt.out_dir + "/ball_events.csv", results);
  return results;
}

void stage_measure(const core::Config& cfg, const PipelineOptions& opt) {
  const auto groups = read_ball_events_csv(opt.out_dir + "/ball_events.csv");
  const auto cam = cfg.camera();
  const auto physics = cfg.physics();
  measure::MeasureOptions mo;
  mo.batches = static_cast<int>(cfg.get_int("measure.batches"));
  mo.method = measure::fit_method_from_string(cfg.get_string("measure.method"));
  const auto window_us = static_cast<std::int64_t>(
      std::llround(cfg.get_double("detect.window_dt") * 1e6));

  std::vector<measure::MeasurementRow> rows;
  for (const auto& g : groups) {
    measure::WindowMeasurements wm;
    try {
      wm = measure::measure_window(g.events, g.t_start_us,
                                   g.t_start_us + window_us, cam, physics, mo);
    } catch (const core::NumericalError&) {
      continue;  // fully degenerate window, nothing to emit
    }
    for (const auto& w : wm.warnings) {
      std::cerr << "measure: window " << g.t_start_us << ": " << w << '\n';
    }
    for (const auto& m : wm.measurements) {
      measure::MeasurementRow row;
      row.t = static_cast<double>(g.t_start_us) * 1e-6 + m.t;
      row.cx = m.cx_img;
      row.cy = m.cy_img;
      row.r = m.r_img;
      row.depth = m.depth;
      row.method = measure::to_string(mo.method);
      rows.push_back(row);
    }
  }
  measure::write_measurements_csv(opt.out_dir + "/measurements.csv", rows);
}

void stage_predict(const core::Config& cfg, const PipelineOptions& opt) {
  const auto rows = measure::read_measurements_csv(
      pick(opt.measurements_path, opt.out_dir, "measurements.csv"));
  if (rows.size() < 2) {
    throw core::DataError("predict: needs at least two measurements");
  }
  std::vector<core::BallMeasurement> meas;
  for (const auto& r : rows) {
    core::BallMeasurement m;
    m.t = r.t;
    m.cx_img = r.cx;
    m.cy_img = r.cy;
    m.r_img = r.r;
    m.depth = r.depth;
    meas.push_back(m);
  }

  predict::PoseTrack poses;
  const std::string poses_path = pick(opt.poses_path, opt.out_dir, "poses.csv");
  if (fs::exists(poses_path)) poses = predict::read_poses_csv(poses_path);

  const auto fopt = predict::ForecastOptions::from_config(cfg);
  const auto history = predict::forecast_online(meas, cfg.physics(),
                                                cfg.camera(), fopt, poses);
  if (history.empty()) {
    throw core::DataError("predict: no prediction produced");
  }
  const auto& final_pred = history.back();
  predict::write_prediction_csv(opt.out_dir + "/prediction.csv", final_pred);
  predict::impact_record(final_pred, cfg.get_string("predict.mode"))
      .save(opt.out_dir + "/impact.txt");

  std::ofstream online(opt.out_dir + "/online_impacts.csv");
  online << "update_count,has_impact,impact_x,impact_y,impact_z,impact_time\n";
  for (const auto& p : history) {
    online << p.update_count << ',' << (p.has_impact ? 1 : 0) << ','
           << core::format_double(p.impact_point.x()) << ','
           << core::format_double(p.impact_point.y()) << ','
           << core::format_double(p.impact_point.z()) << ','
           << core::format_double(p.impact_time) << '\n';
  }
}

void stage_eval(const core::Config& cfg, const PipelineOptions& opt) {
  const auto scfg = synth::SceneConfig::from_config(cfg);
  const synth::GroundTruth gt = load_ground_truth(opt.out_dir);

  // Detection protocol: re-score detections.csv against the reprojected
  // ground truth.
  std::vector<detect::DetectionResult> dets;
  {
    std::ifstream in(opt.out_dir + "/detections.csv");
    if (!in) throw core::DataError("eval: missing detections.csv");
    std::string line;
    std::getline(in, line);
    const auto window_us = static_cast<std::int64_t>(
        std::llround(cfg.get_double("detect.window_dt") * 1e6));
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = core::split_csv_line(line);
      if (f.size() < 6) throw core::DataError("eval: bad detections row");
      detect::DetectionResult r;
      r.t_start_us = std::stoll(f[0]);
      r.t_end_us = r.t_start_us + window_us;
      r.found = f[1] == "1";
      r.center = {std::stod(f[2]), std::stod(f[3])};
      r.gamma = std::stod(f[4]);
      r.ball_events.resize(static_cast<std::size_t>(std::stoll(f[5])));
      dets.push_back(std::move(r));
    }
  }
  const auto det_eval =
      evalh::eval_detection(dets, gt, scfg, cfg.get_double("eval.epsilon"));
  evalh::write_detection_report_csv(opt.out_dir + "/detection_report.csv",
                                    det_eval);

  // Impact protocol: the final online prediction against the simulated
  // impact, when both exist.
  const std::string impact_path = opt.out_dir + "/impact.txt";
  if (fs::exists(impact_path) && gt.has_impact) {
    const auto rec = core::KeyValueRecord::load(impact_path);
    if (rec.get("has_impact") == "1") {
      const auto impact =
          evalh::eval_impact({rec.get_vec3("impact_point")}, {gt.impact_point});
      std::vector<evalh::ImpactReportRow> rows;
      evalh::ImpactReportRow row;
      row.method = "diff_eq_" + rec.get("mode");
      row.update_hz = core::format_double(
          1.0 / cfg.get_double("detect.window_dt"));
      row.cell = "horizon=" + cfg.get_string("predict.horizon") + "s";
      row.rmse = impact.rmse;
      row.sigma = impact.sigma;
      row.n = impact.errors.size();
      rows.push_back(row);
      evalh::write_impact_report_csv(opt.out_dir + "/impact_report.csv", rows);
      evalh::write_impact_scatter_csv(opt.out_dir + "/impact_scatter.csv",
                                      impact);
    }
  }

  // Sensing-latency grid for the plots.
  evalh::write_sensing_grid_csv(opt.out_dir + "/sensing_latency_grid.csv",
                                scfg.cam.fx, scfg.physics.radius, 1.0);
}

void stage_bench(const core::Config& cfg, const PipelineOptions& opt) {
  // Timings stay honest on a single thread and byte-identical inputs.
  evalh::RoiComparison cmp;
  cmp.with_roi = evalh::bench_latency(run_detection(cfg, opt, true, 1));
  cmp.without_roi = evalh::bench_latency(run_detection(cfg, opt, false, 1));
  evalh::write_latency_report_csv(opt.out_dir + "/latency_report.csv",
                                  cmp.with_roi);
  evalh::write_latency_report_csv(opt.out_dir + "/latency_report_no_roi.csv",
                                  cmp.without_roi);
  evalh::write_roi_comparison_csv(opt.out_dir + "/roi_comparison.csv", cmp);
}

void stage_segment(const core::Config& cfg, const PipelineOptions& opt) {
  const std::string audio = pick(opt.audio_path, opt.out_dir, "audio.wav");
  const auto track = segment::read_wav(audio);
  const auto filtered =
      segment::highpass_filter(track, cfg.get_double("segment.cutoff_hz"),
                               static_cast<int>(cfg.get_int("segment.order")));
  const auto peaks =
      segment::find_peaks(filtered, cfg.get_double("segment.min_separation"),
                          cfg.get_double("segment.threshold_ratio"));
  segment::RallyParams rp;
  rp.cycle_len = static_cast<int>(cfg.get_int("segment.cycle_len"));
  rp.rise_factor = cfg.get_double("segment.rise_factor");
  rp.reference_peak = opt.reference_peak;
  std::vector<std::string> warnings;
  const auto starts = segment::segment_rallies(peaks, rp, &warnings);
  for (const auto& w : warnings) std::cerr << "segment: " << w << '\n';
  segment::write_segments_csv(opt.out_dir + "/segments.csv", starts);
}

void stage_report(const core::Config& cfg, const PipelineOptions& opt) {
  (void)cfg;
  std::ofstream out(opt.out_dir + "/report_summary.txt");
  if (!out) throw core::DataError("cannot write report summary");
  const char* artifacts[] = {
      "events.csv",         "detections.csv",       "measurements.csv",
      "prediction.csv",     "impact.txt",           "detection_report.csv",
      "impact_report.csv",  "latency_report.csv",   "roi_comparison.csv",
      "segments.csv",       "sensing_latency_grid.csv"};
  for (const char* name : artifacts) {
    const std::string path = opt.out_dir + "/" + std::string(name);
    if (fs::exists(path)) {
      out << name << "  checksum=" << core::file_checksum(path) << '\n';
    }
  }
  std::cout << "report written to " << opt.out_dir << "/report_summary.txt\n";
}

void run_pipeline(const core::Config& cfg, std::vector<std::string> stages,
                  const PipelineOptions& opt) {
  static const std::vector<std::string> order = {
      "simulate", "detect", "measure", "predict",
      "eval",     "bench",  "segment", "report"};
  for (const auto& s : stages) {
    if (std::find(order.begin(), order.end(), s) == order.end()) {
      throw core::UsageError("unknown stage: " + s);
    }
  }
  std::stable_sort(stages.begin(), stages.end(),
                   [&](const std::string& a, const std::string& b) {
                     return std::find(order.begin(), order.end(), a) <
                            std::find(order.begin(), order.end(), b);
                   });
  stages.erase(std::unique(stages.begin(), stages.end()), stages.end());

  fs::create_directories(opt.out_dir);
  for (const auto& s : stages) {
    if (s == "simulate") stage_simulate(cfg, opt);
    if (s == "detect") stage_detect(cfg, opt);
    if (s == "measure") stage_measure(cfg, opt);
    if (s == "predict") stage_predict(cfg, opt);
    if (s == "eval") stage_eval(cfg, opt);
    if (s == "bench") stage_bench(cfg, opt);
    if (s == "segment") stage_segment(cfg, opt);
    if (s == "report") stage_report(cfg, opt);
  }

  // Manifest: config snapshot, seed, stage list and artifact checksums.
  cfg.save(opt.out_dir + "/config_snapshot.cfg");
  core::KeyValueRecord manifest;
  manifest.set("tool_version", std::string(kToolVersion));
  manifest.set("seed", cfg.get_int("scene.seed"));
  std::string stage_list;
  for (const auto& s : stages) stage_list += (stage_list.empty() ? "" : " ") + s;
  manifest.set("stages", stage_list);
  manifest.set("config_checksum",
               core::file_checksum(opt.out_dir + "/config_snapshot.cfg"));
  const char* artifacts[] = {"events.csv",      "events.bin",
                             "gaze.csv",        "imu.csv",
                             "gt_trajectory.csv", "detections.csv",
                             "ball_events.csv", "measurements.csv",
                             "prediction.csv",  "impact.txt",
                             "segments.csv"};
  for (const char* name : artifacts) {
    const std::string path = opt.out_dir + "/" + std::string(name);
    if (fs::exists(path)) {
      manifest.set(std::string("checksum.") + name, core::file_checksum(path));
    }
  }
  manifest.save(opt.out_dir + "/manifest.txt");
}

}  // namespace evball::cli

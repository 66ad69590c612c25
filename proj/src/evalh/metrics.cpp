#include "evball/evalh/metrics.hpp"

#include <cmath>
#include <fstream>

#include "evball/core/errors.hpp"
#include "evball/core/io.hpp"

namespace evball::evalh {

void DetectionEval::finalize() {
  n_evaluated = 0;
  n_success = 0;
  std::size_t n_found = 0;
  for (const WindowResult& w : windows) {
    if (!w.evaluated) continue;
    ++n_evaluated;
    if (w.success) ++n_success;
    if (w.found) ++n_found;
  }
  rate = n_evaluated == 0
             ? 0.0
             : static_cast<double>(n_success) / static_cast<double>(n_evaluated);
  (void)n_found;
}

DetectionEval eval_detection(const std::vector<detect::DetectionResult>& dets,
                             const synth::GroundTruth& gt,
                             const synth::SceneConfig& scene, double epsilon) {
  DetectionEval eval;
  eval.epsilon = epsilon;
  double event_sum = 0.0;
  std::size_t event_n = 0;
  for (const detect::DetectionResult& det : dets) {
    DetectionEval::WindowResult w;
    w.t_start_us = det.t_start_us;
    const double t_mid =
        static_cast<double>(det.t_start_us + det.t_end_us) / 2.0 * 1e-6;
    const double t_pose = static_cast<double>(det.t_start_us) * 1e-6;
    // Detected centers live in the frame compensated back to the window
    // start, so the reference projects the mid-window position through the
    // start-of-window camera pose.
    const core::Mat3 r_cw =
        synth::camera_orientation_cw(scene.rotation_profile, t_pose);
    const Vec3 p_cam =
        r_cw * (gt.position_at(t_mid) - scene.camera_translation * t_pose);
    if (p_cam.z() <= 0.1) {
      eval.windows.push_back(w);
      continue;
    }
    Vec2 reproj;
    try {
      reproj = core::project(p_cam, scene.cam);
    } catch (const core::DataError&) {
      eval.windows.push_back(w);
      continue;
    }
    if (!scene.cam.contains(reproj.x(), reproj.y())) {
      eval.windows.push_back(w);
      continue;
    }
    w.evaluated = true;
    w.found = det.found;
    if (det.found) {
      w.error_px = (det.center - reproj).norm();
      w.success = w.error_px < epsilon;
      event_sum += static_cast<double>(det.ball_events.size());
      ++event_n;
    }
    eval.windows.push_back(w);
  }
  eval.mean_ball_events = event_n == 0 ? 0.0 : event_sum / event_n;
  eval.finalize();
  return eval;
}

ImpactEval eval_impact(const std::vector<Vec3>& predicted,
                       const std::vector<Vec3>& ground_truth) {
  if (predicted.size() != ground_truth.size()) {
    throw core::DataError("eval_impact: prediction/gt count mismatch");
  }
  ImpactEval eval;
  double sq_sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const Vec2 d(predicted[i].x() - ground_truth[i].x(),
                 predicted[i].y() - ground_truth[i].y());
    eval.scatter.push_back(d);
    eval.errors.push_back(d.norm());
    sq_sum += d.squaredNorm();
  }
  if (!eval.errors.empty()) {
    eval.rmse = std::sqrt(sq_sum / static_cast<double>(eval.errors.size()));
    double mean = 0.0;
    for (double e : eval.errors) mean += e;
    mean /= static_cast<double>(eval.errors.size());
    double var = 0.0;
    for (double e : eval.errors) var += (e - mean) * (e - mean);
    eval.sigma = std::sqrt(var / static_cast<double>(eval.errors.size()));
  }
  return eval;
}

void write_detection_report_csv(const std::string& path,
                                const DetectionEval& eval) {
  std::ofstream out(path);
  if (!out) throw core::DataError("cannot write " + path);
  out << "t_start_us,evaluated,found,error_px,success\n";
  for (const auto& w : eval.windows) {
    out << w.t_start_us << ',' << (w.evaluated ? 1 : 0) << ','
        << (w.found ? 1 : 0) << ',' << core::format_double(w.error_px) << ','
        << (w.success ? 1 : 0) << '\n';
  }
  out << "# rate = " << core::format_double(eval.rate)
      << ", evaluated = " << eval.n_evaluated
      << ", epsilon = " << core::format_double(eval.epsilon)
      << ", mean_ball_events = " << core::format_double(eval.mean_ball_events)
      << '\n';
}

void write_impact_scatter_csv(const std::string& path, const ImpactEval& eval) {
  std::ofstream out(path);
  if (!out) throw core::DataError("cannot write " + path);
  out << "dx,dy,error\n";
  for (std::size_t i = 0; i < eval.scatter.size(); ++i) {
    out << core::format_double(eval.scatter[i].x()) << ','
        << core::format_double(eval.scatter[i].y()) << ','
        << core::format_double(eval.errors[i]) << '\n';
  }
}

void write_impact_report_csv(const std::string& path,
                             const std::vector<ImpactReportRow>& rows) {
  std::ofstream out(path);
  if (!out) throw core::DataError("cannot write " + path);
  out << "method,update_hz,cell,rmse_m,sigma_m,n\n";
  for (const ImpactReportRow& r : rows) {
    out << r.method << ',' << r.update_hz << ',' << r.cell << ','
        << core::format_double(r.rmse) << ',' << core::format_double(r.sigma)
        << ',' << r.n << '\n';
  }
}

}  // namespace evball::evalh

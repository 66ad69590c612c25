#include "evball/evalh/latency.hpp"

#include <cmath>
#include <fstream>

#include "evball/core/errors.hpp"
#include "evball/core/io.hpp"

namespace evball::evalh {

LatencyReport bench_latency(const std::vector<detect::DetectionResult>& results) {
  if (results.size() < 100) {
    throw core::DataError("bench_latency: needs >= 100 windows");
  }
  LatencyReport rep;
  rep.n_windows = results.size();

  const char* names[3] = {"ego_motion_comp", "thresh_median", "dbscan_filtering"};
  double sums[3] = {0, 0, 0}, sq[3] = {0, 0, 0};
  double total_sum = 0.0, total_sq = 0.0, crop_sum = 0.0, events_sum = 0.0;
  for (const auto& r : results) {
    const double stage_ms[3] = {
        (r.timings.compensate_us + r.timings.image_us) * 1e-3,
        r.timings.threshold_us * 1e-3,
        (r.timings.cluster_us + r.timings.select_us) * 1e-3};
    double total = 0.0;
    for (int i = 0; i < 3; ++i) {
      sums[i] += stage_ms[i];
      sq[i] += stage_ms[i] * stage_ms[i];
      total += stage_ms[i];
    }
    total_sum += total;
    total_sq += total * total;
    crop_sum += r.timings.crop_us * 1e-3;
    events_sum += static_cast<double>(r.n_roi_events);
  }
  const double n = static_cast<double>(results.size());
  for (int i = 0; i < 3; ++i) {
    LatencyReport::StageRow row;
    row.name = names[i];
    row.mean_ms = sums[i] / n;
    row.sigma_ms = std::sqrt(std::max(0.0, sq[i] / n - row.mean_ms * row.mean_ms));
    rep.stages.push_back(row);
  }
  rep.total_mean_ms = total_sum / n;
  rep.total_sigma_ms =
      std::sqrt(std::max(0.0, total_sq / n - rep.total_mean_ms * rep.total_mean_ms));
  for (auto& row : rep.stages) {
    row.share_pct =
        rep.total_mean_ms > 0.0 ? 100.0 * row.mean_ms / rep.total_mean_ms : 0.0;
  }
  rep.crop_mean_ms = crop_sum / n;
  rep.mean_events = events_sum / n;
  return rep;
}

void write_latency_report_csv(const std::string& path,
                              const LatencyReport& report) {
  std::ofstream out(path);
  if (!out) throw core::DataError("cannot write " + path);
  out << "step,mu_ms,sigma_ms,perc\n";
  for (const auto& s : report.stages) {
    out << s.name << ',' << core::format_double(s.mean_ms) << ','
        << core::format_double(s.sigma_ms) << ','
        << core::format_double(s.share_pct) << '\n';
  }
  out << "total," << core::format_double(report.total_mean_ms) << ','
      << core::format_double(report.total_sigma_ms) << ",100\n";
  out << "# crop_mean_ms = " << core::format_double(report.crop_mean_ms)
      << ", mean_events = " << core::format_double(report.mean_events)
      << ", windows = " << report.n_windows << '\n';
}

void write_roi_comparison_csv(const std::string& path, const RoiComparison& cmp) {
  std::ofstream out(path);
  if (!out) throw core::DataError("cannot write " + path);
  out << "method,mu_ms,sigma_ms,events\n";
  const auto row = [&](const char* name, const LatencyReport& r) {
    out << name << ',' << core::format_double(r.total_mean_ms + r.crop_mean_ms)
        << ',' << core::format_double(r.total_sigma_ms) << ','
        << core::format_double(r.mean_events) << '\n';
  };
  row("with_roi", cmp.with_roi);
  row("without_roi", cmp.without_roi);
}

}  // namespace evball::evalh

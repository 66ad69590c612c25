#include "evball/segment/peaks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "evball/core/errors.hpp"
#include "evball/core/io.hpp"

namespace evball::segment {

namespace {

std::vector<Peak> channel_peaks(const std::vector<float>& y, double sample_rate,
                                double min_separation, double threshold_ratio) {
  std::vector<Peak> peaks;
  if (y.size() < 3) return peaks;
  float max_abs = 0.0f;
  for (float v : y) max_abs = std::max(max_abs, std::abs(v));
  if (max_abs <= 0.0f) return peaks;
  const double threshold = threshold_ratio * max_abs;

  std::vector<std::size_t> candidates;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    const double v = std::abs(y[i]);
    if (v <= threshold) continue;  // strict: exactly 1/4 max is excluded
    if (v > std::abs(y[i - 1]) && v >= std::abs(y[i + 1])) {
      candidates.push_back(i);
    }
  }
  // Greedy separation: louder peaks claim their neighborhood first.
  std::sort(candidates.begin(), candidates.end(),
            [&](std::size_t a, std::size_t b) {
              return std::abs(y[a]) > std::abs(y[b]);
            });
  const auto min_gap =
      static_cast<std::size_t>(std::llround(min_separation * sample_rate));
  std::vector<std::size_t> accepted;
  for (std::size_t c : candidates) {
    bool ok = true;
    for (std::size_t a : accepted) {
      if ((c > a ? c - a : a - c) < min_gap) {
        ok = false;
        break;
      }
    }
    if (ok) accepted.push_back(c);
  }
  std::sort(accepted.begin(), accepted.end());
  for (std::size_t i : accepted) {
    peaks.push_back({static_cast<double>(i) / sample_rate, std::abs(y[i])});
  }
  return peaks;
}

}  // namespace

std::vector<Peak> find_peaks(const AudioTrack& track, double min_separation,
                             double threshold_ratio) {
  if (track.channels.empty() || track.frames() == 0) {
    throw core::DataError("find_peaks: empty track");
  }
  std::vector<std::vector<Peak>> per_channel;
  for (const auto& ch : track.channels) {
    per_channel.push_back(
        channel_peaks(ch, track.sample_rate, min_separation, threshold_ratio));
  }
  if (per_channel.size() == 1) return per_channel.front();

  // Merge across channels: cluster peaks closer than half the separation
  // and keep clusters seen by a majority of channels.
  struct Tagged {
    Peak peak;
    std::size_t channel;
  };
  std::vector<Tagged> all;
  for (std::size_t c = 0; c < per_channel.size(); ++c) {
    for (const Peak& p : per_channel[c]) all.push_back({p, c});
  }
  std::sort(all.begin(), all.end(), [](const Tagged& a, const Tagged& b) {
    return a.peak.t < b.peak.t;
  });
  const double merge_window = min_separation / 2.0;
  const std::size_t majority = per_channel.size() / 2 + 1;

  std::vector<Peak> merged;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i + 1;
    while (j < all.size() && all[j].peak.t - all[j - 1].peak.t < merge_window) {
      ++j;
    }
    std::vector<bool> seen(per_channel.size(), false);
    double t_sum = 0.0, amp = 0.0;
    for (std::size_t k = i; k < j; ++k) {
      seen[all[k].channel] = true;
      t_sum += all[k].peak.t;
      amp = std::max(amp, all[k].peak.amplitude);
    }
    const auto votes = static_cast<std::size_t>(
        std::count(seen.begin(), seen.end(), true));
    if (votes >= majority) {
      merged.push_back({t_sum / static_cast<double>(j - i), amp});
    }
    i = j;
  }
  return merged;
}

std::vector<double> segment_rallies(const std::vector<Peak>& peaks,
                                    const RallyParams& params,
                                    std::vector<std::string>* warnings) {
  std::vector<Peak> train = peaks;
  double offset = 0.0;
  if (params.reference_peak >= 0.0) {
    offset = params.reference_peak;
    train.erase(std::remove_if(train.begin(), train.end(),
                               [&](const Peak& p) {
                                 return p.t < params.reference_peak - 1e-9;
                               }),
                train.end());
  }

  std::vector<std::vector<Peak>> cycles;
  for (const Peak& p : train) {
    const bool rise = !cycles.empty() && !cycles.back().empty() &&
                      p.amplitude > params.rise_factor *
                                        cycles.back().back().amplitude;
    if (cycles.empty() || rise) {
      cycles.emplace_back();
    }
    cycles.back().push_back(p);
  }

  std::vector<double> starts;
  for (std::size_t c = 0; c < cycles.size(); ++c) {
    if (static_cast<int>(cycles[c].size()) != params.cycle_len) {
      if (warnings) {
        warnings->push_back("cycle " + std::to_string(c) + " has " +
                            std::to_string(cycles[c].size()) +
                            " peaks, expected " +
                            std::to_string(params.cycle_len) + "; skipped");
      }
      continue;
    }
    const auto quietest = std::min_element(
        cycles[c].begin(), cycles[c].end(),
        [](const Peak& a, const Peak& b) { return a.amplitude < b.amplitude; });
    starts.push_back(quietest->t - offset);
  }
  return starts;
}

void write_segments_csv(const std::string& path,
                        const std::vector<double>& starts) {
  std::ofstream out(path);
  if (!out) throw core::DataError("cannot write " + path);
  out << "t_s\n";
  for (double t : starts) out << core::format_double(t) << '\n';
}

}  // namespace evball::segment

#pragma once

#include <string>
#include <vector>

#include "evball/segment/wav.hpp"

namespace evball::segment {

struct Peak {
  double t = 0.0;          // s
  double amplitude = 0.0;  // |y| at the peak
};

/// Local maxima of |y| above threshold_ratio * max|y| (strict), at least
/// min_separation seconds apart (greedy by amplitude). Channels are merged
/// by temporal clustering with a majority vote across channels.
std::vector<Peak> find_peaks(const AudioTrack& track, double min_separation,
                             double threshold_ratio = 0.25);

struct RallyParams {
  int cycle_len = 4;          // user hit, bounce, bounce, opponent hit
  double rise_factor = 1.5;   // amplitude jump that starts a new cycle
  double reference_peak = -1.0;  // s; >= 0 anchors and offsets the output
};

/// Splits the peak train into cycles at sharp amplitude rises and returns
/// the opponent-hit timestamps (the quietest peak of each complete cycle).
/// Incomplete cycles are skipped with a warning.
std::vector<double> segment_rallies(const std::vector<Peak>& peaks,
                                    const RallyParams& params,
                                    std::vector<std::string>* warnings = nullptr);

void write_segments_csv(const std::string& path,
                        const std::vector<double>& starts);

}  // namespace evball::segment

#pragma once

#include <vector>

#include "evball/segment/wav.hpp"

namespace evball::segment {

/// One digital biquad (direct form II transposed), b normalized by a0.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

/// Butterworth high-pass as second-order sections via the bilinear
/// transform with frequency prewarping.
std::vector<Biquad> design_butterworth_highpass(double cutoff_hz,
                                                double sample_rate, int order);

/// Magnitude response of a section cascade at frequency hz.
double cascade_magnitude(const std::vector<Biquad>& sections, double hz,
                         double sample_rate);

/// Zero-phase (forward-backward) high-pass with reflected-edge padding.
/// Throws DataError unless 0 < cutoff < sample_rate / 2.
AudioTrack highpass_filter(const AudioTrack& track, double cutoff_hz, int order);

}  // namespace evball::segment

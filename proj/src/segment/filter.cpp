#include "evball/segment/filter.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "evball/core/errors.hpp"

namespace evball::segment {

namespace {

std::vector<float> run_biquads_forward(const std::vector<Biquad>& sections,
                                       std::vector<float> x) {
  if (x.empty()) return x;
  double dc_in = x.front();
  for (const Biquad& s : sections) {
    // Start each section in the steady state of its first sample so a
    // constant head produces no startup transient.
    const double gain_dc = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    const double y_dc = gain_dc * dc_in;
    double z1 = y_dc - s.b0 * dc_in;
    double z2 = s.b2 * dc_in - s.a2 * y_dc;
    for (float& v : x) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = static_cast<float>(out);
    }
    dc_in = y_dc;
  }
  return x;
}

}  // namespace

std::vector<Biquad> design_butterworth_highpass(double cutoff_hz,
                                                double sample_rate, int order) {
  if (order < 1) throw core::DataError("butterworth: order must be >= 1");
  if (!(cutoff_hz > 0.0 && cutoff_hz < sample_rate / 2.0)) {
    throw core::DataError("butterworth: cutoff must be in (0, fs/2)");
  }
  // Prewarped analog cutoff folded into w = tan(pi * fc / fs); the analog
  // prototype pole pair (s^2 + a1 s + 1) maps through s -> wc/s and the
  // bilinear transform to the digital coefficients below.
  const double w = std::tan(M_PI * cutoff_hz / sample_rate);
  std::vector<Biquad> sections;

  const int pairs = order / 2;
  for (int k = 0; k < pairs; ++k) {
    const double theta = M_PI * (2.0 * k + 1.0) / (2.0 * order) + M_PI / 2.0;
    const double a1_analog = -2.0 * std::cos(theta);  // > 0
    const double d0 = 1.0 + a1_analog * w + w * w;
    Biquad s;
    s.b0 = 1.0 / d0;
    s.b1 = -2.0 / d0;
    s.b2 = 1.0 / d0;
    s.a1 = (2.0 * w * w - 2.0) / d0;
    s.a2 = (1.0 - a1_analog * w + w * w) / d0;
    sections.push_back(s);
  }
  if (order % 2 == 1) {
    const double d0 = 1.0 + w;
    Biquad s;
    s.b0 = 1.0 / d0;
    s.b1 = -1.0 / d0;
    s.b2 = 0.0;
    s.a1 = (w - 1.0) / d0;
    s.a2 = 0.0;
    sections.push_back(s);
  }
  return sections;
}

double cascade_magnitude(const std::vector<Biquad>& sections, double hz,
                         double sample_rate) {
  const std::complex<double> z =
      std::polar(1.0, -2.0 * M_PI * hz / sample_rate);
  std::complex<double> h(1.0, 0.0);
  for (const Biquad& s : sections) {
    h *= (s.b0 + s.b1 * z + s.b2 * z * z) / (1.0 + s.a1 * z + s.a2 * z * z);
  }
  return std::abs(h);
}

AudioTrack highpass_filter(const AudioTrack& track, double cutoff_hz,
                           int order) {
  const auto sections =
      design_butterworth_highpass(cutoff_hz, track.sample_rate, order);
  AudioTrack out;
  out.sample_rate = track.sample_rate;
  out.channels.reserve(track.channels.size());

  const std::size_t pad = static_cast<std::size_t>(
      std::max(6.0 * order + 6.0, 3.0 * track.sample_rate / cutoff_hz));
  for (const auto& ch : track.channels) {
    if (ch.size() < 2) {
      out.channels.push_back(ch);
      continue;
    }
    const std::size_t p = std::min(pad, ch.size() - 1);
    // Odd reflection on both ends keeps the zero-phase pass free of edge
    // transients.
    std::vector<float> padded;
    padded.reserve(ch.size() + 2 * p);
    for (std::size_t i = p; i >= 1; --i) {
      padded.push_back(2.0f * ch.front() - ch[i]);
    }
    padded.insert(padded.end(), ch.begin(), ch.end());
    for (std::size_t i = 2; i <= p + 1; ++i) {
      padded.push_back(2.0f * ch.back() - ch[ch.size() - i]);
    }

    std::vector<float> y = run_biquads_forward(sections, std::move(padded));
    std::reverse(y.begin(), y.end());
    y = run_biquads_forward(sections, std::move(y));
    std::reverse(y.begin(), y.end());

    out.channels.emplace_back(y.begin() + p, y.begin() + p + ch.size());
  }
  return out;
}

}  // namespace evball::segment

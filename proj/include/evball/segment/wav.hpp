#pragma once

#include <string>
#include <vector>

namespace evball::segment {

/// PCM audio, one float vector per channel.
struct AudioTrack {
  std::vector<std::vector<float>> channels;
  double sample_rate = 48000.0;

  std::size_t frames() const {
    return channels.empty() ? 0 : channels.front().size();
  }
};

/// Reads 16-bit PCM or 32-bit float WAV, mono or multi-channel.
AudioTrack read_wav(const std::string& path);

/// Writes 32-bit float WAV.
void write_wav(const std::string& path, const AudioTrack& track);

}  // namespace evball::segment

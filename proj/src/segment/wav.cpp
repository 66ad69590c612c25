#include "evball/segment/wav.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "evball/core/errors.hpp"

namespace evball::segment {

namespace {

std::uint32_t rd_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (p[1] << 8) | (p[2] << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t rd_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void wr_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<char*>(b), 4);
}
void wr_u16(std::ofstream& out, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff)};
  out.write(reinterpret_cast<char*>(b), 2);
}

}  // namespace

AudioTrack read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw core::DataError("cannot open wav: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw core::DataError("not a RIFF/WAVE file: " + path);
  }

  std::uint16_t format = 0, n_channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  std::size_t data_off = 0, data_len = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t chunk_len = rd_u32(bytes.data() + pos + 4);
    if (std::memcmp(bytes.data() + pos, "fmt ", 4) == 0) {
      if (pos + 8 + 16 > bytes.size()) break;
      const unsigned char* f = bytes.data() + pos + 8;
      format = rd_u16(f);
      n_channels = rd_u16(f + 2);
      sample_rate = rd_u32(f + 4);
      bits = rd_u16(f + 14);
    } else if (std::memcmp(bytes.data() + pos, "data", 4) == 0) {
      data_off = pos + 8;
      data_len = std::min<std::size_t>(chunk_len, bytes.size() - data_off);
    }
    pos += 8 + chunk_len + (chunk_len & 1);
  }
  if (n_channels == 0 || sample_rate == 0 || data_off == 0) {
    throw core::DataError("malformed wav: " + path);
  }

  AudioTrack track;
  track.sample_rate = sample_rate;
  track.channels.resize(n_channels);
  if (format == 1 && bits == 16) {
    const std::size_t frames = data_len / (2 * n_channels);
    for (auto& ch : track.channels) ch.resize(frames);
    const unsigned char* d = bytes.data() + data_off;
    for (std::size_t i = 0; i < frames; ++i) {
      for (std::uint16_t c = 0; c < n_channels; ++c) {
        const auto raw = static_cast<std::int16_t>(rd_u16(d));
        track.channels[c][i] = static_cast<float>(raw) / 32768.0f;
        d += 2;
      }
    }
  } else if (format == 3 && bits == 32) {
    const std::size_t frames = data_len / (4 * n_channels);
    for (auto& ch : track.channels) ch.resize(frames);
    const unsigned char* d = bytes.data() + data_off;
    for (std::size_t i = 0; i < frames; ++i) {
      for (std::uint16_t c = 0; c < n_channels; ++c) {
        float v;
        std::uint32_t u = rd_u32(d);
        std::memcpy(&v, &u, 4);
        track.channels[c][i] = v;
        d += 4;
      }
    }
  } else {
    throw core::DataError("unsupported wav encoding (want pcm16 or float32): " +
                          path);
  }
  return track;
}

void write_wav(const std::string& path, const AudioTrack& track) {
  if (track.channels.empty()) throw core::DataError("write_wav: no channels");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw core::DataError("cannot write wav: " + path);
  const auto n_channels = static_cast<std::uint16_t>(track.channels.size());
  const auto frames = static_cast<std::uint32_t>(track.frames());
  const std::uint32_t data_len = frames * n_channels * 4;
  const auto rate = static_cast<std::uint32_t>(track.sample_rate);

  out.write("RIFF", 4);
  wr_u32(out, 36 + data_len);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  wr_u32(out, 16);
  wr_u16(out, 3);  // IEEE float
  wr_u16(out, n_channels);
  wr_u32(out, rate);
  wr_u32(out, rate * n_channels * 4);
  wr_u16(out, n_channels * 4);
  wr_u16(out, 32);
  out.write("data", 4);
  wr_u32(out, data_len);
  for (std::uint32_t i = 0; i < frames; ++i) {
    for (std::uint16_t c = 0; c < n_channels; ++c) {
      const float v = track.channels[c][i];
      std::uint32_t u;
      std::memcpy(&u, &v, 4);
      wr_u32(out, u);
    }
  }
}

}  // namespace evball::segment

#include "modkalm/wav.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

namespace modkalm {
namespace {

std::uint32_t Le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t Le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
void Put32(std::ofstream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                              static_cast<char>((v >> 16) & 0xff),
                              static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), 4);
}
void Put16(std::ofstream& out, std::uint16_t v) {
  const std::array<char, 2> b{static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  out.write(b.data(), 2);
}

}  // namespace

WavData ReadWav(const std::filesystem::path& path, std::optional<int> expected_rate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WavError("cannot open " + path.string());
  const std::string name = path.string();

  unsigned char riff[12];
  if (!in.read(reinterpret_cast<char*>(riff), 12) || std::memcmp(riff, "RIFF", 4) != 0 ||
      std::memcmp(riff + 8, "WAVE", 4) != 0) {
    throw WavError(name + ": not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  int channels = 0, bits = 0, format = 0;
  WavData result;
  while (true) {
    unsigned char head[8];
    if (!in.read(reinterpret_cast<char*>(head), 8)) break;
    const std::uint32_t size = Le32(head + 4);
    if (std::memcmp(head, "fmt ", 4) == 0) {
      if (size < 16) throw WavError(name + ": truncated fmt chunk");
      std::vector<unsigned char> fmt(size);
      if (!in.read(reinterpret_cast<char*>(fmt.data()), size)) {
        throw WavError(name + ": truncated fmt chunk");
      }
      format = Le16(fmt.data());
      channels = Le16(fmt.data() + 2);
      result.sample_rate = static_cast<int>(Le32(fmt.data() + 4));
      bits = Le16(fmt.data() + 14);
      // WAVE_FORMAT_EXTENSIBLE carries the real format tag in the sub-format GUID.
      if (format == 0xFFFE && size >= 26) format = Le16(fmt.data() + 24);
      have_fmt = true;
    } else if (std::memcmp(head, "data", 4) == 0) {
      if (!have_fmt) throw WavError(name + ": data chunk before fmt chunk");
      if (channels != 1) {
        throw WavError(name + ": mono required (file has " + std::to_string(channels) +
                       " channels)");
      }
      if (format != 1 || bits != 16) {
        throw WavError(name + ": unsupported encoding (16-bit PCM required)");
      }
      std::vector<unsigned char> raw(size);
      in.read(reinterpret_cast<char*>(raw.data()), size);
      const std::size_t got = static_cast<std::size_t>(in.gcount()) / 2;
      result.samples.resize(got);
      for (std::size_t i = 0; i < got; ++i) {
        const auto v = static_cast<std::int16_t>(Le16(raw.data() + 2 * i));
        result.samples[i] = v / 32768.0;
      }
      if (expected_rate && *expected_rate != result.sample_rate) {
        throw WavError(name + ": sample rate mismatch (file " +
                       std::to_string(result.sample_rate) + " Hz, expected " +
                       std::to_string(*expected_rate) + " Hz)");
      }
      return result;
    } else {
      in.seekg(size + (size & 1u), std::ios::cur);
    }
  }
  throw WavError(name + ": no data chunk");
}

std::size_t WriteWav(const std::filesystem::path& path, std::span<const double> samples,
                     int sample_rate) {
  if (sample_rate <= 0) throw WavError("WriteWav: sample rate must be positive");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw WavError("cannot create " + path.string());
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  out.write("RIFF", 4);
  Put32(out, 36 + data_bytes);
  out.write("WAVEfmt ", 8);
  Put32(out, 16);
  Put16(out, 1);
  Put16(out, 1);
  Put32(out, static_cast<std::uint32_t>(sample_rate));
  Put32(out, static_cast<std::uint32_t>(sample_rate) * 2);
  Put16(out, 2);
  Put16(out, 16);
  out.write("data", 4);
  Put32(out, data_bytes);

  std::size_t saturated = 0;
  for (double s : samples) {
    double scaled = std::nearbyint(s * 32768.0);
    if (!(scaled <= 32767.0)) {
      scaled = std::isnan(scaled) ? 0.0 : 32767.0;
      ++saturated;
    } else if (scaled < -32768.0) {
      scaled = -32768.0;
      ++saturated;
    }
    Put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
  }
  if (!out) throw WavError("write failed for " + path.string());
  return saturated;
}

}  // namespace modkalm

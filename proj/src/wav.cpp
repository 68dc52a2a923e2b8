#include "farsep/wav.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "farsep/error.hpp"

namespace farsep {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

}  // namespace

WavData read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto bad = [&](const std::string& why) { fail(ErrorCode::Format, path.string() + ": " + why); };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    bad("not a RIFF/WAVE file");
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::size_t len = u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + len > bytes.size()) {
      if (std::memcmp(chunk, "data", 4) == 0) {
        data = bytes.data() + body;  // tolerate truncated data chunk
        data_len = bytes.size() - body;
      }
      break;
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (len < 16) bad("short fmt chunk");
      format = u16(chunk + 8);
      channels = u16(chunk + 10);
      rate = u32(chunk + 12);
      bits = u16(chunk + 22);
      if (format == kFormatExtensible && len >= 40) format = u16(chunk + 8 + 24);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = len;
    }
    pos = body + len + (len & 1);
  }
  if (channels == 0 || rate == 0) bad("missing fmt chunk");
  if (!data) bad("missing data chunk");

  const bool is_float = format == kFormatFloat && bits == 32;
  const bool is_pcm = format == kFormatPcm && (bits == 16 || bits == 24);
  if (!is_float && !is_pcm) bad("unsupported sample format (need PCM16, PCM24 or float32)");
  const std::size_t width = bits / 8;
  const std::size_t frames = data_len / (width * channels);

  WavData out;
  out.sample_rate = rate;
  out.channels.assign(channels, Signal(frames));
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* p = data + (t * channels + c) * width;
      double v = 0.0;
      if (is_float) {
        float f;
        std::uint32_t raw = u32(p);
        std::memcpy(&f, &raw, 4);
        v = f;
      } else if (bits == 16) {
        v = static_cast<std::int16_t>(u16(p)) / 32768.0;
      } else {
        std::int32_t s = static_cast<std::int32_t>(p[0] | (p[1] << 8) | (p[2] << 16));
        if (s & 0x800000) s -= 0x1000000;
        v = s / 8388608.0;
      }
      out.channels[c][t] = v;
    }
  }
  return out;
}

void write_wav(const std::filesystem::path& path, const MultiSignal& channels, double sample_rate) {
  if (channels.empty()) fail(ErrorCode::Shape, "write_wav: no channels");
  const std::size_t frames = channels.front().size();
  for (const auto& ch : channels) {
    if (ch.size() != frames) fail(ErrorCode::Shape, "write_wav: channels differ in length");
  }
  const auto nch = static_cast<std::uint16_t>(channels.size());
  const auto rate = static_cast<std::uint32_t>(sample_rate);
  const std::uint32_t data_len = static_cast<std::uint32_t>(frames * nch * 4);

  std::string out;
  out.reserve(58 + data_len);
  out += "RIFF";
  put_u32(out, 4 + (8 + 18) + (8 + 4) + (8 + data_len));
  out += "WAVE";
  out += "fmt ";
  put_u32(out, 18);
  put_u16(out, kFormatFloat);
  put_u16(out, nch);
  put_u32(out, rate);
  put_u32(out, rate * nch * 4);
  put_u16(out, static_cast<std::uint16_t>(nch * 4));
  put_u16(out, 32);
  put_u16(out, 0);  // cbSize
  out += "fact";
  put_u32(out, 4);
  put_u32(out, static_cast<std::uint32_t>(frames));
  out += "data";
  put_u32(out, data_len);
  for (std::size_t t = 0; t < frames; ++t) {
    for (const auto& ch : channels) {
      const float f = static_cast<float>(ch[t]);
      std::uint32_t raw;
      std::memcpy(&raw, &f, 4);
      put_u32(out, raw);
    }
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) fail(ErrorCode::Io, "cannot write " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) fail(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace farsep

#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "farsep/error.hpp"
#include "farsep/wav.hpp"

using namespace farsep;
namespace fs = std::filesystem;

namespace {

fs::path tmp(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "farsep_test_wav";
  fs::create_directories(dir);
  return dir / name;
}

void put16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>(v >> 8));
}
void put32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

// Canonical RIFF file with the given fmt body and raw sample bytes.
std::string riff(const std::string& fmt, const std::string& data, bool with_list = false) {
  std::string body = "WAVE";
  body += "fmt ";
  put32(body, static_cast<std::uint32_t>(fmt.size()));
  body += fmt;
  if (with_list) {
    body += "LIST";
    put32(body, 3);
    body += "abc";
    body.push_back('\0');  // pad byte
  }
  body += "data";
  put32(body, static_cast<std::uint32_t>(data.size()));
  body += data;
  std::string out = "RIFF";
  put32(out, static_cast<std::uint32_t>(body.size()));
  return out + body;
}

std::string pcm_fmt(std::uint16_t tag, std::uint16_t channels, std::uint32_t rate, std::uint16_t bits) {
  std::string f;
  put16(f, tag);
  put16(f, channels);
  put32(f, rate);
  put32(f, rate * channels * bits / 8);
  put16(f, static_cast<std::uint16_t>(channels * bits / 8));
  put16(f, bits);
  return f;
}

void write_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("float32 round trip is exact for float-representable samples") {
  MultiSignal x = {{0.0, 0.5, -0.25, 1.0, -1.0, 0.125}, {1e-3f, -2e-3f, 0.0, 0.75, 0.3f, -0.3f}};
  const auto p = tmp("rt.wav");
  write_wav(p, x, 16000.0);
  const auto w = read_wav(p);
  CHECK(w.sample_rate == 16000.0);
  REQUIRE(w.channels.size() == 2);
  CHECK(w.channels == x);
}

TEST_CASE("writes are byte-deterministic") {
  MultiSignal x = {{0.1, 0.2, 0.3}};
  write_wav(tmp("a.wav"), x, 16000.0);
  write_wav(tmp("b.wav"), x, 16000.0);
  CHECK(read_bytes(tmp("a.wav")) == read_bytes(tmp("b.wav")));
}

TEST_CASE("PCM16 stereo") {
  std::string data;
  for (std::int16_t v : {std::int16_t(16384), std::int16_t(-32768), std::int16_t(1), std::int16_t(32767)}) put16(data, static_cast<std::uint16_t>(v));
  write_bytes(tmp("p16.wav"), riff(pcm_fmt(1, 2, 8000, 16), data, true));
  const auto w = read_wav(tmp("p16.wav"));
  CHECK(w.sample_rate == 8000.0);
  REQUIRE(w.channels.size() == 2);
  CHECK(w.channels[0] == std::vector<double>{0.5, 1.0 / 32768.0});
  CHECK(w.channels[1] == std::vector<double>{-1.0, 32767.0 / 32768.0});
}

TEST_CASE("PCM24 in an extensible header") {
  std::string fmt = pcm_fmt(0xFFFE, 1, 16000, 24);
  put16(fmt, 22);
  put16(fmt, 24);
  put32(fmt, 4);
  put16(fmt, 1);  // KSDATAFORMAT_SUBTYPE_PCM
  fmt += std::string("\x00\x00\x00\x00\x10\x00\x80\x00\x00\xAA\x00\x38\x9B\x71", 14);
  std::string data;
  for (std::int32_t v : {0x400000, -0x800000, -1}) {
    for (int i = 0; i < 3; ++i) data.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  write_bytes(tmp("p24.wav"), riff(fmt, data));
  const auto w = read_wav(tmp("p24.wav"));
  REQUIRE(w.channels.size() == 1);
  CHECK(w.channels[0] == std::vector<double>{0.5, -1.0, -1.0 / 8388608.0});
}

TEST_CASE("bad files") {
  try {
    read_wav(tmp("does_not_exist.wav"));
    FAIL("expected Io");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
  }
  write_bytes(tmp("junk.wav"), "not a wave file at all");
  try {
    read_wav(tmp("junk.wav"));
    FAIL("expected Format");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Format);
  }
  std::string data(4, '\0');
  write_bytes(tmp("p8.wav"), riff(pcm_fmt(1, 1, 16000, 8), data));
  CHECK_THROWS_AS(read_wav(tmp("p8.wav")), Error);
  CHECK_THROWS_AS(write_wav(tmp("x.wav"), MultiSignal{{1.0}, {1.0, 2.0}}, 16000.0), Error);
}

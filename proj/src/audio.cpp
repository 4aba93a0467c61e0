#include "sqi/audio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "sqi/error.hpp"

namespace sqi {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes a little-endian host");

std::uint16_t read_u16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

}  // namespace

AudioBuffer::AudioBuffer(std::vector<double> samples, int sample_rate_hz)
    : samples_(std::move(samples)), sample_rate_hz_(sample_rate_hz) {
  if (sample_rate_hz_ <= 0) throw InvalidArgument("AudioBuffer: sample rate must be positive");
  if (samples_.empty()) throw InvalidArgument("AudioBuffer: no samples");
  if (!std::all_of(samples_.begin(), samples_.end(), [](double v) { return std::isfinite(v); })) {
    throw InvalidArgument("AudioBuffer: non-finite sample");
  }
}

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open WAV file: " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = " (" + path.string() + ")";

  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError("not a RIFF/WAVE file" + where);
  }

  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t bits = 0;
  bool have_fmt = false;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      // Some writers leave a bogus size on the trailing data chunk.
      if (std::memcmp(chunk, "data", 4) != 0) throw FormatError("truncated chunk" + where);
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError("fmt chunk too short" + where);
      format = read_u16(chunk + 8);
      channels = read_u16(chunk + 10);
      rate = read_u32(chunk + 12);
      bits = read_u16(chunk + 22);
      if (format == kFormatExtensible) {
        if (size < 40) throw FormatError("extensible fmt chunk too short" + where);
        format = read_u16(chunk + 8 + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = std::min<std::size_t>(size, bytes.size() - body);
      break;
    }
    pos = body + size + (size & 1U);
  }

  if (!have_fmt) throw FormatError("missing fmt chunk" + where);
  if (data == nullptr) throw FormatError("missing data chunk" + where);
  if (channels != 1) throw FormatError("unsupported channel count " + std::to_string(channels) + where);
  if (rate == 0) throw FormatError("zero sample rate" + where);

  std::vector<double> samples;
  if (format == kFormatPcm && bits == 16) {
    const std::size_t n = data_size / 2;
    samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = static_cast<std::int16_t>(read_u16(data + 2 * i));
      samples[i] = static_cast<double>(v) / 32768.0;
    }
  } else if (format == kFormatFloat && bits == 32) {
    const std::size_t n = data_size / 4;
    samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      float f;
      std::memcpy(&f, data + 4 * i, 4);
      samples[i] = static_cast<double>(f);
    }
  } else {
    throw FormatError("unsupported encoding (format " + std::to_string(format) + ", " + std::to_string(bits) +
                      " bits)" + where);
  }
  if (samples.empty()) throw FormatError("empty data chunk" + where);
  try {
    return AudioBuffer(std::move(samples), static_cast<int>(rate));
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string(e.what()) + where);
  }
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio, WavEncoding encoding) {
  const auto samples = audio.samples();
  const std::uint16_t bits = encoding == WavEncoding::pcm16 ? 16 : 32;
  const std::uint16_t block = bits / 8;
  const auto data_size = static_cast<std::uint32_t>(samples.size() * block);

  std::string out;
  out.reserve(44 + data_size);
  out.append("RIFF");
  put_u32(out, 36 + data_size);
  out.append("WAVE");
  out.append("fmt ");
  put_u32(out, 16);
  put_u16(out, encoding == WavEncoding::pcm16 ? kFormatPcm : kFormatFloat);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(audio.sample_rate_hz()));
  put_u32(out, static_cast<std::uint32_t>(audio.sample_rate_hz()) * block);
  put_u16(out, block);
  put_u16(out, bits);
  out.append("data");
  put_u32(out, data_size);
  for (double s : samples) {
    if (encoding == WavEncoding::pcm16) {
      const double scaled = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
      put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
    } else {
      const auto f = static_cast<float>(s);
      char raw[4];
      std::memcpy(raw, &f, 4);
      out.append(raw, 4);
    }
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot create WAV file: " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw IoError("failed writing WAV file: " + path.string());
}

}  // namespace sqi

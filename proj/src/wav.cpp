#include "spatialsep/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

namespace spatialsep::wav {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes a little-endian host");

template <typename T>
T load(const std::vector<char>& bytes, std::size_t offset)
{
    if (offset + sizeof(T) > bytes.size()) {
        throw ConfigError("truncated WAV file");
    }
    T value;
    std::memcpy(&value, bytes.data() + offset, sizeof(T));
    return value;
}

template <typename T>
void store(std::ostream& out, T value)
{
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

} // namespace

WavData read(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open WAV file: " + path.string());
    }
    const std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0
        || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw ConfigError("not a RIFF/WAVE file: " + path.string());
    }

    std::uint16_t format = 0;
    std::uint16_t channels = 0;
    std::uint32_t sample_rate = 0;
    std::uint16_t bits = 0;
    std::size_t data_offset = 0;
    std::size_t data_size = 0;
    bool have_fmt = false;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const auto size = load<std::uint32_t>(bytes, pos + 4);
        const std::size_t body = pos + 8;
        if (std::memcmp(bytes.data() + pos, "fmt ", 4) == 0) {
            format = load<std::uint16_t>(bytes, body);
            channels = load<std::uint16_t>(bytes, body + 2);
            sample_rate = load<std::uint32_t>(bytes, body + 4);
            bits = load<std::uint16_t>(bytes, body + 14);
            if (format == kFormatExtensible) {
                // First two bytes of the subformat GUID carry the real tag.
                format = load<std::uint16_t>(bytes, body + 24);
            }
            have_fmt = true;
        } else if (std::memcmp(bytes.data() + pos, "data", 4) == 0) {
            data_offset = body;
            data_size = std::min<std::size_t>(size, bytes.size() - body);
        }
        pos = body + size + (size & 1u);
    }
    if (!have_fmt || data_offset == 0) {
        throw ConfigError("WAV file lacks fmt or data chunk: " + path.string());
    }
    if (channels == 0 || sample_rate == 0) {
        throw ConfigError("WAV header has zero channels or sample rate");
    }

    WavData out;
    out.sample_rate = static_cast<int>(sample_rate);
    std::size_t bytes_per_sample = 0;
    if (format == kFormatPcm && bits == 16) {
        out.format = SampleFormat::Pcm16;
        bytes_per_sample = 2;
    } else if (format == kFormatFloat && bits == 32) {
        out.format = SampleFormat::Float32;
        bytes_per_sample = 4;
    } else {
        throw ConfigError("unsupported WAV encoding (need 16-bit PCM or 32-bit float)");
    }

    const std::size_t frames = data_size / (bytes_per_sample * channels);
    out.channels.assign(channels, Vector(static_cast<Eigen::Index>(frames)));
    for (std::size_t i = 0; i < frames; ++i) {
        for (std::size_t c = 0; c < channels; ++c) {
            const std::size_t at = data_offset + (i * channels + c) * bytes_per_sample;
            double v = 0.0;
            if (out.format == SampleFormat::Pcm16) {
                v = load<std::int16_t>(bytes, at) / 32768.0;
            } else {
                v = load<float>(bytes, at);
            }
            out.channels[c][static_cast<Eigen::Index>(i)] = v;
        }
    }
    return out;
}

void write(const std::filesystem::path& path, const std::vector<Vector>& channels,
           int sample_rate, SampleFormat format)
{
    if (channels.empty()) {
        throw ConfigError("cannot write WAV with no channels");
    }
    const Eigen::Index frames = channels.front().size();
    for (const auto& ch : channels) {
        if (ch.size() != frames) {
            throw ConfigError("WAV channels differ in length");
        }
    }

    const std::uint16_t num_channels = static_cast<std::uint16_t>(channels.size());
    const std::uint16_t bits = format == SampleFormat::Pcm16 ? 16 : 32;
    const std::uint16_t block_align = num_channels * bits / 8;
    const std::uint32_t data_size = static_cast<std::uint32_t>(frames) * block_align;

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ConfigError("cannot write WAV file: " + path.string());
    }
    out.write("RIFF", 4);
    store<std::uint32_t>(out, 36 + data_size);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    store<std::uint32_t>(out, 16);
    store<std::uint16_t>(out, format == SampleFormat::Pcm16 ? kFormatPcm : kFormatFloat);
    store<std::uint16_t>(out, num_channels);
    store<std::uint32_t>(out, static_cast<std::uint32_t>(sample_rate));
    store<std::uint32_t>(out, static_cast<std::uint32_t>(sample_rate) * block_align);
    store<std::uint16_t>(out, block_align);
    store<std::uint16_t>(out, bits);
    out.write("data", 4);
    store<std::uint32_t>(out, data_size);

    for (Eigen::Index i = 0; i < frames; ++i) {
        for (const auto& ch : channels) {
            if (format == SampleFormat::Pcm16) {
                const long q = std::clamp(std::lround(ch[i] * 32768.0), -32768L, 32767L);
                store<std::int16_t>(out, static_cast<std::int16_t>(q));
            } else {
                store<float>(out, static_cast<float>(ch[i]));
            }
        }
    }
    if (!out) {
        throw ConfigError("failed writing WAV file: " + path.string());
    }
}

MonoSignal read_mono(const std::filesystem::path& path)
{
    WavData data = read(path);
    if (data.channels.size() != 1) {
        throw ConfigError("expected a mono WAV file: " + path.string());
    }
    return {std::move(data.channels[0]), data.sample_rate};
}

StereoSignal read_stereo(const std::filesystem::path& path)
{
    WavData data = read(path);
    if (data.channels.size() != 2) {
        throw ConfigError("expected a stereo WAV file: " + path.string());
    }
    return {std::move(data.channels[0]), std::move(data.channels[1]), data.sample_rate};
}

void write_mono(const std::filesystem::path& path, const MonoSignal& signal, SampleFormat format)
{
    write(path, {signal.samples}, signal.sample_rate, format);
}

void write_stereo(const std::filesystem::path& path, const StereoSignal& signal, SampleFormat format)
{
    write(path, {signal.left, signal.right}, signal.sample_rate, format);
}

} // namespace spatialsep::wav

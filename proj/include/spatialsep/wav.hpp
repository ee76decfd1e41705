#pragma once

#include <filesystem>
#include <vector>

#include "spatialsep/signal.hpp"

namespace spatialsep::wav {

enum class SampleFormat { Pcm16, Float32 };

struct WavData {
    std::vector<Vector> channels;
    int sample_rate = kDefaultSampleRate;
    SampleFormat format = SampleFormat::Float32;
};

/// Reads RIFF/WAVE with 16-bit integer PCM or 32-bit IEEE float samples
/// (plain or WAVE_FORMAT_EXTENSIBLE headers). Channels are de-interleaved.
WavData read(const std::filesystem::path& path);

/// Writes interleaved RIFF/WAVE. 16-bit output is clipped to [-1, 1].
void write(const std::filesystem::path& path, const std::vector<Vector>& channels,
           int sample_rate, SampleFormat format = SampleFormat::Float32);

MonoSignal read_mono(const std::filesystem::path& path);
StereoSignal read_stereo(const std::filesystem::path& path);

void write_mono(const std::filesystem::path& path, const MonoSignal& signal,
                SampleFormat format = SampleFormat::Float32);
void write_stereo(const std::filesystem::path& path, const StereoSignal& signal,
                  SampleFormat format = SampleFormat::Float32);

} // namespace spatialsep::wav

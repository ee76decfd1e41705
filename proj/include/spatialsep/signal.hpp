#pragma once

#include "spatialsep/types.hpp"

namespace spatialsep {

inline constexpr int kDefaultSampleRate = 16000;
inline constexpr int kDefaultFrameSize = 512;
inline constexpr int kDefaultHop = 128;

/// Single-channel audio. Samples are finite; sample rate is positive.
struct MonoSignal {
    Vector samples;
    int sample_rate = kDefaultSampleRate;

    MonoSignal() = default;
    MonoSignal(Vector samples, int sample_rate);

    Eigen::Index size() const { return samples.size(); }
};

/// Two equal-length channels sharing one sample rate.
struct StereoSignal {
    Vector left;
    Vector right;
    int sample_rate = kDefaultSampleRate;

    StereoSignal() = default;
    StereoSignal(Vector left, Vector right, int sample_rate);

    Eigen::Index size() const { return left.size(); }
    const Vector& channel(int c) const { return c == 0 ? left : right; }
    MonoSignal mono_channel(int c) const { return {channel(c), sample_rate}; }
};

/// One-sided complex STFT, F = frame_size / 2 + 1 rows by T frames.
struct Spectrogram {
    ComplexMatrix bins;
    int frame_size = kDefaultFrameSize;
    int hop = kDefaultHop;
    int sample_rate = kDefaultSampleRate;

    Eigen::Index num_bins() const { return bins.rows(); }
    Eigen::Index num_frames() const { return bins.cols(); }
};

/// |X| for a stereo pair: rows [0, F) hold the left channel, [F, 2F) the right.
struct StackedMagnitude {
    Matrix mag;

    Eigen::Index num_bins() const { return mag.rows() / 2; }
    Eigen::Index num_frames() const { return mag.cols(); }
};

/// Hann window sampled at half-sample offsets, so no tap is zero and every
/// sample of a framed signal stays recoverable.
Vector analysis_window(int frame_size);

/// Frames needed to cover `length` samples with tail zero-padding.
Eigen::Index frame_count(Eigen::Index length, int frame_size, int hop);

/// True when the squared window overlap-adds to a constant at this hop.
bool satisfies_reconstruction(int frame_size, int hop);

Spectrogram stft(const MonoSignal& signal, int frame_size = kDefaultFrameSize,
                 int hop = kDefaultHop);

/// Weighted overlap-add inverse, truncated or zero-padded to `out_len`.
MonoSignal istft(const Spectrogram& spec, Eigen::Index out_len);

/// Transpose of `istft` seen as a real-linear map. For an upstream gradient
/// g = dL/dy, returns A with dL = Re(sum conj(A) .* dZ) for any perturbation
/// dZ of the spectrogram bins.
ComplexMatrix istft_adjoint(const Vector& grad_signal, int frame_size, int hop,
                            Eigen::Index num_frames);

StackedMagnitude stack_stereo_magnitude(const Spectrogram& left, const Spectrogram& right);

/// Zeros added on each side of a signal before analysis so every original
/// sample is covered by all overlapping windows. Near uncovered edges the
/// overlap-add normaliser is tiny and amplifies any spectral modification.
inline Eigen::Index analysis_padding(int frame_size, int hop) { return frame_size - hop; }

StereoSignal pad_signal(const StereoSignal& s, Eigen::Index pad);
StereoSignal trim_signal(const StereoSignal& s, Eigen::Index pad, Eigen::Index length);

} // namespace spatialsep

#include "spatialsep/signal.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace spatialsep {

namespace {

void require_finite(const Vector& v, const char* what)
{
    if (!v.allFinite()) {
        throw ConfigError(std::string(what) + " contains non-finite samples");
    }
}

void check_framing(int frame_size, int hop)
{
    if (frame_size < 2 || frame_size % 2 != 0) {
        throw ConfigError("frame size must be a positive even integer");
    }
    if (hop <= 0 || hop > frame_size) {
        throw ConfigError("invalid hop");
    }
}

// Overlap-added squared window over the padded length of `num_frames` frames.
Vector window_power_sum(const Vector& window, int hop, Eigen::Index num_frames)
{
    const Eigen::Index n = window.size();
    Vector sum = Vector::Zero((num_frames - 1) * hop + n);
    for (Eigen::Index t = 0; t < num_frames; ++t) {
        sum.segment(t * hop, n) += window.cwiseAbs2();
    }
    return sum;
}

} // namespace

MonoSignal::MonoSignal(Vector s, int sr)
    : samples(std::move(s)), sample_rate(sr)
{
    if (sample_rate <= 0) {
        throw ConfigError("sample rate must be positive");
    }
    require_finite(samples, "signal");
}

StereoSignal::StereoSignal(Vector l, Vector r, int sr)
    : left(std::move(l)), right(std::move(r)), sample_rate(sr)
{
    if (sample_rate <= 0) {
        throw ConfigError("sample rate must be positive");
    }
    if (left.size() != right.size()) {
        throw ConfigError("stereo channels differ in length");
    }
    require_finite(left, "left channel");
    require_finite(right, "right channel");
}

Vector analysis_window(int frame_size)
{
    Vector w(frame_size);
    for (int n = 0; n < frame_size; ++n) {
        w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (n + 0.5) / frame_size);
    }
    return w;
}

Eigen::Index frame_count(Eigen::Index length, int frame_size, int hop)
{
    if (length <= frame_size) {
        return 1;
    }
    return (length - frame_size + hop - 1) / hop + 1;
}

bool satisfies_reconstruction(int frame_size, int hop)
{
    if (frame_size < 2 || hop <= 0 || hop > frame_size || frame_size % hop != 0) {
        return false;
    }
    const Vector w2 = analysis_window(frame_size).cwiseAbs2();
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (int n = 0; n < hop; ++n) {
        double s = 0.0;
        for (int m = n; m < frame_size; m += hop) {
            s += w2[m];
        }
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    return hi - lo <= 1e-10 * hi;
}

Spectrogram stft(const MonoSignal& signal, int frame_size, int hop)
{
    if (signal.size() == 0) {
        throw ConfigError("empty input");
    }
    check_framing(frame_size, hop);

    const Vector window = analysis_window(frame_size);
    const Eigen::Index frames = frame_count(signal.size(), frame_size, hop);
    const Eigen::Index bins = frame_size / 2 + 1;

    Spectrogram out;
    out.frame_size = frame_size;
    out.hop = hop;
    out.sample_rate = signal.sample_rate;
    out.bins.resize(bins, frames);

    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    std::vector<double> frame(frame_size);
    std::vector<Complex> spectrum;
    for (Eigen::Index t = 0; t < frames; ++t) {
        const Eigen::Index start = t * hop;
        for (int n = 0; n < frame_size; ++n) {
            const Eigen::Index idx = start + n;
            frame[n] = idx < signal.size() ? signal.samples[idx] * window[n] : 0.0;
        }
        fft.fwd(spectrum, frame);
        for (Eigen::Index k = 0; k < bins; ++k) {
            out.bins(k, t) = spectrum[k];
        }
    }
    return out;
}

MonoSignal istft(const Spectrogram& spec, Eigen::Index out_len)
{
    const int n = spec.frame_size;
    check_framing(n, spec.hop);
    if (!satisfies_reconstruction(n, spec.hop)) {
        throw ConfigError("window does not satisfy reconstruction condition");
    }
    if (spec.num_bins() != n / 2 + 1 || spec.num_frames() < 1) {
        throw ConfigError("spectrogram shape does not match frame size");
    }
    const Vector window = analysis_window(n);
    const Eigen::Index frames = spec.num_frames();
    const Vector norm = window_power_sum(window, spec.hop, frames);

    Vector padded = Vector::Zero(norm.size());
    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    std::vector<Complex> spectrum(spec.num_bins());
    std::vector<double> frame;
    for (Eigen::Index t = 0; t < frames; ++t) {
        for (Eigen::Index k = 0; k < spec.num_bins(); ++k) {
            spectrum[k] = spec.bins(k, t);
        }
        fft.inv(frame, spectrum, n);
        const Eigen::Index start = t * spec.hop;
        for (int i = 0; i < n; ++i) {
            padded[start + i] += window[i] * frame[i];
        }
    }
    padded.array() /= norm.array();

    Vector samples = Vector::Zero(out_len);
    const Eigen::Index keep = std::min(out_len, padded.size());
    samples.head(keep) = padded.head(keep);
    return {std::move(samples), spec.sample_rate};
}

ComplexMatrix istft_adjoint(const Vector& grad_signal, int frame_size, int hop,
                            Eigen::Index num_frames)
{
    check_framing(frame_size, hop);
    const Vector window = analysis_window(frame_size);
    const Vector norm = window_power_sum(window, hop, num_frames);
    const Eigen::Index bins = frame_size / 2 + 1;

    ComplexMatrix out(bins, num_frames);
    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    std::vector<double> frame(frame_size);
    std::vector<Complex> spectrum;
    for (Eigen::Index t = 0; t < num_frames; ++t) {
        const Eigen::Index start = t * hop;
        for (int i = 0; i < frame_size; ++i) {
            const Eigen::Index idx = start + i;
            frame[i] = idx < grad_signal.size() ? window[i] * grad_signal[idx] / norm[idx] : 0.0;
        }
        fft.fwd(spectrum, frame);
        // irfft weights interior bins twice (Hermitian pair), DC and Nyquist once.
        for (Eigen::Index k = 0; k < bins; ++k) {
            const double weight = (k == 0 || k == bins - 1) ? 1.0 : 2.0;
            out(k, t) = spectrum[k] * (weight / frame_size);
        }
    }
    return out;
}

StackedMagnitude stack_stereo_magnitude(const Spectrogram& left, const Spectrogram& right)
{
    if (left.num_bins() != right.num_bins() || left.num_frames() != right.num_frames()) {
        throw ConfigError("left and right spectrograms differ in shape");
    }
    const Eigen::Index bins = left.num_bins();
    StackedMagnitude out;
    out.mag.resize(2 * bins, left.num_frames());
    out.mag.topRows(bins) = left.bins.cwiseAbs();
    out.mag.bottomRows(bins) = right.bins.cwiseAbs();
    return out;
}

StereoSignal pad_signal(const StereoSignal& s, Eigen::Index pad)
{
    Vector left = Vector::Zero(s.size() + 2 * pad);
    Vector right = Vector::Zero(s.size() + 2 * pad);
    left.segment(pad, s.size()) = s.left;
    right.segment(pad, s.size()) = s.right;
    return {std::move(left), std::move(right), s.sample_rate};
}

StereoSignal trim_signal(const StereoSignal& s, Eigen::Index pad, Eigen::Index length)
{
    return {s.left.segment(pad, length), s.right.segment(pad, length), s.sample_rate};
}

} // namespace spatialsep

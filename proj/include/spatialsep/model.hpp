#pragma once

#include <cstdint>
#include <vector>

#include "spatialsep/conditioning.hpp"
#include "spatialsep/signal.hpp"

namespace spatialsep {

/// Everything that fixes the parameter layout and the STFT front end.
struct ModelShape {
    Eigen::Index num_sources = 4;
    int frame_size = kDefaultFrameSize;
    int hop = kDefaultHop;
    int sample_rate = kDefaultSampleRate;
    Eigen::Index hidden = 128;
    ConditionMode mode = ConditionMode::None;
    EmbeddingConfig embedding = EmbeddingConfig::raw();

    Eigen::Index num_bins() const { return frame_size / 2 + 1; }
    Eigen::Index stacked_bins() const { return 2 * num_bins(); }
    Eigen::Index input_size() const;
    /// Parameters owned by one stream.
    Eigen::Index stream_size() const;
    Eigen::Index parameter_count() const { return num_sources * stream_size(); }

    /// Throws ConfigError when the mode and embedding width disagree.
    void validate() const;

    friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

/// Added to |X| before the log compression of the network input.
inline constexpr double kFeatureFloor = 1e-3;

/// log(|X| + floor): left/right level ratios become differences.
Matrix input_features(const Matrix& mag);

/// Per-row statistics applied to the input features before conditioning.
struct InputNorm {
    Vector mean;
    Vector std;
};

template <typename Scalar>
struct StreamParams {
    using MatrixMap = Eigen::Map<std::conditional_t<std::is_const_v<Scalar>, const Matrix, Matrix>>;
    using VectorMap = Eigen::Map<std::conditional_t<std::is_const_v<Scalar>, const Vector, Vector>>;

    MatrixMap encoder_w;
    VectorMap encoder_b;
    MatrixMap trunk_w;
    VectorMap trunk_b;
    MatrixMap head_w;
    VectorMap head_b;
};

/// K per-source streams: encoder (affine + tanh), a junction averaging the K
/// encoder outputs, a trunk (affine + tanh) fed by the average, and a sigmoid
/// mask head of width 2F. All parameters live in one flat vector.
class SeparatorModel {
public:
    SeparatorModel() = default;
    explicit SeparatorModel(ModelShape shape);

    const ModelShape& shape() const { return shape_; }

    Vector& parameters() { return params_; }
    const Vector& parameters() const { return params_; }

    InputNorm& input_norm() { return norm_; }
    const InputNorm& input_norm() const { return norm_; }

    StreamParams<double> stream(Eigen::Index k) { return stream_view(params_, k); }
    StreamParams<const double> stream(Eigen::Index k) const { return stream_view(params_, k); }

    /// Views into any vector laid out like the parameters (e.g. a gradient).
    StreamParams<double> stream_view(Vector& flat, Eigen::Index k) const;
    StreamParams<const double> stream_view(const Vector& flat, Eigen::Index k) const;

private:
    ModelShape shape_;
    Vector params_;
    InputNorm norm_;
};

/// Uniform in +/- 1/sqrt(fan_in) per layer, deterministic per seed.
Vector init_parameters(const ModelShape& shape, std::uint64_t seed);

struct MaskSet {
    std::vector<Matrix> masks;  // K matrices, 2F x T
};

/// Intermediate activations kept for reverse mode.
struct ForwardCache {
    std::vector<Matrix> inputs;   // conditioned, input_size x T
    std::vector<Matrix> hidden;   // encoder outputs, H x T
    Matrix average;               // H x T
    std::vector<Matrix> trunk;    // H x T
    std::vector<Matrix> masks;    // 2F x T
};

/// Embeddings are ignored in mode None; otherwise one per stream.
MaskSet forward(const SeparatorModel& model, const StackedMagnitude& mix_mag,
                const std::vector<SpatialEmbedding>& embeddings);

void forward(const SeparatorModel& model, const StackedMagnitude& mix_mag,
             const std::vector<SpatialEmbedding>& embeddings, ForwardCache& cache);

/// Reverse pass from dL/d(mask_k) to dL/d(parameters).
Vector backward_from_masks(const SeparatorModel& model, const ForwardCache& cache,
                           const std::vector<Matrix>& mask_grads);

/// Mask rows [0, F) scale the left STFT, [F, 2F) the right; mixture phase
/// is reused and each source is resynthesised to `out_len` samples.
std::vector<StereoSignal> apply_masks(const MaskSet& masks, const Spectrogram& mix_left,
                                      const Spectrogram& mix_right, Eigen::Index out_len);

/// Mean and standard deviation per stacked row over all frames given.
InputNorm fit_input_norm(const std::vector<const StackedMagnitude*>& mags);

/// Embeds one angle per stream according to the model's configuration.
std::vector<SpatialEmbedding> embed_angles(const ModelShape& shape, const std::vector<AngleSpec>& angles);

/// STFT, forward, masking and resynthesis in one call.
std::vector<StereoSignal> separate(const SeparatorModel& model, const StereoSignal& mixture,
                                   const std::vector<AngleSpec>& angles);

} // namespace spatialsep

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spatialsep/loss.hpp"
#include "spatialsep/model.hpp"
#include "spatialsep/scene.hpp"

namespace spatialsep {

/// A mixed scene with its ground-truth angles, in stream order.
struct TrainingScene {
    MixedScene mixed;
    std::vector<AngleSpec> angles;
    std::vector<std::string> labels;
};

/// One excerpt of a scene with its spectra precomputed.
struct TrainingExample {
    StereoSignal mixture;
    std::vector<StereoSignal> targets;
    Spectrogram left;
    Spectrogram right;
    StackedMagnitude mix_mag;
    std::vector<Matrix> target_mags;
    std::size_t scene_index = 0;
};

/// Cuts every scene into non-overlapping excerpts spanning `chunk_frames`
/// STFT frames (0 keeps scenes whole). A scene shorter than one excerpt
/// becomes a single example.
std::vector<TrainingExample> make_examples(const std::vector<TrainingScene>& scenes,
                                           const ModelShape& shape, Eigen::Index chunk_frames);

TrainingExample make_example(const MixedScene& mixed, const ModelShape& shape, std::size_t scene_index = 0);

/// Loss of the full pipeline: forward, masking, resynthesis, losses.
LossBreakdown example_loss(const SeparatorModel& model, const TrainingExample& example,
                           const std::vector<SpatialEmbedding>& embeddings, const LossConfig& cfg);

struct LossAndGradient {
    LossBreakdown loss;
    Vector grad;
};

/// Reverse-mode gradient of `example_loss` with respect to every parameter.
/// Throws DivergenceError("diverged") when the masks or the loss are not finite.
LossAndGradient example_gradient(const SeparatorModel& model, const TrainingExample& example,
                                 const std::vector<SpatialEmbedding>& embeddings, const LossConfig& cfg);

struct BatchItem {
    const TrainingExample* example = nullptr;
    const std::vector<SpatialEmbedding>* embeddings = nullptr;
};

/// Mean loss and gradient over a batch. Items are spread over `workers`
/// threads and reduced in item order, so the result does not depend on the
/// worker count.
LossAndGradient backward(const SeparatorModel& model, const std::vector<BatchItem>& batch,
                         const LossConfig& cfg, int workers = 1);

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    Vector m;
    Vector v;
    std::int64_t step = 0;
};

void adam_step(Vector& params, const Vector& grads, AdamState& state, const AdamConfig& cfg);

struct TrainConfig {
    int epochs = 10;
    Eigen::Index batch_frames = 64;  // excerpt length in STFT frames
    std::size_t batch_size = 4;      // excerpts per optimizer step
    AdamConfig adam;
    std::uint64_t seed = 0;
    /// Set for noisy-angle training: angles are re-perturbed every epoch.
    std::optional<NoiseSpec> angle_noise;
    int workers = 1;

    void validate() const;
};

struct EpochLog {
    int epoch = 0;
    double freq = 0.0;
    double wsdr = 0.0;
    double total = 0.0;
};

struct TrainResult {
    SeparatorModel model;
    std::vector<EpochLog> history;
    bool diverged = false;
};

/// Adam over shuffled excerpt batches. On divergence the last finite model
/// and the history so far are returned with `diverged` set.
TrainResult train(SeparatorModel model, const std::vector<TrainingScene>& scenes,
                  const TrainConfig& train_cfg, const LossConfig& loss_cfg);

/// epoch,freq_loss,wsdr_loss,total
std::string history_to_csv(const std::vector<EpochLog>& history);

} // namespace spatialsep

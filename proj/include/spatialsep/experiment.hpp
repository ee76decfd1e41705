#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "spatialsep/metrics.hpp"
#include "spatialsep/training.hpp"

namespace spatialsep {

/// 4S: guitar, strings, piano, bass. 4S2G: two guitars (shared recipe), piano, bass.
enum class Task { FourSource, FourSourceTwoGuitars };

enum class Condition { D0, D1Cat, DFCat, DFAdd, DFAdaIn, D16Cat, D32Cat, D64Cat };

std::string_view to_string(Task task);
std::string_view to_string(Condition condition);

/// One cell of the experiment grid plus the desk-scale knobs used to run it.
struct ExperimentConfig {
    Task task = Task::FourSource;
    Condition condition = Condition::D0;
    bool train_noise = false;  // noisy training angles; never set for D0
    bool test_noise = false;   // noisy test angles
    double noise_delta = 8.0;  // degrees

    std::uint64_t seed = 0;

    int sample_rate = kDefaultSampleRate;
    int frame_size = kDefaultFrameSize;
    int hop = kDefaultHop;
    Eigen::Index hidden = 128;
    double scene_seconds = 4.0;
    int train_scenes = 32;
    int test_scenes = 3;

    int epochs = 30;
    Eigen::Index batch_frames = 64;
    std::size_t batch_size = 4;
    double learning_rate = 1e-3;
    int workers = 1;
    LossConfig loss;

    /// e.g. "4S2G-D1-CAT-ᾱ_Tr": identifies the trained model.
    std::string model_label() const;
    /// model_label() followed by the test-angle tag, e.g. "4S-DF-ADD-α_Tr-ᾱ_Te".
    std::string label() const;

    /// Accepts full or model labels; ASCII "a_Tr"/"abar_Tr" are aliases of
    /// "α_Tr"/"ᾱ_Tr". A bare task ("4S") means D0. Only the grid fields are
    /// set; the rest keep defaults.
    static ExperimentConfig from_label(std::string_view label);

    ModelShape model_shape() const;
    TrainConfig train_config() const;
    std::vector<std::string> source_labels() const;
    /// Default test-scene layout in stream order.
    std::vector<AngleSpec> default_angles() const;

    void validate() const;
};

nlohmann::json config_to_json(const ExperimentConfig& cfg);
/// Fields missing from `j` keep the values already in `base`.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});

/// Generates one scene of the task. Without explicit angles they are random
/// (uniform, 10 degrees apart).
TrainingScene make_task_scene(Task task, std::uint64_t seed, double seconds, int sample_rate,
                              const std::optional<std::vector<AngleSpec>>& angles = std::nullopt);

std::vector<TrainingScene> make_training_set(const ExperimentConfig& cfg);
std::vector<TrainingScene> make_test_set(const ExperimentConfig& cfg);

/// Angles handed to the model for test scene `index`: ground truth, or
/// perturbed by U(-delta, delta) when the config asks for noisy test angles.
std::vector<AngleSpec> test_angles(const ExperimentConfig& cfg, const TrainingScene& scene, std::size_t index);

/// Parameters initialised from the master seed, input normalisation fitted on
/// the training scenes.
SeparatorModel make_initial_model(const ExperimentConfig& cfg, const std::vector<TrainingScene>& scenes);

TrainResult run_training(const ExperimentConfig& cfg, const std::vector<TrainingScene>& scenes);

EvalReport evaluate_model(const SeparatorModel& model, const TrainingScene& scene,
                          const std::vector<AngleSpec>& angles);

/// Scene description file: per stem a label, an angle and either a toy stem
/// recipe or a path to a mono WAV.
struct StemDescription {
    std::string label;
    double angle_degrees = 0.0;
    std::optional<ToyStemSpec> stem_spec;
    std::optional<std::filesystem::path> wav_path;
    std::optional<std::filesystem::path> target_path;  // written by `mix`
};

struct SceneDescription {
    int sample_rate = kDefaultSampleRate;
    double duration = 4.0;
    std::optional<std::string> task;
    std::vector<StemDescription> stems;
    std::optional<std::filesystem::path> mixture_path;  // written by `mix`
};

nlohmann::json scene_to_json(const SceneDescription& scene);
SceneDescription scene_from_json(const nlohmann::json& j);
nlohmann::json stem_spec_to_json(const ToyStemSpec& spec);
ToyStemSpec stem_spec_from_json(const nlohmann::json& j);

/// Synthesises or loads every stem. Relative WAV paths resolve against `base_dir`.
Scene build_scene(const SceneDescription& desc, const std::filesystem::path& base_dir = {});

SceneDescription describe_task_scene(Task task, std::uint64_t seed, double seconds, int sample_rate,
                                     const std::vector<AngleSpec>& angles);

} // namespace spatialsep

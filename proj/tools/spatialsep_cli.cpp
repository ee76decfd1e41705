#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spatialsep/checkpoint.hpp"
#include "spatialsep/experiment.hpp"
#include "spatialsep/wav.hpp"

using namespace spatialsep;
namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;

fs::path default_out_dir()
{
    if (const char* env = std::getenv("SPATIALSEP_OUT_DIR"); env != nullptr && *env != '\0') {
        return env;
    }
    return ".";
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ConfigError("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw ConfigError("failed writing " + path.string());
    }
}

nlohmann::json read_json(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open " + path.string());
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(path.string() + ": " + ex.what());
    }
}

fs::path prepare_out_dir(const std::optional<std::string>& flag)
{
    const fs::path dir = flag ? fs::path(*flag) : default_out_dir();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw ConfigError("cannot create output directory " + dir.string());
    }
    return dir;
}

std::vector<AngleSpec> parse_angles(const std::vector<double>& degrees)
{
    std::vector<AngleSpec> out;
    for (double d : degrees) {
        out.emplace_back(d);
    }
    return out;
}

wav::SampleFormat parse_format(const std::string& name)
{
    if (name == "float32") {
        return wav::SampleFormat::Float32;
    }
    if (name == "pcm16") {
        return wav::SampleFormat::Pcm16;
    }
    throw ConfigError("unknown sample format: " + name);
}

// Experiment knobs shared by mix and train. A JSON config is read first and
// any flag given on the command line overrides it.
struct ExperimentFlags {
    std::optional<std::string> config;
    std::optional<std::string> label;
    std::optional<std::uint64_t> seed;
    std::optional<int> sample_rate;
    std::optional<int> frame_size;
    std::optional<int> hop;
    std::optional<Eigen::Index> hidden;
    std::optional<double> seconds;
    std::optional<int> train_scenes;
    std::optional<int> test_scenes;
    std::optional<int> epochs;
    std::optional<Eigen::Index> batch_frames;
    std::optional<std::size_t> batch_size;
    std::optional<double> learning_rate;
    std::optional<double> noise_delta;
    std::optional<int> workers;
    std::optional<double> freq_weight;
    std::optional<double> time_weight;

    void add_to(CLI::App& app)
    {
        app.add_option("--config", config, "JSON experiment config; flags override its fields");
        app.add_option("--label", label, "run label, e.g. 4S2G-D1-CAT-a_Tr-abar_Te");
        app.add_option("--seed", seed, "master seed");
        app.add_option("--sample-rate", sample_rate);
        app.add_option("--frame-size", frame_size);
        app.add_option("--hop", hop);
        app.add_option("--hidden", hidden);
        app.add_option("--seconds", seconds, "scene duration");
        app.add_option("--train-scenes", train_scenes);
        app.add_option("--test-scenes", test_scenes);
        app.add_option("--epochs", epochs);
        app.add_option("--batch-frames", batch_frames, "excerpt length in STFT frames");
        app.add_option("--batch-size", batch_size, "excerpts per optimizer step");
        app.add_option("--lr", learning_rate, "Adam learning rate");
        app.add_option("--noise-delta", noise_delta, "angle noise half-width in degrees");
        app.add_option("--workers", workers, "gradient worker threads");
        app.add_option("--freq-weight", freq_weight);
        app.add_option("--time-weight", time_weight);
    }

    ExperimentConfig resolve() const
    {
        ExperimentConfig cfg;
        if (config) {
            cfg = config_from_json(read_json(*config), cfg);
        }
        if (label) {
            const ExperimentConfig grid = ExperimentConfig::from_label(*label);
            cfg.task = grid.task;
            cfg.condition = grid.condition;
            cfg.train_noise = grid.train_noise;
            cfg.test_noise = grid.test_noise;
        }
        auto set = [](auto& field, const auto& flag) {
            if (flag) {
                field = *flag;
            }
        };
        set(cfg.seed, seed);
        set(cfg.sample_rate, sample_rate);
        set(cfg.frame_size, frame_size);
        set(cfg.hop, hop);
        set(cfg.hidden, hidden);
        set(cfg.scene_seconds, seconds);
        set(cfg.train_scenes, train_scenes);
        set(cfg.test_scenes, test_scenes);
        set(cfg.epochs, epochs);
        set(cfg.batch_frames, batch_frames);
        set(cfg.batch_size, batch_size);
        set(cfg.learning_rate, learning_rate);
        set(cfg.noise_delta, noise_delta);
        set(cfg.workers, workers);
        set(cfg.loss.freq_weight, freq_weight);
        set(cfg.loss.time_weight, time_weight);
        cfg.validate();
        return cfg;
    }
};

struct MixArgs {
    ExperimentFlags exp;
    std::optional<std::string> out;
    std::optional<std::string> scene;
    std::vector<double> angles;
    std::string format = "float32";
};

int cmd_mix(const MixArgs& args)
{
    const fs::path out = prepare_out_dir(args.out);
    SceneDescription desc;
    fs::path base_dir;
    if (args.scene) {
        desc = scene_from_json(read_json(*args.scene));
        base_dir = fs::path(*args.scene).parent_path();
        if (!args.angles.empty()) {
            throw ConfigError("--angles cannot be combined with --scene");
        }
    } else {
        const ExperimentConfig cfg = args.exp.resolve();
        const auto angles = args.angles.empty() ? cfg.default_angles() : parse_angles(args.angles);
        desc = describe_task_scene(cfg.task, cfg.seed, cfg.scene_seconds, cfg.sample_rate, angles);
    }

    const MixedScene mixed = mix_scene(build_scene(desc, base_dir));
    const auto format = parse_format(args.format);
    desc.mixture_path = "mixture.wav";
    wav::write_stereo(out / "mixture.wav", mixed.mixture, format);
    for (std::size_t k = 0; k < desc.stems.size(); ++k) {
        auto& stem = desc.stems[k];
        stem.target_path = "target_" + stem.label + ".wav";
        wav::write_stereo(out / *stem.target_path, mixed.targets[k], format);
        if (stem.wav_path && stem.wav_path->is_relative()) {
            stem.wav_path = fs::absolute(base_dir / *stem.wav_path);
        }
    }
    write_text(out / "scene.json", scene_to_json(desc).dump(2) + "\n");
    std::printf("wrote %zu targets, mixture and scene.json to %s\n", desc.stems.size(), out.string().c_str());
    return 0;
}

struct TrainArgs {
    ExperimentFlags exp;
    std::optional<std::string> out;
    std::vector<std::string> scenes;
};

std::vector<TrainingScene> load_training_scenes(const std::vector<std::string>& files)
{
    std::vector<TrainingScene> out;
    for (const auto& f : files) {
        const SceneDescription desc = scene_from_json(read_json(f));
        TrainingScene ts;
        ts.mixed = mix_scene(build_scene(desc, fs::path(f).parent_path()));
        for (const auto& s : desc.stems) {
            ts.angles.emplace_back(s.angle_degrees);
            ts.labels.push_back(s.label);
        }
        out.push_back(std::move(ts));
    }
    return out;
}

int cmd_train(const TrainArgs& args)
{
    const ExperimentConfig cfg = args.exp.resolve();
    const fs::path out = prepare_out_dir(args.out);
    const std::vector<TrainingScene> scenes =
        args.scenes.empty() ? make_training_set(cfg) : load_training_scenes(args.scenes);

    const TrainResult result = run_training(cfg, scenes);
    write_text(out / "loss.csv", history_to_csv(result.history));
    write_text(out / "config.json", config_to_json(cfg).dump(2) + "\n");

    Checkpoint cp{result.model, scenes.front().labels, {{"label", cfg.model_label()}, {"config", config_to_json(cfg)}}};
    if (result.diverged) {
        std::fprintf(stderr, "training diverged after %zu epochs; loss log kept in %s\n", result.history.size(),
                     (out / "loss.csv").string().c_str());
        return kExitDiverged;
    }
    save_checkpoint(out / "model.ckpt", cp);
    std::printf("%s: %zu epochs, checkpoint %s\n", cfg.model_label().c_str(), result.history.size(),
                (out / "model.ckpt").string().c_str());
    return 0;
}

struct SeparateArgs {
    std::string checkpoint;
    std::string mixture;
    std::vector<double> angles;
    std::optional<std::string> out;
    std::string format = "float32";
};

int cmd_separate(const SeparateArgs& args)
{
    const Checkpoint cp = load_checkpoint(args.checkpoint);
    const ModelShape& shape = cp.model.shape();
    const StereoSignal mixture = wav::read_stereo(args.mixture);
    if (mixture.sample_rate != shape.sample_rate) {
        throw ConfigError("mixture sample rate " + std::to_string(mixture.sample_rate)
                          + " does not match the model's " + std::to_string(shape.sample_rate));
    }
    std::vector<AngleSpec> angles;
    if (shape.mode != ConditionMode::None) {
        if (static_cast<Eigen::Index>(args.angles.size()) != shape.num_sources) {
            throw ConfigError("model expects " + std::to_string(shape.num_sources) + " angles, got "
                              + std::to_string(args.angles.size()));
        }
        angles = parse_angles(args.angles);
    } else if (!args.angles.empty() && static_cast<Eigen::Index>(args.angles.size()) != shape.num_sources) {
        throw ConfigError("angle count does not match the model's source count");
    }

    const fs::path out = prepare_out_dir(args.out);
    const auto estimates = separate(cp.model, mixture, angles);
    const auto format = parse_format(args.format);
    for (std::size_t k = 0; k < estimates.size(); ++k) {
        const std::string name = k < cp.labels.size() ? cp.labels[k] : "source" + std::to_string(k + 1);
        wav::write_stereo(out / ("estimate_" + name + ".wav"), estimates[k], format);
    }
    std::printf("wrote %zu estimates to %s\n", estimates.size(), out.string().c_str());
    return 0;
}

struct EvaluateArgs {
    std::vector<std::string> estimates;
    std::vector<std::string> targets;
    std::optional<std::string> mixture;
    std::optional<std::string> scene;
    std::vector<std::string> labels;
    std::optional<std::string> output;
};

int cmd_evaluate(EvaluateArgs args)
{
    std::optional<fs::path> mixture_path = args.mixture;
    if (args.scene) {
        // Targets, mixture and labels default to what `mix` recorded.
        const SceneDescription desc = scene_from_json(read_json(*args.scene));
        const fs::path dir = fs::path(*args.scene).parent_path();
        if (args.targets.empty()) {
            for (const auto& s : desc.stems) {
                if (!s.target_path) {
                    throw ConfigError("scene file lists no target for " + s.label);
                }
                args.targets.push_back((dir / *s.target_path).string());
            }
        }
        if (!mixture_path && desc.mixture_path) {
            mixture_path = dir / *desc.mixture_path;
        }
        if (args.labels.empty()) {
            for (const auto& s : desc.stems) {
                args.labels.push_back(s.label);
            }
        }
    }
    if (!mixture_path) {
        throw ConfigError("evaluate needs --mixture or --scene");
    }
    if (args.estimates.size() != args.targets.size()) {
        throw ConfigError("got " + std::to_string(args.estimates.size()) + " estimates for "
                          + std::to_string(args.targets.size()) + " targets");
    }

    std::vector<StereoSignal> estimates;
    std::vector<StereoSignal> targets;
    for (std::size_t k = 0; k < args.targets.size(); ++k) {
        estimates.push_back(wav::read_stereo(args.estimates[k]));
        targets.push_back(wav::read_stereo(args.targets[k]));
    }
    const EvalReport report = evaluate_scene(estimates, targets, wav::read_stereo(*mixture_path), args.labels);
    for (const auto& w : report.warnings) {
        std::fprintf(stderr, "warning: %s\n", w.c_str());
    }
    const std::string csv = to_csv(report);
    if (args.output) {
        write_text(*args.output, csv);
    } else {
        std::fputs(csv.c_str(), stdout);
    }
    return 0;
}

struct EncodeArgs {
    int dim = 64;
    std::string unit = "degrees";
    double step = 1.0;
    std::optional<std::string> output;
};

int cmd_encode_demo(const EncodeArgs& args)
{
    if (!(args.step > 0.0)) {
        throw ConfigError("step must be positive");
    }
    ArgumentUnit unit = ArgumentUnit::Degrees;
    if (args.unit == "radians") {
        unit = ArgumentUnit::Radians;
    } else if (args.unit != "degrees") {
        throw ConfigError("unknown unit: " + args.unit);
    }
    const EmbeddingConfig cfg = EmbeddingConfig::sinusoidal(args.dim, unit);

    std::ostringstream csv;
    csv.precision(9);
    csv << "angle";
    for (int i = 0; i < args.dim; ++i) {
        csv << ",e" << i;
    }
    csv << "\n";
    const auto count = static_cast<int>(std::floor(2.0 * kMaxAngle / args.step + 1e-9));
    for (int n = 0; n <= count; ++n) {
        const double a = -kMaxAngle + n * args.step;
        const Vector v = encode(AngleSpec::clamped(a), cfg).values;
        csv << a;
        for (double x : v) {
            csv << "," << x;
        }
        csv << "\n";
    }
    if (args.output) {
        write_text(*args.output, csv.str());
    } else {
        std::cout << csv.str();
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spatially conditioned music source separation"};
    app.require_subcommand(1);

    MixArgs mix;
    auto* mix_cmd = app.add_subcommand("mix", "Synthesise a scene and write mixture, targets and scene.json");
    mix.exp.add_to(*mix_cmd);
    mix_cmd->add_option("--out", mix.out, "output directory (default $SPATIALSEP_OUT_DIR or .)");
    mix_cmd->add_option("--scene", mix.scene, "scene description JSON (toy recipes or mono WAV stems)");
    mix_cmd->add_option("--angles", mix.angles, "per-stem angles in degrees, stream order")->delimiter(',');
    mix_cmd->add_option("--format", mix.format, "float32 or pcm16");

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "Train a separator and write model.ckpt and loss.csv");
    train.exp.add_to(*train_cmd);
    train_cmd->add_option("--out", train.out, "output directory (default $SPATIALSEP_OUT_DIR or .)");
    train_cmd->add_option("--scene", train.scenes, "train on these scene files instead of generated scenes");

    SeparateArgs sep;
    auto* sep_cmd = app.add_subcommand("separate", "Separate a stereo mixture with a trained checkpoint");
    sep_cmd->add_option("--checkpoint", sep.checkpoint)->required();
    sep_cmd->add_option("--mixture", sep.mixture)->required();
    sep_cmd->add_option("--angles", sep.angles, "one angle per stream; ignored by D0 models")->delimiter(',');
    sep_cmd->add_option("--out", sep.out, "output directory (default $SPATIALSEP_OUT_DIR or .)");
    sep_cmd->add_option("--format", sep.format, "float32 or pcm16");

    EvaluateArgs eval;
    auto* eval_cmd = app.add_subcommand("evaluate", "Score estimates against targets as CSV");
    eval_cmd->add_option("--estimates", eval.estimates)->delimiter(',')->required();
    eval_cmd->add_option("--targets", eval.targets)->delimiter(',');
    eval_cmd->add_option("--mixture", eval.mixture);
    eval_cmd->add_option("--scene", eval.scene, "scene.json from mix; supplies targets, mixture and labels");
    eval_cmd->add_option("--labels", eval.labels)->delimiter(',');
    eval_cmd->add_option("--output", eval.output, "CSV path (default stdout)");

    EncodeArgs enc;
    auto* enc_cmd = app.add_subcommand("encode-demo", "Dump sinusoidal angle embeddings over [-45, 45] as CSV");
    enc_cmd->add_option("--dim", enc.dim, "embedding dimension (even)");
    enc_cmd->add_option("--unit", enc.unit, "degrees or radians");
    enc_cmd->add_option("--step", enc.step, "angle step in degrees");
    enc_cmd->add_option("--output", enc.output, "CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*mix_cmd) {
            return cmd_mix(mix);
        }
        if (*train_cmd) {
            return cmd_train(train);
        }
        if (*sep_cmd) {
            return cmd_separate(sep);
        }
        if (*eval_cmd) {
            return cmd_evaluate(eval);
        }
        return cmd_encode_demo(enc);
    } catch (const DivergenceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitDiverged;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

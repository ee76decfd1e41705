#include "spatialsep/experiment.hpp"

#include <array>
#include <utility>

#include "spatialsep/wav.hpp"

namespace spatialsep {

namespace {

constexpr std::string_view kAlpha = "\xCE\xB1";                 // U+03B1
constexpr std::string_view kAlphaBar = "\xE1\xBE\xB1";           // U+1FB1
constexpr std::string_view kAlphaMacron = "\xCE\xB1\xCC\x84";    // U+03B1 U+0304

constexpr std::array<std::pair<Condition, std::string_view>, 8> kConditions{{
    {Condition::D0, "D0"},
    {Condition::D1Cat, "D1-CAT"},
    {Condition::DFCat, "DF-CAT"},
    {Condition::DFAdd, "DF-ADD"},
    {Condition::DFAdaIn, "DF-ADAIN"},
    {Condition::D16Cat, "D16-CAT"},
    {Condition::D32Cat, "D32-CAT"},
    {Condition::D64Cat, "D64-CAT"},
}};

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            return out;
        }
        start = pos + 1;
    }
}

// Returns {noisy} for a token like "ᾱ_Tr" when its suffix matches.
std::optional<bool> parse_noise_token(std::string_view token, std::string_view suffix)
{
    const std::string tail = "_" + std::string(suffix);
    if (token.size() <= tail.size() || token.substr(token.size() - tail.size()) != tail) {
        return std::nullopt;
    }
    const std::string_view head = token.substr(0, token.size() - tail.size());
    if (head == kAlpha || head == "a") {
        return false;
    }
    if (head == kAlphaBar || head == kAlphaMacron || head == "abar") {
        return true;
    }
    return std::nullopt;
}

std::string noise_token(bool noisy, std::string_view suffix)
{
    return std::string(noisy ? kAlphaBar : kAlpha) + "_" + std::string(suffix);
}

std::vector<std::string_view> instruments(Task task)
{
    if (task == Task::FourSource) {
        return {"guitar", "strings", "piano", "bass"};
    }
    return {"guitar", "guitar", "piano", "bass"};
}

} // namespace

std::string_view to_string(Task task)
{
    return task == Task::FourSource ? "4S" : "4S2G";
}

std::string_view to_string(Condition condition)
{
    for (const auto& [c, name] : kConditions) {
        if (c == condition) {
            return name;
        }
    }
    return "D0";
}

std::string ExperimentConfig::model_label() const
{
    std::string out = std::string(to_string(task)) + "-" + std::string(to_string(condition));
    if (condition != Condition::D0) {
        out += "-" + noise_token(train_noise, "Tr");
    }
    return out;
}

std::string ExperimentConfig::label() const
{
    return model_label() + "-" + noise_token(test_noise, "Te");
}

ExperimentConfig ExperimentConfig::from_label(std::string_view label)
{
    const auto tokens = split(label, '-');
    const auto fail = [&]() -> ExperimentConfig {
        throw ConfigError("unrecognised run label: " + std::string(label));
    };
    ExperimentConfig cfg;
    if (tokens[0] == "4S") {
        cfg.task = Task::FourSource;
    } else if (tokens[0] == "4S2G") {
        cfg.task = Task::FourSourceTwoGuitars;
    } else {
        return fail();
    }
    if (tokens.size() == 1) {
        return cfg;
    }

    std::size_t next = 2;
    if (tokens[1] == "D0") {
        cfg.condition = Condition::D0;
    } else {
        if (tokens.size() < 3) {
            return fail();
        }
        const std::string name = std::string(tokens[1]) + "-" + std::string(tokens[2]);
        const auto it = std::find_if(kConditions.begin(), kConditions.end(),
                                     [&](const auto& c) { return c.second == name; });
        if (it == kConditions.end() || it->first == Condition::D0) {
            return fail();
        }
        cfg.condition = it->first;
        next = 3;
    }

    bool saw_train = false;
    bool saw_test = false;
    for (; next < tokens.size(); ++next) {
        if (!saw_train && !saw_test && cfg.condition != Condition::D0) {
            if (auto noisy = parse_noise_token(tokens[next], "Tr")) {
                cfg.train_noise = *noisy;
                saw_train = true;
                continue;
            }
        }
        if (!saw_test) {
            if (auto noisy = parse_noise_token(tokens[next], "Te")) {
                cfg.test_noise = *noisy;
                saw_test = true;
                continue;
            }
        }
        return fail();
    }
    return cfg;
}

ModelShape ExperimentConfig::model_shape() const
{
    ModelShape s;
    s.num_sources = 4;
    s.frame_size = frame_size;
    s.hop = hop;
    s.sample_rate = sample_rate;
    s.hidden = hidden;
    const int stacked = static_cast<int>(s.stacked_bins());
    switch (condition) {
    case Condition::D0:
        s.mode = ConditionMode::None;
        break;
    case Condition::D1Cat:
        s.mode = ConditionMode::Cat;
        break;
    case Condition::DFCat:
        s.mode = ConditionMode::Cat;
        s.embedding = EmbeddingConfig::sinusoidal(stacked);
        break;
    case Condition::DFAdd:
        s.mode = ConditionMode::Add;
        s.embedding = EmbeddingConfig::sinusoidal(stacked);
        break;
    case Condition::DFAdaIn:
        s.mode = ConditionMode::AdaIn;
        s.embedding = EmbeddingConfig::sinusoidal(stacked);
        break;
    case Condition::D16Cat:
        s.mode = ConditionMode::Cat;
        s.embedding = EmbeddingConfig::sinusoidal(16);
        break;
    case Condition::D32Cat:
        s.mode = ConditionMode::Cat;
        s.embedding = EmbeddingConfig::sinusoidal(32);
        break;
    case Condition::D64Cat:
        s.mode = ConditionMode::Cat;
        s.embedding = EmbeddingConfig::sinusoidal(64);
        break;
    }
    s.validate();
    return s;
}

TrainConfig ExperimentConfig::train_config() const
{
    TrainConfig t;
    t.epochs = epochs;
    t.batch_frames = batch_frames;
    t.batch_size = batch_size;
    t.adam.learning_rate = learning_rate;
    t.seed = derive_seed(seed, 3);
    t.workers = workers;
    if (train_noise && condition != Condition::D0) {
        t.angle_noise = NoiseSpec{noise_delta, derive_seed(seed, 2)};
    }
    return t;
}

std::vector<std::string> ExperimentConfig::source_labels() const
{
    if (task == Task::FourSource) {
        return {"guitar", "strings", "piano", "bass"};
    }
    return {"guitar1", "guitar2", "piano", "bass"};
}

std::vector<AngleSpec> ExperimentConfig::default_angles() const
{
    if (task == Task::FourSource) {
        // guitar, strings, piano, bass
        return {AngleSpec(-30.0), AngleSpec(-10.0), AngleSpec(30.0), AngleSpec(0.0)};
    }
    // guitar1, guitar2, piano, bass
    return {AngleSpec(-30.0), AngleSpec(30.0), AngleSpec(-10.0), AngleSpec(0.0)};
}

void ExperimentConfig::validate() const
{
    if (train_noise && condition == Condition::D0) {
        throw ConfigError("D0 ignores angles; noisy training does not apply");
    }
    if (!(noise_delta >= 0.0)) {
        throw ConfigError("noise delta must be nonnegative");
    }
    if (!(scene_seconds > 0.0) || train_scenes < 1 || test_scenes < 1) {
        throw ConfigError("scene counts and duration must be positive");
    }
    if (workers < 1) {
        throw ConfigError("workers must be at least 1");
    }
    (void)model_shape();
    train_config().validate();
    loss.validate();
}

nlohmann::json config_to_json(const ExperimentConfig& cfg)
{
    return {
        {"label", cfg.label()},
        {"noise_delta", cfg.noise_delta},
        {"seed", cfg.seed},
        {"sample_rate", cfg.sample_rate},
        {"frame_size", cfg.frame_size},
        {"hop", cfg.hop},
        {"hidden", cfg.hidden},
        {"scene_seconds", cfg.scene_seconds},
        {"train_scenes", cfg.train_scenes},
        {"test_scenes", cfg.test_scenes},
        {"epochs", cfg.epochs},
        {"batch_frames", cfg.batch_frames},
        {"batch_size", cfg.batch_size},
        {"learning_rate", cfg.learning_rate},
        {"workers", cfg.workers},
        {"freq_weight", cfg.loss.freq_weight},
        {"time_weight", cfg.loss.time_weight},
        {"wsdr_enabled", cfg.loss.wsdr_enabled},
    };
}

ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base)
{
    try {
        if (j.contains("label")) {
            const ExperimentConfig grid = ExperimentConfig::from_label(j.at("label").get<std::string>());
            base.task = grid.task;
            base.condition = grid.condition;
            base.train_noise = grid.train_noise;
            base.test_noise = grid.test_noise;
        }
        auto take = [&](const char* key, auto& field) {
            if (j.contains(key)) {
                field = j.at(key).get<std::decay_t<decltype(field)>>();
            }
        };
        take("noise_delta", base.noise_delta);
        take("seed", base.seed);
        take("sample_rate", base.sample_rate);
        take("frame_size", base.frame_size);
        take("hop", base.hop);
        take("hidden", base.hidden);
        take("scene_seconds", base.scene_seconds);
        take("train_scenes", base.train_scenes);
        take("test_scenes", base.test_scenes);
        take("epochs", base.epochs);
        take("batch_frames", base.batch_frames);
        take("batch_size", base.batch_size);
        take("learning_rate", base.learning_rate);
        take("workers", base.workers);
        take("freq_weight", base.loss.freq_weight);
        take("time_weight", base.loss.time_weight);
        take("wsdr_enabled", base.loss.wsdr_enabled);
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("malformed experiment config: ") + ex.what());
    }
    return base;
}

SceneDescription describe_task_scene(Task task, std::uint64_t seed, double seconds, int sample_rate,
                                     const std::vector<AngleSpec>& angles)
{
    const auto names = instruments(task);
    if (angles.size() != names.size()) {
        throw ConfigError("task scenes need exactly four angles");
    }
    ExperimentConfig tmp;
    tmp.task = task;
    const auto labels = tmp.source_labels();

    SceneDescription desc;
    desc.sample_rate = sample_rate;
    desc.duration = seconds;
    desc.task = std::string(to_string(task));
    for (std::size_t k = 0; k < names.size(); ++k) {
        StemDescription stem;
        stem.label = labels[k];
        stem.angle_degrees = angles[k].degrees();
        stem.stem_spec = toy_recipe(names[k], derive_seed(seed, 100 + k), seconds);
        stem.stem_spec->source_label = labels[k];
        desc.stems.push_back(std::move(stem));
    }
    return desc;
}

TrainingScene make_task_scene(Task task, std::uint64_t seed, double seconds, int sample_rate,
                              const std::optional<std::vector<AngleSpec>>& angles)
{
    std::vector<AngleSpec> chosen;
    if (angles) {
        chosen = *angles;
    } else {
        Rng rng(derive_seed(seed, 7));
        if (task == Task::FourSourceTwoGuitars) {
            // The guitar pair sits at +/-30 with a random side per scene, so
            // only the angle tells the two guitar streams apart.
            const double side = uniform01(rng) < 0.5 ? -30.0 : 30.0;
            chosen = {AngleSpec(side), AngleSpec(-side), AngleSpec(uniform(rng, -kMaxAngle, kMaxAngle)),
                      AngleSpec(uniform(rng, -kMaxAngle, kMaxAngle))};
        } else {
            chosen = random_angles(4, rng);
        }
    }
    const SceneDescription desc = describe_task_scene(task, seed, seconds, sample_rate, chosen);
    TrainingScene out;
    out.mixed = mix_scene(build_scene(desc));
    out.angles = chosen;
    for (const auto& s : desc.stems) {
        out.labels.push_back(s.label);
    }
    return out;
}

std::vector<TrainingScene> make_training_set(const ExperimentConfig& cfg)
{
    std::vector<TrainingScene> out;
    for (int i = 0; i < cfg.train_scenes; ++i) {
        out.push_back(make_task_scene(cfg.task, derive_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(i)),
                                      cfg.scene_seconds, cfg.sample_rate));
    }
    return out;
}

std::vector<TrainingScene> make_test_set(const ExperimentConfig& cfg)
{
    std::vector<TrainingScene> out;
    for (int i = 0; i < cfg.test_scenes; ++i) {
        out.push_back(make_task_scene(cfg.task, derive_seed(cfg.seed, 5000 + static_cast<std::uint64_t>(i)),
                                      cfg.scene_seconds, cfg.sample_rate, cfg.default_angles()));
    }
    return out;
}

std::vector<AngleSpec> test_angles(const ExperimentConfig& cfg, const TrainingScene& scene, std::size_t index)
{
    if (!cfg.test_noise) {
        return scene.angles;
    }
    Rng rng(derive_seed(cfg.seed, 7000 + index));
    std::vector<AngleSpec> out;
    for (const auto& a : scene.angles) {
        out.push_back(perturb_angle(a, cfg.noise_delta, rng));
    }
    return out;
}

SeparatorModel make_initial_model(const ExperimentConfig& cfg, const std::vector<TrainingScene>& scenes)
{
    const ModelShape shape = cfg.model_shape();
    SeparatorModel model(shape);
    model.parameters() = init_parameters(shape, derive_seed(cfg.seed, 1));
    const auto examples = make_examples(scenes, shape, 0);
    std::vector<const StackedMagnitude*> mags;
    for (const auto& ex : examples) {
        mags.push_back(&ex.mix_mag);
    }
    model.input_norm() = fit_input_norm(mags);
    return model;
}

TrainResult run_training(const ExperimentConfig& cfg, const std::vector<TrainingScene>& scenes)
{
    cfg.validate();
    return train(make_initial_model(cfg, scenes), scenes, cfg.train_config(), cfg.loss);
}

EvalReport evaluate_model(const SeparatorModel& model, const TrainingScene& scene,
                          const std::vector<AngleSpec>& angles)
{
    const auto estimates = separate(model, scene.mixed.mixture, angles);
    return evaluate_scene(estimates, scene.mixed.targets, scene.mixed.mixture, scene.labels);
}

nlohmann::json stem_spec_to_json(const ToyStemSpec& spec)
{
    nlohmann::json notes = nlohmann::json::array();
    for (const auto& n : spec.note_pattern) {
        notes.push_back({{"onset", n.onset}, {"duration", n.duration}, {"semitone", n.semitone}});
    }
    return {
        {"source_label", spec.source_label},
        {"fundamental", spec.fundamental},
        {"harmonic_weights", spec.harmonic_weights},
        {"envelope", {{"attack", spec.envelope.attack}, {"decay", spec.envelope.decay}}},
        {"note_pattern", notes},
        {"seed", spec.seed},
    };
}

ToyStemSpec stem_spec_from_json(const nlohmann::json& j)
{
    ToyStemSpec spec;
    spec.source_label = j.value("source_label", "");
    spec.fundamental = j.at("fundamental").get<double>();
    spec.harmonic_weights = j.at("harmonic_weights").get<std::vector<double>>();
    if (j.contains("envelope")) {
        spec.envelope.attack = j.at("envelope").value("attack", 0.0);
        spec.envelope.decay = j.at("envelope").value("decay", 0.0);
    }
    if (j.contains("note_pattern")) {
        for (const auto& n : j.at("note_pattern")) {
            spec.note_pattern.push_back(
                {n.at("onset").get<double>(), n.at("duration").get<double>(), n.value("semitone", 0.0)});
        }
    }
    spec.seed = j.value("seed", std::uint64_t{0});
    return spec;
}

nlohmann::json scene_to_json(const SceneDescription& scene)
{
    nlohmann::json stems = nlohmann::json::array();
    for (const auto& s : scene.stems) {
        nlohmann::json js = {{"label", s.label}, {"angle_degrees", s.angle_degrees}};
        if (s.stem_spec) {
            js["stem_spec"] = stem_spec_to_json(*s.stem_spec);
        }
        if (s.wav_path) {
            js["wav_path"] = s.wav_path->generic_string();
        }
        if (s.target_path) {
            js["target_path"] = s.target_path->generic_string();
        }
        stems.push_back(std::move(js));
    }
    nlohmann::json out = {{"sample_rate", scene.sample_rate}, {"duration", scene.duration}, {"stems", stems}};
    if (scene.task) {
        out["task"] = *scene.task;
    }
    if (scene.mixture_path) {
        out["mixture_path"] = scene.mixture_path->generic_string();
    }
    return out;
}

SceneDescription scene_from_json(const nlohmann::json& j)
{
    try {
        SceneDescription d;
        d.sample_rate = j.value("sample_rate", kDefaultSampleRate);
        d.duration = j.value("duration", 4.0);
        if (j.contains("task")) {
            d.task = j.at("task").get<std::string>();
        }
        if (j.contains("mixture_path")) {
            d.mixture_path = j.at("mixture_path").get<std::string>();
        }
        for (const auto& js : j.at("stems")) {
            StemDescription s;
            s.label = js.at("label").get<std::string>();
            s.angle_degrees = js.at("angle_degrees").get<double>();
            if (js.contains("stem_spec")) {
                s.stem_spec = stem_spec_from_json(js.at("stem_spec"));
            }
            if (js.contains("wav_path")) {
                s.wav_path = js.at("wav_path").get<std::string>();
            }
            if (js.contains("target_path")) {
                s.target_path = js.at("target_path").get<std::string>();
            }
            if (!s.stem_spec && !s.wav_path) {
                throw ConfigError("stem '" + s.label + "' needs stem_spec or wav_path");
            }
            d.stems.push_back(std::move(s));
        }
        return d;
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("malformed scene description: ") + ex.what());
    }
}

Scene build_scene(const SceneDescription& desc, const std::filesystem::path& base_dir)
{
    Scene scene;
    for (const auto& s : desc.stems) {
        MonoSignal signal;
        if (s.stem_spec) {
            signal = synth_stem(*s.stem_spec, desc.duration, desc.sample_rate);
        } else {
            const auto path = s.wav_path->is_absolute() ? *s.wav_path : base_dir / *s.wav_path;
            signal = wav::read_mono(path);
        }
        scene.stems.push_back({std::move(signal), AngleSpec(s.angle_degrees), s.label});
    }
    return scene;
}

} // namespace spatialsep

#include "spatialsep/scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace spatialsep {

MonoSignal synth_stem(const ToyStemSpec& spec, double duration, int sample_rate)
{
    if (!(duration > 0.0)) {
        throw ConfigError("duration must be positive");
    }
    if (!(spec.fundamental > 0.0)) {
        throw ConfigError("fundamental must be positive");
    }
    for (double w : spec.harmonic_weights) {
        if (!std::isfinite(w)) {
            throw ConfigError("harmonic weights must be finite");
        }
    }

    const auto length = static_cast<Eigen::Index>(std::llround(duration * sample_rate));
    Vector out = Vector::Zero(length);

    std::vector<Note> notes = spec.note_pattern;
    if (notes.empty()) {
        notes.push_back({0.0, duration, 0.0});
    }

    Rng rng(spec.seed);
    const double nyquist = 0.5 * sample_rate;
    const double dt = 1.0 / sample_rate;
    for (const Note& note : notes) {
        const double f0 = spec.fundamental * std::exp2(note.semitone / 12.0);
        std::vector<double> phases(spec.harmonic_weights.size());
        for (double& p : phases) {
            p = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        }
        const auto first = static_cast<Eigen::Index>(std::ceil(note.onset * sample_rate));
        const auto last = std::min<Eigen::Index>(
            length, static_cast<Eigen::Index>(std::ceil((note.onset + note.duration) * sample_rate)));
        for (Eigen::Index n = std::max<Eigen::Index>(first, 0); n < last; ++n) {
            const double tau = n * dt - note.onset;
            double env = 1.0;
            if (spec.envelope.attack > 0.0) {
                env *= std::min(1.0, tau / spec.envelope.attack);
            }
            if (spec.envelope.decay > 0.0) {
                env *= std::exp(-tau / spec.envelope.decay);
            }
            double value = 0.0;
            for (std::size_t h = 0; h < spec.harmonic_weights.size(); ++h) {
                const double freq = f0 * static_cast<double>(h + 1);
                if (freq >= nyquist) {
                    break;
                }
                value += spec.harmonic_weights[h]
                    * std::sin(2.0 * std::numbers::pi * freq * tau + phases[h]);
            }
            out[n] += env * value;
        }
    }

    const double peak = out.cwiseAbs().maxCoeff();
    if (peak > 0.0) {
        out *= 0.5 / peak;
    }
    return {std::move(out), sample_rate};
}

namespace {

struct Recipe {
    std::string_view name;
    double fundamental;
    std::vector<double> weights;
    Envelope envelope;
    std::vector<double> note_lengths;  // choices, seconds
    std::vector<double> scale;         // semitone choices
    double rest_probability;
};

const std::array<Recipe, 4>& recipes()
{
    static const std::array<Recipe, 4> table{{
        {"guitar", 196.0, {1.0, 0.7, 0.5, 0.35, 0.25, 0.18, 0.12, 0.08}, {0.004, 1.2},
         {0.25, 0.5, 0.75}, {0, 3, 5, 7, 10, 12, 15}, 0.05},
        {"strings", 392.0, {1.0, 0.5, 0.33, 0.25, 0.2, 0.17, 0.14, 0.12, 0.11, 0.1}, {0.12, 3.0},
         {0.75, 1.0, 1.5}, {0, 2, 4, 5, 7, 9}, 0.05},
        {"bass", 82.41, {1.0, 0.55, 0.3, 0.15}, {0.01, 0.35},
         {0.25, 0.5}, {0, 5, 7, 12}, 0.1},
        {"piano", 261.63, {1.0, 0.45, 0.3, 0.18, 0.1, 0.06}, {0.002, 0.25},
         {0.25, 0.5}, {0, 2, 4, 7, 9, 12}, 0.15},
    }};
    return table;
}

} // namespace

ToyStemSpec toy_recipe(std::string_view instrument, std::uint64_t seed, double duration)
{
    const auto& table = recipes();
    const auto it = std::find_if(table.begin(), table.end(),
                                 [&](const Recipe& r) { return r.name == instrument; });
    if (it == table.end()) {
        throw ConfigError("unknown toy instrument: " + std::string(instrument));
    }

    ToyStemSpec spec;
    spec.source_label = std::string(instrument);
    spec.fundamental = it->fundamental;
    spec.harmonic_weights = it->weights;
    spec.envelope = it->envelope;
    spec.seed = seed;

    Rng rng(derive_seed(seed, 1));
    double t = 0.0;
    while (t < duration) {
        const double len = it->note_lengths[uniform_index(rng, it->note_lengths.size())];
        const double semitone = it->scale[uniform_index(rng, it->scale.size())];
        if (uniform01(rng) >= it->rest_probability) {
            spec.note_pattern.push_back({t, len, semitone});
        }
        t += len;
    }
    return spec;
}

MixedScene mix_scene(const Scene& scene)
{
    if (scene.num_sources() < 2) {
        throw ConfigError("K ≥ 2 required");
    }
    const auto& first = scene.stems.front().signal;
    for (const auto& stem : scene.stems) {
        if (stem.signal.size() != first.size()) {
            throw ConfigError("scene stems differ in length");
        }
        if (stem.signal.sample_rate != first.sample_rate) {
            throw ConfigError("scene stems differ in sample rate");
        }
    }

    MixedScene out;
    Vector left = Vector::Zero(first.size());
    Vector right = Vector::Zero(first.size());
    for (const auto& stem : scene.stems) {
        StereoSignal image = pan(stem.signal, stem.angle);
        left += image.left;
        right += image.right;
        out.targets.push_back(std::move(image));
    }
    out.mixture = StereoSignal(std::move(left), std::move(right), first.sample_rate);
    return out;
}

std::vector<AngleSpec> random_angles(std::size_t count, Rng& rng, double min_separation)
{
    if (min_separation * static_cast<double>(count > 0 ? count - 1 : 0) > 2.0 * kMaxAngle) {
        throw ConfigError("angle separation cannot be satisfied on the panorama");
    }
    std::vector<AngleSpec> out;
    int rejections = 0;
    while (out.size() < count) {
        if (rejections > 1000) {
            // Early draws can leave no gap wide enough; start over.
            out.clear();
            rejections = 0;
        }
        const double candidate = uniform(rng, -kMaxAngle, kMaxAngle);
        const bool clear = std::all_of(out.begin(), out.end(), [&](const AngleSpec& a) {
            return std::abs(a.degrees() - candidate) >= min_separation;
        });
        if (clear) {
            out.emplace_back(candidate);
        } else {
            ++rejections;
        }
    }
    return out;
}

} // namespace spatialsep

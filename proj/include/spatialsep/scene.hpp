#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "spatialsep/panning.hpp"
#include "spatialsep/random.hpp"

namespace spatialsep {

struct Note {
    double onset = 0.0;     // seconds
    double duration = 0.0;  // seconds
    double semitone = 0.0;  // offset from the recipe fundamental
};

struct Envelope {
    double attack = 0.0;  // linear ramp length, seconds; 0 disables
    double decay = 0.0;   // exponential time constant, seconds; 0 disables
};

/// Recipe for a synthetic harmonic instrument. Instrument identity is the
/// harmonic recipe; two stems of the same class share a recipe and differ in
/// note pattern and seed.
struct ToyStemSpec {
    std::string source_label;
    double fundamental = 220.0;
    std::vector<double> harmonic_weights{1.0};
    Envelope envelope;
    /// Empty means one continuous note spanning the whole duration.
    std::vector<Note> note_pattern;
    std::uint64_t seed = 0;
};

/// Deterministic per seed. Harmonics above Nyquist are dropped and the
/// result is peak-normalised to 0.5 unless it is silent.
MonoSignal synth_stem(const ToyStemSpec& spec, double duration, int sample_rate = kDefaultSampleRate);

/// Built-in recipes: "guitar", "strings", "bass", "piano". The note pattern is
/// drawn from `seed` to fill `duration` seconds.
ToyStemSpec toy_recipe(std::string_view instrument, std::uint64_t seed, double duration);

struct SceneStem {
    MonoSignal signal;
    AngleSpec angle;
    std::string label;
};

struct Scene {
    std::vector<SceneStem> stems;

    std::size_t num_sources() const { return stems.size(); }
};

struct MixedScene {
    StereoSignal mixture;
    std::vector<StereoSignal> targets;
};

/// Pans every stem and sums the images. Targets come back in stem order.
MixedScene mix_scene(const Scene& scene);

/// K angles uniform on [-45, 45], pairwise at least `min_separation` apart.
std::vector<AngleSpec> random_angles(std::size_t count, Rng& rng, double min_separation = 10.0);

} // namespace spatialsep

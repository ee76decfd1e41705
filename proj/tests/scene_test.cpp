#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spatialsep/scene.hpp"

using namespace spatialsep;

TEST_CASE("zero weights give silence")
{
    ToyStemSpec spec;
    spec.harmonic_weights = {0.0, 0.0};
    const MonoSignal m = synth_stem(spec, 0.1, 8000);
    CHECK(m.size() == 800);
    CHECK(m.samples.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single harmonic is a pure sinusoid with peak 0.5")
{
    ToyStemSpec spec;
    spec.fundamental = 250.0;
    spec.harmonic_weights = {1.0};
    spec.seed = 3;
    const int sr = 16000;
    const MonoSignal m = synth_stem(spec, 0.5, sr);
    CHECK(m.samples.cwiseAbs().maxCoeff() == doctest::Approx(0.5));
    // Fit the phase from the first sample pair and compare everywhere.
    const double w = 2.0 * std::numbers::pi * 250.0 / sr;
    const double a = m.samples[0];
    const double b = (m.samples[1] - a * std::cos(w)) / std::sin(w);
    double worst = 0.0;
    for (Eigen::Index n = 0; n < m.size(); ++n) {
        worst = std::max(worst, std::abs(m.samples[n] - (a * std::cos(w * n) + b * std::sin(w * n))));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("synthesis is deterministic per seed")
{
    const ToyStemSpec spec = toy_recipe("guitar", 42, 1.0);
    const MonoSignal a = synth_stem(spec, 1.0);
    const MonoSignal b = synth_stem(spec, 1.0);
    CHECK(a.samples == b.samples);

    const MonoSignal c = synth_stem(toy_recipe("guitar", 43, 1.0), 1.0);
    CHECK(a.samples != c.samples);
}

TEST_CASE("harmonics above Nyquist are dropped")
{
    ToyStemSpec spec;
    spec.fundamental = 3000.0;
    spec.harmonic_weights = {1.0, 1.0, 1.0};
    const MonoSignal m = synth_stem(spec, 0.05, 8000);
    ToyStemSpec single = spec;
    single.harmonic_weights = {1.0};
    const MonoSignal s = synth_stem(single, 0.05, 8000);
    // Phases come from the same seed stream; only the first draw is used by both.
    CHECK((m.samples - s.samples).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("invalid specs")
{
    ToyStemSpec spec;
    CHECK_THROWS_AS(synth_stem(spec, 0.0), ConfigError);
    spec.fundamental = -1.0;
    CHECK_THROWS_AS(synth_stem(spec, 1.0), ConfigError);
    spec.fundamental = 100.0;
    spec.harmonic_weights = {std::nan("")};
    CHECK_THROWS_AS(synth_stem(spec, 1.0), ConfigError);
    CHECK_THROWS_AS(toy_recipe("kazoo", 1, 1.0), ConfigError);
}

TEST_CASE("same-recipe stems share harmonics but differ in notes")
{
    const ToyStemSpec a = toy_recipe("guitar", 1, 2.0);
    const ToyStemSpec b = toy_recipe("guitar", 2, 2.0);
    CHECK(a.harmonic_weights == b.harmonic_weights);
    CHECK(a.fundamental == b.fundamental);
    bool differ = a.note_pattern.size() != b.note_pattern.size();
    for (std::size_t i = 0; !differ && i < a.note_pattern.size(); ++i) {
        differ = a.note_pattern[i].semitone != b.note_pattern[i].semitone
            || a.note_pattern[i].onset != b.note_pattern[i].onset;
    }
    CHECK(differ);
    for (const char* name : {"guitar", "strings", "bass", "piano"}) {
        const MonoSignal m = synth_stem(toy_recipe(name, 5, 1.0), 1.0);
        CHECK(m.samples.cwiseAbs().maxCoeff() == doctest::Approx(0.5));
    }
}

TEST_CASE("hard-panned identical stems fill one channel each")
{
    const MonoSignal m = synth_stem(toy_recipe("piano", 9, 0.5), 0.5);
    Scene scene{{{m, AngleSpec(45.0), "a"}, {m, AngleSpec(-45.0), "b"}}};
    const MixedScene mixed = mix_scene(scene);
    CHECK((mixed.mixture.left - m.samples).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((mixed.mixture.right - m.samples).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("mixture equals the sum of targets")
{
    Scene scene;
    const char* names[] = {"guitar", "strings", "bass", "piano"};
    const double angles[] = {-30.0, -10.0, 0.0, 30.0};
    for (int k = 0; k < 4; ++k) {
        scene.stems.push_back({synth_stem(toy_recipe(names[k], 10 + k, 1.0), 1.0), AngleSpec(angles[k]), names[k]});
    }
    const MixedScene mixed = mix_scene(scene);
    REQUIRE(mixed.targets.size() == 4);
    Vector l = Vector::Zero(mixed.mixture.size());
    Vector r = l;
    for (const auto& t : mixed.targets) {
        l += t.left;
        r += t.right;
    }
    CHECK(l == mixed.mixture.left);
    CHECK(r == mixed.mixture.right);
    CHECK(std::abs(estimate_angle(mixed.targets[0]).degrees() + 30.0) < 1e-6);
}

TEST_CASE("mixing preconditions")
{
    const MonoSignal m(Vector::Ones(10), 16000);
    Scene one{{{m, AngleSpec(0.0), "solo"}}};
    CHECK_THROWS_WITH_AS(mix_scene(one), "K ≥ 2 required", ConfigError);

    Scene uneven{{{m, AngleSpec(0.0), "a"}, {MonoSignal(Vector::Ones(11), 16000), AngleSpec(0.0), "b"}}};
    CHECK_THROWS_AS(mix_scene(uneven), ConfigError);

    Scene rates{{{m, AngleSpec(0.0), "a"}, {MonoSignal(Vector::Ones(10), 8000), AngleSpec(0.0), "b"}}};
    CHECK_THROWS_AS(mix_scene(rates), ConfigError);
}

TEST_CASE("random angles respect panorama and separation")
{
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const auto angles = random_angles(4, rng);
        REQUIRE(angles.size() == 4);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(std::abs(angles[i].degrees()) <= 45.0);
            for (std::size_t j = i + 1; j < 4; ++j) {
                CHECK(std::abs(angles[i].degrees() - angles[j].degrees()) >= 10.0);
            }
        }
    }
    CHECK_THROWS_AS(random_angles(20, rng), ConfigError);
}
